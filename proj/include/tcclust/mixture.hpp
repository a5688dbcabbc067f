#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcclust/rng.hpp"
#include "tcclust/types.hpp"

namespace tcclust {

/// Covariance structures for the location-scale mixture. A restricted subset
/// of the usual geometric family: spherical / diagonal / full, shared or
/// cluster-specific.
enum class GmmCovarianceModel {
    SphericalEqual,
    SphericalVarying,
    DiagonalEqual,
    DiagonalVarying,
    FullVarying,
};

std::string to_string(GmmCovarianceModel model);
GmmCovarianceModel gmm_model_from_string(const std::string& name);

struct GmmSpec {
    int k = 5;
    GmmCovarianceModel covariance_model = GmmCovarianceModel::DiagonalVarying;
    int max_iter = 500;
    double tol = 1e-6;     // relative log-likelihood change
    int n_restarts = 10;
};

/// Random-intercept mixture: cluster-specific penalized-spline mean curves,
/// gene-level intercept b_i ~ N(0, sigma_bk^2), iid errors. Marginal
/// covariance sigma_bk^2 11' + sigma^2 I is handled via its rank-1 structure.
struct MfdaSpec {
    int k = 5;
    int basis_size = 0;          // q_m; 0 picks max(4, min(m, 12))
    double penalty_lambda = 1.0; // roughness penalty on each mean curve
    int max_iter = 500;
    double tol = 1e-6;
    int n_restarts = 10;
};

/// Functional clustering model: cluster means S(lambda0 + Lambda alpha_k)
/// over a spline basis with a rank-h cluster subspace, gene-level random
/// coefficients b_i ~ N_q(0, D) with diagonal D, marginal covariance
/// sigma^2 I + S D S'.
struct FcmSpec {
    int k = 5;
    int basis_size = 0;   // q; 0 picks max(4, min(m - 2, 8)); requires m >= q
    int reduced_dim = 0;  // h; 0 picks min(q, k - 1)
    int max_iter = 500;
    double tol = 1e-6;
    int n_restarts = 10;
};

struct GmmParams {
    GmmCovarianceModel model;
    std::vector<Eigen::VectorXd> diag_variances;  // per-cluster diagonal (all but full)
    std::vector<Eigen::MatrixXd> covariances;     // full model only
};

struct MfdaParams {
    Eigen::VectorXd sigma_b2;  // per-cluster intercept variance
    double sigma2 = 0.0;
    double penalty_lambda = 0.0;
    int basis_size = 0;
    Eigen::MatrixXd basis_coefficients;  // K x q
};

struct FcmParams {
    Eigen::VectorXd lambda0;   // q
    Eigen::MatrixXd transition;  // q x h, orthonormal columns
    Eigen::MatrixXd alphas;    // h x K, columns sum to zero
    Eigen::VectorXd d_diag;    // q
    double sigma2 = 0.0;
    int basis_size = 0;
    int reduced_dim = 0;
};

/// A fitted mixture. `objective_trace` records the EM objective per
/// iteration of the winning restart (observed log-likelihood; the penalized
/// log-likelihood for MFDA) and restarts from scratch after a degenerate-
/// component rescue. `log_likelihood` is always the unpenalized observed
/// value used by BIC.
struct MixtureFit {
    std::string method;
    std::string model_label;
    Eigen::VectorXd weights;      // K, sums to 1
    Eigen::MatrixXd mean_curves;  // K x m
    double log_likelihood = 0.0;
    double free_parameters = 0.0; // effective count for penalized means
    double bic = 0.0;
    Eigen::MatrixXd posteriors;   // p x K responsibilities at the final parameters
    int iterations = 0;
    bool converged = false;
    int rescues = 0;
    std::vector<double> objective_trace;
    std::optional<GmmParams> gmm;
    std::optional<MfdaParams> mfda;
    std::optional<FcmParams> fcm;
};

MixtureFit fit_gmm(const TimeCourseMatrix& data, const GmmSpec& spec, Seed seed);
MixtureFit fit_mfda(const TimeCourseMatrix& data, const MfdaSpec& spec, Seed seed);
MixtureFit fit_fcm(const TimeCourseMatrix& data, const FcmSpec& spec, Seed seed);

/// Hard assignment by posterior argmax (ties to the lowest cluster index).
/// Components that win no gene are dropped: labels are compacted in
/// ascending component order and the retained posterior columns are
/// renormalized; `components_dropped` reports how many were removed.
Partition posterior_assign(const MixtureFit& fit, int* components_dropped = nullptr);

struct BicEntry {
    int k = 0;
    std::string model;
    double log_likelihood = 0.0;
    double free_parameters = 0.0;
    double bic = 0.0;
    bool converged = false;
    bool ok = false;
    std::string error;
};

struct BicSelection {
    MixtureFit best;
    std::vector<BicEntry> table;
};

/// Fits every K in k_range (and every covariance model for the GMM family)
/// and returns the lowest-BIC fit with the full table. Individual fit
/// failures are recorded and skipped; throws FitError if every fit fails.
BicSelection select_k_bic(const TimeCourseMatrix& data, const GmmSpec& base, const std::vector<int>& k_range,
                          Seed seed);
BicSelection select_k_bic(const TimeCourseMatrix& data, const MfdaSpec& base, const std::vector<int>& k_range,
                          Seed seed);
BicSelection select_k_bic(const TimeCourseMatrix& data, const FcmSpec& base, const std::vector<int>& k_range,
                          Seed seed);

/// BIC over the covariance-model subset at a single fixed K.
BicSelection select_gmm_model_bic(const TimeCourseMatrix& data, const GmmSpec& base, Seed seed);

} // namespace tcclust
