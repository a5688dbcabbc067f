#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "em_internal.hpp"
#include "tcclust/error.hpp"
#include "tcclust/mixture.hpp"

namespace tcclust {

std::string to_string(GmmCovarianceModel model) {
    switch (model) {
    case GmmCovarianceModel::SphericalEqual: return "spherical-equal";
    case GmmCovarianceModel::SphericalVarying: return "spherical-varying";
    case GmmCovarianceModel::DiagonalEqual: return "diagonal-equal";
    case GmmCovarianceModel::DiagonalVarying: return "diagonal-varying";
    default: return "full-varying";
    }
}

GmmCovarianceModel gmm_model_from_string(const std::string& name) {
    if (name == "spherical-equal") return GmmCovarianceModel::SphericalEqual;
    if (name == "spherical-varying") return GmmCovarianceModel::SphericalVarying;
    if (name == "diagonal-equal") return GmmCovarianceModel::DiagonalEqual;
    if (name == "diagonal-varying") return GmmCovarianceModel::DiagonalVarying;
    if (name == "full-varying") return GmmCovarianceModel::FullVarying;
    throw ValidationError("unknown covariance model '" + name + "'");
}

namespace {

struct GmmState {
    Eigen::VectorXd weights;                   // K
    Eigen::MatrixXd means;                     // K x m
    std::vector<Eigen::VectorXd> diag_vars;    // K x m diagonals (all but full)
    std::vector<Eigen::MatrixXd> full_covs;    // full model
    std::vector<Eigen::LLT<Eigen::MatrixXd>> full_chol;
};

struct CollapseError {};

// Weighted M-step; throws CollapseError when a covariance degenerates below
// the floor and ridge regularization is disabled for this attempt.
void m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp, GmmCovarianceModel model,
            double var_floor, bool ridge, GmmState& state) {
    const Eigen::Index p = data.rows();
    const Eigen::Index m = data.cols();
    const auto k = static_cast<int>(resp.cols());

    const Eigen::VectorXd mass = resp.colwise().sum();
    state.weights = mass / static_cast<double>(p);
    state.means = (resp.transpose() * data).array().colwise() / mass.array();

    const auto clamp_var = [&](double v) {
        if (v >= var_floor) return v;
        if (ridge) return var_floor;
        throw CollapseError{};
    };

    switch (model) {
    case GmmCovarianceModel::DiagonalVarying:
    case GmmCovarianceModel::SphericalVarying: {
        state.diag_vars.assign(static_cast<std::size_t>(k), Eigen::VectorXd());
        for (int c = 0; c < k; ++c) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
            for (Eigen::Index i = 0; i < p; ++i) {
                const Eigen::VectorXd d = (data.row(i) - state.means.row(c)).transpose();
                acc += resp(i, c) * d.cwiseProduct(d);
            }
            acc /= mass(c);
            if (model == GmmCovarianceModel::SphericalVarying)
                acc.setConstant(clamp_var(acc.mean()));
            else
                for (Eigen::Index j = 0; j < m; ++j) acc(j) = clamp_var(acc(j));
            state.diag_vars[static_cast<std::size_t>(c)] = acc;
        }
        break;
    }
    case GmmCovarianceModel::DiagonalEqual:
    case GmmCovarianceModel::SphericalEqual: {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (int c = 0; c < k; ++c)
            for (Eigen::Index i = 0; i < p; ++i) {
                const Eigen::VectorXd d = (data.row(i) - state.means.row(c)).transpose();
                acc += resp(i, c) * d.cwiseProduct(d);
            }
        acc /= static_cast<double>(p);
        if (model == GmmCovarianceModel::SphericalEqual)
            acc.setConstant(clamp_var(acc.mean()));
        else
            for (Eigen::Index j = 0; j < m; ++j) acc(j) = clamp_var(acc(j));
        state.diag_vars.assign(static_cast<std::size_t>(k), acc);
        break;
    }
    case GmmCovarianceModel::FullVarying: {
        state.full_covs.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
        state.full_chol.assign(static_cast<std::size_t>(k), Eigen::LLT<Eigen::MatrixXd>());
        for (int c = 0; c < k; ++c) {
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
            for (Eigen::Index i = 0; i < p; ++i) {
                const Eigen::VectorXd d = (data.row(i) - state.means.row(c)).transpose();
                cov.noalias() += resp(i, c) * d * d.transpose();
            }
            cov /= mass(c);
            if (ridge) cov.diagonal().array() += var_floor;
            Eigen::LLT<Eigen::MatrixXd> chol(cov);
            if (chol.info() != Eigen::Success) throw CollapseError{};
            // determinant floor check through the Cholesky diagonal
            double log_det = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) log_det += 2.0 * std::log(chol.matrixL()(j, j));
            if (log_det < static_cast<double>(m) * std::log(var_floor)) throw CollapseError{};
            state.full_covs[static_cast<std::size_t>(c)] = std::move(cov);
            state.full_chol[static_cast<std::size_t>(c)] = std::move(chol);
        }
        break;
    }
    }
}

// log N(y_i; mu_k, Sigma_k) + log pi_k for all genes and components
Eigen::MatrixXd log_joint_matrix(const Eigen::MatrixXd& data, GmmCovarianceModel model, const GmmState& state) {
    const Eigen::Index p = data.rows();
    const Eigen::Index m = data.cols();
    const auto k = static_cast<int>(state.weights.size());
    Eigen::MatrixXd log_joint(p, k);

    for (int c = 0; c < k; ++c) {
        const double log_weight = std::log(state.weights(c));
        if (model == GmmCovarianceModel::FullVarying) {
            const auto& chol = state.full_chol[static_cast<std::size_t>(c)];
            double log_det = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) log_det += 2.0 * std::log(chol.matrixL()(j, j));
            const double base = -0.5 * (static_cast<double>(m) * std::log(em::kTwoPi) + log_det);
            for (Eigen::Index i = 0; i < p; ++i) {
                const Eigen::VectorXd d = (data.row(i) - state.means.row(c)).transpose();
                const Eigen::VectorXd w = chol.matrixL().solve(d);
                log_joint(i, c) = log_weight + base - 0.5 * w.squaredNorm();
            }
        } else {
            const Eigen::VectorXd& var = state.diag_vars[static_cast<std::size_t>(c)];
            const double base =
                -0.5 * (static_cast<double>(m) * std::log(em::kTwoPi) + var.array().log().sum());
            const Eigen::VectorXd inv = var.cwiseInverse();
            for (Eigen::Index i = 0; i < p; ++i) {
                const Eigen::VectorXd d = (data.row(i) - state.means.row(c)).transpose();
                log_joint(i, c) = log_weight + base - 0.5 * d.cwiseProduct(d).dot(inv);
            }
        }
    }
    return log_joint;
}

double count_free_parameters(GmmCovarianceModel model, int k, Eigen::Index m) {
    const auto md = static_cast<double>(m);
    const double mean_and_weights = k * md + (k - 1);
    switch (model) {
    case GmmCovarianceModel::SphericalEqual: return mean_and_weights + 1;
    case GmmCovarianceModel::SphericalVarying: return mean_and_weights + k;
    case GmmCovarianceModel::DiagonalEqual: return mean_and_weights + md;
    case GmmCovarianceModel::DiagonalVarying: return mean_and_weights + k * md;
    default: return mean_and_weights + k * md * (md + 1) / 2.0;
    }
}

} // namespace

MixtureFit fit_gmm(const TimeCourseMatrix& data, const GmmSpec& spec, Seed seed) {
    const Eigen::MatrixXd& values = data.values();
    const Eigen::Index p = values.rows();
    const Eigen::Index m = values.cols();
    if (spec.k < 1) throw ValidationError("K must be positive");
    if (p <= spec.k) throw ValidationError("need more genes than clusters");
    if (spec.tol <= 0.0) throw ValidationError("tol must be positive");

    const double total_var = (values.array() - values.mean()).square().mean();
    const double var_floor = std::max(1e-12, 1e-10 * total_var);
    const Rng master = Rng(seed).substream(0x67u);

    MixtureFit best;
    bool have_best = false;
    int failed_restarts = 0;

    for (int restart = 0; restart < spec.n_restarts; ++restart) {
        Rng rng = master.substream(static_cast<std::uint64_t>(restart));
        for (int attempt = 0; attempt < 2; ++attempt) {
            const bool ridge = attempt == 1;  // second pass regularizes
            try {
                Eigen::MatrixXd resp = restart == 0 ? em::one_hot(em::farthest_point_labels(values, spec.k, rng), spec.k)
                                                    : em::random_responsibilities(p, spec.k, rng);
                GmmState state;
                m_step(values, resp, spec.covariance_model, var_floor, ridge, state);

                std::vector<double> trace;
                double previous = -std::numeric_limits<double>::infinity();
                bool did_converge = false;
                int rescues = 0;
                int iter = 0;
                for (; iter < spec.max_iter; ++iter) {
                    Eigen::MatrixXd log_joint = log_joint_matrix(values, spec.covariance_model, state);
                    const double loglik = em::responsibilities_from_log(log_joint, resp);
                    if (!std::isfinite(loglik)) throw CollapseError{};

                    // degenerate component: re-seed it from the worst-fit gene
                    bool rescued = false;
                    for (int c = 0; c < spec.k; ++c) {
                        if (resp.col(c).sum() < 1.0) {
                            if (++rescues > 10) throw CollapseError{};
                            const Eigen::Index worst = em::worst_fit_gene(log_joint);
                            state.means.row(c) = values.row(worst);
                            for (Eigen::Index i = 0; i < p; ++i) resp(i, c) = 0.0;
                            resp(worst, Eigen::Index(c)) = 1.0;
                            for (Eigen::Index i = 0; i < p; ++i) resp.row(i) /= resp.row(i).sum();
                            trace.clear();
                            previous = -std::numeric_limits<double>::infinity();
                            rescued = true;
                            break;
                        }
                    }
                    if (!rescued) {
                        trace.push_back(loglik);
                        if (em::converged(loglik, previous, spec.tol)) {
                            did_converge = true;
                            m_step(values, resp, spec.covariance_model, var_floor, ridge, state);
                            break;
                        }
                        previous = loglik;
                    }
                    m_step(values, resp, spec.covariance_model, var_floor, ridge, state);
                }

                // final E-step so posteriors and loglik match the last parameters
                Eigen::MatrixXd log_joint = log_joint_matrix(values, spec.covariance_model, state);
                const double loglik = em::responsibilities_from_log(log_joint, resp);
                if (!std::isfinite(loglik)) throw CollapseError{};
                trace.push_back(loglik);

                MixtureFit fit;
                fit.method = "gmm";
                fit.model_label = to_string(spec.covariance_model);
                fit.weights = state.weights;
                fit.mean_curves = state.means;
                fit.log_likelihood = loglik;
                fit.free_parameters = count_free_parameters(spec.covariance_model, spec.k, m);
                fit.bic = -2.0 * loglik + fit.free_parameters * std::log(static_cast<double>(p));
                fit.posteriors = resp;
                fit.iterations = iter;
                fit.converged = did_converge;
                fit.rescues = rescues;
                fit.objective_trace = std::move(trace);
                GmmParams params;
                params.model = spec.covariance_model;
                params.diag_variances = state.diag_vars;
                params.covariances = state.full_covs;
                fit.gmm = std::move(params);

                if (!have_best || fit.log_likelihood > best.log_likelihood) {
                    best = std::move(fit);
                    have_best = true;
                }
                break;  // restart succeeded
            } catch (const CollapseError&) {
                if (attempt == 1) ++failed_restarts;
            }
        }
    }

    if (!have_best) throw FitError("gmm: covariance collapsed in every restart (model " +
                                   to_string(spec.covariance_model) + ")");
    return best;
}

} // namespace tcclust
