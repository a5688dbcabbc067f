#include <Eigen/Dense>
#include <cmath>

#include "em_internal.hpp"
#include "tcclust/error.hpp"
#include "tcclust/mixture.hpp"
#include "tcclust/spline.hpp"

namespace tcclust {

namespace {

struct FcmState {
    Eigen::VectorXd weights;  // K
    Eigen::MatrixXd eta;      // q x K cluster coefficient vectors lambda0 + Lambda alpha_k
    Eigen::VectorXd d_diag;   // q
    double sigma2 = 1.0;
};

struct FitAbort {};

// Weighted affine rank-h fit to the unconstrained cluster coefficients in
// the S'S metric; exact M-step over the reduced-rank mean family.
Eigen::MatrixXd reduce_rank(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& mass, int h,
                            const Eigen::LLT<Eigen::MatrixXd>& gram_chol) {
    const auto k = static_cast<int>(gamma.cols());
    if (h >= k - 1) return gamma;  // affine span of K points has dim <= K-1

    const Eigen::MatrixXd lt = gram_chol.matrixL().transpose();
    Eigen::MatrixXd tilted = lt * gamma;  // q x K
    const double total = mass.sum();
    const Eigen::VectorXd center = tilted * mass / total;
    Eigen::MatrixXd spread = tilted.colwise() - center;
    Eigen::MatrixXd weighted = spread;
    for (int c = 0; c < k; ++c) weighted.col(c) *= std::sqrt(mass(c));

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted, Eigen::ComputeThinU);
    const Eigen::MatrixXd uh = svd.matrixU().leftCols(h);
    Eigen::MatrixXd fitted = (uh * (uh.transpose() * spread)).colwise() + center;
    return lt.template triangularView<Eigen::Upper>().solve(fitted);
}

} // namespace

MixtureFit fit_fcm(const TimeCourseMatrix& data, const FcmSpec& spec, Seed seed) {
    const Eigen::MatrixXd& values = data.values();
    const Eigen::Index p = values.rows();
    const Eigen::Index m = values.cols();
    if (spec.k < 1) throw ValidationError("K must be positive");
    if (p <= spec.k) throw ValidationError("need more genes than clusters");
    if (spec.tol <= 0.0) throw ValidationError("tol must be positive");

    const int q = spec.basis_size > 0
                      ? spec.basis_size
                      : std::max<int>(4, std::min<int>(static_cast<int>(m) - 2, 8));
    if (q < 4) throw ValidationError("basis size must be at least 4");
    if (static_cast<Eigen::Index>(q) > m) throw ValidationError("basis exceeds observations (need m >= q)");
    const int h = spec.reduced_dim > 0 ? spec.reduced_dim : std::min(q, spec.k - 1);
    if (h < 1) throw ValidationError("reduced dimension h must be >= 1");
    if (h > std::min(q, spec.k - 1)) throw ValidationError("h must satisfy h <= min(q, K-1)");

    const auto& grid = data.grid();
    const BSplineBasis basis = BSplineBasis::uniform(grid.points().front(), grid.points().back(), q);
    const Eigen::MatrixXd design = basis.design(grid.points());  // m x q
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::LLT<Eigen::MatrixXd> gram_chol(gram);
    if (gram_chol.info() != Eigen::Success) throw FitError("fcm: singular basis gram matrix");

    const Eigen::MatrixXd coeffs = gram_chol.solve(design.transpose() * values.transpose()).transpose();  // p x q
    const Eigen::MatrixXd fitted_rows = coeffs * design.transpose();
    const double resid_var = (values - fitted_rows).array().square().mean();
    const double total_var = (values.array() - values.mean()).square().mean();
    const double sigma2_floor = std::max(1e-10, 1e-8 * total_var);
    const auto md = static_cast<double>(m);
    const Rng master = Rng(seed).substream(0x66u);

    MixtureFit best;
    bool have_best = false;

    for (int restart = 0; restart < spec.n_restarts; ++restart) {
        Rng rng = master.substream(static_cast<std::uint64_t>(restart));
        try {
            Eigen::MatrixXd resp = restart == 0 ? em::one_hot(em::farthest_point_labels(coeffs, spec.k, rng), spec.k)
                                                : em::random_responsibilities(p, spec.k, rng);

            FcmState state;
            state.sigma2 = std::max(resid_var, std::max(0.05 * total_var, sigma2_floor));
            state.d_diag = Eigen::VectorXd::Constant(q, std::max(0.1 * total_var, 1e-4));
            state.weights = resp.colwise().sum() / static_cast<double>(p);
            {
                Eigen::MatrixXd gamma(q, spec.k);
                const Eigen::VectorXd mass = resp.colwise().sum();
                for (int c = 0; c < spec.k; ++c)
                    gamma.col(c) = (coeffs.transpose() * resp.col(c)) / mass(c);
                state.eta = reduce_rank(gamma, mass, h, gram_chol);
            }

            std::vector<double> trace;
            double previous = -std::numeric_limits<double>::infinity();
            double loglik = previous;
            bool did_converge = false;
            int rescues = 0;
            int iter = 0;

            for (; iter < spec.max_iter; ++iter) {
                // marginal covariance sigma^2 I + S D S', shared by all clusters
                Eigen::MatrixXd marginal = design * state.d_diag.asDiagonal() * design.transpose();
                marginal.diagonal().array() += state.sigma2;
                const Eigen::LLT<Eigen::MatrixXd> chol(marginal);
                if (chol.info() != Eigen::Success) throw FitAbort{};
                double log_det = 0.0;
                for (Eigen::Index j = 0; j < m; ++j) log_det += 2.0 * std::log(chol.matrixL()(j, j));

                const Eigen::MatrixXd means = design * state.eta;            // m x K
                const Eigen::MatrixXd white_data = chol.matrixL().solve(values.transpose());  // m x p
                const Eigen::MatrixXd white_means = chol.matrixL().solve(means);              // m x K
                const double base = -0.5 * (md * std::log(em::kTwoPi) + log_det);

                Eigen::MatrixXd log_joint(p, spec.k);
                for (int c = 0; c < spec.k; ++c) {
                    const double log_weight = std::log(state.weights(c));
                    for (Eigen::Index i = 0; i < p; ++i)
                        log_joint(i, c) =
                            log_weight + base - 0.5 * (white_data.col(i) - white_means.col(c)).squaredNorm();
                }
                loglik = em::responsibilities_from_log(log_joint, resp);
                if (!std::isfinite(loglik)) throw FitAbort{};

                bool rescued = false;
                for (int c = 0; c < spec.k; ++c) {
                    if (resp.col(c).sum() < 1.0) {
                        if (++rescues > 10) throw FitAbort{};
                        const Eigen::Index worst = em::worst_fit_gene(log_joint);
                        state.eta.col(c) = coeffs.row(worst).transpose();
                        for (Eigen::Index i = 0; i < p; ++i) resp(i, c) = 0.0;
                        resp(worst, c) = 1.0;
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
                        break;
                    }
                    previous = loglik;
                }

                // posterior moments of the random coefficients:
                //   bhat_ik = D S' Sigma^-1 (y_i - S eta_k),  V = D - D S' Sigma^-1 S D
                const Eigen::MatrixXd sol_design = chol.solve(design);  // Sigma^-1 S, m x q
                const Eigen::MatrixXd projector = state.d_diag.asDiagonal() * sol_design.transpose();  // q x m
                const Eigen::MatrixXd post_var =
                    Eigen::MatrixXd(state.d_diag.asDiagonal()) - projector * design * state.d_diag.asDiagonal();
                const Eigen::MatrixXd bhat_data = projector * values.transpose();  // q x p
                const Eigen::MatrixXd bhat_mean = projector * means;               // q x K

                const Eigen::VectorXd mass = resp.colwise().sum();
                state.weights = mass / static_cast<double>(p);

                // unconstrained cluster coefficients from intercept-corrected rows
                Eigen::MatrixXd gamma(q, spec.k);
                for (int c = 0; c < spec.k; ++c) {
                    const Eigen::VectorXd weighted_row = (resp.col(c).transpose() * values).transpose();  // m
                    const Eigen::VectorXd weighted_b = bhat_data * resp.col(c) - mass(c) * bhat_mean.col(c);
                    const Eigen::VectorXd target = weighted_row - design * weighted_b;
                    gamma.col(c) = gram_chol.solve(design.transpose() * target) / mass(c);
                }
                state.eta = reduce_rank(gamma, mass, h, gram_chol);

                // variance updates from the same posterior moments
                const Eigen::MatrixXd new_means = design * state.eta;
                Eigen::VectorXd d_acc = Eigen::VectorXd::Zero(q);
                double s_acc = 0.0;
                const double trace_term = (post_var * gram).trace();
                const Eigen::VectorXd row_norm2 = values.rowwise().squaredNorm();
                const Eigen::MatrixXd data_design = values * design;  // p x q
                for (int c = 0; c < spec.k; ++c) {
                    for (Eigen::Index i = 0; i < p; ++i) {
                        const double r = resp(i, c);
                        if (r <= 0.0) continue;
                        const Eigen::VectorXd b = bhat_data.col(i) - bhat_mean.col(c);
                        d_acc += r * b.cwiseAbs2();
                        const Eigen::VectorXd combined = state.eta.col(c) + b;
                        const double sq = row_norm2(i) - 2.0 * data_design.row(i).dot(combined) +
                                          combined.dot(gram * combined);
                        s_acc += r * (sq + trace_term);
                    }
                }
                state.d_diag = (d_acc / static_cast<double>(p)).array() + post_var.diagonal().array();
                state.d_diag = state.d_diag.cwiseMax(0.0);
                state.sigma2 = std::max(s_acc / (md * static_cast<double>(p)), sigma2_floor);
            }

            // final E-step against the last parameters
            Eigen::MatrixXd marginal = design * state.d_diag.asDiagonal() * design.transpose();
            marginal.diagonal().array() += state.sigma2;
            const Eigen::LLT<Eigen::MatrixXd> chol(marginal);
            if (chol.info() != Eigen::Success) throw FitAbort{};
            double log_det = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) log_det += 2.0 * std::log(chol.matrixL()(j, j));
            const Eigen::MatrixXd means = design * state.eta;
            const Eigen::MatrixXd white_data = chol.matrixL().solve(values.transpose());
            const Eigen::MatrixXd white_means = chol.matrixL().solve(means);
            const double base = -0.5 * (md * std::log(em::kTwoPi) + log_det);
            Eigen::MatrixXd log_joint(p, spec.k);
            for (int c = 0; c < spec.k; ++c)
                for (Eigen::Index i = 0; i < p; ++i)
                    log_joint(i, c) = std::log(state.weights(c)) + base -
                                      0.5 * (white_data.col(i) - white_means.col(c)).squaredNorm();
            loglik = em::responsibilities_from_log(log_joint, resp);
            if (!std::isfinite(loglik)) throw FitAbort{};
            if (trace.empty() || loglik != trace.back()) trace.push_back(loglik);

            // canonical identifiable form: sum_k alpha_k = 0, Lambda'Lambda = I
            const Eigen::VectorXd lambda0 = state.eta.rowwise().mean();
            const Eigen::MatrixXd centered = state.eta.colwise() - lambda0;
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullU);
            const Eigen::MatrixXd transition = svd.matrixU().leftCols(h);  // orthonormal columns
            const Eigen::MatrixXd alphas = transition.transpose() * centered;  // h x K, columns sum to 0

            MixtureFit fit;
            fit.method = "fcm";
            fit.model_label = "reduced-rank";
            fit.weights = state.weights;
            fit.mean_curves = means.transpose();
            fit.log_likelihood = loglik;
            fit.free_parameters = q + (q * h - h * (h + 1) / 2.0) + (spec.k - 1) * h + q + 1 + (spec.k - 1);
            fit.bic = -2.0 * loglik + fit.free_parameters * std::log(static_cast<double>(p));
            fit.posteriors = resp;
            fit.iterations = iter;
            fit.converged = did_converge;
            fit.rescues = rescues;
            fit.objective_trace = std::move(trace);
            FcmParams params;
            params.lambda0 = lambda0;
            params.transition = transition;
            params.alphas = alphas;
            params.d_diag = state.d_diag;
            params.sigma2 = state.sigma2;
            params.basis_size = q;
            params.reduced_dim = h;
            fit.fcm = std::move(params);

            if (!have_best || fit.log_likelihood > best.log_likelihood) {
                best = std::move(fit);
                have_best = true;
            }
        } catch (const FitAbort&) {
            // restart failed; try the next one
        }
    }

    if (!have_best) throw FitError("fcm: every EM restart failed");
    return best;
}

} // namespace tcclust
