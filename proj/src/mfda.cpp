#include <Eigen/Dense>
#include <cmath>

#include "em_internal.hpp"
#include "tcclust/error.hpp"
#include "tcclust/mixture.hpp"
#include "tcclust/spline.hpp"

namespace tcclust {

namespace {

struct MfdaState {
    Eigen::VectorXd weights;   // K
    Eigen::MatrixXd theta;     // K x q basis coefficients
    Eigen::MatrixXd means;     // K x m
    Eigen::VectorXd sigma_b2;  // K
    double sigma2 = 1.0;
};

struct FitAbort {};

// Per-(gene, cluster) compound-symmetry log density pieces, O(m) per pair
// through the rank-1 (Woodbury) structure of sigma_b^2 11' + sigma^2 I.
struct CsPieces {
    Eigen::MatrixXd sq_dist;   // p x K: ||y_i - mu_k||^2
    Eigen::MatrixXd ones_dot;  // p x K: 1'(y_i - mu_k)
};

CsPieces residual_pieces(const Eigen::MatrixXd& data, const Eigen::MatrixXd& means) {
    const Eigen::Index p = data.rows();
    const auto k = static_cast<int>(means.rows());
    const Eigen::VectorXd row_norm2 = data.rowwise().squaredNorm();
    const Eigen::VectorXd row_sum = data.rowwise().sum();
    const Eigen::VectorXd mean_norm2 = means.rowwise().squaredNorm();
    const Eigen::VectorXd mean_sum = means.rowwise().sum();
    const Eigen::MatrixXd cross = data * means.transpose();  // p x K

    CsPieces out;
    out.sq_dist.resize(p, k);
    out.ones_dot.resize(p, k);
    for (int c = 0; c < k; ++c) {
        out.sq_dist.col(c) = row_norm2.array() - 2.0 * cross.col(c).array() + mean_norm2(c);
        out.ones_dot.col(c) = row_sum.array() - mean_sum(c);
    }
    return out;
}

Eigen::MatrixXd log_joint_matrix(const CsPieces& pieces, const MfdaState& state, Eigen::Index m) {
    const Eigen::Index p = pieces.sq_dist.rows();
    const auto k = static_cast<int>(state.weights.size());
    const auto md = static_cast<double>(m);
    Eigen::MatrixXd log_joint(p, k);
    for (int c = 0; c < k; ++c) {
        const double tau = state.sigma2 + md * state.sigma_b2(c);
        const double shrink = state.sigma_b2(c) / tau;
        const double log_det = (md - 1.0) * std::log(state.sigma2) + std::log(tau);
        const double base = -0.5 * (md * std::log(em::kTwoPi) + log_det) + std::log(state.weights(c));
        log_joint.col(c) = base - 0.5 / state.sigma2 *
                                      (pieces.sq_dist.col(c).array() -
                                       shrink * pieces.ones_dot.col(c).array().square());
    }
    return log_joint;
}

} // namespace

MixtureFit fit_mfda(const TimeCourseMatrix& data, const MfdaSpec& spec, Seed seed) {
    const Eigen::MatrixXd& values = data.values();
    const Eigen::Index p = values.rows();
    const Eigen::Index m = values.cols();
    if (spec.k < 1) throw ValidationError("K must be positive");
    if (p <= spec.k) throw ValidationError("need more genes than clusters");
    if (spec.tol <= 0.0) throw ValidationError("tol must be positive");
    if (spec.penalty_lambda < 0.0) throw ValidationError("penalty must be nonnegative");

    const int q = spec.basis_size > 0 ? spec.basis_size
                                      : std::max<int>(4, std::min<int>(static_cast<int>(m), 12));
    if (q < 4) throw ValidationError("basis size must be at least 4");

    const auto& grid = data.grid();
    const BSplineBasis basis = BSplineBasis::uniform(grid.points().front(), grid.points().back(), q);
    const Eigen::MatrixXd design = basis.design(grid.points());        // m x q
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::MatrixXd penalty = basis.penalty();
    const double lambda = spec.penalty_lambda;
    const auto md = static_cast<double>(m);

    const double total_var = (values.array() - values.mean()).square().mean();
    const double sigma2_floor = 1e-10;
    const Rng master = Rng(seed).substream(0x6Du);

    const auto penalty_term = [&](const Eigen::MatrixXd& theta) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < theta.rows(); ++c)
            s += theta.row(c) * penalty * theta.row(c).transpose();
        return lambda * s;
    };

    // penalized coefficient solve for one cluster given responsibility mass
    // and the weighted residual target B'(sum_i r_ik (y_i - bhat_ik 1))
    const auto solve_theta = [&](double mass, const Eigen::VectorXd& rhs_curve, double sigma2) {
        const Eigen::MatrixXd lhs = (mass / sigma2) * gram + 2.0 * lambda * penalty;
        return Eigen::VectorXd(lhs.ldlt().solve(design.transpose() * rhs_curve / sigma2));
    };

    MixtureFit best;
    bool have_best = false;
    double best_objective = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < spec.n_restarts; ++restart) {
        Rng rng = master.substream(static_cast<std::uint64_t>(restart));
        try {
            Eigen::MatrixXd resp = restart == 0 ? em::one_hot(em::farthest_point_labels(values, spec.k, rng), spec.k)
                                                : em::random_responsibilities(p, spec.k, rng);

            MfdaState state;
            state.sigma2 = std::max(0.5 * total_var, 1e-4);
            state.sigma_b2 = Eigen::VectorXd::Constant(spec.k, 0.25 * total_var + 1e-4);
            state.weights = resp.colwise().sum() / static_cast<double>(p);
            state.theta.resize(spec.k, q);
            for (int c = 0; c < spec.k; ++c) {
                const Eigen::VectorXd weighted = (resp.col(c).transpose() * values).transpose();
                state.theta.row(c) = solve_theta(resp.col(c).sum(), weighted, state.sigma2).transpose();
            }
            state.means = state.theta * design.transpose();

            std::vector<double> trace;
            double previous = -std::numeric_limits<double>::infinity();
            double objective = previous;
            double loglik = previous;
            bool did_converge = false;
            int rescues = 0;
            int iter = 0;

            for (; iter < spec.max_iter; ++iter) {
                CsPieces pieces = residual_pieces(values, state.means);
                Eigen::MatrixXd log_joint = log_joint_matrix(pieces, state, m);
                loglik = em::responsibilities_from_log(log_joint, resp);
                objective = loglik - penalty_term(state.theta);
                if (!std::isfinite(objective)) throw FitAbort{};

                bool rescued = false;
                for (int c = 0; c < spec.k; ++c) {
                    if (resp.col(c).sum() < 1.0) {
                        if (++rescues > 10) throw FitAbort{};
                        const Eigen::Index worst = em::worst_fit_gene(log_joint);
                        state.theta.row(c) =
                            solve_theta(1.0, values.row(worst).transpose(), state.sigma2).transpose();
                        state.means.row(c) = state.theta.row(c) * design.transpose();
                        state.sigma_b2(c) = 0.25 * total_var + 1e-4;
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
                    trace.push_back(objective);
                    if (em::converged(objective, previous, spec.tol)) {
                        did_converge = true;
                        break;
                    }
                    previous = objective;
                }

                // posterior intercept moments at current parameters
                Eigen::MatrixXd bhat(p, spec.k);
                Eigen::VectorXd bvar(spec.k);
                for (int c = 0; c < spec.k; ++c) {
                    const double tau = state.sigma2 + md * state.sigma_b2(c);
                    bhat.col(c) = (state.sigma_b2(c) / tau) * pieces.ones_dot.col(c);
                    bvar(c) = state.sigma_b2(c) * state.sigma2 / tau;
                }

                const Eigen::VectorXd mass = resp.colwise().sum();
                state.weights = mass / static_cast<double>(p);

                const Eigen::MatrixXd weighted_rows = resp.transpose() * values;  // K x m
                for (int c = 0; c < spec.k; ++c) {
                    const double b_mass = resp.col(c).dot(bhat.col(c));
                    const Eigen::VectorXd target =
                        weighted_rows.row(c).transpose() - b_mass * Eigen::VectorXd::Ones(m);
                    state.theta.row(c) = solve_theta(mass(c), target, state.sigma2).transpose();
                    state.sigma_b2(c) =
                        std::max(0.0, (resp.col(c).dot(bhat.col(c).cwiseAbs2()) + mass(c) * bvar(c)) / mass(c));
                }
                state.means = state.theta * design.transpose();

                // error variance against the updated means
                const CsPieces updated = residual_pieces(values, state.means);
                double acc = 0.0;
                for (int c = 0; c < spec.k; ++c) {
                    const Eigen::ArrayXd sq = updated.sq_dist.col(c).array() -
                                              2.0 * bhat.col(c).array() * updated.ones_dot.col(c).array() +
                                              md * bhat.col(c).array().square();
                    acc += (resp.col(c).array() * (sq + md * bvar(c))).sum();
                }
                state.sigma2 = std::max(acc / (md * static_cast<double>(p)), sigma2_floor);
            }

            // final E-step so posteriors match the last parameters
            CsPieces pieces = residual_pieces(values, state.means);
            Eigen::MatrixXd log_joint = log_joint_matrix(pieces, state, m);
            loglik = em::responsibilities_from_log(log_joint, resp);
            objective = loglik - penalty_term(state.theta);
            if (!std::isfinite(objective)) throw FitAbort{};
            if (trace.empty() || objective != trace.back()) trace.push_back(objective);

            // effective df of each penalized mean via the smoother trace
            double mean_df = 0.0;
            const Eigen::VectorXd mass = resp.colwise().sum();
            for (int c = 0; c < spec.k; ++c) {
                const Eigen::MatrixXd scaled = (mass(c) / state.sigma2) * gram;
                const Eigen::MatrixXd lhs = scaled + 2.0 * lambda * penalty;
                mean_df += lhs.ldlt().solve(scaled).trace();
            }

            MixtureFit fit;
            fit.method = "mfda";
            fit.model_label = "random-intercept";
            fit.weights = state.weights;
            fit.mean_curves = state.means;
            fit.log_likelihood = loglik;
            fit.free_parameters = mean_df + spec.k + 1 + (spec.k - 1);
            fit.bic = -2.0 * loglik + fit.free_parameters * std::log(static_cast<double>(p));
            fit.posteriors = resp;
            fit.iterations = iter;
            fit.converged = did_converge;
            fit.rescues = rescues;
            fit.objective_trace = std::move(trace);
            MfdaParams params;
            params.sigma_b2 = state.sigma_b2;
            params.sigma2 = state.sigma2;
            params.penalty_lambda = lambda;
            params.basis_size = q;
            params.basis_coefficients = state.theta;
            fit.mfda = std::move(params);

            if (!have_best || objective > best_objective) {
                best = std::move(fit);
                best_objective = objective;
                have_best = true;
            }
        } catch (const FitAbort&) {
            // restart failed; try the next one
        }
    }

    if (!have_best) throw FitError("mfda: every EM restart failed");
    return best;
}

} // namespace tcclust
