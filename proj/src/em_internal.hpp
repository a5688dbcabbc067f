#pragma once

// Shared EM scaffolding for the three mixture fitters. Internal to src/.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "tcclust/rng.hpp"

namespace tcclust::em {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Normalizes rows of a log-density + log-weight matrix into
/// responsibilities; returns the observed log-likelihood.
inline double responsibilities_from_log(const Eigen::MatrixXd& log_joint, Eigen::MatrixXd& resp) {
    const Eigen::Index p = log_joint.rows();
    const Eigen::Index k = log_joint.cols();
    resp.resize(p, k);
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double peak = log_joint.row(i).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(log_joint(i, c) - peak);
        const double log_norm = peak + std::log(sum);
        loglik += log_norm;
        for (Eigen::Index c = 0; c < k; ++c) resp(i, c) = std::exp(log_joint(i, c) - log_norm);
    }
    return loglik;
}

/// Farthest-point seeding over rows of `points`: the first seed is random,
/// each next seed maximizes the minimum squared distance to chosen seeds
/// (first index wins ties). Returns hard labels by nearest seed.
inline std::vector<int> farthest_point_labels(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const Eigen::Index p = points.rows();
    std::vector<Eigen::Index> seeds;
    seeds.push_back(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(p))));
    Eigen::VectorXd min_dist(p);
    for (Eigen::Index i = 0; i < p; ++i) min_dist(i) = (points.row(i) - points.row(seeds[0])).squaredNorm();
    while (static_cast<int>(seeds.size()) < k) {
        Eigen::Index next = 0;
        min_dist.maxCoeff(&next);
        seeds.push_back(next);
        for (Eigen::Index i = 0; i < p; ++i)
            min_dist(i) = std::min(min_dist(i), (points.row(i) - points.row(next)).squaredNorm());
    }
    std::vector<int> labels(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double d = (points.row(i) - points.row(seeds[static_cast<std::size_t>(c)])).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

inline Eigen::MatrixXd one_hot(const std::vector<int>& labels, int k) {
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
    for (std::size_t i = 0; i < labels.size(); ++i) resp(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return resp;
}

inline Eigen::MatrixXd random_responsibilities(Eigen::Index p, int k, Rng& rng) {
    Eigen::MatrixXd resp(p, k);
    for (Eigen::Index i = 0; i < p; ++i) {
        double sum = 0.0;
        for (int c = 0; c < k; ++c) {
            resp(i, c) = 0.05 + rng.uniform();
            sum += resp(i, c);
        }
        resp.row(i) /= sum;
    }
    return resp;
}

/// Relative log-likelihood change convergence rule.
inline bool converged(double current, double previous, double tol) {
    return std::abs(current - previous) < tol * (1.0 + std::abs(current));
}

/// Index of the gene with the lowest mixture density (the worst-fit gene),
/// from the per-gene log marginal densities.
inline Eigen::Index worst_fit_gene(const Eigen::MatrixXd& log_joint) {
    Eigen::Index worst = 0;
    double worst_value = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < log_joint.rows(); ++i) {
        const double peak = log_joint.row(i).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < log_joint.cols(); ++c) sum += std::exp(log_joint(i, c) - peak);
        const double log_marginal = peak + std::log(sum);
        if (log_marginal < worst_value) {
            worst_value = log_marginal;
            worst = i;
        }
    }
    return worst;
}

} // namespace tcclust::em
