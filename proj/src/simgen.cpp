#include "tcclust/simgen.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tcclust/error.hpp"

namespace tcclust {

namespace {

std::vector<double> make_grid(int interval, int horizon) {
    std::vector<double> points;
    for (int t = 0; t <= horizon; t += interval) points.push_back(static_cast<double>(t));
    return points;
}

std::vector<std::string> block_gene_ids(const std::array<std::size_t, 5>& sizes) {
    std::size_t p = 0;
    for (auto s : sizes) p += s;
    std::vector<std::string> ids;
    ids.reserve(p);
    char buf[24];
    for (std::size_t i = 0; i < p; ++i) {
        std::snprintf(buf, sizeof(buf), "gene_%04zu", i + 1);
        ids.emplace_back(buf);
    }
    return ids;
}

std::vector<int> block_labels(const std::array<std::size_t, 5>& sizes) {
    std::vector<int> labels;
    for (int k = 0; k < 5; ++k)
        labels.insert(labels.end(), sizes[static_cast<std::size_t>(k)], k);
    return labels;
}

void validate_sizes(const std::array<std::size_t, 5>& sizes) {
    for (auto s : sizes)
        if (s < 1) throw ValidationError("every cluster size must be >= 1");
}

// a_i ~ N(1, 0.2^2) truncated to a_i > 0, by rejection redraw.
double truncated_amplitude(Rng& rng) {
    for (;;) {
        const double a = rng.normal(1.0, 0.2);
        if (a > 0.0) return a;
    }
}

} // namespace

double study1_shape(int k, double t) {
    switch (k) {
    case 1: return std::sin((t + 0.5) / 4.0) + std::cos((t - 1.0) / 5.0);
    case 2: return std::cos(t / 4.0);
    case 3: return -study1_shape(1, t);
    case 4: return -study1_shape(2, t);
    default: throw ValidationError("study-1 shape index must be 1..4");
    }
}

SimOutput simulate_study1(const Study1Config& cfg) {
    if (cfg.interval <= 0 || 30 % cfg.interval != 0)
        throw ValidationError("study-1 interval must divide 30");
    if (cfg.interval != 1 && cfg.interval != 2 && cfg.interval != 3 && cfg.interval != 6)
        throw ValidationError("study-1 interval must be one of 1, 2, 3, 6");
    if (cfg.noise_sd < 0.0) throw ValidationError("noise_sd must be nonnegative");
    validate_sizes(cfg.cluster_sizes);

    const auto grid_points = make_grid(cfg.interval, 30);
    const std::size_t m = grid_points.size();
    const std::size_t p = std::accumulate(cfg.cluster_sizes.begin(), cfg.cluster_sizes.end(), std::size_t{0});
    const bool deterministic = cfg.noise_sd == 0.0;

    Eigen::MatrixXd values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
    std::vector<double> noise_levels;
    const Rng master(cfg.seed);

    std::size_t row = 0;
    for (int k = 1; k <= 5; ++k) {
        const std::size_t nk = cfg.cluster_sizes[static_cast<std::size_t>(k - 1)];
        for (std::size_t g = 0; g < nk; ++g, ++row) {
            Rng rng = master.substream(row);
            if (k <= 4) {
                const double a = deterministic ? 1.0 : truncated_amplitude(rng);
                for (std::size_t j = 0; j < m; ++j) {
                    const double delta = deterministic ? 0.0 : rng.uniform(-1.0, 1.0);
                    const double eps = deterministic ? 0.0 : rng.normal(0.0, cfg.noise_sd);
                    values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                        a * study1_shape(k, grid_points[j] + delta) + eps;
                }
            } else {
                const double c = rng.uniform(-1.0, 1.0);
                noise_levels.push_back(c);
                for (std::size_t j = 0; j < m; ++j)
                    values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                        c + (deterministic ? 0.0 : rng.normal(0.0, cfg.noise_sd));
            }
        }
    }

    TimeCourseMatrix data(TimeGrid(grid_points), std::move(values), block_gene_ids(cfg.cluster_sizes));
    return SimOutput{std::move(data), Partition(block_labels(cfg.cluster_sizes), 5), std::move(noise_levels)};
}

Eigen::MatrixXd study2_mean_curves(int interval) {
    if (interval != 1 && interval != 2 && interval != 4)
        throw ValidationError("study-2 interval must be one of 1, 2, 4");

    Eigen::Matrix4d transition;
    transition << 0.8, 0.8, -0.8, -0.6,
                  0.0, 0.6,  0.4,  0.0,
                 -0.1, 0.0,  0.8,  0.4,
                  0.0, 0.0,  0.0,  0.2;

    // Theta = [theta_0 ... theta_20], theta_0 = e1, theta_j = G theta_{j-1}
    Eigen::MatrixXd theta(4, 21);
    theta.col(0) = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    for (int j = 1; j <= 20; ++j) theta.col(j) = transition * theta.col(j - 1);

    const int m = 20 / interval + 1;
    Eigen::MatrixXd curves(4, m);
    for (int j = 0; j < m; ++j) curves.col(j) = theta.col(j * interval);
    return curves;
}

SimOutput simulate_study2(const Study2Config& cfg) {
    if (cfg.interval <= 0 || 20 % cfg.interval != 0)
        throw ValidationError("study-2 interval must divide 20");
    if (cfg.noise_sd < 0.0) throw ValidationError("noise_sd must be nonnegative");
    validate_sizes(cfg.cluster_sizes);

    const Eigen::MatrixXd curves = study2_mean_curves(cfg.interval);
    const auto grid_points = make_grid(cfg.interval, 20);
    const std::size_t m = grid_points.size();
    const std::size_t p = std::accumulate(cfg.cluster_sizes.begin(), cfg.cluster_sizes.end(), std::size_t{0});
    const bool deterministic = cfg.noise_sd == 0.0;

    Eigen::MatrixXd values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
    std::vector<double> noise_levels;
    const Rng master(cfg.seed);

    std::size_t row = 0;
    for (int k = 1; k <= 5; ++k) {
        const std::size_t nk = cfg.cluster_sizes[static_cast<std::size_t>(k - 1)];
        for (std::size_t g = 0; g < nk; ++g, ++row) {
            Rng rng = master.substream(row);
            if (k <= 4) {
                for (std::size_t j = 0; j < m; ++j)
                    values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                        curves(k - 1, static_cast<Eigen::Index>(j)) +
                        (deterministic ? 0.0 : rng.normal(0.0, cfg.noise_sd));
            } else {
                const double c = rng.uniform(-0.5, 0.5);
                noise_levels.push_back(c);
                for (std::size_t j = 0; j < m; ++j)
                    values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                        c + (deterministic ? 0.0 : rng.normal(0.0, cfg.noise_sd));
            }
        }
    }

    TimeCourseMatrix data(TimeGrid(grid_points), std::move(values), block_gene_ids(cfg.cluster_sizes));
    return SimOutput{std::move(data), Partition(block_labels(cfg.cluster_sizes), 5), std::move(noise_levels)};
}

} // namespace tcclust
