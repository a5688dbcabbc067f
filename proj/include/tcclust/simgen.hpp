#pragma once

#include <array>
#include <vector>

#include "tcclust/rng.hpp"
#include "tcclust/types.hpp"

namespace tcclust {

/// First simulation study: four shape clusters y_ij = a_i f_k(t_j + d_ij) + e_ij
/// plus a fifth cluster of level-shifted noise genes, on the grid
/// 0, interval, ..., 30.
struct Study1Config {
    int interval = 3;                                     // one of 1, 2, 3, 6
    std::array<std::size_t, 5> cluster_sizes = {50, 100, 200, 300, 400};
    double noise_sd = 0.4;                                // 0 switches to deterministic curves
    Seed seed;
};

/// Second simulation study: cluster means are rows of Theta built from the
/// 4x4 transition matrix recursion theta_j = G theta_{j-1}, grid 0..20.
struct Study2Config {
    int interval = 1;                                     // one of 1, 2, 4
    std::array<std::size_t, 5> cluster_sizes = {25, 50, 100, 150, 200};
    double noise_sd = 0.4;
    Seed seed;
};

/// Simulated dataset with its generating 5-cluster partition. Truth labels
/// run 0..4 in generation-block order. noise_gene_levels carries the drawn
/// per-gene level c_i of the fifth (noise) cluster, in generation order.
struct SimOutput {
    TimeCourseMatrix data;
    Partition truth;
    std::vector<double> noise_gene_levels;
};

/// The four study-1 mean curve shapes (f3 = -f1, f4 = -f2).
double study1_shape(int k, double t);

/// Study-2 mean curve matrix: rows 1..4 of Theta restricted to the grid
/// selected by `interval` (columns j = 0, interval, ..., 20). 4 x m.
Eigen::MatrixXd study2_mean_curves(int interval);

SimOutput simulate_study1(const Study1Config& cfg);
SimOutput simulate_study2(const Study2Config& cfg);

} // namespace tcclust
