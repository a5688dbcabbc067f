#pragma once

#include <utility>
#include <vector>

#include "tcclust/types.hpp"

namespace tcclust {

/// Soft-threshold power for the correlation adjacency ((1+cor)/2)^beta.
struct AdjacencyConfig {
    double beta = 6.0;  // >= 1, specified a priori
};

/// Monotone alignment between two equal-length curves. Steps are 0-based
/// (j, j') index pairs from (0,0) to (m-1,m-1) moving by unit steps.
struct WarpingPath {
    std::vector<std::pair<int, int>> steps;
};

struct DtwResult {
    double distance = 0.0;      // mean |t_j - t_j'| along the path / grid span
    double alignment_cost = 0.0; // accumulated |a_j - b_j'| of the optimal path
    WarpingPath path;
};

/// Pairwise adjacency a_ih = ((1 + cor(y_i, y_h)) / 2)^beta, diagonal 1.
/// Every gene row must have nonzero variance.
SymmetricMatrix adjacency(const TimeCourseMatrix& data, const AdjacencyConfig& cfg = {});

/// Topological overlap w_ih = (l_ih + a_ih) / (min{k_i, k_h} + 1 - a_ih)
/// with l_ih the shared-neighbor term and k_i the connectivity; diagonal 1.
SymmetricMatrix topological_overlap(const SymmetricMatrix& adj);

/// TOM dissimilarity d = 1 - w, diagonal 0.
SymmetricMatrix tom_dissimilarity(const SymmetricMatrix& tom);

/// Dynamic-programming alignment of two curves on a common grid. The
/// warping path minimizes accumulated |a_j - b_j'|; the reported distance is
/// the path's mean time displacement, sum over path cells of |t_j - t_j'|
/// divided by path length and by the grid span. Among cost-ties the path
/// with the smaller time displacement (then longer path) is taken, which
/// makes the result symmetric in (a, b) and deterministic.
DtwResult dtw_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const TimeGrid& grid);

/// All-pairs DTW distance matrix; computed once per pair, diagonal 0.
SymmetricMatrix dtw_matrix(const TimeCourseMatrix& data);

/// Autocorrelation features: row i = (rho_i1, ..., rho_i,max_lag) with the
/// full-series variance in the denominator. max_lag defaults to m-1.
/// Every gene row must have nonzero variance.
Eigen::MatrixXd acf_features(const TimeCourseMatrix& data, int max_lag = -1);

} // namespace tcclust
