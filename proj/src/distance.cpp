#include "tcclust/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tcclust/error.hpp"

namespace tcclust {

SymmetricMatrix adjacency(const TimeCourseMatrix& data, const AdjacencyConfig& cfg) {
    if (cfg.beta < 1.0) throw ValidationError("adjacency power beta must be >= 1");
    const auto& values = data.values();
    const Eigen::Index p = values.rows();

    Eigen::MatrixXd centered = values;
    for (Eigen::Index i = 0; i < p; ++i) {
        centered.row(i).array() -= centered.row(i).mean();
        const double norm = centered.row(i).norm();
        if (norm < 1e-12)
            throw ValidationError("gene '" + data.gene_ids()[static_cast<std::size_t>(i)] +
                                  "' has zero variance; correlation undefined");
        centered.row(i) /= norm;
    }

    Eigen::MatrixXd cor = centered * centered.transpose();
    Eigen::MatrixXd adj(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        adj(i, i) = 1.0;
        for (Eigen::Index h = 0; h < i; ++h) {
            const double r = std::clamp(cor(i, h), -1.0, 1.0);
            const double a = std::pow((1.0 + r) / 2.0, cfg.beta);
            adj(i, h) = a;
            adj(h, i) = a;
        }
    }
    return SymmetricMatrix(std::move(adj));
}

SymmetricMatrix topological_overlap(const SymmetricMatrix& adj) {
    const auto p = static_cast<Eigen::Index>(adj.dim());
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index h = 0; h <= i; ++h)
            if (adj(static_cast<std::size_t>(i), static_cast<std::size_t>(h)) < 0.0 ||
                adj(static_cast<std::size_t>(i), static_cast<std::size_t>(h)) > 1.0)
                throw ValidationError("adjacency entries must lie in [0, 1]");

    // zero-diagonal copy: A0^2 sums exclude u == i and u == h automatically
    Eigen::MatrixXd hollow = adj.entries();
    hollow.diagonal().setZero();
    const Eigen::MatrixXd shared = hollow * hollow;
    const Eigen::VectorXd connectivity = hollow.rowwise().sum();

    Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index h = 0; h < i; ++h) {
            const double a = hollow(i, h);
            const double denom = std::min(connectivity(i), connectivity(h)) + 1.0 - a;
            const double w = denom < 1e-12 ? 0.0 : (shared(i, h) + a) / denom;
            omega(i, h) = w;
            omega(h, i) = w;
        }
    }
    return SymmetricMatrix(std::move(omega));
}

SymmetricMatrix tom_dissimilarity(const SymmetricMatrix& tom) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(tom.entries().rows(), tom.entries().cols()) - tom.entries();
    d.diagonal().setZero();
    return SymmetricMatrix(std::move(d));
}

namespace {

// DP cell value: lexicographic (alignment cost, time displacement, -length).
// All three accumulate additively, so lexicographic minimization is exact
// and symmetric under transposition of the cost matrix.
struct PathValue {
    double cost;
    double disp;
    int len;

    bool better_than(const PathValue& o) const {
        if (cost != o.cost) return cost < o.cost;
        if (disp != o.disp) return disp < o.disp;
        return len > o.len;
    }
};

} // namespace

DtwResult dtw_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const TimeGrid& grid) {
    const Eigen::Index m = a.size();
    if (b.size() != m) throw ValidationError("dtw curves must have equal length");
    if (static_cast<std::size_t>(m) != grid.size()) throw ValidationError("dtw grid length must match curves");
    if (m < 2) throw ValidationError("dtw needs at least 2 points");

    const auto& t = grid.points();
    const auto cell = [&](Eigen::Index i, Eigen::Index j) {
        return PathValue{std::abs(a(i) - b(j)), std::abs(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]), 1};
    };
    const auto extend = [](const PathValue& prev, const PathValue& local) {
        return PathValue{prev.cost + local.cost, prev.disp + local.disp, prev.len + local.len};
    };

    std::vector<PathValue> table(static_cast<std::size_t>(m * m));
    std::vector<std::int8_t> move(static_cast<std::size_t>(m * m));  // 0 diag, 1 up (i-1), 2 left (j-1)
    const auto at = [&](Eigen::Index i, Eigen::Index j) -> PathValue& {
        return table[static_cast<std::size_t>(i * m + j)];
    };

    at(0, 0) = cell(0, 0);
    for (Eigen::Index i = 1; i < m; ++i) {
        at(i, 0) = extend(at(i - 1, 0), cell(i, 0));
        move[static_cast<std::size_t>(i * m)] = 1;
    }
    for (Eigen::Index j = 1; j < m; ++j) {
        at(0, j) = extend(at(0, j - 1), cell(0, j));
        move[static_cast<std::size_t>(j)] = 2;
    }
    for (Eigen::Index i = 1; i < m; ++i) {
        for (Eigen::Index j = 1; j < m; ++j) {
            const PathValue local = cell(i, j);
            PathValue best = extend(at(i - 1, j - 1), local);
            std::int8_t dir = 0;
            const PathValue up = extend(at(i - 1, j), local);
            if (up.better_than(best)) {
                best = up;
                dir = 1;
            }
            const PathValue left = extend(at(i, j - 1), local);
            if (left.better_than(best)) {
                best = left;
                dir = 2;
            }
            at(i, j) = best;
            move[static_cast<std::size_t>(i * m + j)] = dir;
        }
    }

    WarpingPath path;
    Eigen::Index i = m - 1, j = m - 1;
    while (true) {
        path.steps.emplace_back(static_cast<int>(i), static_cast<int>(j));
        if (i == 0 && j == 0) break;
        switch (move[static_cast<std::size_t>(i * m + j)]) {
        case 0: --i; --j; break;
        case 1: --i; break;
        default: --j; break;
        }
    }
    std::reverse(path.steps.begin(), path.steps.end());

    const PathValue& final_value = at(m - 1, m - 1);
    DtwResult result;
    result.alignment_cost = final_value.cost;
    result.distance = final_value.disp / (static_cast<double>(final_value.len) * grid.span());
    result.path = std::move(path);
    return result;
}

SymmetricMatrix dtw_matrix(const TimeCourseMatrix& data) {
    const auto p = static_cast<Eigen::Index>(data.n_genes());
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::VectorXd row_i = data.values().row(i).transpose();
        for (Eigen::Index h = 0; h < i; ++h) {
            const Eigen::VectorXd row_h = data.values().row(h).transpose();
            const double d = dtw_distance(row_i, row_h, data.grid()).distance;
            dist(i, h) = d;
            dist(h, i) = d;
        }
    }
    return SymmetricMatrix(std::move(dist));
}

Eigen::MatrixXd acf_features(const TimeCourseMatrix& data, int max_lag) {
    const auto m = static_cast<int>(data.n_times());
    if (max_lag < 0) max_lag = m - 1;
    if (max_lag < 1 || max_lag > m - 1) throw ValidationError("max_lag must lie in 1..m-1");

    const auto p = static_cast<Eigen::Index>(data.n_genes());
    Eigen::MatrixXd features(p, max_lag);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::VectorXd row = data.values().row(i).transpose();
        const Eigen::VectorXd centered = row.array() - row.mean();
        const double denom = centered.squaredNorm();
        if (denom < 1e-24)
            throw ValidationError("gene '" + data.gene_ids()[static_cast<std::size_t>(i)] +
                                  "' has zero variance; autocorrelation undefined");
        for (int r = 1; r <= max_lag; ++r) {
            double s = 0.0;
            for (int j = r; j < m; ++j) s += centered(j) * centered(j - r);
            features(i, r - 1) = s / denom;
        }
    }
    return features;
}

} // namespace tcclust
