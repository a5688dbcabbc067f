#include "tcclust/agetransform.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tcclust/error.hpp"

namespace tcclust {

TimeCourseMatrix bin_by_age(const CrossSectionalMatrix& data, double bin_length) {
    if (!(bin_length > 0.0)) throw ValidationError("bin_length must be positive");

    const auto& ages = data.ages();
    const double min_age = *std::min_element(ages.begin(), ages.end());

    // bin j covers [min_age + j*L, min_age + (j+1)*L)
    std::vector<std::vector<std::size_t>> bins;
    for (std::size_t s = 0; s < ages.size(); ++s) {
        const auto j = static_cast<std::size_t>(std::floor((ages[s] - min_age) / bin_length));
        if (bins.size() <= j) bins.resize(j + 1);
        bins[j].push_back(s);
    }

    std::vector<double> midpoints;
    std::vector<std::vector<std::size_t>> occupied;
    for (std::size_t j = 0; j < bins.size(); ++j) {
        if (bins[j].empty()) continue;
        midpoints.push_back(min_age + (static_cast<double>(j) + 0.5) * bin_length);
        occupied.push_back(bins[j]);
    }
    if (occupied.size() < 2) throw ValidationError("degenerate grid: all subjects fall in a single age bin");

    const auto p = static_cast<Eigen::Index>(data.n_genes());
    const auto m = static_cast<Eigen::Index>(occupied.size());
    Eigen::MatrixXd values(p, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& members = occupied[static_cast<std::size_t>(j)];
        Eigen::VectorXd col = Eigen::VectorXd::Zero(p);
        for (std::size_t s : members) col += data.values().col(static_cast<Eigen::Index>(s));
        values.col(j) = col / static_cast<double>(members.size());
    }

    return TimeCourseMatrix(TimeGrid(midpoints), std::move(values), data.gene_ids());
}

TimeCourseMatrix smooth_by_age(const CrossSectionalMatrix& data) {
    const auto& ages = data.ages();
    const std::set<double> unique_ages(ages.begin(), ages.end());
    if (unique_ages.size() < 4) throw ValidationError("smoothing transform needs at least 4 distinct ages");

    const std::vector<double> grid(unique_ages.begin(), unique_ages.end());
    const auto p = static_cast<Eigen::Index>(data.n_genes());
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd values(p, m);

    std::vector<double> gene_values(data.n_subjects());
    for (Eigen::Index i = 0; i < p; ++i) {
        for (std::size_t s = 0; s < data.n_subjects(); ++s)
            gene_values[s] = data.values()(i, static_cast<Eigen::Index>(s));
        try {
            const SplineFit fit = fit_smoothing_spline(ages, gene_values);
            values.row(i) = fit.evaluate(grid).transpose();
        } catch (const Error& e) {
            throw ValidationError("gene '" + data.gene_ids()[static_cast<std::size_t>(i)] + "': " + e.what());
        }
    }

    return TimeCourseMatrix(TimeGrid(grid), std::move(values), data.gene_ids());
}

} // namespace tcclust
