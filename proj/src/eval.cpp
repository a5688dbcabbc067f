#include "tcclust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "tcclust/error.hpp"

namespace tcclust {

double adjusted_rand_index(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) throw ValidationError("partitions have different lengths");
    const std::size_t n = a.size();

    const auto ka = a.k();
    const auto kb = b.k();
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ka, kb);
    for (std::size_t i = 0; i < n; ++i) table(a.labels()[i], b.labels()[i]) += 1.0;

    const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double pairs_joint = 0.0;
    for (Eigen::Index i = 0; i < table.rows(); ++i)
        for (Eigen::Index j = 0; j < table.cols(); ++j) pairs_joint += choose2(table(i, j));
    double pairs_a = 0.0, pairs_b = 0.0;
    for (Eigen::Index i = 0; i < table.rows(); ++i) pairs_a += choose2(table.row(i).sum());
    for (Eigen::Index j = 0; j < table.cols(); ++j) pairs_b += choose2(table.col(j).sum());

    const double expected = pairs_a * pairs_b / choose2(static_cast<double>(n));
    const double maximum = 0.5 * (pairs_a + pairs_b);
    const double denom = maximum - expected;
    if (std::abs(denom) < 1e-12) return 1.0;  // both partitions degenerate => perfect agreement
    return (pairs_joint - expected) / denom;
}

ConfusionMetrics confusion_vs_geneset(const Partition& part, int cluster, const GeneSet& target,
                                      const std::vector<std::string>& universe) {
    if (part.size() != universe.size()) throw ValidationError("partition size does not match universe");
    if (cluster < 0 || cluster >= part.k()) throw ValidationError("cluster index out of range");
    if (!target.subset_of(universe)) throw ValidationError("target gene set is not a subset of the universe");

    ConfusionMetrics out;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        const bool in_cluster = part.labels()[i] == cluster;
        const bool in_target = target.contains(universe[i]);
        if (in_cluster && in_target) ++out.true_positive;
        else if (in_cluster) ++out.false_positive;
        else if (in_target) ++out.false_negative;
        else ++out.true_negative;
    }

    const double tp = static_cast<double>(out.true_positive);
    const double fp = static_cast<double>(out.false_positive);
    const double tn = static_cast<double>(out.true_negative);
    const double fn = static_cast<double>(out.false_negative);
    if (tp + fn > 0) out.sensitivity = tp / (tp + fn);
    if (tn + fp > 0) out.specificity = tn / (tn + fp);
    if (tp + fp > 0) out.precision = tp / (tp + fp);
    out.accuracy = (tp + tn) / static_cast<double>(universe.size());
    return out;
}

namespace {

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd cx = x.array() - x.mean();
    const Eigen::VectorXd cy = y.array() - y.mean();
    const double nx = cx.norm();
    const double ny = cy.norm();
    if (nx < 1e-12 || ny < 1e-12) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(cx.dot(cy) / (nx * ny), -1.0, 1.0);
}

} // namespace

int pick_aging_cluster(const std::vector<Eigen::VectorXd>& representatives, const TimeGrid& grid) {
    if (representatives.empty()) throw ValidationError("no representatives given");
    const Eigen::VectorXd age = grid.as_vector();

    int best = -1;
    double best_abs = -1.0;
    for (std::size_t k = 0; k < representatives.size(); ++k) {
        if (static_cast<std::size_t>(representatives[k].size()) != grid.size())
            throw ValidationError("representative length does not match grid");
        const double r = pearson(representatives[k], age);
        if (std::isnan(r)) continue;  // zero-variance representative
        if (std::abs(r) > best_abs) {
            best_abs = std::abs(r);
            best = static_cast<int>(k);
        }
    }
    if (best < 0) throw ValidationError("every representative has zero variance");
    return best;
}

std::string to_string(PreservationBand band) {
    switch (band) {
    case PreservationBand::Strong: return "strong";
    case PreservationBand::Moderate: return "moderate";
    default: return "none";
    }
}

namespace {

constexpr double kSentinelZ = 100.0;  // reported when the permutation null has zero spread

// rows centered and scaled to unit norm; zero-variance rows become zero
// (they contribute correlation 0 to every pair)
Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& values, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::VectorXd row = values.row(static_cast<Eigen::Index>(rows[r])).transpose();
        row.array() -= row.mean();
        const double norm = row.norm();
        if (norm < 1e-12)
            out.row(static_cast<Eigen::Index>(r)).setZero();
        else
            out.row(static_cast<Eigen::Index>(r)) = row.transpose() / norm;
    }
    return out;
}

struct SetStats {
    double density = 0.0;
    double connectivity_cor = 0.0;
};

// density: mean off-diagonal adjacency within the set in the test data;
// connectivity: correlation of the set's intramodular connectivity between
// the reference and test data
SetStats module_stats(const Eigen::MatrixXd& ref_rows, const Eigen::MatrixXd& test_rows,
                      const std::vector<int>& members, double beta) {
    const auto s = static_cast<int>(members.size());
    Eigen::VectorXd k_ref = Eigen::VectorXd::Zero(s);
    Eigen::VectorXd k_test = Eigen::VectorXd::Zero(s);
    double density_sum = 0.0;
    for (int i = 0; i < s; ++i) {
        for (int h = 0; h < i; ++h) {
            const double r_ref =
                std::clamp(ref_rows.row(members[static_cast<std::size_t>(i)])
                               .dot(ref_rows.row(members[static_cast<std::size_t>(h)])),
                           -1.0, 1.0);
            const double r_test =
                std::clamp(test_rows.row(members[static_cast<std::size_t>(i)])
                               .dot(test_rows.row(members[static_cast<std::size_t>(h)])),
                           -1.0, 1.0);
            const double a_ref = std::pow((1.0 + r_ref) / 2.0, beta);
            const double a_test = std::pow((1.0 + r_test) / 2.0, beta);
            k_ref(i) += a_ref;
            k_ref(h) += a_ref;
            k_test(i) += a_test;
            k_test(h) += a_test;
            density_sum += a_test;
        }
    }
    SetStats stats;
    stats.density = density_sum / (static_cast<double>(s) * (s - 1) / 2.0);
    const double cor = pearson(k_ref, k_test);
    stats.connectivity_cor = std::isnan(cor) ? 0.0 : cor;
    return stats;
}

} // namespace

PreservationResult z_summary(const TimeCourseMatrix& reference, const TimeCourseMatrix& test,
                             const Partition& part, int n_perm, Seed seed,
                             const AdjacencyConfig& adjacency_cfg) {
    if (part.size() != reference.n_genes()) throw ValidationError("partition size does not match reference data");
    if (n_perm < 50) throw ValidationError("need at least 50 permutations");

    // shared gene universe in reference order
    std::unordered_map<std::string, std::size_t> test_index;
    for (std::size_t i = 0; i < test.n_genes(); ++i) test_index.emplace(test.gene_ids()[i], i);
    std::vector<std::size_t> ref_rows, test_rows_idx;
    std::vector<int> labels;
    for (std::size_t i = 0; i < reference.n_genes(); ++i) {
        const auto it = test_index.find(reference.gene_ids()[i]);
        if (it == test_index.end()) continue;
        ref_rows.push_back(i);
        test_rows_idx.push_back(it->second);
        labels.push_back(part.labels()[i]);
    }
    const auto universe = static_cast<int>(ref_rows.size());
    if (universe < 3) throw ValidationError("fewer than 3 shared genes between datasets");

    const Eigen::MatrixXd ref_norm = normalized_rows(reference.values(), ref_rows);
    const Eigen::MatrixXd test_norm = normalized_rows(test.values(), test_rows_idx);
    const double beta = adjacency_cfg.beta;
    const Rng master = Rng(seed).substream(0x5Au);

    PreservationResult result;
    result.n_permutations = n_perm;

    for (int cluster = 0; cluster < part.k(); ++cluster) {
        ClusterPreservation row;
        row.cluster = cluster;
        std::vector<int> members;
        for (int i = 0; i < universe; ++i)
            if (labels[static_cast<std::size_t>(i)] == cluster) members.push_back(i);
        row.size = members.size();
        if (members.size() < 3) {
            row.skipped = true;
            result.clusters.push_back(row);
            continue;
        }

        const SetStats observed = module_stats(ref_norm, test_norm, members, beta);

        // equal-size random gene sets from the shared universe
        double sum_d = 0.0, sum_d2 = 0.0, sum_c = 0.0, sum_c2 = 0.0;
        std::vector<int> pool(static_cast<std::size_t>(universe));
        for (int i = 0; i < universe; ++i) pool[static_cast<std::size_t>(i)] = i;
        for (int perm = 0; perm < n_perm; ++perm) {
            Rng rng = master.substream(static_cast<std::uint64_t>(cluster) * 1000003u +
                                       static_cast<std::uint64_t>(perm));
            // partial Fisher-Yates draw of |members| indices
            std::vector<int> sample = pool;
            for (std::size_t j = 0; j < members.size(); ++j) {
                const std::size_t pick = j + rng.uniform_index(sample.size() - j);
                std::swap(sample[j], sample[pick]);
            }
            sample.resize(members.size());
            const SetStats null_stats = module_stats(ref_norm, test_norm, sample, beta);
            sum_d += null_stats.density;
            sum_d2 += null_stats.density * null_stats.density;
            sum_c += null_stats.connectivity_cor;
            sum_c2 += null_stats.connectivity_cor * null_stats.connectivity_cor;
        }
        const double nd = static_cast<double>(n_perm);
        const double mean_d = sum_d / nd;
        const double mean_c = sum_c / nd;
        const double sd_d = std::sqrt(std::max(0.0, (sum_d2 - nd * mean_d * mean_d) / (nd - 1.0)));
        const double sd_c = std::sqrt(std::max(0.0, (sum_c2 - nd * mean_c * mean_c) / (nd - 1.0)));

        const auto z_of = [&](double obs, double mean, double sd, bool& degenerate) {
            if (sd < 1e-12) {
                degenerate = true;
                return obs > mean ? kSentinelZ : (obs < mean ? -kSentinelZ : 0.0);
            }
            return (obs - mean) / sd;
        };
        row.z_density = z_of(observed.density, mean_d, sd_d, row.degenerate_null);
        row.z_connectivity = z_of(observed.connectivity_cor, mean_c, sd_c, row.degenerate_null);
        row.z_summary = 0.5 * (row.z_density + row.z_connectivity);
        row.band = row.z_summary > 10.0 ? PreservationBand::Strong
                                        : (row.z_summary > 2.0 ? PreservationBand::Moderate : PreservationBand::None);
        result.clusters.push_back(row);
    }
    return result;
}

} // namespace tcclust
