#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcclust/distance.hpp"
#include "tcclust/rng.hpp"
#include "tcclust/types.hpp"

namespace tcclust {

/// Hubert-Arabie adjusted Rand index. 1 for identical partitions, about 0
/// for independent ones, negative for worse-than-chance agreement. Two
/// partitions with a degenerate contingency denominator (e.g. both trivial)
/// are defined to agree perfectly (1).
double adjusted_rand_index(const Partition& a, const Partition& b);

/// 2x2-table rates of one cluster against a target gene set over a gene
/// universe. A rate whose denominator is empty stays unset.
struct ConfusionMetrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;
};

ConfusionMetrics confusion_vs_geneset(const Partition& part, int cluster, const GeneSet& target,
                                      const std::vector<std::string>& universe);

/// Index of the representative curve with the largest |cor| against the
/// grid values (ties to the lowest index). Zero-variance representatives
/// are skipped; throws when every representative is degenerate.
int pick_aging_cluster(const std::vector<Eigen::VectorXd>& representatives, const TimeGrid& grid);

enum class PreservationBand { Strong, Moderate, None };

std::string to_string(PreservationBand band);

/// Permutation Z statistics of one cluster's preservation in a test dataset.
struct ClusterPreservation {
    int cluster = 0;
    std::size_t size = 0;
    double z_density = 0.0;
    double z_connectivity = 0.0;
    double z_summary = 0.0;
    PreservationBand band = PreservationBand::None;
    bool skipped = false;       // cluster smaller than 3 genes
    bool degenerate_null = false;  // permutation sd was 0; Z capped
};

struct PreservationResult {
    std::vector<ClusterPreservation> clusters;
    int n_permutations = 0;
};

/// Z_summary preservation of reference-defined clusters in a test dataset:
/// mean of a density Z (within-cluster adjacency in the test data) and a
/// connectivity Z (correlation of intramodular connectivity between the two
/// datasets), each against n_perm equal-size random gene sets drawn from
/// the shared gene universe. Z > 10 strong, 2 < Z < 10 moderate, Z < 2 none.
PreservationResult z_summary(const TimeCourseMatrix& reference, const TimeCourseMatrix& test,
                             const Partition& part, int n_perm, Seed seed,
                             const AdjacencyConfig& adjacency_cfg = {});

} // namespace tcclust
