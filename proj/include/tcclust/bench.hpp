#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tcclust/eval.hpp"
#include "tcclust/mixture.hpp"
#include "tcclust/rng.hpp"
#include "tcclust/types.hpp"

namespace tcclust {

enum class Method { Gmm, Mfda, Fcm, Wgcna, Dtw, Acf };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// One benchmark scenario: a simulation study design, the methods to run
/// and the replicate budget. The paper-scale replicate count is 100; the
/// CLI and the acceptance suite run the 20-replicate desk scale.
struct ScenarioConfig {
    int study = 1;
    int interval = 3;
    std::array<std::size_t, 5> cluster_sizes{};  // all zero => study defaults
    int n_replicates = 100;
    std::vector<Method> methods;
    int fixed_k = 5;
    double noise_sd = 0.4;
    Seed seed;

    std::string tag() const;  // "S1I3"-style scenario name
};

/// Paper cluster sizes for a scenario (halved when `halved` is set, for the
/// mixture-heavy desk-scale runs).
std::array<std::size_t, 5> default_cluster_sizes(int study, int interval, bool halved = false);

struct MethodRun {
    Partition partition;
    double seconds = 0.0;
    int components_dropped = 0;  // mixtures may end with fewer than fixed_k
};

/// One method on one dataset with a fixed cluster count.
/// wgcna: adjacency -> TOM -> dissimilarity -> average linkage -> cut;
/// dtw: DTW matrix -> average linkage -> cut;
/// acf: autocorrelation features -> wgcna pipeline on the feature rows;
/// gmm/mfda/fcm: the mixture module with fixed K and posterior assignment.
MethodRun run_method(const TimeCourseMatrix& data, Method method, int fixed_k, Seed seed);

struct BenchRow {
    std::string scenario;
    std::string method;
    double median_ari = 0.0;
    double iqr_low = 0.0;
    double iqr_high = 0.0;
    double total_seconds = 0.0;
    int replicates = 0;
    int failures = 0;
    std::vector<double> aris;  // per successful replicate, replicate order
};

struct BenchReport {
    std::vector<BenchRow> rows;

    std::string to_text() const;   // aligned human-readable table
    std::string to_json() const;   // machine form
    std::string to_csv() const;    // per-replicate ARI rows
};

/// Runs every replicate of a scenario (parallel across replicates), scoring
/// each method against the simulation truth. Per-replicate method failures
/// are counted and excluded from the ARI aggregation.
BenchReport run_benchmark(const ScenarioConfig& cfg);

/// Case-study pipeline configuration over cross-sectional data.
struct CaseConfig {
    std::string transform = "bin";  // "bin" or "smooth"
    double bin_length = 5.0;
    Method method = Method::Wgcna;  // wgcna or gmm
    int fixed_k = 5;
    int n_perm = 200;
    Seed seed;
};

struct CaseReport {
    std::vector<int> labels;
    int k = 0;
    int aging_cluster = -1;
    std::size_t aging_cluster_size = 0;
    double aging_abs_cor = 0.0;
    std::optional<ConfusionMetrics> confusion;  // only when a target was given
    std::vector<PreservationResult> preservation;  // one per test dataset
    std::vector<std::string> notes;

    std::string to_json() const;
};

/// transform -> cluster -> aging-cluster selection (eigengene for wgcna,
/// mean profile for gmm) -> optional confusion against a target set ->
/// optional Z_summary preservation against each test dataset (transformed
/// the same way).
CaseReport run_case_pipeline(const CrossSectionalMatrix& data, const CaseConfig& cfg,
                             const std::optional<GeneSet>& target = std::nullopt,
                             const std::vector<CrossSectionalMatrix>& test_sets = {});

/// JSON form of a fitted mixture (weights, means, covariance parameters,
/// BIC, objective trace).
std::string mixture_fit_to_json(const MixtureFit& fit);

} // namespace tcclust
