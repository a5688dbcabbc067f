// bench: time-course clustering benchmark harness.
//
// Subcommands:
//   sim       generate a simulation-study dataset (data + truth CSVs)
//   transform convert cross-sectional data to pseudo-longitudinal form
//   distance  emit a TOM / DTW / ACF representation as CSV
//   run       run a benchmark scenario (TOML config or flags)
//   case      transform -> cluster -> aging-cluster report on case data
//
// Exit codes: 0 success, 2 validation/parse error, 3 all replicates failed.

#include <CLI11.hpp>
#include <array>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tcclust/agetransform.hpp"
#include "tcclust/bench.hpp"
#include "tcclust/distance.hpp"
#include "tcclust/error.hpp"
#include "tcclust/io.hpp"
#include "tcclust/simgen.hpp"

namespace {

using namespace tcclust;

std::array<std::size_t, 5> to_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.size() != 5) throw ValidationError("expected exactly 5 cluster sizes");
    std::array<std::size_t, 5> out{};
    std::copy(sizes.begin(), sizes.end(), out.begin());
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << content;
}

struct SimArgs {
    int study = 1;
    int interval = 3;
    std::vector<std::size_t> sizes;
    double noise_sd = 0.4;
    std::uint64_t seed = 1;
    std::string out_data;
    std::string out_truth;
};

int run_sim(const SimArgs& args) {
    std::array<std::size_t, 5> sizes =
        args.sizes.empty() ? default_cluster_sizes(args.study, args.interval) : to_sizes(args.sizes);
    SimOutput sim = args.study == 1
                        ? simulate_study1({args.interval, sizes, args.noise_sd, Seed{args.seed}})
                        : simulate_study2({args.interval, sizes, args.noise_sd, Seed{args.seed}});
    write_time_course(sim.data, args.out_data);
    write_partition(sim.truth, sim.data.gene_ids(), args.out_truth);
    std::cout << "wrote " << sim.data.n_genes() << " genes x " << sim.data.n_times() << " time points to "
              << args.out_data << "\n";
    return 0;
}

struct TransformArgs {
    std::string data_path;
    std::string ages_path;
    std::string method = "bin";
    double bin_length = 5.0;
    std::string out_path;
};

int run_transform(const TransformArgs& args) {
    const CrossSectionalMatrix data = load_cross_sectional(args.data_path, args.ages_path);
    const TimeCourseMatrix out = args.method == "bin" ? bin_by_age(data, args.bin_length) : smooth_by_age(data);
    write_time_course(out, args.out_path);
    std::cout << "wrote " << out.n_genes() << " genes x " << out.n_times() << " pseudo-time points to "
              << args.out_path << "\n";
    return 0;
}

struct DistanceArgs {
    std::string data_path;
    std::string method = "tom";
    double beta = 6.0;
    int max_lag = -1;
    std::string out_path;
};

int run_distance(const DistanceArgs& args) {
    const TimeCourseMatrix data = load_time_course(args.data_path);
    if (args.method == "tom") {
        const SymmetricMatrix dist = tom_dissimilarity(topological_overlap(adjacency(data, {args.beta})));
        write_symmetric_matrix(dist, data.gene_ids(), args.out_path);
    } else if (args.method == "dtw") {
        write_symmetric_matrix(dtw_matrix(data), data.gene_ids(), args.out_path);
    } else if (args.method == "acf") {
        const Eigen::MatrixXd features = acf_features(data, args.max_lag);
        std::vector<std::string> names;
        for (Eigen::Index c = 0; c < features.cols(); ++c) names.push_back("lag_" + std::to_string(c + 1));
        write_feature_matrix(features, data.gene_ids(), names, args.out_path);
    } else {
        throw ValidationError("distance method must be tom, dtw or acf");
    }
    std::cout << "wrote " << args.method << " representation to " << args.out_path << "\n";
    return 0;
}

struct RunArgs {
    int study = 1;
    int interval = 3;
    std::vector<std::size_t> sizes;
    bool halved = false;
    int replicates = 20;  // desk scale; the paper used 100
    std::vector<std::string> methods{"wgcna", "gmm", "dtw"};
    int fixed_k = 5;
    double noise_sd = 0.4;
    std::uint64_t seed = 1;
    std::string out_json;
    std::string out_csv;
};

int run_run(const RunArgs& args) {
    ScenarioConfig cfg;
    cfg.study = args.study;
    cfg.interval = args.interval;
    cfg.cluster_sizes = args.sizes.empty() ? default_cluster_sizes(args.study, args.interval, args.halved)
                                           : to_sizes(args.sizes);
    cfg.n_replicates = args.replicates;
    for (const auto& name : args.methods) cfg.methods.push_back(method_from_string(name));
    cfg.fixed_k = args.fixed_k;
    cfg.noise_sd = args.noise_sd;
    cfg.seed = Seed{args.seed};

    const BenchReport report = run_benchmark(cfg);
    std::cout << report.to_text();
    if (!args.out_json.empty()) write_text_file(args.out_json, report.to_json());
    if (!args.out_csv.empty()) write_text_file(args.out_csv, report.to_csv());

    bool any_success = false;
    for (const auto& row : report.rows) any_success = any_success || row.failures < row.replicates;
    return any_success ? 0 : 3;
}

struct CaseArgs {
    std::string data_path;
    std::string ages_path;
    std::string transform = "bin:5";
    std::string method = "wgcna";
    std::string target_path;
    std::vector<std::string> test_paths;
    std::vector<std::string> test_ages_paths;
    int fixed_k = 5;
    int n_perm = 200;
    std::uint64_t seed = 1;
    std::string out_json;
};

int run_case(const CaseArgs& args) {
    const CrossSectionalMatrix data = load_cross_sectional(args.data_path, args.ages_path);

    CaseConfig cfg;
    const auto colon = args.transform.find(':');
    cfg.transform = args.transform.substr(0, colon);
    if (colon != std::string::npos) cfg.bin_length = std::stod(args.transform.substr(colon + 1));
    cfg.method = method_from_string(args.method);
    cfg.fixed_k = args.fixed_k;
    cfg.n_perm = args.n_perm;
    cfg.seed = Seed{args.seed};

    std::optional<GeneSet> target;
    if (!args.target_path.empty()) target = load_gene_set(args.target_path);

    if (args.test_paths.size() != args.test_ages_paths.size())
        throw ValidationError("--test and --test-ages must be given in pairs");
    std::vector<CrossSectionalMatrix> test_sets;
    for (std::size_t i = 0; i < args.test_paths.size(); ++i)
        test_sets.push_back(load_cross_sectional(args.test_paths[i], args.test_ages_paths[i]));

    const CaseReport report = run_case_pipeline(data, cfg, target, test_sets);
    std::cout << report.to_json() << "\n";
    if (!args.out_json.empty()) write_text_file(args.out_json, report.to_json());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-course clustering benchmark harness"};
    app.require_subcommand(1);

    SimArgs sim_args;
    auto* sim = app.add_subcommand("sim", "generate a simulation-study dataset");
    sim->add_option("--study", sim_args.study, "study number (1 or 2)")->check(CLI::IsMember({1, 2}));
    sim->add_option("--interval", sim_args.interval, "sampling interval");
    sim->add_option("--sizes", sim_args.sizes, "five cluster sizes")->expected(5);
    sim->add_option("--noise-sd", sim_args.noise_sd, "noise standard deviation");
    sim->add_option("--seed", sim_args.seed, "run seed");
    sim->add_option("--out-data", sim_args.out_data, "output data CSV")->required();
    sim->add_option("--out-truth", sim_args.out_truth, "output truth-label CSV")->required();

    TransformArgs transform_args;
    auto* transform = app.add_subcommand("transform", "pseudo-longitudinal transform of cross-sectional data");
    transform->add_option("--data", transform_args.data_path, "cross-sectional values CSV")->required();
    transform->add_option("--ages", transform_args.ages_path, "subject_id,age CSV")->required();
    transform->add_option("--method", transform_args.method, "bin or smooth")
        ->check(CLI::IsMember({"bin", "smooth"}));
    transform->add_option("--bin-length", transform_args.bin_length, "bin width in years");
    transform->add_option("--out", transform_args.out_path, "output time-course CSV")->required();

    DistanceArgs distance_args;
    auto* distance = app.add_subcommand("distance", "emit a distance/feature representation");
    distance->add_option("--data", distance_args.data_path, "time-course CSV")->required();
    distance->add_option("--method", distance_args.method, "tom, dtw or acf")
        ->check(CLI::IsMember({"tom", "dtw", "acf"}));
    distance->add_option("--beta", distance_args.beta, "adjacency power");
    distance->add_option("--max-lag", distance_args.max_lag, "autocorrelation lag cap");
    distance->add_option("--out", distance_args.out_path, "output CSV")->required();

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run a benchmark scenario");
    run->set_config("--config", "", "TOML config mirroring the scenario fields");
    run->add_option("--study", run_args.study, "study number (1 or 2)")->check(CLI::IsMember({1, 2}));
    run->add_option("--interval", run_args.interval, "sampling interval");
    run->add_option("--cluster_sizes,--sizes", run_args.sizes, "five cluster sizes")->expected(5);
    run->add_flag("--halved", run_args.halved, "halve the default cluster sizes");
    run->add_option("--n_replicates,--replicates", run_args.replicates, "replicate count");
    run->add_option("--methods", run_args.methods, "methods to run")->delimiter(',');
    run->add_option("--fixed_K,--fixed-k", run_args.fixed_k, "cluster count for every method");
    run->add_option("--noise_sd,--noise-sd", run_args.noise_sd, "noise standard deviation");
    run->add_option("--seed", run_args.seed, "run seed");
    run->add_option("--out-json", run_args.out_json, "write the report as JSON");
    run->add_option("--out-csv", run_args.out_csv, "write per-replicate ARIs as CSV");

    CaseArgs case_args;
    auto* case_cmd = app.add_subcommand("case", "aging-cluster case pipeline");
    case_cmd->add_option("--data", case_args.data_path, "cross-sectional values CSV")->required();
    case_cmd->add_option("--ages", case_args.ages_path, "subject_id,age CSV")->required();
    case_cmd->add_option("--transform", case_args.transform, "bin:<years> or smooth");
    case_cmd->add_option("--method", case_args.method, "wgcna or gmm")
        ->check(CLI::IsMember({"wgcna", "gmm"}));
    case_cmd->add_option("--target", case_args.target_path, "target gene set (one id per line)");
    case_cmd->add_option("--test", case_args.test_paths, "test dataset values CSV (repeatable)");
    case_cmd->add_option("--test-ages", case_args.test_ages_paths, "test dataset ages CSV (repeatable)");
    case_cmd->add_option("--k", case_args.fixed_k, "cluster count");
    case_cmd->add_option("--n-perm", case_args.n_perm, "preservation permutations");
    case_cmd->add_option("--seed", case_args.seed, "run seed");
    case_cmd->add_option("--out-json", case_args.out_json, "write the report as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_sim(sim_args);
        if (transform->parsed()) return run_transform(transform_args);
        if (distance->parsed()) return run_distance(distance_args);
        if (run->parsed()) return run_run(run_args);
        if (case_cmd->parsed()) return run_case(case_args);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
