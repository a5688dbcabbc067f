#include "tcclust/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tcclust/agetransform.hpp"
#include "tcclust/distance.hpp"
#include "tcclust/error.hpp"
#include "tcclust/hclust.hpp"
#include "tcclust/simgen.hpp"

namespace tcclust {

std::string to_string(Method method) {
    switch (method) {
    case Method::Gmm: return "gmm";
    case Method::Mfda: return "mfda";
    case Method::Fcm: return "fcm";
    case Method::Wgcna: return "wgcna";
    case Method::Dtw: return "dtw";
    default: return "acf";
    }
}

Method method_from_string(const std::string& name) {
    if (name == "gmm") return Method::Gmm;
    if (name == "mfda") return Method::Mfda;
    if (name == "fcm") return Method::Fcm;
    if (name == "wgcna") return Method::Wgcna;
    if (name == "dtw") return Method::Dtw;
    if (name == "acf") return Method::Acf;
    throw ValidationError("unknown method '" + name + "'");
}

std::string ScenarioConfig::tag() const {
    return "S" + std::to_string(study) + "I" + std::to_string(interval);
}

std::array<std::size_t, 5> default_cluster_sizes(int study, int interval, bool halved) {
    // paper scale: the small sizes belong to the dense short-interval runs
    std::array<std::size_t, 5> sizes{};
    const bool small = (study == 1 && interval <= 2) || (study == 2 && interval == 1);
    sizes = small ? std::array<std::size_t, 5>{25, 50, 100, 150, 200}
                  : std::array<std::size_t, 5>{50, 100, 200, 300, 400};
    if (halved)
        for (auto& s : sizes) s = std::max<std::size_t>(1, s / 2);
    return sizes;
}

namespace {

Partition wgcna_partition(const TimeCourseMatrix& data, int fixed_k) {
    const SymmetricMatrix adj = adjacency(data);
    const SymmetricMatrix tom = topological_overlap(adj);
    const SymmetricMatrix dist = tom_dissimilarity(tom);
    return cut_k(agglomerate(dist, Linkage::Average), fixed_k);
}

Partition acf_partition(const TimeCourseMatrix& data, int fixed_k) {
    const Eigen::MatrixXd features = acf_features(data);
    // lags reuse the wgcna pipeline as the clustering backend
    std::vector<double> lag_grid;
    for (Eigen::Index r = 0; r < features.cols(); ++r) lag_grid.push_back(static_cast<double>(r + 1));
    const TimeCourseMatrix feature_matrix(TimeGrid(lag_grid), features, data.gene_ids());
    return wgcna_partition(feature_matrix, fixed_k);
}

} // namespace

MethodRun run_method(const TimeCourseMatrix& data, Method method, int fixed_k, Seed seed) {
    const auto start = std::chrono::steady_clock::now();
    MethodRun run{Partition(std::vector<int>(data.n_genes(), 0), 1), 0.0, 0};

    switch (method) {
    case Method::Wgcna:
        run.partition = wgcna_partition(data, fixed_k);
        break;
    case Method::Dtw:
        run.partition = cut_k(agglomerate(dtw_matrix(data), Linkage::Average), fixed_k);
        break;
    case Method::Acf:
        run.partition = acf_partition(data, fixed_k);
        break;
    case Method::Gmm: {
        GmmSpec spec;
        spec.k = fixed_k;
        run.partition = posterior_assign(fit_gmm(data, spec, seed), &run.components_dropped);
        break;
    }
    case Method::Mfda: {
        MfdaSpec spec;
        spec.k = fixed_k;
        run.partition = posterior_assign(fit_mfda(data, spec, seed), &run.components_dropped);
        break;
    }
    case Method::Fcm: {
        FcmSpec spec;
        spec.k = fixed_k;
        run.partition = posterior_assign(fit_fcm(data, spec, seed), &run.components_dropped);
        break;
    }
    }

    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

namespace {

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double idx = prob * (static_cast<double>(values.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    const auto hi = static_cast<std::size_t>(std::ceil(idx));
    const double frac = idx - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct ReplicateOutcome {
    std::vector<double> aris;       // per method; NaN marks failure
    std::vector<double> seconds;
};

} // namespace

BenchReport run_benchmark(const ScenarioConfig& cfg) {
    if (cfg.methods.empty()) throw ValidationError("method list is empty");
    if (cfg.n_replicates < 1) throw ValidationError("need at least one replicate");
    if (cfg.study != 1 && cfg.study != 2) throw ValidationError("study must be 1 or 2");
    if (cfg.fixed_k < 1) throw ValidationError("fixed_K must be positive");

    std::array<std::size_t, 5> sizes = cfg.cluster_sizes;
    bool all_zero = true;
    for (auto s : sizes) all_zero = all_zero && s == 0;
    if (all_zero) sizes = default_cluster_sizes(cfg.study, cfg.interval);

    // validate the interval eagerly so a bad config fails before spawning work
    if (cfg.study == 1) {
        if (cfg.interval != 1 && cfg.interval != 2 && cfg.interval != 3 && cfg.interval != 6)
            throw ValidationError("study-1 interval must be one of 1, 2, 3, 6");
    } else if (cfg.interval != 1 && cfg.interval != 2 && cfg.interval != 4) {
        throw ValidationError("study-2 interval must be one of 1, 2, 4");
    }

    const Rng master = Rng(cfg.seed).substream(0xBEu);
    const auto n_methods = cfg.methods.size();
    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.n_replicates));

    const auto run_replicate = [&](int rep) {
        const Rng rep_rng = master.substream(static_cast<std::uint64_t>(rep));
        Rng sim_rng = rep_rng.substream(0);
        const Seed sim_seed{sim_rng.next_u64()};

        SimOutput sim = cfg.study == 1 ? simulate_study1({cfg.interval, sizes, cfg.noise_sd, sim_seed})
                                       : simulate_study2({cfg.interval, sizes, cfg.noise_sd, sim_seed});

        ReplicateOutcome outcome;
        outcome.aris.assign(n_methods, std::numeric_limits<double>::quiet_NaN());
        outcome.seconds.assign(n_methods, 0.0);
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            Rng method_rng = rep_rng.substream(1 + mi);
            const Seed method_seed{method_rng.next_u64()};
            try {
                const MethodRun run = run_method(sim.data, cfg.methods[mi], cfg.fixed_k, method_seed);
                outcome.aris[mi] = adjusted_rand_index(run.partition, sim.truth);
                outcome.seconds[mi] = run.seconds;
            } catch (const Error&) {
                // failure recorded by the NaN marker; scenario continues
            }
        }
        outcomes[static_cast<std::size_t>(rep)] = std::move(outcome);
    };

    const unsigned n_workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(cfg.n_replicates));
    if (n_workers <= 1) {
        for (int rep = 0; rep < cfg.n_replicates; ++rep) run_replicate(rep);
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        for (unsigned w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (int rep = next.fetch_add(1); rep < cfg.n_replicates; rep = next.fetch_add(1))
                    run_replicate(rep);
            });
        }
        for (auto& worker : workers) worker.join();
    }

    BenchReport report;
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
        BenchRow row;
        row.scenario = cfg.tag();
        row.method = to_string(cfg.methods[mi]);
        row.replicates = cfg.n_replicates;
        for (int rep = 0; rep < cfg.n_replicates; ++rep) {
            const auto& outcome = outcomes[static_cast<std::size_t>(rep)];
            if (std::isnan(outcome.aris[mi])) {
                ++row.failures;
            } else {
                row.aris.push_back(outcome.aris[mi]);
                row.total_seconds += outcome.seconds[mi];
            }
        }
        if (!row.aris.empty()) {
            row.median_ari = quantile(row.aris, 0.5);
            row.iqr_low = quantile(row.aris, 0.25);
            row.iqr_high = quantile(row.aris, 0.75);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string BenchReport::to_text() const {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %-7s %10s %18s %12s %6s %5s\n", "scenario", "method", "median",
                  "IQR", "seconds", "reps", "fail");
    out << line;
    for (const auto& row : rows) {
        char iqr[40];
        std::snprintf(iqr, sizeof(iqr), "(%.3f, %.3f)", row.iqr_low, row.iqr_high);
        std::snprintf(line, sizeof(line), "%-8s %-7s %10.3f %18s %12.2f %6d %5d\n", row.scenario.c_str(),
                      row.method.c_str(), row.median_ari, iqr, row.total_seconds, row.replicates, row.failures);
        out << line;
    }
    return out.str();
}

std::string BenchReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
        rows_json.push_back({{"scenario", row.scenario},
                             {"method", row.method},
                             {"median_ari", row.median_ari},
                             {"iqr_low", row.iqr_low},
                             {"iqr_high", row.iqr_high},
                             {"total_seconds", row.total_seconds},
                             {"replicates", row.replicates},
                             {"failures", row.failures},
                             {"aris", row.aris}});
    }
    return nlohmann::json{{"rows", rows_json}}.dump(2);
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    out << "scenario,method,replicate,ari\n";
    for (const auto& row : rows)
        for (std::size_t r = 0; r < row.aris.size(); ++r)
            out << row.scenario << ',' << row.method << ',' << r << ',' << row.aris[r] << '\n';
    return out.str();
}

CaseReport run_case_pipeline(const CrossSectionalMatrix& data, const CaseConfig& cfg,
                             const std::optional<GeneSet>& target,
                             const std::vector<CrossSectionalMatrix>& test_sets) {
    if (cfg.method != Method::Wgcna && cfg.method != Method::Gmm)
        throw ValidationError("case pipeline supports the wgcna and gmm methods");
    if (cfg.transform != "bin" && cfg.transform != "smooth")
        throw ValidationError("transform must be 'bin' or 'smooth'");

    const auto apply_transform = [&](const CrossSectionalMatrix& input) {
        try {
            return cfg.transform == "bin" ? bin_by_age(input, cfg.bin_length) : smooth_by_age(input);
        } catch (const Error& e) {
            throw ValidationError(std::string("transform stage: ") + e.what());
        }
    };

    const TimeCourseMatrix transformed = apply_transform(data);

    CaseReport report;
    std::vector<Eigen::VectorXd> representatives;
    Partition part(std::vector<int>(transformed.n_genes(), 0), 1);
    if (cfg.method == Method::Wgcna) {
        try {
            part = wgcna_partition(transformed, cfg.fixed_k);
        } catch (const Error& e) {
            throw ValidationError(std::string("cluster stage: ") + e.what());
        }
        for (int c = 0; c < part.k(); ++c)
            representatives.push_back(eigengene(transformed, part, c).curve);
    } else {
        GmmSpec spec;
        spec.k = cfg.fixed_k;
        MixtureFit fit = fit_gmm(transformed, spec, cfg.seed);
        int dropped = 0;
        part = posterior_assign(fit, &dropped);
        if (dropped > 0)
            report.notes.push_back(std::to_string(dropped) + " mixture component(s) won no gene and were dropped");
        // mean profiles of the surviving components, in compacted order
        // (same argmax-with-lowest-tie rule as posterior_assign)
        std::vector<bool> used(static_cast<std::size_t>(fit.posteriors.cols()), false);
        for (Eigen::Index i = 0; i < fit.posteriors.rows(); ++i) {
            int arg = 0;
            double best = fit.posteriors(i, 0);
            for (int c = 1; c < fit.posteriors.cols(); ++c) {
                if (fit.posteriors(i, c) > best) {
                    best = fit.posteriors(i, c);
                    arg = c;
                }
            }
            used[static_cast<std::size_t>(arg)] = true;
        }
        for (int c = 0; c < fit.posteriors.cols(); ++c)
            if (used[static_cast<std::size_t>(c)]) representatives.push_back(fit.mean_curves.row(c).transpose());
    }

    report.labels = part.labels();
    report.k = part.k();
    report.aging_cluster = pick_aging_cluster(representatives, transformed.grid());
    report.aging_cluster_size = part.members_of(report.aging_cluster).size();
    {
        const Eigen::VectorXd age = transformed.grid().as_vector();
        const Eigen::VectorXd rep = representatives[static_cast<std::size_t>(report.aging_cluster)];
        const Eigen::VectorXd cx = rep.array() - rep.mean();
        const Eigen::VectorXd cy = age.array() - age.mean();
        report.aging_abs_cor = std::abs(cx.dot(cy)) / (cx.norm() * cy.norm());
    }

    if (target) {
        report.confusion = confusion_vs_geneset(part, report.aging_cluster, *target, transformed.gene_ids());
    } else {
        report.notes.push_back("no target gene set given; confusion stage skipped");
    }

    std::uint64_t test_index = 0;
    for (const auto& test_set : test_sets) {
        const TimeCourseMatrix test_transformed = apply_transform(test_set);
        Rng rng = Rng(cfg.seed).substream(0xCA5Eu + test_index++);
        report.preservation.push_back(
            z_summary(transformed, test_transformed, part, cfg.n_perm, Seed{rng.next_u64()}));
    }
    return report;
}

namespace {

nlohmann::json confusion_to_json(const ConfusionMetrics& confusion) {
    nlohmann::json out{{"tp", confusion.true_positive},
                       {"fp", confusion.false_positive},
                       {"tn", confusion.true_negative},
                       {"fn", confusion.false_negative}};
    const auto put = [&](const char* key, const std::optional<double>& value) {
        if (value) out[key] = *value;
        else out[key] = nullptr;
    };
    put("sensitivity", confusion.sensitivity);
    put("specificity", confusion.specificity);
    put("accuracy", confusion.accuracy);
    put("precision", confusion.precision);
    return out;
}

nlohmann::json preservation_to_json(const PreservationResult& preservation) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& row : preservation.clusters) {
        clusters.push_back({{"cluster", row.cluster},
                            {"size", row.size},
                            {"z_density", row.z_density},
                            {"z_connectivity", row.z_connectivity},
                            {"z_summary", row.z_summary},
                            {"band", to_string(row.band)},
                            {"skipped", row.skipped},
                            {"degenerate_null", row.degenerate_null}});
    }
    return nlohmann::json{{"n_permutations", preservation.n_permutations}, {"clusters", clusters}};
}

} // namespace

std::string CaseReport::to_json() const {
    nlohmann::json out{{"k", k},
                       {"aging_cluster", aging_cluster},
                       {"aging_cluster_size", aging_cluster_size},
                       {"aging_abs_cor", aging_abs_cor},
                       {"labels", labels},
                       {"notes", notes}};
    out["confusion"] = confusion ? confusion_to_json(*confusion) : nlohmann::json(nullptr);
    nlohmann::json pres = nlohmann::json::array();
    for (const auto& p : preservation) pres.push_back(preservation_to_json(p));
    out["preservation"] = pres;
    return out.dump(2);
}

std::string mixture_fit_to_json(const MixtureFit& fit) {
    nlohmann::json out;
    out["method"] = fit.method;
    out["model"] = fit.model_label;
    out["weights"] = std::vector<double>(fit.weights.data(), fit.weights.data() + fit.weights.size());
    nlohmann::json means = nlohmann::json::array();
    for (Eigen::Index c = 0; c < fit.mean_curves.rows(); ++c) {
        means.push_back(std::vector<double>(fit.mean_curves.row(c).data(),
                                            fit.mean_curves.row(c).data() + fit.mean_curves.cols()));
    }
    out["mean_curves"] = means;
    out["log_likelihood"] = fit.log_likelihood;
    out["free_parameters"] = fit.free_parameters;
    out["bic"] = fit.bic;
    out["iterations"] = fit.iterations;
    out["converged"] = fit.converged;
    out["rescues"] = fit.rescues;
    out["objective_trace"] = fit.objective_trace;
    if (fit.gmm) {
        nlohmann::json params;
        params["covariance_model"] = to_string(fit.gmm->model);
        if (!fit.gmm->diag_variances.empty()) {
            nlohmann::json diags = nlohmann::json::array();
            for (const auto& v : fit.gmm->diag_variances)
                diags.push_back(std::vector<double>(v.data(), v.data() + v.size()));
            params["diag_variances"] = diags;
        }
        if (!fit.gmm->covariances.empty()) {
            nlohmann::json covs = nlohmann::json::array();
            for (const auto& cov : fit.gmm->covariances) {
                nlohmann::json rows = nlohmann::json::array();
                for (Eigen::Index r = 0; r < cov.rows(); ++r)
                    rows.push_back(std::vector<double>(cov.row(r).data(), cov.row(r).data() + cov.cols()));
                covs.push_back(rows);
            }
            params["covariances"] = covs;
        }
        out["gmm"] = params;
    }
    if (fit.mfda) {
        out["mfda"] = {{"sigma_b2", std::vector<double>(fit.mfda->sigma_b2.data(),
                                                        fit.mfda->sigma_b2.data() + fit.mfda->sigma_b2.size())},
                       {"sigma2", fit.mfda->sigma2},
                       {"penalty_lambda", fit.mfda->penalty_lambda},
                       {"basis_size", fit.mfda->basis_size}};
    }
    if (fit.fcm) {
        out["fcm"] = {{"sigma2", fit.fcm->sigma2},
                      {"basis_size", fit.fcm->basis_size},
                      {"reduced_dim", fit.fcm->reduced_dim},
                      {"d_diag", std::vector<double>(fit.fcm->d_diag.data(),
                                                     fit.fcm->d_diag.data() + fit.fcm->d_diag.size())}};
    }
    return out.dump(2);
}

} // namespace tcclust
