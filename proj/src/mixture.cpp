#include "tcclust/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "tcclust/error.hpp"

namespace tcclust {

Partition posterior_assign(const MixtureFit& fit, int* components_dropped) {
    const Eigen::Index p = fit.posteriors.rows();
    const auto k = static_cast<int>(fit.posteriors.cols());
    if (p < 1 || k < 1) throw ValidationError("fit carries no posteriors");

    std::vector<int> raw(static_cast<std::size_t>(p));
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    for (Eigen::Index i = 0; i < p; ++i) {
        int arg = 0;
        double best = fit.posteriors(i, 0);
        for (int c = 1; c < k; ++c) {
            if (fit.posteriors(i, c) > best) {  // strict: ties keep the lowest index
                best = fit.posteriors(i, c);
                arg = c;
            }
        }
        raw[static_cast<std::size_t>(i)] = arg;
        used[static_cast<std::size_t>(arg)] = true;
    }

    // compact labels over the components that actually won a gene
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    std::vector<int> kept;
    int next = 0;
    for (int c = 0; c < k; ++c) {
        if (used[static_cast<std::size_t>(c)]) {
            remap[static_cast<std::size_t>(c)] = next++;
            kept.push_back(c);
        }
    }
    if (components_dropped) *components_dropped = k - next;

    std::vector<int> labels(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i)
        labels[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(raw[static_cast<std::size_t>(i)])];

    Eigen::MatrixXd posteriors(p, next);
    for (int c = 0; c < next; ++c) posteriors.col(c) = fit.posteriors.col(kept[static_cast<std::size_t>(c)]);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double row_sum = posteriors.row(i).sum();
        if (row_sum > 0.0) posteriors.row(i) /= row_sum;
    }
    return Partition(std::move(labels), next, std::move(posteriors));
}

namespace {

template <typename SpecT, typename FitFn>
BicSelection run_bic_grid(const SpecT& base, const std::vector<int>& k_range, Seed seed,
                          const std::string& model_label, FitFn&& fit_one) {
    if (k_range.empty()) throw ValidationError("K range is empty");

    BicSelection selection;
    bool have_best = false;
    std::uint64_t cell = 0;
    for (int k : k_range) {
        SpecT spec = base;
        spec.k = k;
        BicEntry entry;
        entry.k = k;
        entry.model = model_label;
        try {
            MixtureFit fit = fit_one(spec, Rng(seed).substream(cell));
            entry.log_likelihood = fit.log_likelihood;
            entry.free_parameters = fit.free_parameters;
            entry.bic = fit.bic;
            entry.converged = fit.converged;
            entry.ok = true;
            if (!have_best || fit.bic < selection.best.bic) {
                selection.best = std::move(fit);
                have_best = true;
            }
        } catch (const Error& e) {
            entry.error = e.what();
        }
        selection.table.push_back(std::move(entry));
        ++cell;
    }
    if (!have_best) throw FitError("select_k_bic: every fit in the grid failed");
    return selection;
}

Seed seed_from_rng(const Rng& base) {
    Rng copy = base;
    return Seed{copy.next_u64()};
}

} // namespace

BicSelection select_k_bic(const TimeCourseMatrix& data, const GmmSpec& base, const std::vector<int>& k_range,
                          Seed seed) {
    if (k_range.empty()) throw ValidationError("K range is empty");

    static constexpr GmmCovarianceModel kModels[] = {
        GmmCovarianceModel::SphericalEqual,   GmmCovarianceModel::SphericalVarying,
        GmmCovarianceModel::DiagonalEqual,    GmmCovarianceModel::DiagonalVarying,
        GmmCovarianceModel::FullVarying,
    };

    BicSelection selection;
    bool have_best = false;
    std::uint64_t cell = 0;
    for (int k : k_range) {
        for (const auto model : kModels) {
            GmmSpec spec = base;
            spec.k = k;
            spec.covariance_model = model;
            BicEntry entry;
            entry.k = k;
            entry.model = to_string(model);
            try {
                MixtureFit fit = fit_gmm(data, spec, seed_from_rng(Rng(seed).substream(cell)));
                entry.log_likelihood = fit.log_likelihood;
                entry.free_parameters = fit.free_parameters;
                entry.bic = fit.bic;
                entry.converged = fit.converged;
                entry.ok = true;
                if (!have_best || fit.bic < selection.best.bic) {
                    selection.best = std::move(fit);
                    have_best = true;
                }
            } catch (const Error& e) {
                entry.error = e.what();
            }
            selection.table.push_back(std::move(entry));
            ++cell;
        }
    }
    if (!have_best) throw FitError("select_k_bic: every fit in the grid failed");
    return selection;
}

BicSelection select_k_bic(const TimeCourseMatrix& data, const MfdaSpec& base, const std::vector<int>& k_range,
                          Seed seed) {
    return run_bic_grid(base, k_range, seed, "random-intercept",
                        [&](const MfdaSpec& spec, const Rng& rng) {
                            return fit_mfda(data, spec, seed_from_rng(rng));
                        });
}

BicSelection select_k_bic(const TimeCourseMatrix& data, const FcmSpec& base, const std::vector<int>& k_range,
                          Seed seed) {
    return run_bic_grid(base, k_range, seed, "reduced-rank",
                        [&](const FcmSpec& spec, const Rng& rng) {
                            return fit_fcm(data, spec, seed_from_rng(rng));
                        });
}

BicSelection select_gmm_model_bic(const TimeCourseMatrix& data, const GmmSpec& base, Seed seed) {
    return select_k_bic(data, base, std::vector<int>{base.k}, seed);
}

} // namespace tcclust
