#include "tcclust/hclust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tcclust/error.hpp"

namespace tcclust {

Linkage linkage_from_string(const std::string& name) {
    if (name == "average") return Linkage::Average;
    if (name == "complete") return Linkage::Complete;
    if (name == "single") return Linkage::Single;
    throw ValidationError("unknown linkage '" + name + "' (expected average, complete or single)");
}

Dendrogram::Dendrogram(std::vector<Merge> merges, std::size_t n_leaves)
    : merges_(std::move(merges)), n_leaves_(n_leaves) {
    if (merges_.size() + 1 != n_leaves_) throw ValidationError("dendrogram must hold exactly p-1 merges");

    // left-to-right traversal from the final merge
    leaf_order_.reserve(n_leaves_);
    std::vector<int> stack;
    stack.push_back(static_cast<int>(n_leaves_ + merges_.size() - 1));
    while (!stack.empty()) {
        const int node = stack.back();
        stack.pop_back();
        if (node < static_cast<int>(n_leaves_)) {
            leaf_order_.push_back(node);
        } else {
            const auto& merge = merges_[static_cast<std::size_t>(node) - n_leaves_];
            stack.push_back(merge.right);
            stack.push_back(merge.left);
        }
    }
}

std::string Dendrogram::to_newick(const std::vector<std::string>& leaf_names) const {
    if (leaf_names.size() != n_leaves_) throw ValidationError("leaf name count mismatch");
    std::vector<std::string> rendered(leaf_names);
    rendered.resize(n_leaves_ + merges_.size());
    for (std::size_t i = 0; i < merges_.size(); ++i) {
        std::ostringstream node;
        node << '(' << rendered[static_cast<std::size_t>(merges_[i].left)] << ','
             << rendered[static_cast<std::size_t>(merges_[i].right)] << "):" << merges_[i].height;
        rendered[n_leaves_ + i] = node.str();
    }
    return rendered.back() + ";";
}

Dendrogram agglomerate(const SymmetricMatrix& dist, Linkage linkage) {
    const auto p = static_cast<int>(dist.dim());
    if (p < 2) throw ValidationError("agglomeration needs at least 2 points");

    // working copy indexed by active slot; node ids grow past p as merges happen
    Eigen::MatrixXd d = dist.entries();
    std::vector<int> node_id(static_cast<std::size_t>(p));
    std::vector<int> size(static_cast<std::size_t>(p), 1);
    std::vector<bool> active(static_cast<std::size_t>(p), true);
    for (int i = 0; i < p; ++i) node_id[static_cast<std::size_t>(i)] = i;

    std::vector<Dendrogram::Merge> merges;
    merges.reserve(static_cast<std::size_t>(p - 1));

    for (int step = 0; step < p - 1; ++step) {
        // global scan; strict < keeps the lowest active-id pair on ties
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bh = -1;
        for (int i = 0; i < p; ++i) {
            if (!active[static_cast<std::size_t>(i)]) continue;
            for (int h = i + 1; h < p; ++h) {
                if (!active[static_cast<std::size_t>(h)]) continue;
                if (d(i, h) < best) {
                    best = d(i, h);
                    bi = i;
                    bh = h;
                }
            }
        }

        // Lance-Williams update into slot bi; slot bh retires
        for (int u = 0; u < p; ++u) {
            if (!active[static_cast<std::size_t>(u)] || u == bi || u == bh) continue;
            double updated;
            switch (linkage) {
            case Linkage::Average: {
                const auto na = static_cast<double>(size[static_cast<std::size_t>(bi)]);
                const auto nb = static_cast<double>(size[static_cast<std::size_t>(bh)]);
                updated = (na * d(bi, u) + nb * d(bh, u)) / (na + nb);
                break;
            }
            case Linkage::Complete:
                updated = std::max(d(bi, u), d(bh, u));
                break;
            default:
                updated = std::min(d(bi, u), d(bh, u));
                break;
            }
            d(bi, u) = updated;
            d(u, bi) = updated;
        }

        merges.push_back({std::min(node_id[static_cast<std::size_t>(bi)], node_id[static_cast<std::size_t>(bh)]),
                          std::max(node_id[static_cast<std::size_t>(bi)], node_id[static_cast<std::size_t>(bh)]),
                          best});
        node_id[static_cast<std::size_t>(bi)] = p + step;
        size[static_cast<std::size_t>(bi)] += size[static_cast<std::size_t>(bh)];
        active[static_cast<std::size_t>(bh)] = false;
    }

    return Dendrogram(std::move(merges), static_cast<std::size_t>(p));
}

Partition cut_k(const Dendrogram& dend, int k) {
    const auto p = static_cast<int>(dend.n_leaves());
    if (k < 1 || k > p) throw ValidationError("K must lie in 1..p");

    // union-find over the first p-K merges
    std::vector<int> parent(static_cast<std::size_t>(2 * p - 1));
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    const auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int i = 0; i < p - k; ++i) {
        const auto& merge = dend.merges()[static_cast<std::size_t>(i)];
        const int node = p + i;
        parent[static_cast<std::size_t>(find(merge.left))] = node;
        parent[static_cast<std::size_t>(find(merge.right))] = node;
    }

    // labels by leaf-order of first appearance
    std::vector<int> root_label(static_cast<std::size_t>(2 * p - 1), -1);
    std::vector<int> labels(static_cast<std::size_t>(p), -1);
    int next = 0;
    for (int leaf : dend.leaf_order()) {
        const int root = find(leaf);
        if (root_label[static_cast<std::size_t>(root)] < 0) root_label[static_cast<std::size_t>(root)] = next++;
        labels[static_cast<std::size_t>(leaf)] = root_label[static_cast<std::size_t>(root)];
    }
    return Partition(std::move(labels), k);
}

namespace {

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    std::nth_element(values.begin(), values.begin() + n / 2, values.end());
    double upper = values[n / 2];
    if (n % 2 == 1) return upper;
    std::nth_element(values.begin(), values.begin() + n / 2 - 1, values.end());
    return 0.5 * (values[n / 2 - 1] + upper);
}

} // namespace

Partition cut_k_pooled(const Dendrogram& dend, const SymmetricMatrix& dist, int k, int min_size) {
    const auto p = static_cast<int>(dend.n_leaves());
    if (k < 1 || k > p) throw ValidationError("K must lie in 1..p");
    if (dist.dim() != dend.n_leaves()) throw ValidationError("distance matrix does not match dendrogram");
    if (min_size <= 0) min_size = std::max(3, std::min(20, p / 25));
    if (k == 1) return Partition(std::vector<int>(static_cast<std::size_t>(p), 0), 1);
    const int target = k - 1;

    // subtree leaf counts per node
    std::vector<int> node_size(static_cast<std::size_t>(2 * p - 1), 1);
    for (int i = 0; i < p - 1; ++i) {
        const auto& merge = dend.merges()[static_cast<std::size_t>(i)];
        node_size[static_cast<std::size_t>(p + i)] = node_size[static_cast<std::size_t>(merge.left)] +
                                                     node_size[static_cast<std::size_t>(merge.right)];
    }

    // L(j): sizeable-cluster count when the tree is cut into j clusters,
    // walked by undoing merges from the top
    std::vector<int> sizeable(static_cast<std::size_t>(p + 1), 0);
    int large = node_size[static_cast<std::size_t>(2 * p - 2)] >= min_size ? 1 : 0;
    sizeable[1] = large;
    for (int j = 2; j <= p; ++j) {
        const auto& merge = dend.merges()[static_cast<std::size_t>(p - j)];
        const int parent_node = p + (p - j);
        large -= node_size[static_cast<std::size_t>(parent_node)] >= min_size ? 1 : 0;
        large += node_size[static_cast<std::size_t>(merge.left)] >= min_size ? 1 : 0;
        large += node_size[static_cast<std::size_t>(merge.right)] >= min_size ? 1 : 0;
        sizeable[static_cast<std::size_t>(j)] = large;
    }
    int best = 0;
    for (int j = 1; j <= p; ++j) best = std::max(best, std::min(sizeable[static_cast<std::size_t>(j)], target));
    if (best == 0) return Partition(std::vector<int>(static_cast<std::size_t>(p), 0), 1);

    // candidate levels: the first cut of each maximal plateau achieving the
    // best capped sizeable-cluster count
    std::vector<int> candidates;
    for (int j = 1; j <= p; ++j) {
        if (std::min(sizeable[static_cast<std::size_t>(j)], target) != best) continue;
        if (candidates.empty() || std::min(sizeable[static_cast<std::size_t>(j - 1)], target) != best ||
            sizeable[static_cast<std::size_t>(j - 1)] != sizeable[static_cast<std::size_t>(j)])
            candidates.push_back(j);
    }
    if (candidates.size() > 60) {  // bound the scoring work on ragged trees
        std::vector<int> sampled;
        const double step = static_cast<double>(candidates.size() - 1) / 59.0;
        for (int s = 0; s < 60; ++s) {
            const int idx = static_cast<int>(std::llround(s * step));
            if (sampled.empty() || candidates[static_cast<std::size_t>(idx)] != sampled.back())
                sampled.push_back(candidates[static_cast<std::size_t>(idx)]);
        }
        candidates = std::move(sampled);
    }

    // sizeable-cluster labels at one cut level (-1 = small fragment)
    const auto materialize = [&](int cut, std::vector<int>& labels) {
        std::vector<int> parent(static_cast<std::size_t>(2 * p - 1));
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
        const auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) {
                parent[static_cast<std::size_t>(x)] =
                    parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                x = parent[static_cast<std::size_t>(x)];
            }
            return x;
        };
        for (int i = 0; i < p - cut; ++i) {
            const auto& merge = dend.merges()[static_cast<std::size_t>(i)];
            const int node = p + i;
            parent[static_cast<std::size_t>(find(merge.left))] = node;
            parent[static_cast<std::size_t>(find(merge.right))] = node;
        }
        std::vector<int> root_count(static_cast<std::size_t>(2 * p - 1), 0);
        for (int leaf = 0; leaf < p; ++leaf) ++root_count[static_cast<std::size_t>(find(leaf))];
        std::vector<int> root_label(static_cast<std::size_t>(2 * p - 1), -1);
        labels.assign(static_cast<std::size_t>(p), -1);
        int next = 0;
        for (int leaf : dend.leaf_order()) {
            const int root = find(leaf);
            if (root_count[static_cast<std::size_t>(root)] < min_size) continue;
            if (root_label[static_cast<std::size_t>(root)] < 0) root_label[static_cast<std::size_t>(root)] = next++;
            labels[static_cast<std::size_t>(leaf)] = root_label[static_cast<std::size_t>(root)];
        }
        return next;
    };

    // Keep the `best` tightest sizeable clusters as cores and score the
    // level by their separation: min between-core over max within-core mean
    // distance. Returns the core labels (relabeled 0..best-1, leaf-order of
    // first appearance) through `core_labels`.
    const auto evaluate = [&](int cut, std::vector<int>& core_labels) {
        std::vector<int> labels;
        const int n_clusters = materialize(cut, labels);
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_clusters, n_clusters);
        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_clusters, n_clusters);
        for (int i = 0; i < p; ++i) {
            const int a = labels[static_cast<std::size_t>(i)];
            if (a < 0) continue;
            for (int h = 0; h < i; ++h) {
                const int b = labels[static_cast<std::size_t>(h)];
                if (b < 0) continue;
                const int lo = std::min(a, b), hi = std::max(a, b);
                sums(lo, hi) += dist(static_cast<std::size_t>(i), static_cast<std::size_t>(h));
                counts(lo, hi) += 1.0;
            }
        }
        std::vector<int> order(static_cast<std::size_t>(n_clusters));
        for (int c = 0; c < n_clusters; ++c) order[static_cast<std::size_t>(c)] = c;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double wa = counts(a, a) > 0 ? sums(a, a) / counts(a, a) : 0.0;
            const double wb = counts(b, b) > 0 ? sums(b, b) / counts(b, b) : 0.0;
            if (wa != wb) return wa < wb;
            return a < b;
        });
        order.resize(static_cast<std::size_t>(std::min(best, n_clusters)));

        double max_within = 1e-12;
        double min_between = std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < order.size(); ++x) {
            const int a = order[x];
            if (counts(a, a) > 0) max_within = std::max(max_within, sums(a, a) / counts(a, a));
            for (std::size_t y = 0; y < x; ++y) {
                const int b = order[y];
                const int lo = std::min(a, b), hi = std::max(a, b);
                if (counts(lo, hi) > 0) min_between = std::min(min_between, sums(lo, hi) / counts(lo, hi));
            }
        }
        const double score = order.size() < 2 ? 1.0 / max_within : min_between / max_within;

        std::vector<bool> is_core(static_cast<std::size_t>(n_clusters), false);
        for (int c : order) is_core[static_cast<std::size_t>(c)] = true;
        std::vector<int> remap(static_cast<std::size_t>(n_clusters), -1);
        int next = 0;
        core_labels.assign(static_cast<std::size_t>(p), -1);
        for (int leaf : dend.leaf_order()) {
            const int lab = labels[static_cast<std::size_t>(leaf)];
            if (lab < 0 || !is_core[static_cast<std::size_t>(lab)]) continue;
            if (remap[static_cast<std::size_t>(lab)] < 0) remap[static_cast<std::size_t>(lab)] = next++;
            core_labels[static_cast<std::size_t>(leaf)] = remap[static_cast<std::size_t>(lab)];
        }
        return score;
    };

    std::vector<int> labels;
    double best_score = -1.0;
    for (int candidate : candidates) {
        std::vector<int> core_labels;
        const double score = evaluate(candidate, core_labels);
        if (score > best_score) {
            best_score = score;
            labels = std::move(core_labels);
        }
    }

    int n_cores = 0;
    for (int lab : labels) n_cores = std::max(n_cores, lab + 1);

    // purify: a member whose mean dissimilarity to its own cluster lies
    // above median + 3 MADn is a straggler and moves to the pool
    bool any_pooled = false;
    for (int lab : labels) any_pooled = any_pooled || lab < 0;
    for (int c = 0; c < n_cores; ++c) {
        std::vector<int> members;
        for (int i = 0; i < p; ++i)
            if (labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
        if (static_cast<int>(members.size()) <= min_size) continue;

        std::vector<double> scores(members.size(), 0.0);
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) {
                const double d = dist(static_cast<std::size_t>(members[a]), static_cast<std::size_t>(members[b]));
                scores[a] += d;
                scores[b] += d;
            }
        }
        for (auto& s : scores) s /= static_cast<double>(members.size() - 1);

        const double center = median_of(scores);
        std::vector<double> deviations(scores.size());
        for (std::size_t a = 0; a < scores.size(); ++a) deviations[a] = std::abs(scores[a] - center);
        const double fence = center + 3.0 * 1.4826 * median_of(deviations);

        // prune highest scores first, never below min_size
        std::vector<std::size_t> order(members.size());
        for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        int remaining = static_cast<int>(members.size());
        for (std::size_t a : order) {
            if (remaining <= min_size || scores[a] <= fence) break;
            labels[static_cast<std::size_t>(members[a])] = -1;
            any_pooled = true;
            --remaining;
        }
    }

    if (any_pooled) {
        for (auto& label : labels)
            if (label < 0) label = n_cores;
        return Partition(std::move(labels), n_cores + 1);
    }
    return Partition(std::move(labels), n_cores);
}

Eigengene eigengene(const TimeCourseMatrix& data, const Partition& part, int cluster) {
    if (part.size() != data.n_genes()) throw ValidationError("partition size does not match data");
    const auto members = part.members_of(cluster);
    if (members.empty()) throw ValidationError("cluster " + std::to_string(cluster) + " is empty");

    const auto m = static_cast<Eigen::Index>(data.n_times());
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(members.size()), m);
    for (std::size_t r = 0; r < members.size(); ++r) {
        Eigen::VectorXd row = data.values().row(static_cast<Eigen::Index>(members[r])).transpose();
        row.array() -= row.mean();
        const double sd = std::sqrt(row.squaredNorm() / static_cast<double>(m - 1));
        if (sd > 1e-12) row /= sd;
        rows.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }

    if (members.size() == 1) return Eigengene{rows.row(0).transpose(), 1.0};

    const Eigen::MatrixXd scatter = rows.transpose() * rows;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
    Eigen::VectorXd leading = solver.eigenvectors().col(m - 1);
    const double total = solver.eigenvalues().sum();
    const double ratio = total > 0.0 ? solver.eigenvalues()(m - 1) / total : 0.0;

    // sign: positive correlation with the cluster mean curve, falling back to
    // a positive dominant component when the mean curve is degenerate
    const Eigen::VectorXd mean_curve = rows.colwise().mean().transpose();
    const Eigen::VectorXd centered_mean = mean_curve.array() - mean_curve.mean();
    const double align = leading.dot(centered_mean);
    if (std::abs(align) > 1e-12) {
        if (align < 0.0) leading = -leading;
    } else {
        Eigen::Index peak;
        leading.cwiseAbs().maxCoeff(&peak);
        if (leading(peak) < 0.0) leading = -leading;
    }

    return Eigengene{std::move(leading), std::clamp(ratio, 0.0, 1.0)};
}

} // namespace tcclust
