#pragma once

#include <string>
#include <vector>

#include "tcclust/types.hpp"

namespace tcclust {

enum class Linkage { Average, Complete, Single };

Linkage linkage_from_string(const std::string& name);

/// Agglomeration history: leaves are 0..p-1, the i-th merge creates node
/// p+i. Heights are nondecreasing for the monotone linkages used here.
class Dendrogram {
public:
    struct Merge {
        int left;
        int right;
        double height;
    };

    Dendrogram(std::vector<Merge> merges, std::size_t n_leaves);

    const std::vector<Merge>& merges() const { return merges_; }
    std::size_t n_leaves() const { return n_leaves_; }

    /// Leaves in dendrogram order (left-to-right tree traversal).
    const std::vector<int>& leaf_order() const { return leaf_order_; }

    /// Newick-like rendering for debugging.
    std::string to_newick(const std::vector<std::string>& leaf_names) const;

private:
    std::vector<Merge> merges_;
    std::size_t n_leaves_;
    std::vector<int> leaf_order_;
};

/// Cluster representative: first principal component over time points of the
/// cluster's row-standardized data.
struct Eigengene {
    Eigen::VectorXd curve;
    double explained_variance_ratio = 0.0;
};

/// Lance-Williams agglomeration over a distance matrix (zero diagonal).
/// Ties are broken toward the lowest active node-index pair.
Dendrogram agglomerate(const SymmetricMatrix& dist, Linkage linkage = Linkage::Average);

/// Partition obtained by undoing the last K-1 merges. Labels 0..K-1 follow
/// the leaf order of each cluster's first appearance.
Partition cut_k(const Dendrogram& dend, int k);

/// Noise-pooling cut: the coarsest static height cut at which K-1 clusters
/// of at least `min_size` leaves exist becomes clusters 0..K-2 and every
/// smaller fragment is pooled into a final group; each cluster is then
/// purified by moving members whose mean within-cluster dissimilarity lies
/// above a robust outlier fence (median + 3 MADn) into the pool. This
/// mirrors how the co-expression tree-cut tools leave loose genes
/// unassigned, which is what a simulated noise cluster turns into. When no
/// cut yields K-1 sizeable clusters the best achievable count is used, so
/// the result can have fewer than K groups. min_size <= 0 picks
/// max(3, min(20, p/25)).
Partition cut_k_pooled(const Dendrogram& dend, const SymmetricMatrix& dist, int k, int min_size = 0);

/// First principal component over time points of cluster k's standardized
/// rows, sign-aligned with the cluster mean curve. A singleton cluster
/// yields its own standardized row with ratio 1.
Eigengene eigengene(const TimeCourseMatrix& data, const Partition& part, int cluster);

} // namespace tcclust
