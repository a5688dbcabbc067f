#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tcclust {

/// Ordered sampling times shared by every gene of a dataset.
/// Strictly increasing, finite, at least two points.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t j) const { return points_[j]; }
    double span() const { return points_.back() - points_.front(); }

    Eigen::VectorXd as_vector() const;

private:
    std::vector<double> points_;
};

/// p genes observed over a common time grid; rows = genes, columns = times.
class TimeCourseMatrix {
public:
    TimeCourseMatrix(TimeGrid grid, Eigen::MatrixXd values, std::vector<std::string> gene_ids);

    const TimeGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& gene_ids() const { return gene_ids_; }

    std::size_t n_genes() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t n_times() const { return static_cast<std::size_t>(values_.cols()); }

    /// Dense index of a gene id, or -1 if absent.
    std::ptrdiff_t index_of(const std::string& gene_id) const;

    /// Row-subset copy preserving gene order as given.
    TimeCourseMatrix subset_rows(const std::vector<std::size_t>& rows) const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd values_;
    std::vector<std::string> gene_ids_;
};

/// Cross-sectional design: p genes x n subjects plus per-subject ages.
class CrossSectionalMatrix {
public:
    CrossSectionalMatrix(Eigen::MatrixXd values, std::vector<double> ages,
                         std::vector<std::string> gene_ids, std::vector<std::string> subject_ids);

    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<double>& ages() const { return ages_; }
    const std::vector<std::string>& gene_ids() const { return gene_ids_; }
    const std::vector<std::string>& subject_ids() const { return subject_ids_; }

    std::size_t n_genes() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t n_subjects() const { return static_cast<std::size_t>(values_.cols()); }

private:
    Eigen::MatrixXd values_;
    std::vector<double> ages_;
    std::vector<std::string> gene_ids_;
    std::vector<std::string> subject_ids_;
};

/// Gene -> cluster assignment. Labels are dense 0..K-1 and every label occurs.
/// Mixture-produced partitions carry the posterior membership matrix.
class Partition {
public:
    Partition(std::vector<int> labels, int k);
    Partition(std::vector<int> labels, int k, Eigen::MatrixXd posteriors);

    const std::vector<int>& labels() const { return labels_; }
    int k() const { return k_; }
    std::size_t size() const { return labels_.size(); }
    const std::optional<Eigen::MatrixXd>& posteriors() const { return posteriors_; }

    std::vector<std::size_t> members_of(int cluster) const;
    std::vector<std::size_t> cluster_sizes() const;

private:
    void validate() const;

    std::vector<int> labels_;
    int k_;
    std::optional<Eigen::MatrixXd> posteriors_;
};

/// Dense symmetric p x p container for adjacency / overlap / distance values.
/// Diagonal convention is the producer's (0 for distances, 1 for overlaps).
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(Eigen::MatrixXd entries);

    /// All-zero matrix of the given dimension.
    static SymmetricMatrix zero(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    double operator()(std::size_t i, std::size_t h) const { return entries_(i, h); }
    void set(std::size_t i, std::size_t h, double v) {
        entries_(i, h) = v;
        entries_(h, i) = v;
    }
    const Eigen::MatrixXd& entries() const { return entries_; }

private:
    Eigen::MatrixXd entries_;
};

/// Named set of gene ids (e.g. a reference target list).
class GeneSet {
public:
    explicit GeneSet(std::set<std::string> ids);

    const std::set<std::string>& ids() const { return ids_; }
    std::size_t size() const { return ids_.size(); }
    bool contains(const std::string& id) const { return ids_.count(id) > 0; }

    /// True when every member appears among the given gene ids.
    bool subset_of(const std::vector<std::string>& gene_ids) const;

private:
    std::set<std::string> ids_;
};

} // namespace tcclust
