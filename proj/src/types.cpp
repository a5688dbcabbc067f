#include "tcclust/types.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "tcclust/error.hpp"

namespace tcclust {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

void require_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw ValidationError(std::string(what) + " ids not unique: '" + id + "'");
    }
}

} // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    require(points_.size() >= 2, "time grid needs at least 2 points");
    for (std::size_t j = 0; j < points_.size(); ++j) {
        require(std::isfinite(points_[j]), "time grid point " + std::to_string(j) + " not finite");
        if (j > 0) require(points_[j] > points_[j - 1], "time grid not strictly increasing at index " + std::to_string(j));
    }
}

Eigen::VectorXd TimeGrid::as_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(points_.data(), static_cast<Eigen::Index>(points_.size()));
}

TimeCourseMatrix::TimeCourseMatrix(TimeGrid grid, Eigen::MatrixXd values, std::vector<std::string> gene_ids)
    : grid_(std::move(grid)), values_(std::move(values)), gene_ids_(std::move(gene_ids)) {
    require(values_.rows() >= 1, "time course matrix needs at least one gene row");
    require(static_cast<std::size_t>(values_.cols()) == grid_.size(), "column count does not match time grid length");
    require(static_cast<std::size_t>(values_.rows()) == gene_ids_.size(), "gene id count does not match row count");
    require_unique(gene_ids_, "gene");
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
        for (Eigen::Index j = 0; j < values_.cols(); ++j)
            require(std::isfinite(values_(i, j)),
                    "non-finite value at gene '" + gene_ids_[static_cast<std::size_t>(i)] + "', column " + std::to_string(j));
}

std::ptrdiff_t TimeCourseMatrix::index_of(const std::string& gene_id) const {
    for (std::size_t i = 0; i < gene_ids_.size(); ++i)
        if (gene_ids_[i] == gene_id) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

TimeCourseMatrix TimeCourseMatrix::subset_rows(const std::vector<std::size_t>& rows) const {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), values_.cols());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= n_genes()) throw ValidationError("subset row index out of range");
        sub.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(rows[r]));
        ids.push_back(gene_ids_[rows[r]]);
    }
    return TimeCourseMatrix(grid_, std::move(sub), std::move(ids));
}

CrossSectionalMatrix::CrossSectionalMatrix(Eigen::MatrixXd values, std::vector<double> ages,
                                           std::vector<std::string> gene_ids,
                                           std::vector<std::string> subject_ids)
    : values_(std::move(values)), ages_(std::move(ages)), gene_ids_(std::move(gene_ids)),
      subject_ids_(std::move(subject_ids)) {
    require(values_.cols() >= 2, "cross-sectional data needs at least 2 subjects");
    require(values_.rows() >= 1, "cross-sectional data needs at least one gene row");
    require(ages_.size() == static_cast<std::size_t>(values_.cols()), "age count does not match subject count");
    require(subject_ids_.size() == static_cast<std::size_t>(values_.cols()), "subject id count does not match column count");
    require(gene_ids_.size() == static_cast<std::size_t>(values_.rows()), "gene id count does not match row count");
    require_unique(gene_ids_, "gene");
    require_unique(subject_ids_, "subject");
    for (std::size_t s = 0; s < ages_.size(); ++s) {
        require(std::isfinite(ages_[s]), "age for subject '" + subject_ids_[s] + "' not finite");
        require(ages_[s] >= 0.0, "age for subject '" + subject_ids_[s] + "' negative");
    }
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
        for (Eigen::Index j = 0; j < values_.cols(); ++j)
            require(std::isfinite(values_(i, j)),
                    "non-finite value at gene '" + gene_ids_[static_cast<std::size_t>(i)] + "', subject '" +
                        subject_ids_[static_cast<std::size_t>(j)] + "'");
}

Partition::Partition(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) { validate(); }

Partition::Partition(std::vector<int> labels, int k, Eigen::MatrixXd posteriors)
    : labels_(std::move(labels)), k_(k), posteriors_(std::move(posteriors)) {
    validate();
}

void Partition::validate() const {
    require(!labels_.empty(), "partition has no members");
    require(k_ >= 1, "cluster count must be positive");
    std::vector<bool> seen(static_cast<std::size_t>(k_), false);
    for (int lab : labels_) {
        require(lab >= 0 && lab < k_, "label " + std::to_string(lab) + " outside 0..K-1");
        seen[static_cast<std::size_t>(lab)] = true;
    }
    for (int c = 0; c < k_; ++c)
        require(seen[static_cast<std::size_t>(c)], "cluster " + std::to_string(c) + " is empty");
    if (posteriors_) {
        require(posteriors_->rows() == static_cast<Eigen::Index>(labels_.size()), "posterior row count mismatch");
        require(posteriors_->cols() == k_, "posterior column count mismatch");
        for (Eigen::Index i = 0; i < posteriors_->rows(); ++i) {
            const double s = posteriors_->row(i).sum();
            require(std::abs(s - 1.0) <= 1e-9, "posterior row " + std::to_string(i) + " sums to " + std::to_string(s));
        }
    }
}

std::vector<std::size_t> Partition::members_of(int cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == cluster) out.push_back(i);
    return out;
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
    for (int lab : labels_) ++sizes[static_cast<std::size_t>(lab)];
    return sizes;
}

SymmetricMatrix::SymmetricMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols(), "symmetric matrix must be square");
    require(entries_.rows() >= 1, "symmetric matrix must be nonempty");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i)
        for (Eigen::Index h = 0; h < i; ++h)
            require(entries_(i, h) == entries_(h, i),
                    "matrix not symmetric at (" + std::to_string(i) + "," + std::to_string(h) + ")");
}

SymmetricMatrix SymmetricMatrix::zero(std::size_t dim) {
    return SymmetricMatrix(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

GeneSet::GeneSet(std::set<std::string> ids) : ids_(std::move(ids)) {
    require(!ids_.empty(), "gene set is empty");
}

bool GeneSet::subset_of(const std::vector<std::string>& gene_ids) const {
    std::unordered_set<std::string> have(gene_ids.begin(), gene_ids.end());
    for (const auto& id : ids_)
        if (!have.count(id)) return false;
    return true;
}

} // namespace tcclust
