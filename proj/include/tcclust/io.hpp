#pragma once

#include <string>
#include <vector>

#include "tcclust/types.hpp"

namespace tcclust {

/// Time-course CSV: header row is "<label>,t1,t2,..." with numeric times,
/// each data row "<gene_id>,v1,v2,...". Columns are reordered ascending when
/// the header times arrive unsorted; duplicate times are rejected.
TimeCourseMatrix load_time_course(const std::string& path);
void write_time_course(const TimeCourseMatrix& data, const std::string& path);

/// Cross-sectional CSV ("<label>,subj1,subj2,..." header, gene rows) plus a
/// sibling ages CSV with "subject_id,age" rows. Every subject needs an age.
CrossSectionalMatrix load_cross_sectional(const std::string& values_path, const std::string& ages_path);
void write_cross_sectional(const CrossSectionalMatrix& data, const std::string& values_path,
                           const std::string& ages_path);

/// Truth / partition labels as "gene_id,label" rows.
void write_partition(const Partition& part, const std::vector<std::string>& gene_ids, const std::string& path);
Partition load_partition(const std::string& path, const std::vector<std::string>& gene_ids);

/// Symmetric matrix with gene ids on both axes, for inspection.
void write_symmetric_matrix(const SymmetricMatrix& mat, const std::vector<std::string>& gene_ids,
                            const std::string& path);

/// Feature matrix (e.g. autocorrelation features): gene id + named columns.
void write_feature_matrix(const Eigen::MatrixXd& features, const std::vector<std::string>& gene_ids,
                          const std::vector<std::string>& column_names, const std::string& path);

/// One gene id per line; '#' comments and blank lines ignored.
GeneSet load_gene_set(const std::string& path);

} // namespace tcclust
