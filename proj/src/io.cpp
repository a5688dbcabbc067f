#include "tcclust/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "tcclust/error.hpp"

namespace tcclust {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Parses a finite double or throws naming the 1-based (row, column) coordinate.
double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string s = trim(raw);
    const char* begin = s.data();
    const char* end = begin + s.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || s.empty() || !std::isfinite(value)) {
        throw ParseError("cannot parse numeric cell '" + s + "' at row " + std::to_string(row) + ", column " +
                         std::to_string(col));
    }
    return value;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    return out;
}

} // namespace

TimeCourseMatrix load_time_course(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) throw ParseError(path + ": need a header row and at least one gene row");

    const auto header = split_csv_line(lines[0]);
    if (header.size() < 3) throw ParseError(path + ": header must carry a gene-id label and at least 2 time values");
    std::vector<double> times;
    for (std::size_t c = 1; c < header.size(); ++c) times.push_back(parse_cell(header[c], 1, c + 1));

    const std::size_t m = times.size();
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(m));
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != m + 1)
            throw ParseError(path + ": row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(m + 1));
        gene_ids.push_back(trim(cells[0]));
        for (std::size_t c = 1; c <= m; ++c)
            values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) =
                parse_cell(cells[c], r + 1, c + 1);
    }

    // Reorder columns if header times arrived unsorted; duplicates are invalid.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    for (std::size_t j = 1; j < m; ++j)
        if (times[order[j]] == times[order[j - 1]])
            throw ValidationError(path + ": duplicate time value " + format_double(times[order[j]]) + " in header");
    bool sorted = std::is_sorted(times.begin(), times.end());
    if (!sorted) {
        std::vector<double> sorted_times(m);
        Eigen::MatrixXd sorted_values(values.rows(), values.cols());
        for (std::size_t j = 0; j < m; ++j) {
            sorted_times[j] = times[order[j]];
            sorted_values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(order[j]));
        }
        times = std::move(sorted_times);
        values = std::move(sorted_values);
    }

    return TimeCourseMatrix(TimeGrid(times), std::move(values), std::move(gene_ids));
}

void write_time_course(const TimeCourseMatrix& data, const std::string& path) {
    auto out = open_out(path);
    out << "gene_id";
    for (double t : data.grid().points()) out << ',' << format_double(t);
    out << '\n';
    for (std::size_t i = 0; i < data.n_genes(); ++i) {
        out << data.gene_ids()[i];
        for (std::size_t j = 0; j < data.n_times(); ++j)
            out << ',' << format_double(data.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
}

CrossSectionalMatrix load_cross_sectional(const std::string& values_path, const std::string& ages_path) {
    const auto lines = read_lines(values_path);
    if (lines.size() < 2) throw ParseError(values_path + ": need a header row and at least one gene row");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2) throw ParseError(values_path + ": header must list subject ids");
    std::vector<std::string> subject_ids;
    for (std::size_t c = 1; c < header.size(); ++c) subject_ids.push_back(trim(header[c]));

    const std::size_t n = subject_ids.size();
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(n));
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != n + 1)
            throw ParseError(values_path + ": row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(n + 1));
        gene_ids.push_back(trim(cells[0]));
        for (std::size_t c = 1; c <= n; ++c)
            values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) =
                parse_cell(cells[c], r + 1, c + 1);
    }

    // Sibling ages file: subject_id,age (header optional).
    const auto age_lines = read_lines(ages_path);
    std::unordered_map<std::string, double> age_by_subject;
    for (std::size_t r = 0; r < age_lines.size(); ++r) {
        if (trim(age_lines[r]).empty()) continue;
        const auto cells = split_csv_line(age_lines[r]);
        if (cells.size() != 2)
            throw ParseError(ages_path + ": row " + std::to_string(r + 1) + " must be 'subject_id,age'");
        const std::string sid = trim(cells[0]);
        if (r == 0) {
            // header row detected when the second field is not numeric
            try {
                parse_cell(cells[1], r + 1, 2);
            } catch (const ParseError&) {
                continue;
            }
        }
        age_by_subject[sid] = parse_cell(cells[1], r + 1, 2);
    }
    std::vector<double> ages;
    for (const auto& sid : subject_ids) {
        const auto it = age_by_subject.find(sid);
        if (it == age_by_subject.end())
            throw ValidationError(ages_path + ": missing age for subject '" + sid + "'");
        ages.push_back(it->second);
    }

    return CrossSectionalMatrix(std::move(values), std::move(ages), std::move(gene_ids), std::move(subject_ids));
}

void write_cross_sectional(const CrossSectionalMatrix& data, const std::string& values_path,
                           const std::string& ages_path) {
    auto out = open_out(values_path);
    out << "gene_id";
    for (const auto& sid : data.subject_ids()) out << ',' << sid;
    out << '\n';
    for (std::size_t i = 0; i < data.n_genes(); ++i) {
        out << data.gene_ids()[i];
        for (std::size_t j = 0; j < data.n_subjects(); ++j)
            out << ',' << format_double(data.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
    auto aout = open_out(ages_path);
    aout << "subject_id,age\n";
    for (std::size_t s = 0; s < data.n_subjects(); ++s)
        aout << data.subject_ids()[s] << ',' << format_double(data.ages()[s]) << '\n';
}

void write_partition(const Partition& part, const std::vector<std::string>& gene_ids, const std::string& path) {
    if (gene_ids.size() != part.size()) throw ValidationError("gene id count does not match partition size");
    auto out = open_out(path);
    out << "gene_id,label\n";
    for (std::size_t i = 0; i < part.size(); ++i) out << gene_ids[i] << ',' << part.labels()[i] << '\n';
}

Partition load_partition(const std::string& path, const std::vector<std::string>& gene_ids) {
    const auto lines = read_lines(path);
    std::unordered_map<std::string, int> label_by_gene;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (trim(lines[r]).empty()) continue;
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != 2) throw ParseError(path + ": row " + std::to_string(r + 1) + " must be 'gene_id,label'");
        if (r == 0 && trim(cells[1]) == "label") continue;
        label_by_gene[trim(cells[0])] = static_cast<int>(parse_cell(cells[1], r + 1, 2));
    }
    std::vector<int> labels;
    int k = 0;
    for (const auto& gid : gene_ids) {
        const auto it = label_by_gene.find(gid);
        if (it == label_by_gene.end()) throw ValidationError(path + ": missing label for gene '" + gid + "'");
        labels.push_back(it->second);
        k = std::max(k, it->second + 1);
    }
    return Partition(std::move(labels), k);
}

void write_symmetric_matrix(const SymmetricMatrix& mat, const std::vector<std::string>& gene_ids,
                            const std::string& path) {
    if (gene_ids.size() != mat.dim()) throw ValidationError("gene id count does not match matrix dimension");
    auto out = open_out(path);
    out << "gene_id";
    for (const auto& gid : gene_ids) out << ',' << gid;
    out << '\n';
    for (std::size_t i = 0; i < mat.dim(); ++i) {
        out << gene_ids[i];
        for (std::size_t h = 0; h < mat.dim(); ++h) out << ',' << format_double(mat(i, h));
        out << '\n';
    }
}

void write_feature_matrix(const Eigen::MatrixXd& features, const std::vector<std::string>& gene_ids,
                          const std::vector<std::string>& column_names, const std::string& path) {
    if (gene_ids.size() != static_cast<std::size_t>(features.rows()))
        throw ValidationError("gene id count does not match feature row count");
    if (column_names.size() != static_cast<std::size_t>(features.cols()))
        throw ValidationError("column name count does not match feature column count");
    auto out = open_out(path);
    out << "gene_id";
    for (const auto& name : column_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        out << gene_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < features.cols(); ++c) out << ',' << format_double(features(i, c));
        out << '\n';
    }
}

GeneSet load_gene_set(const std::string& path) {
    const auto lines = read_lines(path);
    std::set<std::string> ids;
    for (const auto& line : lines) {
        const std::string id = trim(line);
        if (id.empty() || id[0] == '#') continue;
        ids.insert(id);
    }
    return GeneSet(std::move(ids));
}

} // namespace tcclust
