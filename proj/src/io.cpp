#include "cotwd/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cotwd {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

bool parse_number(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
    if (begin == end) return false;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

Dataset read_dense(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    Dataset data;
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    bool row_names = false;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (has_header && rows.empty() && data.col_names.empty()) {
            data.col_names = fields;
            continue;
        }
        if (rows.empty()) {
            double probe;
            row_names = !parse_number(fields.front(), probe);
            width = fields.size();
            if (row_names && has_header && data.col_names.size() == width - 1) {
                // Header did not cover the row-name column.
            } else if (row_names && has_header && data.col_names.size() == width) {
                data.col_names.erase(data.col_names.begin());
            }
        }
        if (fields.size() != width)
            throw std::runtime_error(path + ": ragged row at line " + std::to_string(line_no));
        std::size_t start = 0;
        if (row_names) {
            data.row_names.push_back(fields.front());
            start = 1;
        }
        std::vector<double> values;
        values.reserve(fields.size() - start);
        for (std::size_t f = start; f < fields.size(); ++f) {
            double v;
            if (!parse_number(fields[f], v))
                throw std::runtime_error(path + ": non-numeric cell at line " + std::to_string(line_no) +
                                         ", column " + std::to_string(f + 1));
            if (v < 0.0)
                throw std::runtime_error(path + ": negative value at line " + std::to_string(line_no) +
                                         ", column " + std::to_string(f + 1));
            values.push_back(v);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
    data.matrix.resize(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            data.matrix(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return data;
}

Dataset read_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
        throw std::runtime_error(path + ": missing MatrixMarket coordinate header");
    int line_no = 1;
    long rows = 0, cols = 0, entries = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream dims(line);
        if (!(dims >> rows >> cols >> entries))
            throw std::runtime_error(path + ": malformed dimensions at line " + std::to_string(line_no));
        break;
    }
    if (rows < 1 || cols < 1) throw std::runtime_error(path + ": invalid dimensions");
    Dataset data;
    data.matrix = Eigen::MatrixXd::Zero(static_cast<int>(rows), static_cast<int>(cols));
    long seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream entry(line);
        long r, c;
        double v;
        if (!(entry >> r >> c >> v))
            throw std::runtime_error(path + ": malformed entry at line " + std::to_string(line_no));
        if (r < 1 || r > rows || c < 1 || c > cols)
            throw std::runtime_error(path + ": out-of-range index at line " + std::to_string(line_no));
        if (v < 0.0)
            throw std::runtime_error(path + ": negative value at line " + std::to_string(line_no));
        data.matrix(static_cast<int>(r - 1), static_cast<int>(c - 1)) += v;
        ++seen;
    }
    if (seen != entries)
        throw std::runtime_error(path + ": entry count mismatch, header says " + std::to_string(entries) +
                                 " but found " + std::to_string(seen));
    return data;
}

void write_dense(const Eigen::MatrixXd& matrix, const std::string& path,
                 const std::vector<std::string>& col_names, const std::vector<std::string>& row_names) {
    std::ofstream out = open_out(path);
    if (!col_names.empty()) {
        if (!row_names.empty()) out << "name,";
        for (std::size_t j = 0; j < col_names.size(); ++j) out << (j ? "," : "") << col_names[j];
        out << '\n';
    }
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        if (!row_names.empty()) out << row_names[static_cast<std::size_t>(i)] << ',';
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            out << (j ? "," : "") << format_value(matrix(i, j));
        out << '\n';
    }
}

void write_sparse(const Eigen::MatrixXd& matrix, const std::string& path) {
    std::ofstream out = open_out(path);
    long entries = 0;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            if (matrix(i, j) != 0.0) ++entries;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << entries << '\n';
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            if (matrix(i, j) != 0.0)
                out << (i + 1) << ' ' << (j + 1) << ' ' << format_value(matrix(i, j)) << '\n';
}

void write_distance_matrix(const Eigen::MatrixXd& matrix, const std::string& path) {
    write_dense(matrix, path);
}

void write_tree(const WeightedBinaryTree& tree, const std::string& path) {
    std::ofstream out = open_out(path);
    out << to_newick(tree) << '\n';
}

WeightedBinaryTree read_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_newick(buffer.str());
}

void write_history(const std::vector<IterationRecord>& history, const std::string& path,
                   const std::string& config_json, bool include_timings) {
    std::ofstream out = open_out(path);
    out << config_json << '\n';
    for (const auto& rec : history) {
        out << "{\"iteration\":" << rec.iteration
            << ",\"rel_change_samples\":" << format_value(rec.rel_change_samples)
            << ",\"rel_change_features\":" << format_value(rec.rel_change_features)
            << ",\"l1_haar_samples\":" << format_value(rec.l1_haar_samples)
            << ",\"l1_haar_features\":" << format_value(rec.l1_haar_features);
        if (include_timings) out << ",\"wall_ms\":" << format_value(rec.wall_ms);
        out << "}\n";
    }
}

void write_labels(const std::vector<std::string>& names, const std::vector<int>& labels,
                  const std::vector<std::string>& label_names, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "name,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int lbl = labels[i];
        out << (i < names.size() ? names[i] : std::to_string(i)) << ','
            << (lbl >= 0 && lbl < static_cast<int>(label_names.size()) ? label_names[static_cast<std::size_t>(lbl)]
                                                                       : std::to_string(lbl))
            << '\n';
    }
}

std::pair<std::vector<int>, std::vector<std::string>> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<int> labels;
    std::vector<std::string> classes;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (first && fields.size() == 2 && fields[1] == "label") {
            first = false;
            continue;
        }
        first = false;
        const std::string& cls = fields.size() >= 2 ? fields[1] : fields[0];
        auto it = std::find(classes.begin(), classes.end(), cls);
        if (it == classes.end()) {
            classes.push_back(cls);
            it = std::prev(classes.end());
        }
        labels.push_back(static_cast<int>(it - classes.begin()));
    }
    if (labels.empty()) throw std::runtime_error(path + ": empty label file");
    return {labels, classes};
}

}  // namespace cotwd
