#pragma once

#include "cotwd/pipeline.hpp"
#include "cotwd/tree.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace cotwd {

struct Dataset {
    Eigen::MatrixXd matrix;
    std::vector<std::string> row_names;  // empty when absent
    std::vector<std::string> col_names;
};

/// Comma- or tab-separated dense matrix. Optional first row of column names;
/// a non-numeric first column is treated as row names. Negative values and
/// ragged rows are rejected with coordinates.
Dataset read_dense(const std::string& path, bool has_header);

/// MatrixMarket coordinate format; duplicate coordinates are summed.
Dataset read_sparse(const std::string& path);

void write_dense(const Eigen::MatrixXd& matrix, const std::string& path,
                 const std::vector<std::string>& col_names = {},
                 const std::vector<std::string>& row_names = {});

void write_sparse(const Eigen::MatrixXd& matrix, const std::string& path);

void write_distance_matrix(const Eigen::MatrixXd& matrix, const std::string& path);

void write_tree(const WeightedBinaryTree& tree, const std::string& path);

WeightedBinaryTree read_tree(const std::string& path);

/// Line-delimited diagnostics log: a JSON config header line followed by one
/// JSON record per iteration. Timing is included only when requested so runs
/// with identical seeds stay byte-identical.
void write_history(const std::vector<IterationRecord>& history, const std::string& path,
                   const std::string& config_json, bool include_timings);

void write_labels(const std::vector<std::string>& names, const std::vector<int>& labels,
                  const std::vector<std::string>& label_names, const std::string& path);

/// Labels file: "name,label" per line with a header. Returns labels encoded as
/// dense ids in first-appearance order.
std::pair<std::vector<int>, std::vector<std::string>> read_labels(const std::string& path);

}  // namespace cotwd
