#pragma once

#include "cotwd/tree.hpp"

#include <Eigen/Dense>
#include <vector>

namespace cotwd {

/// Orthonormal Haar basis induced by a binary tree. Column 0 is the constant
/// vector; every other column is the zero-mean two-level wavelet of one
/// internal node. Rows are indexed by the original leaf labels.
struct HaarBasis {
    Eigen::MatrixXd vectors;
    struct ColumnMeta {
        int level = 0;  // depth of the generating internal node, root = 0
        int node = -1;  // -1 for the constant column
    };
    std::vector<ColumnMeta> column_meta;
};

struct FilterSelection {
    std::vector<int> kept_columns;  // descending aggregate L1 mass
    double cumulative_mass = 0.0;
    double total_mass = 0.0;
    double threshold_fraction = 1.0;
};

HaarBasis haar_basis(const WeightedBinaryTree& tree);

/// Expansion coefficients: signals (p x m) times the basis matrix.
Eigen::MatrixXd expand(const Eigen::MatrixXd& signals, const HaarBasis& basis);

/// Minimal prefix of columns, ordered by descending aggregate L1 coefficient
/// mass, whose cumulative mass reaches threshold_fraction of the total.
FilterSelection select_filter(const Eigen::MatrixXd& coefficients, double threshold_fraction);

/// Projection of each row of `signals` onto the span of the kept sub-basis.
Eigen::MatrixXd apply_filter(const Eigen::MatrixXd& signals, const HaarBasis& basis,
                             const FilterSelection& selection);

/// Convenience: basis construction, expansion, selection, projection.
Eigen::MatrixXd filter(const Eigen::MatrixXd& signals, const WeightedBinaryTree& tree,
                       double threshold_fraction);

/// Per row: shift by the row minimum when negative, then divide by the L1
/// norm. Throws naming the row when the shifted mass is below 1e-12.
Eigen::MatrixXd normalize_histograms(const Eigen::MatrixXd& signals);

/// Mean over rows of the L1 norm of the coefficient rows.
double l1_haar_norm(const Eigen::MatrixXd& signals, const HaarBasis& basis);

}  // namespace cotwd
