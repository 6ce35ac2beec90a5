#include "cotwd/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cotwd {

HaarBasis haar_basis(const WeightedBinaryTree& tree) {
    const int m = tree.leaf_count;
    const LeafIntervals iv = subtree_leaf_sets(tree);

    std::vector<int> depth(static_cast<std::size_t>(tree.node_count()), 0);
    for (int idx = static_cast<int>(iv.node_postorder.size()) - 1; idx >= 0; --idx) {
        const int v = iv.node_postorder[static_cast<std::size_t>(idx)];
        const int par = tree.parent[static_cast<std::size_t>(v)];
        if (par >= 0) depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(par)] + 1;
    }

    // Internal nodes ordered by level then node id, so coarse wavelets come first.
    std::vector<int> internals;
    internals.reserve(static_cast<std::size_t>(m) - 1);
    for (int v = m; v < tree.node_count(); ++v) internals.push_back(v);
    std::sort(internals.begin(), internals.end(), [&](int a, int b) {
        if (depth[static_cast<std::size_t>(a)] != depth[static_cast<std::size_t>(b)])
            return depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)];
        return a < b;
    });

    HaarBasis basis;
    basis.vectors = Eigen::MatrixXd::Zero(m, m);
    basis.vectors.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
    basis.column_meta.resize(static_cast<std::size_t>(m));
    basis.column_meta[0] = {0, -1};

    int col = 1;
    for (int v : internals) {
        const auto& ch = tree.children[static_cast<std::size_t>(v)];
        const int b1 = iv.begin[static_cast<std::size_t>(ch[0])], e1 = iv.end[static_cast<std::size_t>(ch[0])];
        const int b2 = iv.begin[static_cast<std::size_t>(ch[1])], e2 = iv.end[static_cast<std::size_t>(ch[1])];
        const double n1 = e1 - b1, n2 = e2 - b2;
        const double plus = std::sqrt(n2 / (n1 * (n1 + n2)));
        const double minus = -std::sqrt(n1 / (n2 * (n1 + n2)));
        for (int pos = b1; pos < e1; ++pos)
            basis.vectors(iv.postorder_leaf[static_cast<std::size_t>(pos)], col) = plus;
        for (int pos = b2; pos < e2; ++pos)
            basis.vectors(iv.postorder_leaf[static_cast<std::size_t>(pos)], col) = minus;
        basis.column_meta[static_cast<std::size_t>(col)] = {depth[static_cast<std::size_t>(v)], v};
        ++col;
    }
    return basis;
}

Eigen::MatrixXd expand(const Eigen::MatrixXd& signals, const HaarBasis& basis) {
    if (signals.cols() != basis.vectors.rows())
        throw std::invalid_argument("expand: signal width does not match basis size");
    return signals * basis.vectors;
}

FilterSelection select_filter(const Eigen::MatrixXd& coefficients, double threshold_fraction) {
    if (threshold_fraction <= 0.0 || threshold_fraction > 1.0)
        throw std::invalid_argument("select_filter: threshold_fraction must lie in (0,1]");
    const int m = static_cast<int>(coefficients.cols());
    const Eigen::VectorXd mass = coefficients.cwiseAbs().colwise().sum();
    const double total = mass.sum();
    if (total <= 0.0) throw std::invalid_argument("select_filter: all coefficients are zero");

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mass(a) > mass(b); });

    FilterSelection sel;
    sel.threshold_fraction = threshold_fraction;
    sel.total_mass = total;
    const double target = threshold_fraction * total * (1.0 - 1e-12);
    for (int j : order) {
        if (mass(j) <= 0.0) break;  // zero-mass columns never help reach the target
        sel.kept_columns.push_back(j);
        sel.cumulative_mass += mass(j);
        if (sel.cumulative_mass >= target) break;
    }
    return sel;
}

Eigen::MatrixXd apply_filter(const Eigen::MatrixXd& signals, const HaarBasis& basis,
                             const FilterSelection& selection) {
    const int d = static_cast<int>(selection.kept_columns.size());
    Eigen::MatrixXd kept(basis.vectors.rows(), d);
    for (int j = 0; j < d; ++j) kept.col(j) = basis.vectors.col(selection.kept_columns[static_cast<std::size_t>(j)]);
    return (signals * kept) * kept.transpose();
}

Eigen::MatrixXd filter(const Eigen::MatrixXd& signals, const WeightedBinaryTree& tree,
                       double threshold_fraction) {
    const HaarBasis basis = haar_basis(tree);
    const Eigen::MatrixXd coeffs = expand(signals, basis);
    const FilterSelection sel = select_filter(coeffs, threshold_fraction);
    return apply_filter(signals, basis, sel);
}

Eigen::MatrixXd normalize_histograms(const Eigen::MatrixXd& signals) {
    Eigen::MatrixXd out = signals;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double mn = out.row(i).minCoeff();
        if (mn < 0.0) out.row(i).array() -= mn;
        const double mass = out.row(i).lpNorm<1>();
        if (mass < 1e-12)
            throw std::runtime_error("normalize_histograms: zero mass in row " + std::to_string(i));
        out.row(i) /= mass;
    }
    return out;
}

double l1_haar_norm(const Eigen::MatrixXd& signals, const HaarBasis& basis) {
    if (signals.rows() == 0) return 0.0;
    return expand(signals, basis).cwiseAbs().sum() / static_cast<double>(signals.rows());
}

}  // namespace cotwd
