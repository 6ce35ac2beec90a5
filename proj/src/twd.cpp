#include "cotwd/twd.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cotwd {

double twd(const WeightedBinaryTree& tree, const Eigen::VectorXd& rho1, const Eigen::VectorXd& rho2) {
    if (rho1.size() != tree.leaf_count || rho2.size() != tree.leaf_count)
        throw std::invalid_argument("twd: histogram length does not match leaf count");
    const int n = tree.node_count();
    std::vector<double> mass(static_cast<std::size_t>(n), 0.0);
    const LeafIntervals iv = subtree_leaf_sets(tree);
    for (int v : iv.node_postorder) {
        if (tree.is_leaf(v)) {
            const int lbl = tree.leaf_label[static_cast<std::size_t>(v)];
            mass[static_cast<std::size_t>(v)] = rho1(lbl) - rho2(lbl);
        } else {
            const auto& ch = tree.children[static_cast<std::size_t>(v)];
            mass[static_cast<std::size_t>(v)] =
                mass[static_cast<std::size_t>(ch[0])] + mass[static_cast<std::size_t>(ch[1])];
        }
    }
    double total = 0.0;
    for (int v = 0; v < n; ++v)
        if (tree.parent[static_cast<std::size_t>(v)] >= 0)
            total += tree.edge_weight[static_cast<std::size_t>(v)] * std::abs(mass[static_cast<std::size_t>(v)]);
    return total;
}

double snowflake(double norm, double epsilon) {
    if (norm <= 0.0) return 0.0;
    const double s = std::sqrt(norm);
    return s - epsilon * std::log1p(s / epsilon);
}

double snowflake(const Eigen::VectorXd& delta, double epsilon) {
    return snowflake(delta.norm(), epsilon);
}

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count < 2) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const int workers = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) body(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

Eigen::MatrixXd pairwise_twd(const Eigen::MatrixXd& histograms, const WeightedBinaryTree& tree,
                             const TwdConfig& config) {
    const int p = static_cast<int>(histograms.rows());
    if (histograms.cols() != tree.leaf_count)
        throw std::invalid_argument("pairwise_twd: histogram width does not match leaf count");

    const LeafIntervals iv = subtree_leaf_sets(tree);
    const int n = tree.node_count();

    // Per-histogram subtree masses via prefix sums over the postorder leaf
    // ordering; the pairwise loop then only touches these O(N) vectors.
    Eigen::MatrixXd prefix(p, tree.leaf_count + 1);
    prefix.col(0).setZero();
    for (int pos = 0; pos < tree.leaf_count; ++pos)
        prefix.col(pos + 1) = prefix.col(pos) + histograms.col(iv.postorder_leaf[static_cast<std::size_t>(pos)]);

    std::vector<int> weighted_nodes;
    weighted_nodes.reserve(static_cast<std::size_t>(n) - 1);
    for (int v = 0; v < n; ++v)
        if (tree.parent[static_cast<std::size_t>(v)] >= 0) weighted_nodes.push_back(v);

    Eigen::MatrixXd node_mass(p, static_cast<int>(weighted_nodes.size()));
    Eigen::VectorXd weights(static_cast<int>(weighted_nodes.size()));
    for (std::size_t idx = 0; idx < weighted_nodes.size(); ++idx) {
        const int v = weighted_nodes[idx];
        node_mass.col(static_cast<int>(idx)) =
            prefix.col(iv.end[static_cast<std::size_t>(v)]) - prefix.col(iv.begin[static_cast<std::size_t>(v)]);
        weights(static_cast<int>(idx)) = tree.edge_weight[static_cast<std::size_t>(v)];
    }

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
    parallel_for(p, config.threads, [&](int i) {
        for (int ip = i + 1; ip < p; ++ip) {
            double d = (node_mass.row(i) - node_mass.row(ip)).cwiseAbs().dot(weights);
            if (config.gamma > 0.0)
                d += config.gamma *
                     snowflake((histograms.row(i) - histograms.row(ip)).norm(), config.regularizer_epsilon);
            out(i, ip) = out(ip, i) = d;
        }
    });
    return out;
}

}  // namespace cotwd
