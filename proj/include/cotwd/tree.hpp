#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace cotwd {

/// Rooted full binary tree with positive edge weights. Nodes 0..m-1 are the
/// leaves, nodes m..2m-2 are internal, the last created node is the root.
struct WeightedBinaryTree {
    int leaf_count = 0;
    std::vector<int> parent;                      // -1 for the root
    std::vector<std::array<int, 2>> children;     // {-1,-1} for leaves
    std::vector<double> edge_weight;              // weight to parent, 0 at the root
    std::vector<double> node_height;              // leaves at 0, root highest
    std::vector<int> leaf_label;                  // leaf node -> original point index
    std::vector<std::string> leaf_name;           // optional display names, size 0 or m

    int node_count() const { return static_cast<int>(parent.size()); }
    int root() const;
    bool is_leaf(int v) const { return v < leaf_count; }

    /// Checks structural invariants; throws on violation.
    void validate() const;
};

struct DecodeOptions {
    int max_scale = 5;               // K
    double scale_multiplier = 1.0;
    bool density_normalize = false;
    double weight_floor = 1e-12;
};

/// Decodes a binary tree from a pairwise distance matrix: Gaussian kernel,
/// diffusion operator, dyadic densities, hyperbolic embedding, then a merge
/// scan over pairs sorted by ascending linkage score. Deterministic: ties are
/// broken lexicographically on the sorted index pair.
WeightedBinaryTree decode_tree(const Eigen::MatrixXd& distances, const DecodeOptions& opts);

/// Sum of edge weights on the unique path between two leaves, identified by
/// their original labels.
double tree_distance(const WeightedBinaryTree& tree, int leaf_a, int leaf_b);

Eigen::MatrixXd tree_distance_matrix(const WeightedBinaryTree& tree);

/// Postorder leaf intervals: leaves are relabeled so the leaf set of every
/// node is a contiguous interval [begin, end).
struct LeafIntervals {
    std::vector<int> begin;        // per node
    std::vector<int> end;          // per node
    std::vector<int> postorder_leaf;  // position -> original leaf label
    std::vector<int> leaf_position;   // original leaf label -> position
    std::vector<int> node_postorder;  // nodes in postorder (children before parents)
};

LeafIntervals subtree_leaf_sets(const WeightedBinaryTree& tree);

/// Newick serialization with branch lengths at 17 significant digits. Leaf
/// order follows the tree's postorder.
std::string to_newick(const WeightedBinaryTree& tree);

WeightedBinaryTree from_newick(const std::string& text);

}  // namespace cotwd
