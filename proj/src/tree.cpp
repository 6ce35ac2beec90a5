#include "cotwd/tree.hpp"

#include "cotwd/diffusion.hpp"
#include "cotwd/hyperbolic.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace cotwd {

int WeightedBinaryTree::root() const {
    for (int v = 0; v < node_count(); ++v)
        if (parent[static_cast<std::size_t>(v)] < 0) return v;
    throw std::logic_error("tree has no root");
}

void WeightedBinaryTree::validate() const {
    const int n = node_count();
    if (leaf_count < 2 || n != 2 * leaf_count - 1)
        throw std::logic_error("tree: node count must be 2m-1 with m >= 2");
    int roots = 0;
    std::vector<char> seen_label(static_cast<std::size_t>(leaf_count), 0);
    for (int v = 0; v < n; ++v) {
        const auto& ch = children[static_cast<std::size_t>(v)];
        if (is_leaf(v)) {
            if (ch[0] != -1 || ch[1] != -1) throw std::logic_error("tree: leaf with children");
            const int lbl = leaf_label[static_cast<std::size_t>(v)];
            if (lbl < 0 || lbl >= leaf_count || seen_label[static_cast<std::size_t>(lbl)])
                throw std::logic_error("tree: leaf_label is not a bijection");
            seen_label[static_cast<std::size_t>(lbl)] = 1;
        } else if (ch[0] < 0 || ch[1] < 0) {
            throw std::logic_error("tree: internal node without two children");
        }
        if (parent[static_cast<std::size_t>(v)] < 0) {
            ++roots;
        } else {
            if (edge_weight[static_cast<std::size_t>(v)] <= 0.0)
                throw std::logic_error("tree: nonpositive edge weight");
            if (node_height[static_cast<std::size_t>(v)] >=
                node_height[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])])
                throw std::logic_error("tree: child height not below parent height");
        }
    }
    if (roots != 1) throw std::logic_error("tree: must have exactly one root");
}

namespace {

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

WeightedBinaryTree decode_tree(const Eigen::MatrixXd& distances, const DecodeOptions& opts) {
    const int m = static_cast<int>(distances.rows());
    if (m < 2) throw std::invalid_argument("decode_tree: need at least 2 points");
    if (opts.max_scale < 0) throw std::invalid_argument("decode_tree: max_scale must be nonnegative");

    // All points coincide (e.g. a zero TWD matrix from identical histograms):
    // the Gaussian kernel degenerates to all ones, bypassing the undefined
    // median scale. The merge scan then falls back to its lexicographic order.
    AffinityKernel kernel;
    if (distances.cwiseAbs().maxCoeff() == 0.0) {
        kernel.matrix = Eigen::MatrixXd::Ones(m, m);
        kernel.scale = 1.0;
    } else {
        kernel = build_kernel(distances, opts.scale_multiplier);
    }
    const DiffusionOperator op = build_operator(kernel, opts.density_normalize);
    std::vector<Eigen::MatrixXd> densities;
    densities.reserve(static_cast<std::size_t>(opts.max_scale) + 1);
    for (int k = 0; k <= opts.max_scale; ++k) densities.push_back(diffusion_densities(op, k));
    const MultiscaleEmbedding emb = MultiscaleEmbedding::embed(densities);

    struct Pair {
        double score;
        int j, jp;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int j = 0; j < m; ++j)
        for (int jp = j + 1; jp < m; ++jp) pairs.push_back({emb.linkage_score(j, jp), j, jp});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.j != b.j) return a.j < b.j;
        return a.jp < b.jp;
    });

    WeightedBinaryTree tree;
    tree.leaf_count = m;
    const int total = 2 * m - 1;
    tree.parent.assign(static_cast<std::size_t>(total), -1);
    tree.children.assign(static_cast<std::size_t>(total), {-1, -1});
    tree.edge_weight.assign(static_cast<std::size_t>(total), 0.0);
    tree.node_height.assign(static_cast<std::size_t>(total), 0.0);
    tree.leaf_label.resize(static_cast<std::size_t>(m));
    std::iota(tree.leaf_label.begin(), tree.leaf_label.end(), 0);

    DisjointSet dsu(m);
    std::vector<int> component_root(static_cast<std::size_t>(m));
    std::iota(component_root.begin(), component_root.end(), 0);

    int merges = 0;
    for (const Pair& p : pairs) {
        if (merges == m - 1) break;
        const int ra = dsu.find(p.j);
        const int rb = dsu.find(p.jp);
        if (ra == rb) continue;
        const int ca = component_root[static_cast<std::size_t>(ra)];
        const int cb = component_root[static_cast<std::size_t>(rb)];
        const int node = m + merges;
        double h = 0.5 * emb.distance(p.j, p.jp);
        // Keep heights strictly increasing toward the root; the floor also
        // guarantees positive edge weights.
        h = std::max({h, tree.node_height[static_cast<std::size_t>(ca)] + opts.weight_floor,
                      tree.node_height[static_cast<std::size_t>(cb)] + opts.weight_floor});
        tree.node_height[static_cast<std::size_t>(node)] = h;
        tree.children[static_cast<std::size_t>(node)] = {ca, cb};
        for (int c : {ca, cb}) {
            tree.parent[static_cast<std::size_t>(c)] = node;
            tree.edge_weight[static_cast<std::size_t>(c)] =
                std::max(h - tree.node_height[static_cast<std::size_t>(c)], opts.weight_floor);
        }
        dsu.unite(ra, rb);
        component_root[static_cast<std::size_t>(dsu.find(ra))] = node;
        ++merges;
    }
    if (merges != m - 1) throw std::logic_error("decode_tree: merge scan did not complete");
    return tree;
}

namespace {

std::vector<int> label_to_leaf(const WeightedBinaryTree& tree) {
    std::vector<int> map(static_cast<std::size_t>(tree.leaf_count), -1);
    for (int v = 0; v < tree.leaf_count; ++v)
        map[static_cast<std::size_t>(tree.leaf_label[static_cast<std::size_t>(v)])] = v;
    return map;
}

}  // namespace

double tree_distance(const WeightedBinaryTree& tree, int leaf_a, int leaf_b) {
    if (leaf_a < 0 || leaf_a >= tree.leaf_count || leaf_b < 0 || leaf_b >= tree.leaf_count)
        throw std::out_of_range("tree_distance: unknown leaf label");
    if (leaf_a == leaf_b) return 0.0;
    const std::vector<int> map = label_to_leaf(tree);
    int a = map[static_cast<std::size_t>(leaf_a)];
    int b = map[static_cast<std::size_t>(leaf_b)];

    auto depth_of = [&](int v) {
        int d = 0;
        for (int u = v; tree.parent[static_cast<std::size_t>(u)] >= 0; u = tree.parent[static_cast<std::size_t>(u)]) ++d;
        return d;
    };
    int da = depth_of(a), db = depth_of(b);
    double dist = 0.0;
    while (da > db) { dist += tree.edge_weight[static_cast<std::size_t>(a)]; a = tree.parent[static_cast<std::size_t>(a)]; --da; }
    while (db > da) { dist += tree.edge_weight[static_cast<std::size_t>(b)]; b = tree.parent[static_cast<std::size_t>(b)]; --db; }
    while (a != b) {
        dist += tree.edge_weight[static_cast<std::size_t>(a)] + tree.edge_weight[static_cast<std::size_t>(b)];
        a = tree.parent[static_cast<std::size_t>(a)];
        b = tree.parent[static_cast<std::size_t>(b)];
    }
    return dist;
}

Eigen::MatrixXd tree_distance_matrix(const WeightedBinaryTree& tree) {
    const int m = tree.leaf_count;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) out(a, b) = out(b, a) = tree_distance(tree, a, b);
    return out;
}

LeafIntervals subtree_leaf_sets(const WeightedBinaryTree& tree) {
    const int n = tree.node_count();
    LeafIntervals iv;
    iv.begin.assign(static_cast<std::size_t>(n), 0);
    iv.end.assign(static_cast<std::size_t>(n), 0);
    iv.postorder_leaf.reserve(static_cast<std::size_t>(tree.leaf_count));
    iv.leaf_position.assign(static_cast<std::size_t>(tree.leaf_count), -1);
    iv.node_postorder.reserve(static_cast<std::size_t>(n));

    // Iterative postorder: children before parents, first child first.
    std::vector<std::pair<int, bool>> stack;
    stack.emplace_back(tree.root(), false);
    while (!stack.empty()) {
        auto [v, expanded] = stack.back();
        stack.pop_back();
        if (expanded || tree.is_leaf(v)) {
            if (tree.is_leaf(v)) {
                const int pos = static_cast<int>(iv.postorder_leaf.size());
                iv.begin[static_cast<std::size_t>(v)] = pos;
                iv.end[static_cast<std::size_t>(v)] = pos + 1;
                const int lbl = tree.leaf_label[static_cast<std::size_t>(v)];
                iv.postorder_leaf.push_back(lbl);
                iv.leaf_position[static_cast<std::size_t>(lbl)] = pos;
            } else {
                const auto& ch = tree.children[static_cast<std::size_t>(v)];
                iv.begin[static_cast<std::size_t>(v)] = iv.begin[static_cast<std::size_t>(ch[0])];
                iv.end[static_cast<std::size_t>(v)] = iv.end[static_cast<std::size_t>(ch[1])];
            }
            iv.node_postorder.push_back(v);
        } else {
            stack.emplace_back(v, true);
            const auto& ch = tree.children[static_cast<std::size_t>(v)];
            stack.emplace_back(ch[1], false);
            stack.emplace_back(ch[0], false);
        }
    }
    return iv;
}

namespace {

std::string format_weight(double w) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    return buf;
}

void write_newick(const WeightedBinaryTree& tree, int v, std::string& out) {
    if (tree.is_leaf(v)) {
        if (!tree.leaf_name.empty()) {
            out += tree.leaf_name[static_cast<std::size_t>(v)];
        } else {
            out += 'f';
            out += std::to_string(tree.leaf_label[static_cast<std::size_t>(v)]);
        }
    } else {
        const auto& ch = tree.children[static_cast<std::size_t>(v)];
        out += '(';
        write_newick(tree, ch[0], out);
        out += ':';
        out += format_weight(tree.edge_weight[static_cast<std::size_t>(ch[0])]);
        out += ',';
        write_newick(tree, ch[1], out);
        out += ':';
        out += format_weight(tree.edge_weight[static_cast<std::size_t>(ch[1])]);
        out += ')';
    }
}

struct NewickParser {
    const std::string& text;
    std::size_t pos = 0;

    struct Node {
        std::string name;
        double weight = 0.0;
        int left = -1, right = -1;
    };
    std::vector<Node> nodes;

    explicit NewickParser(const std::string& t) : text(t) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("from_newick: " + what + " at position " + std::to_string(pos));
    }

    int parse_subtree() {
        skip_ws();
        Node node;
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            node.left = parse_subtree();
            parse_branch_length(node.left);
            skip_ws();
            if (pos >= text.size() || text[pos] != ',') fail("expected ','");
            ++pos;
            node.right = parse_subtree();
            parse_branch_length(node.right);
            skip_ws();
            if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
            ++pos;
        } else {
            std::size_t start = pos;
            while (pos < text.size() && text[pos] != ':' && text[pos] != ',' && text[pos] != ')' &&
                   text[pos] != ';' && text[pos] != '(')
                ++pos;
            node.name = text.substr(start, pos - start);
            if (node.name.empty()) fail("expected leaf name");
        }
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
    }

    void parse_branch_length(int id) {
        skip_ws();
        if (pos >= text.size() || text[pos] != ':') fail("expected ':'");
        ++pos;
        std::size_t consumed = 0;
        double w = std::stod(text.substr(pos), &consumed);
        if (consumed == 0) fail("expected branch length");
        pos += consumed;
        nodes[static_cast<std::size_t>(id)].weight = w;
    }
};

}  // namespace

std::string to_newick(const WeightedBinaryTree& tree) {
    std::string out;
    write_newick(tree, tree.root(), out);
    out += ';';
    return out;
}

WeightedBinaryTree from_newick(const std::string& text) {
    NewickParser parser(text);
    const int root = parser.parse_subtree();
    parser.skip_ws();
    if (parser.pos >= text.size() || text[parser.pos] != ';') parser.fail("expected ';'");

    int leaf_total = 0, internal_total = 0;
    for (const auto& node : parser.nodes)
        (node.left < 0 ? leaf_total : internal_total) += 1;
    if (leaf_total < 2 || internal_total != leaf_total - 1)
        throw std::invalid_argument("from_newick: not a full binary tree");

    WeightedBinaryTree tree;
    tree.leaf_count = leaf_total;
    const int total = 2 * leaf_total - 1;
    tree.parent.assign(static_cast<std::size_t>(total), -1);
    tree.children.assign(static_cast<std::size_t>(total), {-1, -1});
    tree.edge_weight.assign(static_cast<std::size_t>(total), 0.0);
    tree.node_height.assign(static_cast<std::size_t>(total), 0.0);
    tree.leaf_label.assign(static_cast<std::size_t>(leaf_total), -1);
    tree.leaf_name.assign(static_cast<std::size_t>(leaf_total), "");

    // Parser emits nodes in postorder, so leaves and internal nodes can be
    // renumbered into the canonical layout in one pass.
    std::vector<int> renumber(parser.nodes.size(), -1);
    int next_leaf = 0, next_internal = leaf_total;
    for (std::size_t i = 0; i < parser.nodes.size(); ++i) {
        const auto& src = parser.nodes[i];
        int id;
        if (src.left < 0) {
            id = next_leaf++;
            tree.leaf_name[static_cast<std::size_t>(id)] = src.name;
            // Names of the form "f<k>" or "<k>" carry the original label.
            const std::string digits = (src.name.size() > 1 && src.name[0] == 'f' &&
                                        std::isdigit(static_cast<unsigned char>(src.name[1])))
                                           ? src.name.substr(1)
                                           : src.name;
            bool numeric = !digits.empty() &&
                           std::all_of(digits.begin(), digits.end(),
                                       [](unsigned char c) { return std::isdigit(c); });
            tree.leaf_label[static_cast<std::size_t>(id)] = numeric ? std::stoi(digits) : id;
        } else {
            id = next_internal++;
            const int cl = renumber[static_cast<std::size_t>(src.left)];
            const int cr = renumber[static_cast<std::size_t>(src.right)];
            tree.children[static_cast<std::size_t>(id)] = {cl, cr};
            tree.parent[static_cast<std::size_t>(cl)] = id;
            tree.parent[static_cast<std::size_t>(cr)] = id;
            tree.edge_weight[static_cast<std::size_t>(cl)] = parser.nodes[static_cast<std::size_t>(src.left)].weight;
            tree.edge_weight[static_cast<std::size_t>(cr)] = parser.nodes[static_cast<std::size_t>(src.right)].weight;
            tree.node_height[static_cast<std::size_t>(id)] =
                std::max(tree.node_height[static_cast<std::size_t>(cl)] +
                             tree.edge_weight[static_cast<std::size_t>(cl)],
                         tree.node_height[static_cast<std::size_t>(cr)] +
                             tree.edge_weight[static_cast<std::size_t>(cr)]);
        }
        renumber[i] = id;
    }
    (void)root;

    // Labels that did not come from numeric names may collide; fall back to
    // positional labels if the parsed ones are not a bijection.
    std::vector<char> seen(static_cast<std::size_t>(leaf_total), 0);
    bool bijection = true;
    for (int v = 0; v < leaf_total; ++v) {
        const int lbl = tree.leaf_label[static_cast<std::size_t>(v)];
        if (lbl < 0 || lbl >= leaf_total || seen[static_cast<std::size_t>(lbl)]) { bijection = false; break; }
        seen[static_cast<std::size_t>(lbl)] = 1;
    }
    if (!bijection)
        for (int v = 0; v < leaf_total; ++v) tree.leaf_label[static_cast<std::size_t>(v)] = v;
    return tree;
}

}  // namespace cotwd
