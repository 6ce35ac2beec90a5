#include "cotwd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cotwd {

namespace {

constexpr double kReducedCostTol = 1e-10;

// Spanning-tree search over the basic cells of the transportation tableau.
// Nodes 0..p-1 are rows, p..p+q-1 are columns.
std::vector<int> tree_path(int p, int q, const std::vector<std::vector<char>>& basic, int from, int to) {
    const int total = p + q;
    std::vector<int> prev(static_cast<std::size_t>(total), -2);
    std::deque<int> queue{from};
    prev[static_cast<std::size_t>(from)] = -1;
    while (!queue.empty()) {
        const int node = queue.front();
        queue.pop_front();
        if (node == to) break;
        if (node < p) {
            for (int j = 0; j < q; ++j)
                if (basic[static_cast<std::size_t>(node)][static_cast<std::size_t>(j)] &&
                    prev[static_cast<std::size_t>(p + j)] == -2) {
                    prev[static_cast<std::size_t>(p + j)] = node;
                    queue.push_back(p + j);
                }
        } else {
            const int j = node - p;
            for (int i = 0; i < p; ++i)
                if (basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
                    prev[static_cast<std::size_t>(i)] == -2) {
                    prev[static_cast<std::size_t>(i)] = node;
                    queue.push_back(i);
                }
        }
    }
    std::vector<int> path;
    for (int node = to; node != -1; node = prev[static_cast<std::size_t>(node)]) {
        if (node == -2) throw std::logic_error("exact_ot: basis is not a spanning tree");
        path.push_back(node);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

double exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
    const int p = static_cast<int>(mu.size());
    const int q = static_cast<int>(nu.size());
    if (cost.rows() != p || cost.cols() != q)
        throw std::invalid_argument("exact_ot: cost shape does not match marginals");
    if (p > 64 || q > 64) throw std::invalid_argument("exact_ot: oracle capped at 64 support points");
    if ((mu.array() < 0.0).any() || (nu.array() < 0.0).any())
        throw std::invalid_argument("exact_ot: marginals must be nonnegative");
    if (std::abs(mu.sum() - nu.sum()) > 1e-9)
        throw std::invalid_argument("exact_ot: marginal sums differ");

    std::vector<std::vector<double>> flow(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(q), 0.0));
    std::vector<std::vector<char>> basic(static_cast<std::size_t>(p), std::vector<char>(static_cast<std::size_t>(q), 0));

    // Northwest-corner initial basis: exactly p+q-1 basic cells, possibly
    // degenerate (zero flow).
    std::vector<double> remain_row(mu.data(), mu.data() + p);
    std::vector<double> remain_col(nu.data(), nu.data() + q);
    {
        int i = 0, j = 0;
        int count = 0;
        while (count < p + q - 1) {
            const double t = std::min(remain_row[static_cast<std::size_t>(i)], remain_col[static_cast<std::size_t>(j)]);
            flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t;
            basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
            remain_row[static_cast<std::size_t>(i)] -= t;
            remain_col[static_cast<std::size_t>(j)] -= t;
            ++count;
            if (remain_row[static_cast<std::size_t>(i)] <= remain_col[static_cast<std::size_t>(j)] && i < p - 1)
                ++i;
            else if (j < q - 1)
                ++j;
            else
                ++i;
        }
    }

    const int max_pivots = 200 * (p + q) * (p + q);
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
        // Potentials from the basis tree; u[0] = 0.
        std::vector<double> u(static_cast<std::size_t>(p), 0.0), v(static_cast<std::size_t>(q), 0.0);
        std::vector<char> known(static_cast<std::size_t>(p + q), 0);
        known[0] = 1;
        std::deque<int> queue{0};
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node < p) {
                for (int j = 0; j < q; ++j)
                    if (basic[static_cast<std::size_t>(node)][static_cast<std::size_t>(j)] &&
                        !known[static_cast<std::size_t>(p + j)]) {
                        v[static_cast<std::size_t>(j)] = cost(node, j) - u[static_cast<std::size_t>(node)];
                        known[static_cast<std::size_t>(p + j)] = 1;
                        queue.push_back(p + j);
                    }
            } else {
                const int j = node - p;
                for (int i = 0; i < p; ++i)
                    if (basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
                        !known[static_cast<std::size_t>(i)]) {
                        u[static_cast<std::size_t>(i)] = cost(i, j) - v[static_cast<std::size_t>(j)];
                        known[static_cast<std::size_t>(i)] = 1;
                        queue.push_back(i);
                    }
            }
        }

        // Bland's rule: first cell in row-major order with negative reduced cost.
        int ei = -1, ej = -1;
        for (int i = 0; i < p && ei < 0; ++i)
            for (int j = 0; j < q; ++j) {
                if (basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
                if (cost(i, j) - u[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)] < -kReducedCostTol) {
                    ei = i;
                    ej = j;
                    break;
                }
            }
        if (ei < 0) break;  // optimal

        // The entering cell closes a unique cycle with the basis tree.
        const std::vector<int> path = tree_path(p, q, basic, ei, p + ej);
        std::vector<std::pair<int, int>> minus_cells;
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s + 1 < path.size(); ++s) {
            const int a = path[s], b = path[s + 1];
            const int i = a < p ? a : b;
            const int j = (a < p ? b : a) - p;
            // Edges at even positions along the path receive -theta: the cycle
            // starts with the entering cell at +theta.
            if (s % 2 == 0) {
                minus_cells.emplace_back(i, j);
                theta = std::min(theta, flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            }
        }
        for (std::size_t s = 0; s + 1 < path.size(); ++s) {
            const int a = path[s], b = path[s + 1];
            const int i = a < p ? a : b;
            const int j = (a < p ? b : a) - p;
            flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += (s % 2 == 0) ? -theta : theta;
        }
        flow[static_cast<std::size_t>(ei)][static_cast<std::size_t>(ej)] += theta;
        basic[static_cast<std::size_t>(ei)][static_cast<std::size_t>(ej)] = 1;
        // The minus-cell with the smallest residual flow leaves the basis.
        std::size_t leave = 0;
        for (std::size_t s = 1; s < minus_cells.size(); ++s) {
            const auto [li, lj] = minus_cells[leave];
            const auto [si, sj] = minus_cells[s];
            if (flow[static_cast<std::size_t>(si)][static_cast<std::size_t>(sj)] <
                flow[static_cast<std::size_t>(li)][static_cast<std::size_t>(lj)])
                leave = s;
        }
        const auto [li, lj] = minus_cells[leave];
        basic[static_cast<std::size_t>(li)][static_cast<std::size_t>(lj)] = 0;
        flow[static_cast<std::size_t>(li)][static_cast<std::size_t>(lj)] = 0.0;
        for (auto [i, j] : minus_cells)
            flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                std::max(flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 0.0);
    }

    double total = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) total += cost(i, j) * flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return total;
}

namespace {

double classify_accuracy(const Eigen::MatrixXd& distances, const std::vector<int>& labels,
                         const std::vector<int>& train, const std::vector<int>& test, int k) {
    int correct = 0;
    std::vector<std::pair<double, int>> neighbors;
    for (int t : test) {
        neighbors.clear();
        for (int tr : train) neighbors.emplace_back(distances(t, tr), tr);
        const int kk = std::min<int>(k, static_cast<int>(neighbors.size()));
        std::partial_sort(neighbors.begin(), neighbors.begin() + kk, neighbors.end());
        // Majority vote; ties break on smallest summed distance, then label id.
        std::vector<std::pair<int, double>> votes;  // label -> summed distance
        std::vector<int> counts;
        for (int s = 0; s < kk; ++s) {
            const int lbl = labels[static_cast<std::size_t>(neighbors[static_cast<std::size_t>(s)].second)];
            bool found = false;
            for (std::size_t vi = 0; vi < votes.size(); ++vi)
                if (votes[vi].first == lbl) {
                    votes[vi].second += neighbors[static_cast<std::size_t>(s)].first;
                    counts[vi] += 1;
                    found = true;
                }
            if (!found) {
                votes.emplace_back(lbl, neighbors[static_cast<std::size_t>(s)].first);
                counts.push_back(1);
            }
        }
        int best_label = -1, best_count = -1;
        double best_sum = 0.0;
        for (std::size_t vi = 0; vi < votes.size(); ++vi) {
            const bool better = counts[vi] > best_count ||
                                (counts[vi] == best_count &&
                                 (votes[vi].second < best_sum ||
                                  (votes[vi].second == best_sum && votes[vi].first < best_label)));
            if (better) {
                best_label = votes[vi].first;
                best_count = counts[vi];
                best_sum = votes[vi].second;
            }
        }
        if (best_label == labels[static_cast<std::size_t>(t)]) ++correct;
    }
    return test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

KnnReport knn_accuracy(const Eigen::MatrixXd& distances, const std::vector<int>& labels,
                       const std::vector<int>& k_grid, double train_fraction, int trials,
                       std::uint64_t seed) {
    const int n = static_cast<int>(distances.rows());
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("knn_accuracy: label count does not match matrix order");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw std::invalid_argument("knn_accuracy: train_fraction must lie in (0,1)");
    std::vector<int> classes(labels);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) throw std::invalid_argument("knn_accuracy: need at least 2 classes");

    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> accs(k_grid.size());
    KnnReport report;

    for (int trial = 0; trial < trials; ++trial) {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        const int train_count = std::max(1, static_cast<int>(std::lround(train_fraction * n)));

        std::vector<int> train, test;
        bool ok = false;
        for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
            if (attempt > 0) ++report.resample_warnings;
            std::shuffle(order.begin(), order.end(), rng);
            train.assign(order.begin(), order.begin() + train_count);
            test.assign(order.begin() + train_count, order.end());
            std::vector<char> present(classes.size(), 0);
            for (int tr : train) {
                const auto it = std::lower_bound(classes.begin(), classes.end(), labels[static_cast<std::size_t>(tr)]);
                present[static_cast<std::size_t>(it - classes.begin())] = 1;
            }
            ok = std::all_of(present.begin(), present.end(), [](char c) { return c != 0; });
        }
        if (!ok) throw std::runtime_error("knn_accuracy: a class is absent from every sampled training split");

        for (std::size_t ki = 0; ki < k_grid.size(); ++ki)
            accs[ki].push_back(classify_accuracy(distances, labels, train, test, k_grid[ki]));
    }

    for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
        KnnResult res;
        res.k = k_grid[ki];
        const auto& a = accs[ki];
        res.mean_accuracy = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
        double var = 0.0;
        for (double x : a) var += (x - res.mean_accuracy) * (x - res.mean_accuracy);
        res.std_accuracy = a.size() > 1 ? std::sqrt(var / static_cast<double>(a.size() - 1)) : 0.0;
        report.per_k.push_back(res);
        if (report.per_k.size() == 1 || res.mean_accuracy > report.best.mean_accuracy) report.best = res;
    }
    return report;
}

namespace {

Eigen::MatrixXd sample_leaf_embeddings(const std::vector<std::vector<int>>& hierarchy, int per_leaf_group,
                                       double sigma_root, double sigma_child, int dim,
                                       std::mt19937_64& rng, std::vector<int>& level1,
                                       std::vector<int>& level2) {
    std::normal_distribution<double> unit(0.0, 1.0);
    auto gauss_around = [&](const Eigen::VectorXd& center, double sigma) {
        Eigen::VectorXd out(dim);
        for (int d = 0; d < dim; ++d) out(d) = center(d) + sigma * unit(rng);
        return out;
    };

    Eigen::VectorXd root(dim);
    for (int d = 0; d < dim; ++d) root(d) = sigma_root * unit(rng);

    std::vector<Eigen::VectorXd> leaves;
    int group_id = 0;
    for (std::size_t cat = 0; cat < hierarchy.size(); ++cat) {
        const Eigen::VectorXd cat_center = gauss_around(root, sigma_child);
        for (std::size_t sub = 0; sub < hierarchy[cat].size(); ++sub) {
            const Eigen::VectorXd sub_center = gauss_around(cat_center, sigma_child);
            for (int leaf = 0; leaf < per_leaf_group; ++leaf) {
                leaves.push_back(gauss_around(sub_center, sigma_child));
                level1.push_back(static_cast<int>(cat));
                level2.push_back(group_id);
            }
            ++group_id;
        }
    }
    Eigen::MatrixXd out(static_cast<int>(leaves.size()), dim);
    for (std::size_t i = 0; i < leaves.size(); ++i) out.row(static_cast<int>(i)) = leaves[i];
    return out;
}

}  // namespace

ToyDataset generate_toy(const ToySpec& spec) {
    if (spec.embed_dim < 1) throw std::invalid_argument("generate_toy: embed_dim must be >= 1");
    if (spec.users_per_context < 1 || spec.videos_per_subgenre < 1)
        throw std::invalid_argument("generate_toy: group sizes must be >= 1");

    // Video hierarchy: fiction -> {action, drama, sci-fi}, documentary ->
    // {biography, historical}, animation -> {family, comedy}. Users branch by
    // device then viewing context.
    const std::vector<std::vector<int>> video_tree = {{0, 1, 2}, {3, 4}, {5, 6}};
    const std::vector<std::vector<int>> user_tree = {{0, 1}, {2, 3}, {4, 5}};

    std::mt19937_64 rng(spec.seed);
    ToyDataset data;
    data.user_label_names = {"mobile", "desktop", "tv"};
    data.video_label_names = {"fiction", "documentary", "animation"};

    const Eigen::MatrixXd users =
        sample_leaf_embeddings(user_tree, spec.users_per_context, spec.sigma_root_users,
                               spec.sigma_child_users, spec.embed_dim, rng, data.user_labels, data.user_sublabels);
    const Eigen::MatrixXd videos =
        sample_leaf_embeddings(video_tree, spec.videos_per_subgenre, spec.sigma_root_videos,
                               spec.sigma_child_videos, spec.embed_dim, rng, data.video_labels,
                               data.video_sublabels);

    const int n = static_cast<int>(users.rows());
    const int m = static_cast<int>(videos.rows());
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd interaction(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            interaction(i, j) = (users.row(i) - videos.row(j)).norm() + spec.noise_sigma * noise(rng);

    // A single global shift keeps relative structure while making X nonnegative.
    const double mn = interaction.minCoeff();
    if (mn < 0.0) interaction.array() -= mn;

    std::vector<int> row_perm(static_cast<std::size_t>(n)), col_perm(static_cast<std::size_t>(m));
    std::iota(row_perm.begin(), row_perm.end(), 0);
    std::iota(col_perm.begin(), col_perm.end(), 0);
    std::shuffle(row_perm.begin(), row_perm.end(), rng);
    std::shuffle(col_perm.begin(), col_perm.end(), rng);

    data.matrix.resize(n, m);
    std::vector<int> user_l1(static_cast<std::size_t>(n)), user_l2(static_cast<std::size_t>(n));
    std::vector<int> video_l1(static_cast<std::size_t>(m)), video_l2(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) {
        user_l1[static_cast<std::size_t>(i)] = data.user_labels[static_cast<std::size_t>(row_perm[static_cast<std::size_t>(i)])];
        user_l2[static_cast<std::size_t>(i)] = data.user_sublabels[static_cast<std::size_t>(row_perm[static_cast<std::size_t>(i)])];
        for (int j = 0; j < m; ++j)
            data.matrix(i, j) = interaction(row_perm[static_cast<std::size_t>(i)], col_perm[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < m; ++j) {
        video_l1[static_cast<std::size_t>(j)] = data.video_labels[static_cast<std::size_t>(col_perm[static_cast<std::size_t>(j)])];
        video_l2[static_cast<std::size_t>(j)] = data.video_sublabels[static_cast<std::size_t>(col_perm[static_cast<std::size_t>(j)])];
    }
    data.user_labels = std::move(user_l1);
    data.user_sublabels = std::move(user_l2);
    data.video_labels = std::move(video_l1);
    data.video_sublabels = std::move(video_l2);
    return data;
}

}  // namespace cotwd
