#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace cotwd {

/// Exact discrete optimal transport cost (Kantorovich LP) via the
/// transportation simplex. Test oracle only: capped at 64 support points.
double exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);

struct KnnResult {
    int k = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct KnnReport {
    std::vector<KnnResult> per_k;
    KnnResult best;
    int resample_warnings = 0;
};

/// Majority-vote kNN over a precomputed distance matrix with seeded random
/// train/test splits. Ties break on smallest summed distance, then lowest
/// label id.
KnnReport knn_accuracy(const Eigen::MatrixXd& distances, const std::vector<int>& labels,
                       const std::vector<int>& k_grid, double train_fraction, int trials,
                       std::uint64_t seed);

struct ToySpec {
    double sigma_root_videos = 0.5;   // sigma_0
    double sigma_root_users = 0.25;   // sigma_1
    double sigma_child_videos = 1.0;  // sigma_c
    double sigma_child_users = 0.6;   // sigma_r
    double noise_sigma = 0.1;
    int embed_dim = 30;
    int users_per_context = 10;
    int videos_per_subgenre = 8;
    std::uint64_t seed = 0;
};

struct ToyDataset {
    Eigen::MatrixXd matrix;              // users x videos, nonnegative
    std::vector<int> user_labels;        // first-level (device) category per row
    std::vector<int> video_labels;       // first-level (genre) category per column
    std::vector<int> user_sublabels;     // second-level category per row
    std::vector<int> video_sublabels;    // second-level category per column
    std::vector<std::string> user_label_names;
    std::vector<std::string> video_label_names;
};

/// Synthetic user/video interaction matrix generated by root-to-leaf Gaussian
/// diffusion over two fixed label hierarchies, with seeded row and column
/// permutations.
ToyDataset generate_toy(const ToySpec& spec);

}  // namespace cotwd
