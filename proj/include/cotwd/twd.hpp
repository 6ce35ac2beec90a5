#pragma once

#include "cotwd/tree.hpp"

#include <Eigen/Dense>

namespace cotwd {

struct TwdConfig {
    double gamma = 0.0;
    double regularizer_epsilon = 1e-6;
    int threads = 1;
};

/// Closed-form tree-Wasserstein distance between two leaf histograms aligned
/// to the original leaf labels of `tree`. Single postorder pass, O(N).
double twd(const WeightedBinaryTree& tree, const Eigen::VectorXd& rho1, const Eigen::VectorXd& rho2);

/// Snowflake penalty 0.5 * integral_0^{||delta||_2} dxi / (sqrt(xi) + eps),
/// evaluated in closed form.
double snowflake(double norm, double epsilon = 1e-6);
double snowflake(const Eigen::VectorXd& delta, double epsilon = 1e-6);

/// Pairwise TWD matrix between the rows of `histograms` (p x m, each row a
/// leaf histogram), with the optional snowflake regularizer added per entry.
Eigen::MatrixXd pairwise_twd(const Eigen::MatrixXd& histograms, const WeightedBinaryTree& tree,
                             const TwdConfig& config = {});

}  // namespace cotwd
