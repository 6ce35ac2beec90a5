#pragma once

#include "cotwd/tree.hpp"
#include "cotwd/twd.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace cotwd {

enum class Algorithm { Alternating, HaarFiltered, FixedSampleMode };

struct IterationConfig {
    double gamma_r = 0.0;
    double gamma_c = 0.0;
    int max_scale = 5;  // K
    double scale_multiplier = 1.0;
    double threshold_r = 1.0;
    double threshold_c = 1.0;
    int max_iterations = 25;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    std::optional<double> landmark_c;
    bool density_normalize = false;
    double regularizer_epsilon = 1e-6;
    double weight_floor = 1e-12;
    int threads = 1;

    DecodeOptions decode_options() const {
        return DecodeOptions{max_scale, scale_multiplier, density_normalize, weight_floor};
    }
};

struct IterationRecord {
    int iteration = 0;
    double rel_change_samples = 0.0;
    double rel_change_features = 0.0;
    double l1_haar_samples = 0.0;
    double l1_haar_features = 0.0;
    double wall_ms = 0.0;
};

struct IterationState {
    Algorithm algorithm = Algorithm::Alternating;
    int iteration = 0;
    Eigen::MatrixXd sample_twd;    // W_r, n x n
    Eigen::MatrixXd feature_twd;   // W_c, m x m
    WeightedBinaryTree sample_tree;
    WeightedBinaryTree feature_tree;
    Eigen::MatrixXd filtered_samples;   // X^(l), n x m (filtering variants)
    Eigen::MatrixXd filtered_features;  // Z^(l), m x n
    // Total L1 coefficient mass at the first filtering step, per mode. The
    // configured thresholds are fractions of these reference masses, so the
    // cutoff is absolute across iterations rather than re-shrinking with the
    // already-filtered signals.
    double reference_mass_samples = 0.0;
    double reference_mass_features = 0.0;
};

struct PipelineResult {
    IterationState state;
    std::vector<IterationRecord> history;
    bool converged = false;
};

class Pipeline {
public:
    /// X must be nonnegative with no all-zero row or column; M_r is n x n and
    /// M_c is m x m.
    Pipeline(Eigen::MatrixXd X, Eigen::MatrixXd M_r, Eigen::MatrixXd M_c, IterationConfig config);

    PipelineResult run(Algorithm algorithm) const;

    /// One additional update from a finished state; returns the relative
    /// Frobenius change per mode {samples, features}.
    std::pair<double, double> check_fixed_point(const IterationState& state) const;

    const IterationConfig& config() const { return config_; }

private:
    IterationState initial_state(Algorithm algorithm) const;
    IterationState step(const IterationState& state) const;

    Eigen::MatrixXd data_;            // X
    Eigen::MatrixXd sample_hist_;     // row-normalized X, n x m
    Eigen::MatrixXd feature_hist_;    // column-normalized X as rows, m x n
    Eigen::MatrixXd initial_rows_;    // M_r
    Eigen::MatrixXd initial_cols_;    // M_c
    IterationConfig config_;
};

double relative_frobenius_change(const Eigen::MatrixXd& current, const Eigen::MatrixXd& previous);

}  // namespace cotwd
