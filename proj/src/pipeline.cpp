#include "cotwd/pipeline.hpp"

#include "cotwd/wavelet.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cotwd {

double relative_frobenius_change(const Eigen::MatrixXd& current, const Eigen::MatrixXd& previous) {
    const double base = previous.norm();
    const double diff = (current - previous).norm();
    if (base == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / base;
}

Pipeline::Pipeline(Eigen::MatrixXd X, Eigen::MatrixXd M_r, Eigen::MatrixXd M_c, IterationConfig config)
    : data_(std::move(X)),
      initial_rows_(std::move(M_r)),
      initial_cols_(std::move(M_c)),
      config_(std::move(config)) {
    const Eigen::Index n = data_.rows(), m = data_.cols();
    if (n < 2 || m < 2) throw std::invalid_argument("pipeline: need at least 2 samples and 2 features");
    if ((data_.array() < 0.0).any()) throw std::invalid_argument("pipeline: data matrix must be nonnegative");
    if (initial_rows_.rows() != n || initial_rows_.cols() != n)
        throw std::invalid_argument("pipeline: M_r must be n x n");
    if (initial_cols_.rows() != m || initial_cols_.cols() != m)
        throw std::invalid_argument("pipeline: M_c must be m x m");
    for (Eigen::Index i = 0; i < n; ++i)
        if (data_.row(i).sum() <= 0.0)
            throw std::invalid_argument("pipeline: all-zero row " + std::to_string(i));
    for (Eigen::Index j = 0; j < m; ++j)
        if (data_.col(j).sum() <= 0.0)
            throw std::invalid_argument("pipeline: all-zero column " + std::to_string(j));
    // Accumulate the normalizers with an explicit, per-index-identical order:
    // Eigen's rowwise()/colwise() reductions may use a different summation
    // order for the vectorized body than for tail elements, which would make
    // bitwise-identical rows normalize to slightly different histograms.
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < m; ++j) row_sums += data_.col(j);
    Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < n; ++i) col_sums += data_.row(i).transpose();
    sample_hist_ = data_.array().colwise() / row_sums.array();
    feature_hist_ = (data_.array().rowwise() / col_sums.transpose().array()).transpose();
}

IterationState Pipeline::initial_state(Algorithm algorithm) const {
    IterationState state;
    state.algorithm = algorithm;
    state.iteration = 0;
    const DecodeOptions opts = config_.decode_options();
    switch (algorithm) {
        case Algorithm::Alternating: {
            state.feature_tree = decode_tree(initial_cols_, opts);
            state.sample_tree = decode_tree(initial_rows_, opts);
            state.sample_twd = pairwise_twd(sample_hist_, state.feature_tree,
                                           {config_.gamma_r, config_.regularizer_epsilon, config_.threads});
            state.feature_twd = pairwise_twd(feature_hist_, state.sample_tree,
                                            {config_.gamma_c, config_.regularizer_epsilon, config_.threads});
            break;
        }
        case Algorithm::HaarFiltered:
            state.sample_twd = initial_rows_;
            state.feature_twd = initial_cols_;
            state.filtered_samples = data_;
            state.filtered_features = data_.transpose();
            break;
        case Algorithm::FixedSampleMode:
            state.sample_twd = initial_rows_;
            state.feature_twd = initial_cols_;
            state.filtered_samples = data_;
            state.filtered_features = data_.transpose();
            state.sample_tree = decode_tree(initial_rows_, opts);  // held fixed
            break;
    }
    return state;
}

IterationState Pipeline::step(const IterationState& state) const {
    IterationState next;
    next.algorithm = state.algorithm;
    next.iteration = state.iteration + 1;
    const DecodeOptions opts = config_.decode_options();
    const TwdConfig row_cfg{config_.gamma_r, config_.regularizer_epsilon, config_.threads};
    const TwdConfig col_cfg{config_.gamma_c, config_.regularizer_epsilon, config_.threads};

    switch (state.algorithm) {
        case Algorithm::Alternating: {
            next.feature_tree = decode_tree(state.feature_twd, opts);
            next.sample_tree = decode_tree(state.sample_twd, opts);
            next.sample_twd = pairwise_twd(sample_hist_, next.feature_tree, row_cfg);
            next.feature_twd = pairwise_twd(feature_hist_, next.sample_tree, col_cfg);
            break;
        }
        case Algorithm::HaarFiltered:
        case Algorithm::FixedSampleMode: {
            next.feature_tree = decode_tree(state.feature_twd, opts);
            next.sample_tree = state.algorithm == Algorithm::FixedSampleMode
                                   ? state.sample_tree
                                   : decode_tree(state.sample_twd, opts);
            try {
                const HaarBasis basis_c = haar_basis(next.feature_tree);
                const HaarBasis basis_r = haar_basis(next.sample_tree);
                const Eigen::MatrixXd coeff_samples = expand(state.filtered_samples, basis_c);
                const Eigen::MatrixXd coeff_features = expand(state.filtered_features, basis_r);
                const double mass_samples = coeff_samples.cwiseAbs().sum();
                const double mass_features = coeff_features.cwiseAbs().sum();
                // The thresholds are fractions of the first iteration's total
                // coefficient mass; later iterations apply the same absolute
                // cutoff (capped at keeping everything).
                next.reference_mass_samples =
                    state.iteration == 0 ? mass_samples : state.reference_mass_samples;
                next.reference_mass_features =
                    state.iteration == 0 ? mass_features : state.reference_mass_features;
                const double frac_c =
                    std::min(1.0, config_.threshold_c * next.reference_mass_samples / mass_samples);
                const double frac_r =
                    std::min(1.0, config_.threshold_r * next.reference_mass_features / mass_features);
                next.filtered_samples =
                    apply_filter(state.filtered_samples, basis_c, select_filter(coeff_samples, frac_c));
                next.filtered_features =
                    apply_filter(state.filtered_features, basis_r, select_filter(coeff_features, frac_r));
                const Eigen::MatrixXd sample_hist = normalize_histograms(next.filtered_samples);
                const Eigen::MatrixXd feature_hist = normalize_histograms(next.filtered_features);
                next.sample_twd = pairwise_twd(sample_hist, next.feature_tree, row_cfg);
                next.feature_twd = pairwise_twd(feature_hist, next.sample_tree, col_cfg);
            } catch (const std::runtime_error& err) {
                throw std::runtime_error("iteration " + std::to_string(next.iteration) + ": " + err.what());
            }
            break;
        }
    }
    return next;
}

PipelineResult Pipeline::run(Algorithm algorithm) const {
    PipelineResult result;
    result.state = initial_state(algorithm);
    for (int l = 1; l <= config_.max_iterations; ++l) {
        const auto start = std::chrono::steady_clock::now();
        IterationState next = step(result.state);
        IterationRecord rec;
        rec.iteration = next.iteration;
        rec.rel_change_samples = relative_frobenius_change(next.sample_twd, result.state.sample_twd);
        rec.rel_change_features = relative_frobenius_change(next.feature_twd, result.state.feature_twd);
        rec.l1_haar_samples = l1_haar_norm(data_, haar_basis(next.feature_tree));
        rec.l1_haar_features = l1_haar_norm(data_.transpose(), haar_basis(next.sample_tree));
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        result.state = std::move(next);
        result.history.push_back(rec);
        if (std::max(rec.rel_change_samples, rec.rel_change_features) < config_.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::pair<double, double> Pipeline::check_fixed_point(const IterationState& state) const {
    const IterationState next = step(state);
    return {relative_frobenius_change(next.sample_twd, state.sample_twd),
            relative_frobenius_change(next.feature_twd, state.feature_twd)};
}

}  // namespace cotwd
