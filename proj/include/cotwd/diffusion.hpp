#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace cotwd {

/// Gaussian affinity kernel K = exp(-M.^2 / scale) with the scale picked by
/// the median heuristic (scale_multiplier times the median pairwise distance).
struct AffinityKernel {
    Eigen::MatrixXd matrix;
    double scale = 0.0;
};

/// Column-stochastic diffusion operator P = K D^{-1} together with the
/// eigendecomposition of the symmetric conjugate D^{-1/2} K D^{-1/2}.
/// Eigenvalues are sorted descending; the leading one equals 1.
struct DiffusionOperator {
    Eigen::MatrixXd transition;
    Eigen::VectorXd degrees;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

/// Low-rank spectral approximation built from a landmark subset.
struct LandmarkSpectrum {
    int landmark_count = 0;
    std::vector<int> landmarks;
    Eigen::MatrixXd cross_kernel;     // n x n' kernel between all points and landmarks
    Eigen::VectorXd degrees;          // diag of D-hat
    Eigen::VectorXd singular_values;  // of D^{-1/2} K-hat, descending
    Eigen::MatrixXd left_vectors;     // n x n'
    /// Approximate eigenvalues of the normalized landmark-affinity operator.
    Eigen::VectorXd eigenvalues() const {
        return singular_values.array().square();
    }
};

AffinityKernel build_kernel(const Eigen::MatrixXd& distances, double scale_multiplier);

DiffusionOperator build_operator(const AffinityKernel& kernel, bool density_normalize = false);

/// P^{2^{-k}} via the spectral decomposition, negative eigenvalues clamped to
/// zero before taking the fractional power. Columns are exact probability
/// vectors; column j is the density diffused from point j.
Eigen::MatrixXd diffusion_densities(const DiffusionOperator& op, int k);

LandmarkSpectrum landmark_spectrum(const Eigen::MatrixXd& distances, double scale_multiplier,
                                   double c, std::uint64_t seed);

/// Median of the strictly-upper-triangular entries of a symmetric matrix.
double offdiagonal_median(const Eigen::MatrixXd& distances);

}  // namespace cotwd
