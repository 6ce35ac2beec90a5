#include "cotwd/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace cotwd {

namespace {

double median_of(std::vector<double>& values) {
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double med = values[mid];
    if (values.size() % 2 == 0) {
        double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (lo + med);
    }
    return med;
}

}  // namespace

double offdiagonal_median(const Eigen::MatrixXd& distances) {
    const Eigen::Index m = distances.rows();
    std::vector<double> upper;
    upper.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) upper.push_back(distances(i, j));
    if (upper.empty()) throw std::invalid_argument("offdiagonal_median: matrix has no off-diagonal entries");
    double med = median_of(upper);
    if (med <= 0.0) {
        // Duplicate-heavy inputs: more than half of the pairs coincide. Fall
        // back to the median of the strictly positive distances so the kernel
        // scale stays finite; all-zero inputs keep the zero median.
        std::vector<double> positive;
        for (double d : upper)
            if (d > 0.0) positive.push_back(d);
        if (!positive.empty()) med = median_of(positive);
    }
    return med;
}

AffinityKernel build_kernel(const Eigen::MatrixXd& distances, double scale_multiplier) {
    if (distances.rows() != distances.cols())
        throw std::invalid_argument("build_kernel: distance matrix must be square");
    if (scale_multiplier <= 0.0)
        throw std::invalid_argument("build_kernel: scale_multiplier must be positive");
    const double med = offdiagonal_median(distances);
    if (med <= 0.0)
        throw std::invalid_argument("build_kernel: degenerate scale, median pairwise distance is zero");
    AffinityKernel kernel;
    kernel.scale = scale_multiplier * med;
    kernel.matrix = (-distances.array().square() / kernel.scale).exp();
    // Exact symmetry and unit diagonal regardless of rounding in exp.
    kernel.matrix = 0.5 * (kernel.matrix + kernel.matrix.transpose()).eval();
    kernel.matrix.diagonal().setOnes();
    return kernel;
}

DiffusionOperator build_operator(const AffinityKernel& kernel, bool density_normalize) {
    Eigen::MatrixXd K = kernel.matrix;
    Eigen::VectorXd deg = K.rowwise().sum();
    if ((deg.array() <= 0.0).any())
        throw std::invalid_argument("build_operator: singular degree, zero row-sum in kernel");
    if (density_normalize) {
        Eigen::VectorXd inv = deg.cwiseInverse();
        K = inv.asDiagonal() * K * inv.asDiagonal();
        deg = K.rowwise().sum();
        if ((deg.array() <= 0.0).any())
            throw std::invalid_argument("build_operator: singular degree after density normalization");
    }
    DiffusionOperator op;
    op.degrees = deg;
    op.transition = K * deg.cwiseInverse().asDiagonal();

    const Eigen::VectorXd dinv_sqrt = deg.array().rsqrt();
    const Eigen::VectorXd d_sqrt = deg.array().sqrt();
    Eigen::MatrixXd sym = dinv_sqrt.asDiagonal() * K * dinv_sqrt.asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("build_operator: eigendecomposition failed");
    // Eigen returns ascending order; flip to descending.
    op.eigenvalues = es.eigenvalues().reverse();
    op.eigenvectors = es.eigenvectors().rowwise().reverse();
    return op;
}

Eigen::MatrixXd diffusion_densities(const DiffusionOperator& op, int k) {
    if (k < 0) throw std::invalid_argument("diffusion_densities: k must be nonnegative");
    const double t = std::pow(2.0, -static_cast<double>(k));
    Eigen::VectorXd lam = op.eigenvalues.cwiseMax(0.0);
    lam = lam.array().pow(t);
    const Eigen::VectorXd d_sqrt = op.degrees.array().sqrt();
    const Eigen::VectorXd dinv_sqrt = op.degrees.array().rsqrt();
    Eigen::MatrixXd powered = d_sqrt.asDiagonal() * op.eigenvectors * lam.asDiagonal() *
                              op.eigenvectors.transpose() * dinv_sqrt.asDiagonal();
    // Fractional powers may introduce tiny negative entries; clamp and put each
    // column back on the simplex so downstream TWD sees probability vectors.
    powered = powered.cwiseMax(0.0);
    Eigen::VectorXd colsum = powered.colwise().sum();
    if ((colsum.array() <= 0.0).any())
        throw std::runtime_error("diffusion_densities: zero column after clamping");
    powered *= colsum.cwiseInverse().asDiagonal();
    return powered;
}

LandmarkSpectrum landmark_spectrum(const Eigen::MatrixXd& distances, double scale_multiplier,
                                   double c, std::uint64_t seed) {
    const Eigen::Index n = distances.rows();
    if (n < 4) throw std::invalid_argument("landmark_spectrum: need at least 4 points");
    if (c <= 0.0 || c >= 1.0) throw std::invalid_argument("landmark_spectrum: c must lie in (0,1)");
    const int count = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), c)));
    if (count < 2) throw std::invalid_argument("landmark_spectrum: insufficient landmarks");

    std::vector<int> indices(static_cast<std::size_t>(n));
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(indices.begin(), indices.end(), rng);
    indices.resize(static_cast<std::size_t>(count));
    std::sort(indices.begin(), indices.end());

    const double med = offdiagonal_median(distances);
    if (med <= 0.0)
        throw std::invalid_argument("landmark_spectrum: degenerate scale, median pairwise distance is zero");
    const double scale = scale_multiplier * med;

    LandmarkSpectrum spec;
    spec.landmark_count = count;
    spec.landmarks = indices;
    spec.cross_kernel.resize(n, count);
    for (int l = 0; l < count; ++l)
        spec.cross_kernel.col(l) = (-distances.col(indices[static_cast<std::size_t>(l)]).array().square() / scale).exp();

    // D-hat(i,i) = row i of K-hat K-hat^T summed, computed without forming the n x n product.
    const Eigen::VectorXd colmass = spec.cross_kernel.colwise().sum();
    spec.degrees = spec.cross_kernel * colmass;
    if ((spec.degrees.array() <= 0.0).any())
        throw std::runtime_error("landmark_spectrum: nonpositive degree");

    Eigen::MatrixXd normalized = spec.degrees.array().rsqrt().matrix().asDiagonal() * spec.cross_kernel;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeThinU);
    spec.singular_values = svd.singularValues();
    spec.left_vectors = svd.matrixU();
    return spec;
}

}  // namespace cotwd
