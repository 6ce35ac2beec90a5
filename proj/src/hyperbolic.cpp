#include "cotwd/hyperbolic.hpp"

#include <cmath>
#include <stdexcept>

namespace cotwd {

MultiscaleEmbedding MultiscaleEmbedding::embed(const std::vector<Eigen::MatrixXd>& densities) {
    if (densities.empty())
        throw std::invalid_argument("embed: need densities for at least scale k=0");
    MultiscaleEmbedding emb;
    emb.sqrt_densities_.reserve(densities.size());
    for (const auto& mu : densities) {
        if (mu.rows() != densities.front().rows() || mu.cols() != mu.rows())
            throw std::invalid_argument("embed: density matrices must be square and same size");
        if ((mu.array() < 0.0).any())
            throw std::invalid_argument("embed: invalid density, negative entry");
        emb.sqrt_densities_.push_back(mu.array().sqrt().matrix());
    }
    return emb;
}

double MultiscaleEmbedding::distance(int j, int jp) const {
    double total = 0.0;
    for (int k = 0; k <= max_scale(); ++k) {
        const auto& s = sqrt_densities_[static_cast<std::size_t>(k)];
        // Last coordinates coincide at a fixed scale, so only the density part
        // contributes to the Euclidean norm.
        const double h = (s.col(j) - s.col(jp)).norm();
        total += 2.0 * std::asinh(std::pow(2.0, -0.5 * k + 1.0) * h);
    }
    return total;
}

double MultiscaleEmbedding::linkage_score(int j, int jp) const {
    // Geometric mean taken in the log domain to avoid underflow across scales.
    double log_sum = 0.0;
    for (int k = 0; k <= max_scale(); ++k) {
        const auto& s = sqrt_densities_[static_cast<std::size_t>(k)];
        const double half_diff = 0.5 * (s.col(j) - s.col(jp)).norm();
        const double axis = last_coordinate(k);
        const double proj = std::sqrt(half_diff * half_diff + axis * axis);
        log_sum += std::log(proj);
    }
    return std::exp(log_sum / (max_scale() + 1));
}

Eigen::MatrixXd MultiscaleEmbedding::pairwise_distances() const {
    const int m = point_count();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j)
        for (int jp = j + 1; jp < m; ++jp) out(j, jp) = out(jp, j) = distance(j, jp);
    return out;
}

Eigen::MatrixXd MultiscaleEmbedding::pairwise_linkage_scores() const {
    const int m = point_count();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        out(j, j) = linkage_score(j, j);
        for (int jp = j + 1; jp < m; ++jp) out(j, jp) = out(jp, j) = linkage_score(j, jp);
    }
    return out;
}

}  // namespace cotwd
