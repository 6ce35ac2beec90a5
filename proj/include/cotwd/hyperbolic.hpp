#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace cotwd {

/// Multi-scale Poincare half-space embedding of m points. For each scale k the
/// first m coordinates of a point are the entrywise square root of its dyadic
/// diffusion density and the last coordinate is 2^{k/2-2}.
class MultiscaleEmbedding {
public:
    /// densities[k] is a column-stochastic m x m matrix for scale k = 0..K.
    static MultiscaleEmbedding embed(const std::vector<Eigen::MatrixXd>& densities);

    int max_scale() const { return static_cast<int>(sqrt_densities_.size()) - 1; }
    int point_count() const { return static_cast<int>(sqrt_densities_.front().rows()); }

    /// Square roots of the densities at scale k; column j belongs to point j.
    const Eigen::MatrixXd& sqrt_densities(int k) const { return sqrt_densities_[static_cast<std::size_t>(k)]; }

    /// Constant last coordinate at scale k.
    static double last_coordinate(int k) { return std::pow(2.0, 0.5 * k - 2.0); }

    /// l1 product-manifold geodesic distance between points j and jp.
    double distance(int j, int jp) const;

    /// Geometric mean over scales of the geodesic-midpoint projection radius.
    double linkage_score(int j, int jp) const;

    Eigen::MatrixXd pairwise_distances() const;
    Eigen::MatrixXd pairwise_linkage_scores() const;

private:
    std::vector<Eigen::MatrixXd> sqrt_densities_;
};

}  // namespace cotwd
