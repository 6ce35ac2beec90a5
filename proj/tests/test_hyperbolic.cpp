#include "doctest.h"

#include "cotwd/diffusion.hpp"
#include "cotwd/hyperbolic.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace cotwd;

namespace {

MultiscaleEmbedding toy_embedding(int points, int max_scale, std::uint64_t seed) {
    const Eigen::MatrixXd d = testutil::random_distances(points, 3, seed);
    const DiffusionOperator op = build_operator(build_kernel(d, 1.0));
    std::vector<Eigen::MatrixXd> densities;
    for (int k = 0; k <= max_scale; ++k) densities.push_back(diffusion_densities(op, k));
    return MultiscaleEmbedding::embed(densities);
}

}  // namespace

TEST_CASE("last coordinate formula") {
    CHECK(MultiscaleEmbedding::last_coordinate(0) == 0.25);
    CHECK(MultiscaleEmbedding::last_coordinate(2) == doctest::Approx(0.5));
}

TEST_CASE("delta density embeds to a unit axis vector") {
    Eigen::MatrixXd mu = Eigen::MatrixXd::Identity(4, 4);
    const MultiscaleEmbedding emb = MultiscaleEmbedding::embed({mu});
    CHECK(emb.sqrt_densities(0)(0, 0) == 1.0);
    CHECK(emb.sqrt_densities(0)(1, 0) == 0.0);
}

TEST_CASE("square roots stay on the unit sphere") {
    const MultiscaleEmbedding emb = toy_embedding(6, 3, 9);
    for (int k = 0; k <= 3; ++k)
        for (int j = 0; j < 6; ++j)
            CHECK(emb.sqrt_densities(k).col(j).squaredNorm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("negative densities are rejected") {
    Eigen::MatrixXd mu(2, 2);
    mu << 1.0, -0.1, 0.0, 1.1;
    CHECK_THROWS(MultiscaleEmbedding::embed({mu}));
}

TEST_CASE("distance is symmetric with zero diagonal") {
    const MultiscaleEmbedding emb = toy_embedding(6, 2, 21);
    for (int j = 0; j < 6; ++j) {
        CHECK(emb.distance(j, j) == 0.0);
        for (int jp = 0; jp < 6; ++jp) CHECK(emb.distance(j, jp) == emb.distance(jp, j));
    }
}

TEST_CASE("single-scale distance closed form") {
    Eigen::MatrixXd mu(2, 2);
    mu << 1.0, 0.0, 0.0, 1.0;
    const MultiscaleEmbedding emb = MultiscaleEmbedding::embed({mu});
    const double h = std::sqrt(2.0);  // distance between e1 and e2 after sqrt
    CHECK(emb.distance(0, 1) == doctest::Approx(2.0 * std::asinh(2.0 * h)).epsilon(1e-12));
}

TEST_CASE("distance matches scalar recomputation") {
    const MultiscaleEmbedding emb = toy_embedding(6, 3, 33);
    for (int j : {0, 2})
        for (int jp : {1, 4}) {
            double expected = 0.0;
            for (int k = 0; k <= 3; ++k) {
                double sq = 0.0;
                for (int c = 0; c < 6; ++c) {
                    const double diff = emb.sqrt_densities(k)(c, j) - emb.sqrt_densities(k)(c, jp);
                    sq += diff * diff;
                }
                expected += 2.0 * std::asinh(std::pow(2.0, -0.5 * k + 1.0) * std::sqrt(sq));
            }
            CHECK(emb.distance(j, jp) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("appending scales never decreases the distance") {
    const Eigen::MatrixXd d = testutil::random_distances(5, 3, 55);
    const DiffusionOperator op = build_operator(build_kernel(d, 1.0));
    std::vector<Eigen::MatrixXd> densities;
    double previous = 0.0;
    for (int k = 0; k <= 4; ++k) {
        densities.push_back(diffusion_densities(op, k));
        const MultiscaleEmbedding emb = MultiscaleEmbedding::embed(densities);
        const double current = emb.distance(0, 3);
        CHECK(current >= previous);
        previous = current;
    }
}

TEST_CASE("self linkage equals the axis geometric mean") {
    const MultiscaleEmbedding single = toy_embedding(4, 0, 2);
    CHECK(single.linkage_score(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    const int K = 3;
    const MultiscaleEmbedding multi = toy_embedding(4, K, 2);
    CHECK(multi.linkage_score(2, 2) == doctest::Approx(std::pow(2.0, K / 4.0 - 2.0)).epsilon(1e-12));
}

TEST_CASE("linkage matches log-domain recomputation") {
    const MultiscaleEmbedding emb = toy_embedding(5, 2, 77);
    for (int j = 0; j < 5; ++j)
        for (int jp = j + 1; jp < 5; ++jp) {
            double log_sum = 0.0;
            for (int k = 0; k <= 2; ++k) {
                const double half = 0.5 * (emb.sqrt_densities(k).col(j) - emb.sqrt_densities(k).col(jp)).norm();
                const double axis = MultiscaleEmbedding::last_coordinate(k);
                log_sum += std::log(std::hypot(half, axis));
            }
            CHECK(emb.linkage_score(j, jp) == doctest::Approx(std::exp(log_sum / 3.0)).epsilon(1e-12));
            CHECK(emb.linkage_score(j, jp) == emb.linkage_score(jp, j));
        }
}

TEST_CASE("log-domain product is stable for deep scale stacks") {
    const MultiscaleEmbedding emb = toy_embedding(4, 19, 13);
    double direct = 1.0;
    for (int k = 0; k <= 19; ++k) {
        const double half = 0.5 * (emb.sqrt_densities(k).col(0) - emb.sqrt_densities(k).col(2)).norm();
        direct *= std::hypot(half, MultiscaleEmbedding::last_coordinate(k));
    }
    CHECK(emb.linkage_score(0, 2) == doctest::Approx(std::pow(direct, 1.0 / 20.0)).epsilon(1e-10));
}
