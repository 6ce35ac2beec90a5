#include "doctest.h"

#include "cotwd/eval.hpp"
#include "cotwd/pipeline.hpp"
#include "cotwd/tree.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace cotwd;

namespace {

Eigen::MatrixXd random_data(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.05, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) x(i, j) = uniform(rng);
    return x;
}

/// Cosine-style initial metrics derived from the data itself.
Eigen::MatrixXd euclidean_rows(const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    return d;
}

struct Problem {
    Eigen::MatrixXd x, mr, mc;
};

Problem small_problem(std::uint64_t seed, int rows = 10, int cols = 8) {
    Problem p;
    p.x = random_data(rows, cols, seed);
    p.mr = euclidean_rows(p.x);
    p.mc = euclidean_rows(p.x.transpose());
    return p;
}

ToyDataset small_toy(std::uint64_t seed) {
    ToySpec spec;
    spec.users_per_context = 4;   // 24 users
    spec.videos_per_subgenre = 3; // 21 videos
    spec.seed = seed;
    return generate_toy(spec);
}

void check_metric_matrix(const Eigen::MatrixXd& w) {
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.minCoeff() >= 0.0);
}

}  // namespace

TEST_CASE("constructor validates inputs") {
    const Problem p = small_problem(1);
    IterationConfig cfg;
    CHECK_NOTHROW(Pipeline(p.x, p.mr, p.mc, cfg));

    Eigen::MatrixXd negative = p.x;
    negative(0, 0) = -0.1;
    CHECK_THROWS(Pipeline(negative, p.mr, p.mc, cfg));

    Eigen::MatrixXd zero_row = p.x;
    zero_row.row(2).setZero();
    CHECK_THROWS_WITH_AS(Pipeline(zero_row, p.mr, p.mc, cfg), doctest::Contains("row 2"),
                         std::invalid_argument);

    Eigen::MatrixXd zero_col = p.x;
    zero_col.col(3).setZero();
    CHECK_THROWS_WITH_AS(Pipeline(zero_col, p.mr, p.mc, cfg), doctest::Contains("column 3"),
                         std::invalid_argument);

    CHECK_THROWS(Pipeline(p.x, p.mc, p.mc, cfg));  // M_r has the wrong order
    CHECK_THROWS(Pipeline(Eigen::MatrixXd::Ones(1, 4), Eigen::MatrixXd::Zero(1, 1),
                          Eigen::MatrixXd::Zero(4, 4), cfg));
}

TEST_CASE("identical rows yield a zero sample distance matrix") {
    const int n = 5, m = 6;
    Eigen::MatrixXd x(n, m);
    Eigen::RowVectorXd row(m);
    row << 0.3, 0.05, 0.25, 0.1, 0.2, 0.1;
    for (int i = 0; i < n; ++i) x.row(i) = row;
    // All rows coincide, so the row metric is identically zero.
    const Eigen::MatrixXd mr = Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd mc = euclidean_rows(x.transpose());
    IterationConfig cfg;
    cfg.max_iterations = 4;
    const Pipeline pipe(x, mr, mc, cfg);
    const PipelineResult result = pipe.run(Algorithm::Alternating);
    CHECK(result.state.sample_twd.cwiseAbs().maxCoeff() == 0.0);
    for (const IterationRecord& rec : result.history) CHECK(rec.rel_change_samples == 0.0);
}

TEST_CASE("every iterate satisfies the metric-matrix invariants") {
    const Problem p = small_problem(7);
    IterationConfig cfg;
    cfg.gamma_r = cfg.gamma_c = 0.01;
    cfg.threshold_r = cfg.threshold_c = 0.9;
    cfg.max_iterations = 3;
    const Pipeline pipe(p.x, p.mr, p.mc, cfg);
    for (Algorithm alg :
         {Algorithm::Alternating, Algorithm::HaarFiltered, Algorithm::FixedSampleMode}) {
        const PipelineResult result = pipe.run(alg);
        check_metric_matrix(result.state.sample_twd);
        check_metric_matrix(result.state.feature_twd);
        CHECK(result.state.sample_twd.rows() == p.x.rows());
        CHECK(result.state.feature_twd.rows() == p.x.cols());
        // Iterations count up from 1 and histories are non-empty.
        REQUIRE(!result.history.empty());
        for (std::size_t i = 0; i < result.history.size(); ++i)
            CHECK(result.history[i].iteration == static_cast<int>(i) + 1);
    }
}

TEST_CASE("runs are deterministic") {
    const Problem p = small_problem(11);
    IterationConfig cfg;
    cfg.gamma_r = cfg.gamma_c = 0.01;
    cfg.max_iterations = 3;
    const Pipeline pipe(p.x, p.mr, p.mc, cfg);
    for (Algorithm alg : {Algorithm::Alternating, Algorithm::HaarFiltered}) {
        const PipelineResult a = pipe.run(alg);
        const PipelineResult b = pipe.run(alg);
        CHECK(a.state.sample_twd == b.state.sample_twd);
        CHECK(a.state.feature_twd == b.state.feature_twd);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].rel_change_samples == b.history[i].rel_change_samples);
            CHECK(a.history[i].l1_haar_samples == b.history[i].l1_haar_samples);
        }
    }
}

TEST_CASE("full-threshold filtering reproduces the plain trajectory") {
    // With thresholds 1.0 the wavelet filter is an orthogonal projection onto
    // the full basis, so the filtered run replays the plain update rule from
    // the raw-metric initialization: its state at iteration l+1 matches the
    // plain run's state at iteration l.
    const Problem p = small_problem(13);
    IterationConfig cfg;
    cfg.gamma_r = cfg.gamma_c = 0.0;
    cfg.threshold_r = cfg.threshold_c = 1.0;
    cfg.max_iterations = 3;
    const Pipeline pipe(p.x, p.mr, p.mc, cfg);
    const PipelineResult plain = pipe.run(Algorithm::Alternating);

    IterationConfig shifted = cfg;
    shifted.max_iterations = 4;
    const PipelineResult filtered = Pipeline(p.x, p.mr, p.mc, shifted).run(Algorithm::HaarFiltered);
    CHECK((filtered.state.sample_twd - plain.state.sample_twd).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((filtered.state.feature_twd - plain.state.feature_twd).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("fixed mode never changes the sample reference tree") {
    const Problem p = small_problem(17);
    IterationConfig cfg;
    cfg.threshold_r = cfg.threshold_c = 0.9;
    cfg.max_iterations = 3;
    const Pipeline pipe(p.x, p.mr, p.mc, cfg);
    const PipelineResult result = pipe.run(Algorithm::FixedSampleMode);
    const WeightedBinaryTree reference = decode_tree(p.mr, cfg.decode_options());
    CHECK(to_newick(result.state.sample_tree) == to_newick(reference));
}

TEST_CASE("plain iteration converges on toy data and certifies a fixed point") {
    const ToyDataset toy = small_toy(3);
    IterationConfig cfg;
    cfg.gamma_r = cfg.gamma_c = 0.01;
    const Pipeline pipe(toy.matrix, euclidean_rows(toy.matrix),
                        euclidean_rows(toy.matrix.transpose()), cfg);
    const PipelineResult result = pipe.run(Algorithm::Alternating);
    CHECK(result.converged);
    CHECK(static_cast<int>(result.history.size()) <= cfg.max_iterations);
    const auto [res_r, res_c] = pipe.check_fixed_point(result.state);
    CHECK(res_r < cfg.tolerance);
    CHECK(res_c < cfg.tolerance);
}

TEST_CASE("filtered iteration converges on toy data and certifies a fixed point") {
    const ToyDataset toy = small_toy(5);
    IterationConfig cfg;
    cfg.gamma_r = cfg.gamma_c = 0.01;
    // Default thresholds (1.0): aggressive thresholds can keep reshaping the
    // filtered signals and plateau above the tolerance.
    const Pipeline pipe(toy.matrix, euclidean_rows(toy.matrix),
                        euclidean_rows(toy.matrix.transpose()), cfg);
    const PipelineResult result = pipe.run(Algorithm::HaarFiltered);
    CHECK(result.converged);
    const auto [res_r, res_c] = pipe.check_fixed_point(result.state);
    CHECK(res_r < cfg.tolerance);
    CHECK(res_c < cfg.tolerance);
}

TEST_CASE("truncated runs report non-convergence without throwing") {
    const Problem p = small_problem(23);
    IterationConfig cfg;
    cfg.max_iterations = 1;
    const Pipeline pipe(p.x, p.mr, p.mc, cfg);
    const PipelineResult result = pipe.run(Algorithm::Alternating);
    CHECK(!result.converged);
    REQUIRE(result.history.size() == 1);
    const auto [res_r, res_c] = pipe.check_fixed_point(result.state);
    CHECK((res_r >= cfg.tolerance || res_c >= cfg.tolerance));
}

TEST_CASE("relative change helper") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
    CHECK(relative_frobenius_change(a, a) == 0.0);
    CHECK(relative_frobenius_change(2.0 * a, a) == doctest::Approx(1.0));
    CHECK(relative_frobenius_change(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)) == 0.0);
    CHECK(std::isinf(relative_frobenius_change(a, Eigen::MatrixXd::Zero(2, 2))));
}
