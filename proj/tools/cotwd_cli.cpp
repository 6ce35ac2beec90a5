// Command-line front end: runs the co-hierarchical TWD pipeline end to end,
// generates the synthetic benchmark, evaluates learned distances, and converts
// between matrix formats.

#include "CLI11.hpp"
#include "json.hpp"

#include "cotwd/eval.hpp"
#include "cotwd/io.hpp"
#include "cotwd/pipeline.hpp"
#include "cotwd/tree.hpp"
#include "cotwd/wavelet.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRanToLimit = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int resolve_threads(int requested) {
    if (requested == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
    return requested;
}

int default_threads_from_env() {
    if (const char* env = std::getenv("COTWD_THREADS")) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw UsageError("COTWD_THREADS must be an integer, got '" + std::string(env) + "'");
        }
    }
    return 1;
}

cotwd::Dataset load_matrix(const std::string& path, bool header) {
    if (!fs::exists(path)) throw UsageError("input file not found: " + path);
    if (fs::path(path).extension() == ".mtx") return cotwd::read_sparse(path);
    return cotwd::read_dense(path, header);
}

/// Pairwise cosine distances (1 - cosine similarity) between the rows of x.
Eigen::MatrixXd cosine_rows(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::VectorXd norms(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        norms(i) = x.row(i).norm();
        if (norms(i) <= 0.0)
            throw UsageError("cosine metric undefined: zero-norm vector at index " + std::to_string(i));
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double sim = x.row(i).dot(x.row(j)) / (norms(i) * norms(j));
            sim = std::min(1.0, std::max(-1.0, sim));
            d(i, j) = d(j, i) = 1.0 - sim;
        }
    return d;
}

Eigen::MatrixXd euclidean_rows(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    return d;
}

Eigen::MatrixXd initial_metric(const std::string& choice, const Eigen::MatrixXd& vectors,
                               const std::string& provided_path, const std::string& flag_name,
                               Eigen::Index expected) {
    if (choice == "provided") {
        if (provided_path.empty())
            throw UsageError("metric 'provided' requires " + flag_name);
        const cotwd::Dataset d = load_matrix(provided_path, false);
        if (d.matrix.rows() != expected || d.matrix.cols() != expected)
            throw UsageError(flag_name + ": expected a " + std::to_string(expected) + "x" +
                             std::to_string(expected) + " matrix, got " +
                             std::to_string(d.matrix.rows()) + "x" + std::to_string(d.matrix.cols()));
        return d.matrix;
    }
    if (choice == "euclidean") return euclidean_rows(vectors);
    return cosine_rows(vectors);
}

struct RunOptions {
    std::string algorithm = "alg1";
    std::string input;
    bool header = false;
    std::string output_dir = ".";
    std::string metric_r = "cosine";
    std::string metric_c = "cosine";
    std::string input_mr;
    std::string input_mc;
    bool timings = false;
    cotwd::IterationConfig config;
    // CLI11 cannot bind std::optional<double> portably across configs; stage it.
    double landmark_c = -1.0;
    int threads = default_threads_from_env();
};

json resolved_config_json(const RunOptions& opt) {
    json j;
    j["algorithm"] = opt.algorithm;
    j["input"] = opt.input;
    j["metric_r"] = opt.metric_r;
    j["metric_c"] = opt.metric_c;
    j["gamma_r"] = opt.config.gamma_r;
    j["gamma_c"] = opt.config.gamma_c;
    j["max_scale"] = opt.config.max_scale;
    j["scale_multiplier"] = opt.config.scale_multiplier;
    j["threshold_r"] = opt.config.threshold_r;
    j["threshold_c"] = opt.config.threshold_c;
    j["max_iterations"] = opt.config.max_iterations;
    j["tolerance"] = opt.config.tolerance;
    j["seed"] = opt.config.seed;
    j["density_normalize"] = opt.config.density_normalize;
    j["regularizer_epsilon"] = opt.config.regularizer_epsilon;
    j["weight_floor"] = opt.config.weight_floor;
    j["threads"] = opt.config.threads;
    if (opt.config.landmark_c)
        j["landmark_c"] = *opt.config.landmark_c;
    else
        j["landmark_c"] = nullptr;
    return j;
}

int cmd_run(RunOptions opt) {
    if (opt.algorithm == "alg2") {
        // Filtering thresholds shape the whole trajectory; require them
        // explicitly so a forgotten flag cannot silently mean "no filtering".
        if (opt.config.threshold_r < 0.0) throw UsageError("--threshold-r is required with --algorithm alg2");
        if (opt.config.threshold_c < 0.0) throw UsageError("--threshold-c is required with --algorithm alg2");
    } else {
        if (opt.config.threshold_r < 0.0) opt.config.threshold_r = 1.0;
        if (opt.config.threshold_c < 0.0) opt.config.threshold_c = 1.0;
    }
    if (opt.landmark_c > 0.0) opt.config.landmark_c = opt.landmark_c;
    opt.config.threads = resolve_threads(opt.threads);

    const cotwd::Dataset data = load_matrix(opt.input, opt.header);
    const Eigen::MatrixXd mr =
        initial_metric(opt.metric_r, data.matrix, opt.input_mr, "--input-mr", data.matrix.rows());
    const Eigen::MatrixXd mc = initial_metric(opt.metric_c, data.matrix.transpose(), opt.input_mc,
                                              "--input-mc", data.matrix.cols());

    cotwd::Algorithm algorithm = cotwd::Algorithm::Alternating;
    if (opt.algorithm == "alg2") algorithm = cotwd::Algorithm::HaarFiltered;
    if (opt.algorithm == "fixed-mode") algorithm = cotwd::Algorithm::FixedSampleMode;

    const cotwd::Pipeline pipeline(data.matrix, mr, mc, opt.config);
    const cotwd::PipelineResult result = pipeline.run(algorithm);

    fs::create_directories(opt.output_dir);
    const fs::path out(opt.output_dir);
    cotwd::write_distance_matrix(result.state.sample_twd, (out / "W_r.csv").string());
    cotwd::write_distance_matrix(result.state.feature_twd, (out / "W_c.csv").string());
    cotwd::write_tree(result.state.sample_tree, (out / "sample_tree.nwk").string());
    cotwd::write_tree(result.state.feature_tree, (out / "feature_tree.nwk").string());
    cotwd::write_history(result.history, (out / "history.jsonl").string(),
                         resolved_config_json(opt).dump(), opt.timings);

    std::cout << (result.converged ? "converged" : "reached iteration limit") << " after "
              << result.history.size() << " iteration(s)\n";
    return result.converged ? kExitOk : kExitRanToLimit;
}

struct GenToyOptions {
    cotwd::ToySpec spec;
    std::string output_dir = ".";
};

int cmd_gen_toy(const GenToyOptions& opt) {
    const cotwd::ToyDataset toy = cotwd::generate_toy(opt.spec);
    fs::create_directories(opt.output_dir);
    const fs::path out(opt.output_dir);

    std::vector<std::string> user_names, video_names;
    for (Eigen::Index i = 0; i < toy.matrix.rows(); ++i) user_names.push_back("u" + std::to_string(i));
    for (Eigen::Index j = 0; j < toy.matrix.cols(); ++j) video_names.push_back("v" + std::to_string(j));

    cotwd::write_dense(toy.matrix, (out / "toy.csv").string(), video_names, user_names);
    cotwd::write_labels(user_names, toy.user_labels, toy.user_label_names,
                        (out / "user_labels.csv").string());
    cotwd::write_labels(video_names, toy.video_labels, toy.video_label_names,
                        (out / "video_labels.csv").string());

    std::cout << "wrote " << toy.matrix.rows() << "x" << toy.matrix.cols()
              << " matrix and label files to " << opt.output_dir << "\n";
    return kExitOk;
}

struct EvalKnnOptions {
    std::string distances;
    std::string labels;
    std::vector<int> k_grid = {1, 3, 5, 7, 9, 11, 15};
    double train_fraction = 0.8;
    int trials = 5;
    std::uint64_t seed = 0;
};

int cmd_eval_knn(const EvalKnnOptions& opt) {
    if (!fs::exists(opt.distances)) throw UsageError("distance matrix not found: " + opt.distances);
    if (!fs::exists(opt.labels)) throw UsageError("label file not found: " + opt.labels);
    const cotwd::Dataset d = cotwd::read_dense(opt.distances, false);
    const auto [ids, classes] = cotwd::read_labels(opt.labels);
    if (static_cast<Eigen::Index>(ids.size()) != d.matrix.rows())
        throw UsageError("label count " + std::to_string(ids.size()) + " does not match matrix order " +
                         std::to_string(d.matrix.rows()));

    const cotwd::KnnReport report =
        cotwd::knn_accuracy(d.matrix, ids, opt.k_grid, opt.train_fraction, opt.trials, opt.seed);
    std::printf("%6s %10s %10s\n", "k", "mean", "std");
    for (const cotwd::KnnResult& r : report.per_k)
        std::printf("%6d %10.4f %10.4f\n", r.k, r.mean_accuracy, r.std_accuracy);
    for (const cotwd::KnnResult& r : report.per_k)
        std::printf("RESULT knn k=%d mean=%.17g std=%.17g\n", r.k, r.mean_accuracy, r.std_accuracy);
    std::printf("RESULT knn_best k=%d mean=%.17g std=%.17g\n", report.best.k,
                report.best.mean_accuracy, report.best.std_accuracy);
    if (report.resample_warnings > 0)
        std::printf("RESULT knn_resample_warnings count=%d\n", report.resample_warnings);
    return kExitOk;
}

struct EvalSparsityOptions {
    std::string input;
    bool header = false;
    std::string sample_tree;
    std::string feature_tree;
};

int cmd_eval_sparsity(const EvalSparsityOptions& opt) {
    if (!fs::exists(opt.sample_tree)) throw UsageError("sample tree not found: " + opt.sample_tree);
    if (!fs::exists(opt.feature_tree)) throw UsageError("feature tree not found: " + opt.feature_tree);
    const cotwd::Dataset data = load_matrix(opt.input, opt.header);
    const cotwd::WeightedBinaryTree sample_tree = cotwd::read_tree(opt.sample_tree);
    const cotwd::WeightedBinaryTree feature_tree = cotwd::read_tree(opt.feature_tree);
    const double samples = cotwd::l1_haar_norm(data.matrix, cotwd::haar_basis(feature_tree));
    const double features = cotwd::l1_haar_norm(data.matrix.transpose(), cotwd::haar_basis(sample_tree));
    std::printf("L1 Haar norm, sample mode:  %.6f\n", samples);
    std::printf("L1 Haar norm, feature mode: %.6f\n", features);
    std::printf("RESULT sparsity samples=%.17g features=%.17g\n", samples, features);
    return kExitOk;
}

struct ExportOptions {
    std::string input;
    bool header = false;
    std::string output;
};

int cmd_export(const ExportOptions& opt) {
    const cotwd::Dataset data = load_matrix(opt.input, opt.header);
    if (fs::path(opt.output).extension() == ".mtx")
        cotwd::write_sparse(data.matrix, opt.output);
    else
        cotwd::write_dense(data.matrix, opt.output, data.col_names, data.row_names);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Co-hierarchical tree learning with tree-Wasserstein distances"};
    app.require_subcommand(1);

    RunOptions run_opt;
    try {
        run_opt.threads = default_threads_from_env();
    } catch (const UsageError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    }
    // Sentinel: negative thresholds mean "not given" so alg2 can demand them.
    run_opt.config.threshold_r = -1.0;
    run_opt.config.threshold_c = -1.0;

    CLI::App* run = app.add_subcommand("run", "Run the alternating pipeline on a data matrix");
    run->add_option("--algorithm", run_opt.algorithm, "Pipeline variant")
        ->check(CLI::IsMember({"alg1", "alg2", "fixed-mode"}))
        ->required();
    run->add_option("--input", run_opt.input, "Data matrix (.csv/.tsv dense or .mtx sparse)")->required();
    run->add_flag("--header", run_opt.header, "Dense input has a header row");
    run->add_option("--output-dir", run_opt.output_dir, "Directory for result files");
    run->add_option("--metric-r", run_opt.metric_r, "Initial sample metric")
        ->check(CLI::IsMember({"cosine", "euclidean", "provided"}));
    run->add_option("--metric-c", run_opt.metric_c, "Initial feature metric")
        ->check(CLI::IsMember({"cosine", "euclidean", "provided"}));
    run->add_option("--input-mr", run_opt.input_mr, "Provided sample distance matrix");
    run->add_option("--input-mc", run_opt.input_mc, "Provided feature distance matrix");
    run->add_option("--gamma-r", run_opt.config.gamma_r, "Snowflake weight, sample mode");
    run->add_option("--gamma-c", run_opt.config.gamma_c, "Snowflake weight, feature mode");
    run->add_option("--max-scale", run_opt.config.max_scale, "Largest dyadic diffusion scale K");
    run->add_option("--scale-multiplier", run_opt.config.scale_multiplier, "Kernel scale multiplier");
    run->add_option("--threshold-r", run_opt.config.threshold_r, "Haar filter threshold, sample mode");
    run->add_option("--threshold-c", run_opt.config.threshold_c, "Haar filter threshold, feature mode");
    run->add_option("--max-iterations", run_opt.config.max_iterations, "Iteration cap");
    run->add_option("--tolerance", run_opt.config.tolerance, "Relative-change stopping tolerance");
    run->add_option("--seed", run_opt.config.seed, "Random seed");
    run->add_option("--landmark-c", run_opt.landmark_c, "Landmark exponent in (0,1)");
    run->add_flag("--density-normalize", run_opt.config.density_normalize, "Density-normalize the kernel");
    run->add_option("--epsilon", run_opt.config.regularizer_epsilon, "Snowflake regularizer epsilon");
    run->add_option("--weight-floor", run_opt.config.weight_floor, "Minimum tree edge weight");
    run->add_option("--threads", run_opt.threads, "Worker threads (0 = auto)");
    run->add_flag("--timings", run_opt.timings, "Include wall-clock timings in the history log");

    GenToyOptions toy_opt;
    CLI::App* gen = app.add_subcommand("gen-toy", "Generate the synthetic user/video benchmark");
    gen->add_option("--output-dir", toy_opt.output_dir, "Directory for generated files");
    gen->add_option("--seed", toy_opt.spec.seed, "Random seed");
    gen->add_option("--users-per-context", toy_opt.spec.users_per_context, "Users per leaf context");
    gen->add_option("--videos-per-subgenre", toy_opt.spec.videos_per_subgenre, "Videos per subgenre");
    gen->add_option("--embed-dim", toy_opt.spec.embed_dim, "Latent embedding dimension");
    gen->add_option("--noise-sigma", toy_opt.spec.noise_sigma, "Observation noise sigma");
    gen->add_option("--sigma-root-videos", toy_opt.spec.sigma_root_videos, "Root spread, video side");
    gen->add_option("--sigma-root-users", toy_opt.spec.sigma_root_users, "Root spread, user side");
    gen->add_option("--sigma-child-videos", toy_opt.spec.sigma_child_videos, "Child spread, video side");
    gen->add_option("--sigma-child-users", toy_opt.spec.sigma_child_users, "Child spread, user side");

    EvalKnnOptions knn_opt;
    CLI::App* knn = app.add_subcommand("eval-knn", "kNN classification from a distance matrix");
    knn->add_option("--distances", knn_opt.distances, "Pairwise distance matrix (.csv)")->required();
    knn->add_option("--labels", knn_opt.labels, "Label file (name,label per line)")->required();
    knn->add_option("--k", knn_opt.k_grid, "Neighbor counts to evaluate");
    knn->add_option("--train-fraction", knn_opt.train_fraction, "Training split fraction");
    knn->add_option("--trials", knn_opt.trials, "Number of random splits");
    knn->add_option("--seed", knn_opt.seed, "Split seed");

    EvalSparsityOptions sp_opt;
    CLI::App* sparsity = app.add_subcommand("eval-sparsity", "L1 Haar norms under learned trees");
    sparsity->add_option("--input", sp_opt.input, "Data matrix")->required();
    sparsity->add_flag("--header", sp_opt.header, "Dense input has a header row");
    sparsity->add_option("--sample-tree", sp_opt.sample_tree, "Sample tree (.nwk)")->required();
    sparsity->add_option("--feature-tree", sp_opt.feature_tree, "Feature tree (.nwk)")->required();

    ExportOptions ex_opt;
    CLI::App* ex = app.add_subcommand("export", "Convert between dense and sparse matrix formats");
    ex->add_option("--input", ex_opt.input, "Input matrix")->required();
    ex->add_flag("--header", ex_opt.header, "Dense input has a header row");
    ex->add_option("--output", ex_opt.output, "Output path (.mtx for sparse, else dense)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        // CLI11 returns 0 for --help; map every parse failure to the usage code.
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (gen->parsed()) return cmd_gen_toy(toy_opt);
        if (knn->parsed()) return cmd_eval_knn(knn_opt);
        if (sparsity->parsed()) return cmd_eval_sparsity(sp_opt);
        if (ex->parsed()) return cmd_export(ex_opt);
    } catch (const UsageError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
