// Python bindings for the co-hierarchical TWD library.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cotwd/diffusion.hpp"
#include "cotwd/eval.hpp"
#include "cotwd/pipeline.hpp"
#include "cotwd/tree.hpp"
#include "cotwd/twd.hpp"
#include "cotwd/wavelet.hpp"

#include <stdexcept>
#include <string>

namespace py = pybind11;
using namespace cotwd;

namespace {

DecodeOptions make_decode_options(int max_scale, double scale_multiplier, bool density_normalize,
                                  double weight_floor) {
    return DecodeOptions{max_scale, scale_multiplier, density_normalize, weight_floor};
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "alg1") return Algorithm::Alternating;
    if (name == "alg2") return Algorithm::HaarFiltered;
    if (name == "fixed-mode") return Algorithm::FixedSampleMode;
    throw std::invalid_argument("algorithm must be 'alg1', 'alg2', or 'fixed-mode'");
}

py::dict result_to_dict(const PipelineResult& result) {
    py::dict out;
    out["converged"] = result.converged;
    out["W_r"] = result.state.sample_twd;
    out["W_c"] = result.state.feature_twd;
    out["sample_tree"] = result.state.sample_tree;
    out["feature_tree"] = result.state.feature_tree;
    py::list history;
    for (const IterationRecord& rec : result.history) {
        py::dict item;
        item["iteration"] = rec.iteration;
        item["rel_change_samples"] = rec.rel_change_samples;
        item["rel_change_features"] = rec.rel_change_features;
        item["l1_haar_samples"] = rec.l1_haar_samples;
        item["l1_haar_features"] = rec.l1_haar_features;
        item["wall_ms"] = rec.wall_ms;
        history.append(item);
    }
    out["history"] = history;
    return out;
}

}  // namespace

PYBIND11_MODULE(_cotwd, m) {
    m.doc() = "Joint hierarchical tree learning via tree-Wasserstein distances";

    py::class_<WeightedBinaryTree>(m, "Tree")
        .def_property_readonly("leaf_count",
                               [](const WeightedBinaryTree& t) { return t.leaf_count; })
        .def_property_readonly("node_count",
                               [](const WeightedBinaryTree& t) { return t.node_count(); })
        .def("to_newick", &to_newick)
        .def("distance_matrix", &tree_distance_matrix)
        .def("validate", &WeightedBinaryTree::validate)
        .def("__repr__", [](const WeightedBinaryTree& t) {
            return "<Tree with " + std::to_string(t.leaf_count) + " leaves>";
        });

    m.def("from_newick", &from_newick, py::arg("text"), "Parse a Newick string into a Tree.");

    m.def(
        "decode_tree",
        [](const Eigen::MatrixXd& distances, int max_scale, double scale_multiplier,
           bool density_normalize, double weight_floor) {
            return decode_tree(distances, make_decode_options(max_scale, scale_multiplier,
                                                              density_normalize, weight_floor));
        },
        py::arg("distances"), py::arg("max_scale") = 5, py::arg("scale_multiplier") = 1.0,
        py::arg("density_normalize") = false, py::arg("weight_floor") = 1e-12,
        "Decode a weighted binary tree from a pairwise distance matrix.");

    m.def("twd", &twd, py::arg("tree"), py::arg("rho1"), py::arg("rho2"),
          "Tree-Wasserstein distance between two leaf histograms.");

    m.def(
        "pairwise_twd",
        [](const Eigen::MatrixXd& histograms, const WeightedBinaryTree& tree, double gamma,
           double epsilon, int threads) {
            return pairwise_twd(histograms, tree, TwdConfig{gamma, epsilon, threads});
        },
        py::arg("histograms"), py::arg("tree"), py::arg("gamma") = 0.0,
        py::arg("epsilon") = 1e-6, py::arg("threads") = 1,
        "Pairwise tree-Wasserstein distances between histogram rows.");

    m.def("haar_basis",
          [](const WeightedBinaryTree& tree) { return haar_basis(tree).vectors; },
          py::arg("tree"), "Orthonormal Haar basis induced by the tree (columns are vectors).");

    m.def("haar_filter", &filter, py::arg("signals"), py::arg("tree"), py::arg("threshold"),
          "Project each row onto the L1-dominant Haar sub-basis of the tree.");

    m.def(
        "run",
        [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& M_r, const Eigen::MatrixXd& M_c,
           const std::string& algorithm, double gamma_r, double gamma_c, int max_scale,
           double scale_multiplier, double threshold_r, double threshold_c, int max_iterations,
           double tolerance, bool density_normalize, double epsilon, double weight_floor,
           int threads) {
            IterationConfig cfg;
            cfg.gamma_r = gamma_r;
            cfg.gamma_c = gamma_c;
            cfg.max_scale = max_scale;
            cfg.scale_multiplier = scale_multiplier;
            cfg.threshold_r = threshold_r;
            cfg.threshold_c = threshold_c;
            cfg.max_iterations = max_iterations;
            cfg.tolerance = tolerance;
            cfg.density_normalize = density_normalize;
            cfg.regularizer_epsilon = epsilon;
            cfg.weight_floor = weight_floor;
            cfg.threads = threads;
            const Pipeline pipeline(X, M_r, M_c, cfg);
            return result_to_dict(pipeline.run(parse_algorithm(algorithm)));
        },
        py::arg("X"), py::arg("M_r"), py::arg("M_c"), py::arg("algorithm") = "alg1",
        py::arg("gamma_r") = 0.0, py::arg("gamma_c") = 0.0, py::arg("max_scale") = 5,
        py::arg("scale_multiplier") = 1.0, py::arg("threshold_r") = 1.0,
        py::arg("threshold_c") = 1.0, py::arg("max_iterations") = 25, py::arg("tolerance") = 1e-6,
        py::arg("density_normalize") = false, py::arg("epsilon") = 1e-6,
        py::arg("weight_floor") = 1e-12, py::arg("threads") = 1,
        "Run the alternating pipeline and return distances, trees, and history.");

    m.def(
        "generate_toy",
        [](std::uint64_t seed, int users_per_context, int videos_per_subgenre, int embed_dim,
           double noise_sigma) {
            ToySpec spec;
            spec.seed = seed;
            spec.users_per_context = users_per_context;
            spec.videos_per_subgenre = videos_per_subgenre;
            spec.embed_dim = embed_dim;
            spec.noise_sigma = noise_sigma;
            const ToyDataset toy = generate_toy(spec);
            py::dict out;
            out["matrix"] = toy.matrix;
            out["user_labels"] = toy.user_labels;
            out["video_labels"] = toy.video_labels;
            out["user_sublabels"] = toy.user_sublabels;
            out["video_sublabels"] = toy.video_sublabels;
            out["user_label_names"] = toy.user_label_names;
            out["video_label_names"] = toy.video_label_names;
            return out;
        },
        py::arg("seed") = 0, py::arg("users_per_context") = 10,
        py::arg("videos_per_subgenre") = 8, py::arg("embed_dim") = 30,
        py::arg("noise_sigma") = 0.1,
        "Synthetic hierarchical user/video interaction matrix with labels.");

    m.def(
        "knn_accuracy",
        [](const Eigen::MatrixXd& distances, const std::vector<int>& labels,
           const std::vector<int>& k_grid, double train_fraction, int trials, std::uint64_t seed) {
            const KnnReport report =
                knn_accuracy(distances, labels, k_grid, train_fraction, trials, seed);
            py::dict out;
            py::list per_k;
            for (const KnnResult& r : report.per_k) {
                py::dict item;
                item["k"] = r.k;
                item["mean"] = r.mean_accuracy;
                item["std"] = r.std_accuracy;
                per_k.append(item);
            }
            out["per_k"] = per_k;
            out["best_k"] = report.best.k;
            out["best_mean"] = report.best.mean_accuracy;
            out["resample_warnings"] = report.resample_warnings;
            return out;
        },
        py::arg("distances"), py::arg("labels"),
        py::arg("k_grid") = std::vector<int>{1, 3, 5, 7, 9, 11, 15},
        py::arg("train_fraction") = 0.8, py::arg("trials") = 5, py::arg("seed") = 0,
        "Majority-vote kNN accuracy over seeded random splits.");

    m.def(
        "landmark_spectrum",
        [](const Eigen::MatrixXd& distances, double scale_multiplier, double c,
           std::uint64_t seed) {
            const LandmarkSpectrum spec = landmark_spectrum(distances, scale_multiplier, c, seed);
            py::dict out;
            out["landmarks"] = spec.landmarks;
            out["eigenvalues"] = spec.eigenvalues();
            out["singular_values"] = spec.singular_values;
            return out;
        },
        py::arg("distances"), py::arg("scale_multiplier") = 1.0, py::arg("c") = 0.5,
        py::arg("seed") = 0,
        "Approximate spectrum of the landmark-affinity operator.");

    m.def("exact_ot", &exact_ot, py::arg("cost"), py::arg("mu"), py::arg("nu"),
          "Exact optimal transport cost via the transportation simplex (test oracle).");
}
