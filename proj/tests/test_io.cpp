#include "doctest.h"

#include "cotwd/eval.hpp"
#include "cotwd/io.hpp"
#include "cotwd/tree.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace cotwd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cotwd_io_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("dense reader with header") {
    TempDir tmp;
    const std::string path = tmp.file("dense.csv");
    write_text(path, "a,b\n1,2\n3,4\n");
    const Dataset data = read_dense(path, true);
    REQUIRE(data.matrix.rows() == 2);
    REQUIRE(data.matrix.cols() == 2);
    CHECK(data.matrix(0, 0) == 1.0);
    CHECK(data.matrix(1, 1) == 4.0);
    CHECK(data.col_names == std::vector<std::string>{"a", "b"});
    CHECK(data.row_names.empty());
}

TEST_CASE("dense reader with row names and tabs") {
    TempDir tmp;
    const std::string path = tmp.file("dense.tsv");
    write_text(path, "name\tx\ty\nr1\t1.5\t2\nr2\t0\t4\n");
    const Dataset data = read_dense(path, true);
    REQUIRE(data.matrix.rows() == 2);
    REQUIRE(data.matrix.cols() == 2);
    CHECK(data.row_names == std::vector<std::string>{"r1", "r2"});
    CHECK(data.matrix(0, 0) == 1.5);
}

TEST_CASE("dense reader error coordinates") {
    TempDir tmp;
    const std::string neg = tmp.file("neg.csv");
    write_text(neg, "1,2\n3,-1\n");
    CHECK_THROWS_WITH_AS(read_dense(neg, false), doctest::Contains("line 2"), std::runtime_error);

    const std::string ragged = tmp.file("ragged.csv");
    write_text(ragged, "1,2\n3\n");
    CHECK_THROWS_WITH_AS(read_dense(ragged, false), doctest::Contains("line 2"), std::runtime_error);

    const std::string text = tmp.file("text.csv");
    write_text(text, "1,2\n3,zzz\n");
    CHECK_THROWS_WITH_AS(read_dense(text, false), doctest::Contains("line 2"), std::runtime_error);

    CHECK_THROWS(read_dense(tmp.file("missing.csv"), false));
    const std::string empty = tmp.file("empty.csv");
    write_text(empty, "");
    CHECK_THROWS(read_dense(empty, false));
}

TEST_CASE("dense round trip preserves toy values bit-exactly") {
    TempDir tmp;
    const ToyDataset toy = generate_toy(ToySpec{});
    const std::string path = tmp.file("toy.csv");
    write_dense(toy.matrix, path);
    const Dataset back = read_dense(path, false);
    REQUIRE(back.matrix.rows() == toy.matrix.rows());
    REQUIRE(back.matrix.cols() == toy.matrix.cols());
    CHECK(back.matrix == toy.matrix);  // 17 significant digits round-trip doubles
}

TEST_CASE("sparse reader basics") {
    TempDir tmp;
    const std::string path = tmp.file("one.mtx");
    write_text(path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 5\n");
    const Dataset data = read_sparse(path);
    CHECK(data.matrix(0, 1) == 5.0);
    CHECK(data.matrix(0, 0) == 0.0);
    CHECK(data.matrix(1, 0) == 0.0);
    CHECK(data.matrix(1, 1) == 0.0);
}

TEST_CASE("sparse duplicates are summed") {
    TempDir tmp;
    const std::string path = tmp.file("dup.mtx");
    write_text(path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 1\n");
    CHECK(read_sparse(path).matrix(0, 0) == 2.0);
}

TEST_CASE("sparse reader rejects malformed input") {
    TempDir tmp;
    const std::string no_header = tmp.file("nh.mtx");
    write_text(no_header, "2 2 1\n1 1 1\n");
    CHECK_THROWS(read_sparse(no_header));

    const std::string out_of_range = tmp.file("oor.mtx");
    write_text(out_of_range, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
    CHECK_THROWS(read_sparse(out_of_range));

    const std::string wrong_count = tmp.file("count.mtx");
    write_text(wrong_count, "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n");
    CHECK_THROWS_WITH_AS(read_sparse(wrong_count), doctest::Contains("mismatch"), std::runtime_error);

    const std::string negative = tmp.file("negs.mtx");
    write_text(negative, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 -4\n");
    CHECK_THROWS(read_sparse(negative));
}

TEST_CASE("sparse and dense writers agree") {
    TempDir tmp;
    Eigen::MatrixXd m(3, 4);
    m << 0, 1.25, 0, 0,
         2, 0, 0, 0.5,
         0, 0, 0, 0.0078125;
    write_sparse(m, tmp.file("m.mtx"));
    write_dense(m, tmp.file("m.csv"));
    const Dataset via_sparse = read_sparse(tmp.file("m.mtx"));
    const Dataset via_dense = read_dense(tmp.file("m.csv"), false);
    CHECK(via_sparse.matrix == m);
    CHECK(via_dense.matrix == m);
}

TEST_CASE("distance matrix writer emits full precision") {
    TempDir tmp;
    Eigen::MatrixXd d(2, 2);
    d << 0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0;
    const std::string path = tmp.file("dist.csv");
    write_distance_matrix(d, path);
    const Dataset back = read_dense(path, false);
    CHECK(back.matrix == d);
}

TEST_CASE("tree file round trip") {
    TempDir tmp;
    DecodeOptions opts;
    const WeightedBinaryTree tree = decode_tree(testutil::random_distances(9, 3, 12), opts);
    const std::string path = tmp.file("tree.nwk");
    write_tree(tree, path);
    const WeightedBinaryTree back = read_tree(path);
    back.validate();
    CHECK((tree_distance_matrix(back) - tree_distance_matrix(tree)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(read_text(path).back() == '\n');
}

TEST_CASE("history log layout and timing opt-in") {
    TempDir tmp;
    std::vector<IterationRecord> history(2);
    history[0].iteration = 1;
    history[0].rel_change_samples = 0.5;
    history[0].rel_change_features = 0.25;
    history[0].l1_haar_samples = 3.0;
    history[0].l1_haar_features = 4.0;
    history[0].wall_ms = 12.5;
    history[1].iteration = 2;
    history[1].wall_ms = 13.5;

    const std::string plain = tmp.file("h.jsonl");
    write_history(history, plain, "{\"seed\":0}", false);
    const std::string text = read_text(plain);
    CHECK(text.rfind("{\"seed\":0}\n", 0) == 0);
    CHECK(text.find("wall_ms") == std::string::npos);
    CHECK(text.find("\"iteration\":1") != std::string::npos);
    CHECK(text.find("\"rel_change_samples\":0.5") != std::string::npos);

    // Byte-identical across reruns when timing is excluded.
    const std::string again = tmp.file("h2.jsonl");
    history[0].wall_ms = 99.0;
    write_history(history, again, "{\"seed\":0}", false);
    CHECK(read_text(again) == text);

    const std::string timed = tmp.file("ht.jsonl");
    write_history(history, timed, "{\"seed\":0}", true);
    CHECK(read_text(timed).find("wall_ms") != std::string::npos);
}

TEST_CASE("label file round trip") {
    TempDir tmp;
    const std::string path = tmp.file("labels.csv");
    write_labels({"u0", "u1", "u2", "u3"}, {1, 0, 1, 2}, {"mobile", "desktop", "tv"}, path);
    const auto [ids, classes] = read_labels(path);
    // Ids are re-encoded in first-appearance order: desktop, mobile, tv.
    CHECK(classes == std::vector<std::string>{"desktop", "mobile", "tv"});
    CHECK(ids == std::vector<int>{0, 1, 0, 2});
}

TEST_CASE("unwritable path raises") {
    CHECK_THROWS(write_dense(Eigen::MatrixXd::Zero(1, 1), "/nonexistent_dir_xyz/out.csv"));
}
