#include "dczip/io.hpp"

#include "dczip/init_eval.hpp"
#include "dczip/sampler.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace dczip;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dczip_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("edge list: direct construction") {
    TempDir tmp;
    const auto path = tmp.path / "g.tsv";
    write_text(path, "src\tdst\tweight\na\tb\t3\nb\ta\t1\n");
    const auto A = read_edge_list(path);
    CHECK(A.n() == 2);
    CHECK(A.w(0, 1) == 3.0);
    CHECK(A.w(1, 0) == 1.0);
    CHECK(A.node_id(0) == "a");
    CHECK(A.node_id(1) == "b");
}

TEST_CASE("edge list: empty records with a node list give a zero graph") {
    TempDir tmp;
    write_text(tmp.path / "g.tsv", "src\tdst\tweight\n");
    write_text(tmp.path / "nodes.txt", "n1\nn2\nn3\nn4\nn5\n");
    const auto A = read_edge_list(tmp.path / "g.tsv", tmp.path / "nodes.txt");
    CHECK(A.n() == 5);
    CHECK(A.weights().cwiseAbs().maxCoeff() == 0.0);
    CHECK(A.node_id(4) == "n5");
}

TEST_CASE("edge list: node list acts as an intersection filter") {
    TempDir tmp;
    write_text(tmp.path / "g.tsv", "src\tdst\tweight\na\tb\t2\na\tzzz\t5\nzzz\tb\t7\n");
    write_text(tmp.path / "nodes.txt", "a\nb\n");
    const auto A = read_edge_list(tmp.path / "g.tsv", tmp.path / "nodes.txt");
    CHECK(A.n() == 2);
    CHECK(A.w(0, 1) == 2.0);
    CHECK(A.weights().sum() == 2.0);
}

TEST_CASE("edge list: malformed input is rejected with line numbers") {
    TempDir tmp;
    const auto path = tmp.path / "g.tsv";

    write_text(path, "source\tdest\tw\na\tb\t1\n");
    CHECK_THROWS_WITH_AS(read_edge_list(path), doctest::Contains(":1"), DataError);

    write_text(path, "src\tdst\tweight\na\tb\n");
    CHECK_THROWS_WITH_AS(read_edge_list(path), doctest::Contains(":2"), DataError);

    write_text(path, "src\tdst\tweight\na\ta\t4\n");
    CHECK_THROWS_WITH_AS(read_edge_list(path), doctest::Contains("self-loop"), DataError);

    write_text(path, "src\tdst\tweight\na\tb\t1\na\tb\t2\n");
    CHECK_THROWS_WITH_AS(read_edge_list(path), doctest::Contains("duplicate"), DataError);

    write_text(path, "src\tdst\tweight\na\tb\t0\n");
    CHECK_THROWS_AS(read_edge_list(path), DataError);

    write_text(path, "src\tdst\tweight\na\tb\t1.5\n");
    CHECK_THROWS_AS(read_edge_list(path), DataError);

    CHECK_THROWS_AS(read_edge_list(tmp.path / "missing.tsv"), DataError);
}

TEST_CASE("edge list round trip is lossless") {
    const auto params = BlockParams::homogeneous(2, 30, 0.6, 4.0);
    const auto [A, z] = sample_network(params, 30, 97);
    TempDir tmp;
    const auto path = tmp.path / "roundtrip.tsv";
    const auto nodes = tmp.path / "nodes.txt";
    write_edge_list(A, path);
    write_node_list(A, nodes);
    const auto B = read_edge_list(path, nodes);
    CHECK(A.weights() == B.weights());

    // Without the node list the ordering is first-appearance; the labeled
    // graph must still match after aligning ids.
    const auto C = read_edge_list(path);
    REQUIRE(C.node_labels().has_value());
    std::vector<int> to_a(static_cast<std::size_t>(C.n()));
    for (int i = 0; i < C.n(); ++i) {
        to_a[static_cast<std::size_t>(i)] = static_cast<int>(parse_int(C.node_id(i), "id"));
    }
    for (int i = 0; i < C.n(); ++i) {
        for (int j = 0; j < C.n(); ++j) {
            CHECK(C.w(i, j) == A.w(to_a[static_cast<std::size_t>(i)], to_a[static_cast<std::size_t>(j)]));
        }
    }

    // Byte-deterministic writes.
    const auto path2 = tmp.path / "roundtrip2.tsv";
    write_edge_list(A, path2);
    CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("params document round trip is bit-exact") {
    BlockParams params = BlockParams::homogeneous(2, 7, 0.5, 4.0, true);
    params.pi(0) = 1.0 / 3.0;
    params.pi(1) = 2.0 / 3.0;
    params.P(0, 1) = params.P(1, 0) = 0.1234567890123456789;
    params.Lambda(0, 0) = 3.0000000000000004;
    params.Lambda(1, 1) = 1e-12;
    for (int i = 0; i < 7; ++i) params.mu(i) = 0.1 * (i + 1);
    params.nu(3) = 1e17;
    params.validate();

    TempDir tmp;
    const auto path = tmp.path / "params.txt";
    write_params(params, path);
    const auto back = read_params(path);
    CHECK(back.K == params.K);
    CHECK(back.pi == params.pi);
    CHECK(back.P == params.P);
    CHECK(back.Lambda == params.Lambda);
    CHECK(back.mu == params.mu);
    CHECK(back.nu == params.nu);
    CHECK(back.degree_corrected == params.degree_corrected);
    CHECK(back.sparsity_mode == params.sparsity_mode);
}

TEST_CASE("format_double survives a parse round trip") {
    for (double v : {0.1, -1e-300, 1e300, 3.141592653589793, 0.0,
                     -std::numeric_limits<double>::infinity()}) {
        CHECK(parse_double(format_double(v), "test") == v);
    }
}

TEST_CASE("write_fit persists a complete artifact set") {
    const auto params = BlockParams::homogeneous(2, 20, 0.4, 5.0);
    const auto [A, z] = sample_network(params, 20, 42);
    FitOptions opts;
    opts.degree_corrected = false;
    const auto fit = fit_vem(A, 2, kmeans_rows(A, 2, 1), opts);

    TempDir tmp;
    const auto out = tmp.path / "fit";
    write_fit(fit, A, out);

    // Membership rows sum their tau fields to one.
    std::ifstream mem(out / "membership.csv");
    std::string line;
    std::getline(mem, line);
    CHECK(line == "node,label,tau_1,tau_2");
    int rows = 0;
    while (std::getline(mem, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        const double t1 = parse_double(line.substr(c2 + 1, c3 - c2 - 1), "tau1");
        const double t2 = parse_double(line.substr(c3 + 1), "tau2");
        CHECK(std::abs(t1 + t2 - 1.0) <= 1e-9);
        ++rows;
    }
    CHECK(rows == 20);

    // Params round trip bit-exactly.
    const auto back = read_params(out / "params.txt");
    CHECK(back.P == fit.params.P);
    CHECK(back.Lambda == fit.params.Lambda);

    // Trace has exactly outer_iters records.
    std::ifstream trace(out / "elbo_trace.csv");
    int trace_rows = -1;  // header
    while (std::getline(trace, line)) ++trace_rows;
    CHECK(trace_rows == fit.outer_iters);

    CHECK(fs::exists(out / "meta.txt"));
}

TEST_CASE("partition files round trip and align by node id") {
    const auto params = BlockParams::homogeneous(2, 10, 0.4, 3.0);
    const auto [A, z] = sample_network(params, 10, 7);
    TempDir tmp;
    const auto path = tmp.path / "truth.csv";
    write_partition(z, A, path);
    const auto back = read_partition(path);
    CHECK(back.labels == z.labels);

    write_text(tmp.path / "bad.csv", "node,label\nx,0\n");
    CHECK_THROWS_AS(read_partition(tmp.path / "bad.csv"), DataError);
    write_text(tmp.path / "dup.csv", "node,label\nx,1\nx,2\n");
    CHECK_THROWS_AS(read_partition(tmp.path / "dup.csv"), DataError);
}
