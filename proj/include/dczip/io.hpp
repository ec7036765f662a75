#pragma once

#include "dczip/inference.hpp"
#include "dczip/params.hpp"
#include "dczip/selection.hpp"
#include "dczip/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dczip {

// A malformed or inconsistent input file; maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical breakdown (failed decomposition, non-finite results); exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Edge lists are TSV with header "src\tdst\tweight", one record per ordered
// pair with weight >= 1; zeros are implicit. Node universe comes from the
// optional node-list file (one id per line, defines order; records with
// endpoints outside the list are dropped) or first-appearance order.
WeightedDigraph read_edge_list(const std::filesystem::path& path,
                               const std::optional<std::filesystem::path>& node_list = std::nullopt);
void write_edge_list(const WeightedDigraph& A, const std::filesystem::path& path);

// Companion node list (one id per line, graph order); reading an edge list
// against it reproduces the node ordering exactly, isolated nodes included.
void write_node_list(const WeightedDigraph& A, const std::filesystem::path& path);

// Self-describing key-value parameter document; doubles carry 17 significant
// digits so read-after-write is bit-exact.
void write_params(const BlockParams& params, const std::filesystem::path& path);
BlockParams read_params(const std::filesystem::path& path);

// Partition CSV "node,label". Readers also accept a fit membership file
// (extra tau columns are ignored). Node ids must match the graph's.
void write_partition(const Partition& p, const WeightedDigraph& A,
                     const std::filesystem::path& path);
std::vector<std::pair<std::string, int>> read_partition_records(const std::filesystem::path& path);
Partition read_partition(const std::filesystem::path& path);

// Persists a fit: membership.csv (node,label,tau_1..tau_K), params.txt,
// elbo_trace.csv (iter,elbo), meta.txt (options, seed, warnings, version).
void write_fit(const FitResult& fit, const WeightedDigraph& A,
               const std::filesystem::path& out_dir);

void write_icl_table(const IclTable& table, const std::filesystem::path& path);

// Locale-independent numeric formatting used by all writers.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);
std::int64_t parse_int(const std::string& s, const std::string& context);

}  // namespace dczip
