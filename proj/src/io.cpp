#include "dczip/io.hpp"

#include "dczip/version.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <unordered_map>
#include <unordered_set>

namespace dczip {

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: always \n line endings
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

Vector parse_vector(const std::vector<std::string>& tokens, std::size_t from,
                    const std::string& context) {
    Vector v(static_cast<Eigen::Index>(tokens.size() - from));
    for (std::size_t t = from; t < tokens.size(); ++t) {
        v(static_cast<Eigen::Index>(t - from)) = parse_double(tokens[t], context);
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw DataError(context + ": malformed number '" + s + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& context) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError(context + ": malformed integer '" + s + "'");
    }
    return v;
}

WeightedDigraph read_edge_list(const std::filesystem::path& path,
                               const std::optional<std::filesystem::path>& node_list) {
    std::vector<std::string> labels;
    std::unordered_map<std::string, int> index;
    const bool fixed_universe = node_list.has_value();
    if (fixed_universe) {
        auto in = open_in(*node_list);
        std::string line;
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            line = strip_cr(line);
            if (line.empty()) continue;
            if (!index.emplace(line, static_cast<int>(labels.size())).second) {
                throw DataError(node_list->string() + ":" + std::to_string(ln) +
                                ": duplicate node id '" + line + "'");
            }
            labels.push_back(line);
        }
        if (labels.empty()) throw DataError(node_list->string() + ": node list is empty");
    }

    auto in = open_in(path);
    std::string line;
    int ln = 0;
    if (!std::getline(in, line) || strip_cr(line) != "src\tdst\tweight") {
        throw DataError(path.string() + ":1: expected header 'src\\tdst\\tweight'");
    }
    ln = 1;

    struct Record {
        int src, dst;
        std::int64_t w;
    };
    std::vector<Record> records;
    std::unordered_set<std::uint64_t> seen_pairs;
    auto node_index = [&](const std::string& id) -> int {
        auto it = index.find(id);
        if (it != index.end()) return it->second;
        if (fixed_universe) return -1;  // not in the universe: drop the record
        const int idx = static_cast<int>(labels.size());
        index.emplace(id, idx);
        labels.push_back(id);
        return idx;
    };

    while (std::getline(in, line)) {
        ++ln;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(ln);
        const auto fields = split(line, '\t');
        if (fields.size() != 3) {
            throw DataError(where + ": expected 3 tab-separated fields, got " +
                            std::to_string(fields.size()));
        }
        if (fields[0] == fields[1]) {
            throw DataError(where + ": self-loop record for node '" + fields[0] + "'");
        }
        const std::int64_t w = parse_int(fields[2], where);
        if (w < 1) throw DataError(where + ": weight must be a positive integer (zeros are implicit)");
        const int src = node_index(fields[0]);
        const int dst = node_index(fields[1]);
        if (src < 0 || dst < 0) continue;  // outside the node-list universe
        const std::uint64_t key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
            static_cast<std::uint32_t>(dst);
        if (!seen_pairs.insert(key).second) {
            throw DataError(where + ": duplicate record for pair (" + fields[0] + ", " + fields[1] +
                            ")");
        }
        records.push_back({src, dst, w});
    }
    if (labels.empty()) throw DataError(path.string() + ": no nodes (empty edge list, no node list)");

    const int n = static_cast<int>(labels.size());
    Matrix W = Matrix::Zero(n, n);
    for (const auto& r : records) W(r.src, r.dst) = static_cast<double>(r.w);
    return WeightedDigraph(std::move(W), std::move(labels));
}

void write_edge_list(const WeightedDigraph& A, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "src\tdst\tweight\n";
    const int n = A.n();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = A.w(i, j);
            if (w > 0.0) {
                out << A.node_id(i) << '\t' << A.node_id(j) << '\t'
                    << static_cast<std::int64_t>(w) << '\n';
            }
        }
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_node_list(const WeightedDigraph& A, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (int i = 0; i < A.n(); ++i) out << A.node_id(i) << '\n';
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_params(const BlockParams& params, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "format dczip-params 1\n";
    out << "k " << params.K << '\n';
    out << "n " << params.n() << '\n';
    out << "sparsity_mode " << to_string(params.sparsity_mode) << '\n';
    out << "degree_corrected " << (params.degree_corrected ? "true" : "false") << '\n';
    out << "pi";
    for (int a = 0; a < params.K; ++a) out << ' ' << format_double(params.pi(a));
    out << '\n';
    for (int a = 0; a < params.K; ++a) {
        out << "P";
        for (int b = 0; b < params.K; ++b) out << ' ' << format_double(params.P(a, b));
        out << '\n';
    }
    for (int a = 0; a < params.K; ++a) {
        out << "Lambda";
        for (int b = 0; b < params.K; ++b) out << ' ' << format_double(params.Lambda(a, b));
        out << '\n';
    }
    out << "mu";
    for (int i = 0; i < params.n(); ++i) out << ' ' << format_double(params.mu(i));
    out << '\n';
    out << "nu";
    for (int i = 0; i < params.n(); ++i) out << ' ' << format_double(params.nu(i));
    out << '\n';
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

BlockParams read_params(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    int ln = 0;
    BlockParams params;
    int k = -1, n = -1;
    std::vector<Vector> p_rows, lambda_rows;
    bool have_pi = false, have_mu = false, have_nu = false;

    while (std::getline(in, line)) {
        ++ln;
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        const std::string where = path.string() + ":" + std::to_string(ln);
        const auto tokens = split(line, ' ');
        const std::string& key = tokens[0];
        if (key == "format") {
            if (tokens.size() != 3 || tokens[1] != "dczip-params" || tokens[2] != "1") {
                throw DataError(where + ": unsupported format line");
            }
        } else if (key == "k") {
            k = static_cast<int>(parse_int(tokens.at(1), where));
        } else if (key == "n") {
            n = static_cast<int>(parse_int(tokens.at(1), where));
        } else if (key == "sparsity_mode") {
            params.sparsity_mode = sparsity_mode_from_string(tokens.at(1));
        } else if (key == "degree_corrected") {
            if (tokens.at(1) != "true" && tokens.at(1) != "false") {
                throw DataError(where + ": degree_corrected must be true or false");
            }
            params.degree_corrected = tokens.at(1) == "true";
        } else if (key == "pi") {
            params.pi = parse_vector(tokens, 1, where);
            have_pi = true;
        } else if (key == "P") {
            p_rows.push_back(parse_vector(tokens, 1, where));
        } else if (key == "Lambda") {
            lambda_rows.push_back(parse_vector(tokens, 1, where));
        } else if (key == "mu") {
            params.mu = parse_vector(tokens, 1, where);
            have_mu = true;
        } else if (key == "nu") {
            params.nu = parse_vector(tokens, 1, where);
            have_nu = true;
        } else {
            throw DataError(where + ": unknown key '" + key + "'");
        }
    }

    if (k < 1) throw DataError(path.string() + ": missing or invalid 'k'");
    if (!have_pi) throw DataError(path.string() + ": missing 'pi'");
    if (static_cast<int>(p_rows.size()) != k || static_cast<int>(lambda_rows.size()) != k) {
        throw DataError(path.string() + ": expected " + std::to_string(k) + " P and Lambda rows");
    }
    params.K = k;
    params.P.resize(k, k);
    params.Lambda.resize(k, k);
    for (int a = 0; a < k; ++a) {
        if (p_rows[static_cast<std::size_t>(a)].size() != k ||
            lambda_rows[static_cast<std::size_t>(a)].size() != k) {
            throw DataError(path.string() + ": P/Lambda rows must have k entries");
        }
        params.P.row(a) = p_rows[static_cast<std::size_t>(a)].transpose();
        params.Lambda.row(a) = lambda_rows[static_cast<std::size_t>(a)].transpose();
    }
    if (n < 1 && have_mu) n = static_cast<int>(params.mu.size());
    if (n < 1) throw DataError(path.string() + ": missing 'n' (or 'mu'/'nu' vectors)");
    if (!have_mu) params.mu = Vector::Ones(n);
    if (!have_nu) params.nu = Vector::Ones(n);
    if (static_cast<int>(params.mu.size()) != n || static_cast<int>(params.nu.size()) != n) {
        throw DataError(path.string() + ": mu/nu length does not match n");
    }
    try {
        params.validate(/*require_symmetric=*/false);
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return params;
}

void write_partition(const Partition& p, const WeightedDigraph& A,
                     const std::filesystem::path& path) {
    if (p.n() != A.n()) throw std::invalid_argument("write_partition: size mismatch");
    auto out = open_out(path);
    out << "node,label\n";
    for (int i = 0; i < p.n(); ++i) {
        out << A.node_id(i) << ',' << p.labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<std::pair<std::string, int>> read_partition_records(
    const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty partition file");
    line = strip_cr(line);
    const auto header = split(line, ',');
    if (header.size() < 2 || header[0] != "node" || header[1] != "label") {
        throw DataError(path.string() + ":1: expected header starting with 'node,label'");
    }
    std::vector<std::pair<std::string, int>> records;
    std::unordered_set<std::string> seen;
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(ln);
        const auto fields = split(line, ',');
        if (fields.size() < 2) throw DataError(where + ": expected at least 'node,label'");
        const int label = static_cast<int>(parse_int(fields[1], where));
        if (label < 1) throw DataError(where + ": labels must be >= 1");
        if (!seen.insert(fields[0]).second) {
            throw DataError(where + ": duplicate node '" + fields[0] + "'");
        }
        records.emplace_back(fields[0], label);
    }
    if (records.empty()) throw DataError(path.string() + ": no partition records");
    return records;
}

Partition read_partition(const std::filesystem::path& path) {
    const auto records = read_partition_records(path);
    std::vector<int> labels;
    labels.reserve(records.size());
    int K = 1;
    for (const auto& [node, label] : records) {
        labels.push_back(label);
        K = std::max(K, label);
    }
    return Partition(std::move(labels), K);
}

void write_fit(const FitResult& fit, const WeightedDigraph& A,
               const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + out_dir.string() + "'");

    {
        auto out = open_out(out_dir / "membership.csv");
        out << "node,label";
        for (int a = 1; a <= fit.params.K; ++a) out << ",tau_" << a;
        out << '\n';
        for (int i = 0; i < A.n(); ++i) {
            out << A.node_id(i) << ',' << fit.partition.labels[static_cast<std::size_t>(i)];
            for (int a = 0; a < fit.params.K; ++a) out << ',' << format_double(fit.tau.tau(i, a));
            out << '\n';
        }
        if (!out) throw DataError("failed writing membership.csv under '" + out_dir.string() + "'");
    }
    write_params(fit.params, out_dir / "params.txt");
    {
        auto out = open_out(out_dir / "elbo_trace.csv");
        out << "iter,elbo\n";
        for (std::size_t t = 0; t < fit.elbo_trace.size(); ++t) {
            out << (t + 1) << ',' << format_double(fit.elbo_trace[t]) << '\n';
        }
        if (!out) throw DataError("failed writing elbo_trace.csv under '" + out_dir.string() + "'");
    }
    {
        auto out = open_out(out_dir / "meta.txt");
        out << "version " << kVersion << '\n';
        out << "seed " << fit.options.seed << '\n';
        out << "max_outer_iters " << fit.options.max_outer_iters << '\n';
        out << "elbo_tol " << format_double(fit.options.elbo_tol) << '\n';
        out << "estep_max_iters " << fit.options.estep_max_iters << '\n';
        out << "estep_tol " << format_double(fit.options.estep_tol) << '\n';
        out << "ecm_max_iters " << fit.options.ecm_max_iters << '\n';
        out << "ecm_tol " << format_double(fit.options.ecm_tol) << '\n';
        out << "symmetric_blocks " << (fit.options.symmetric_blocks ? "true" : "false") << '\n';
        out << "sparsity_mode " << to_string(fit.options.sparsity_mode) << '\n';
        out << "degree_corrected " << (fit.options.degree_corrected ? "true" : "false") << '\n';
        out << "converged " << (fit.converged ? "true" : "false") << '\n';
        out << "outer_iters " << fit.outer_iters << '\n';
        out << "elbo_init " << format_double(fit.elbo_init) << '\n';
        out << "best_elbo " << format_double(fit.best_elbo) << '\n';
        for (const auto& w : fit.warnings) out << "warning " << w << '\n';
        if (!out) throw DataError("failed writing meta.txt under '" + out_dir.string() + "'");
    }
}

void write_icl_table(const IclTable& table, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "k,max_complete_ll,block_penalty,mixing_penalty,icl,selected\n";
    for (const auto& row : table.rows) {
        out << row.k << ',' << format_double(row.max_complete_ll) << ','
            << format_double(row.block_penalty) << ',' << format_double(row.mixing_penalty) << ','
            << format_double(row.icl) << ',' << (row.k == table.k_hat ? 1 : 0) << '\n';
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace dczip
