#include "dczip/init_eval.hpp"
#include "dczip/inference.hpp"
#include "dczip/io.hpp"
#include "dczip/sampler.hpp"
#include "dczip/selection.hpp"
#include "dczip/sweep.hpp"
#include "dczip/version.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string fixed6(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
    return std::string(buf, res.ptr);
}

dczip::Partition partition_for_graph(const std::filesystem::path& path,
                                     const dczip::WeightedDigraph& A, int K) {
    const auto records = dczip::read_partition_records(path);
    std::map<std::string, int> by_node;
    for (const auto& [node, label] : records) by_node.emplace(node, label);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(A.n()));
    for (int i = 0; i < A.n(); ++i) {
        const auto it = by_node.find(A.node_id(i));
        if (it == by_node.end()) {
            throw dczip::DataError("partition file '" + path.string() + "' is missing node '" +
                                   A.node_id(i) + "'");
        }
        if (it->second > K) {
            throw dczip::DataError("partition file '" + path.string() + "' uses label " +
                                   std::to_string(it->second) + " > k=" + std::to_string(K));
        }
        labels.push_back(it->second);
    }
    return dczip::Partition(std::move(labels), K);
}

int run_simulate(const std::string& params_path, int n, std::uint64_t seed,
                 const std::string& out_path, const std::optional<std::string>& truth_path) {
    dczip::BlockParams params = dczip::read_params(params_path);
    params.validate();
    auto [graph, truth] = dczip::sample_network(params, n, seed);
    dczip::write_edge_list(graph, out_path);
    if (truth_path) dczip::write_partition(truth, graph, *truth_path);
    std::cout << "simulated n=" << n << " k=" << params.K << " edges="
              << static_cast<long long>(graph.weights().array().sign().sum()) << " -> " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DCZIP-SBM: zero-inflated Poisson blockmodels for count-weighted networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dczip::kVersion));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Sample a network from a parameter file");
    std::string sim_params, sim_out;
    std::optional<std::string> sim_truth;
    int sim_n = 0;
    std::uint64_t sim_seed = 1;
    sim->add_option("--params", sim_params, "Parameter document")->required();
    sim->add_option("--n", sim_n, "Node count")->required();
    sim->add_option("--seed", sim_seed, "RNG seed")->required();
    sim->add_option("--out", sim_out, "Output edge list")->required();
    sim->add_option("--truth", sim_truth, "Write the planted partition here");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit the model by variational EM");
    std::string fit_graph, fit_out, fit_init = "kmeans";
    std::optional<std::string> fit_nodes;
    int fit_k = 0;
    bool fit_no_dc = false, fit_global = false;
    std::uint64_t fit_seed = 1;
    double fit_tol = 1e-6;
    int fit_max_iters = 100;
    fit->add_option("--graph", fit_graph, "Edge-list file")->required();
    fit->add_option("--nodes", fit_nodes, "Node-list file (defines the node universe)");
    fit->add_option("--k", fit_k, "Number of communities")->required();
    fit->add_flag("--no-degree-correction", fit_no_dc, "Fit the plain ZIP model");
    fit->add_flag("--global-sparsity", fit_global, "Pool the structural-zero probability globally");
    fit->add_option("--init", fit_init,
                    "kmeans, kmeans-norm (strength-normalized rows), or file:<partition.csv>");
    fit->add_option("--seed", fit_seed, "Seed for the k-means initializer");
    fit->add_option("--tol", fit_tol, "ELBO convergence tolerance");
    fit->add_option("--max-iters", fit_max_iters, "Outer iteration cap");
    fit->add_option("--out", fit_out, "Output directory")->required();

    // select
    auto* sel = app.add_subcommand("select", "Choose the number of communities by ICL");
    std::string sel_graph, sel_out;
    std::optional<std::string> sel_nodes;
    int sel_kmin = 1, sel_kmax = 5, sel_restarts = 5;
    bool sel_no_dc = false, sel_global = false;
    std::uint64_t sel_seed = 1;
    sel->add_option("--graph", sel_graph, "Edge-list file")->required();
    sel->add_option("--nodes", sel_nodes, "Node-list file");
    sel->add_option("--k-min", sel_kmin, "Smallest k")->required();
    sel->add_option("--k-max", sel_kmax, "Largest k")->required();
    sel->add_option("--restarts", sel_restarts, "k-means restarts per k");
    sel->add_flag("--no-degree-correction", sel_no_dc, "Score the plain ZIP model");
    sel->add_flag("--global-sparsity", sel_global, "Pool the structural-zero probability globally");
    sel->add_option("--seed", sel_seed, "Base seed for the restart initializers");
    sel->add_option("--out", sel_out, "Output ICL table (CSV)")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "NMI between two partition files");
    std::string ev_a, ev_b;
    ev->add_option("--a", ev_a, "First partition file")->required();
    ev->add_option("--b", ev_b, "Second partition file")->required();

    // sweep
    auto* sw = app.add_subcommand("sweep", "Run a simulation sweep from a JSON config");
    std::string sw_config, sw_out;
    int sw_workers = 0;
    sw->add_option("--config", sw_config, "Sweep config (JSON)")->required();
    sw->add_option("--out", sw_out, "Records file (summary lands next to it)")->required();
    sw->add_option("--workers", sw_workers, "Worker threads (default: hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*sim) {
            return run_simulate(sim_params, sim_n, sim_seed, sim_out, sim_truth);
        }
        if (*fit) {
            std::optional<std::filesystem::path> nodes;
            if (fit_nodes) nodes = *fit_nodes;
            const dczip::WeightedDigraph A = dczip::read_edge_list(fit_graph, nodes);
            dczip::FitOptions opts;
            opts.degree_corrected = !fit_no_dc;
            opts.sparsity_mode =
                fit_global ? dczip::SparsityMode::global : dczip::SparsityMode::local;
            opts.seed = fit_seed;
            opts.elbo_tol = fit_tol;
            opts.max_outer_iters = fit_max_iters;
            dczip::Partition init;
            if (fit_init == "kmeans") {
                init = dczip::kmeans_rows(A, fit_k, fit_seed);
            } else if (fit_init == "kmeans-norm") {
                init = dczip::kmeans_normalized_rows(A, fit_k, fit_seed);
            } else if (fit_init.rfind("file:", 0) == 0) {
                init = partition_for_graph(fit_init.substr(5), A, fit_k);
            } else {
                std::cerr << "error: --init must be 'kmeans', 'kmeans-norm' or 'file:<path>'\n";
                return kExitUsage;
            }
            const dczip::FitResult result = dczip::fit_vem(A, fit_k, init, opts);
            dczip::write_fit(result, A, fit_out);
            std::cout << "fit k=" << fit_k << " elbo=" << dczip::format_double(result.best_elbo)
                      << " outer_iters=" << result.outer_iters
                      << " converged=" << (result.converged ? "true" : "false") << " -> " << fit_out
                      << "\n";
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
            return 0;
        }
        if (*sel) {
            std::optional<std::filesystem::path> nodes;
            if (sel_nodes) nodes = *sel_nodes;
            const dczip::WeightedDigraph A = dczip::read_edge_list(sel_graph, nodes);
            dczip::FitOptions opts;
            opts.degree_corrected = !sel_no_dc;
            opts.sparsity_mode =
                sel_global ? dczip::SparsityMode::global : dczip::SparsityMode::local;
            opts.seed = sel_seed;
            if (sel_restarts < 1) {
                std::cerr << "error: --restarts must be >= 1\n";
                return kExitUsage;
            }
            std::vector<std::uint64_t> restarts;
            for (int r = 0; r < sel_restarts; ++r) {
                restarts.push_back(sel_seed + static_cast<std::uint64_t>(r));
            }
            const dczip::IclTable table = dczip::select_k(A, sel_kmin, sel_kmax, opts, restarts);
            dczip::write_icl_table(table, sel_out);
            std::cout << "selected_k " << table.k_hat << "\n";
            for (const auto& row : table.rows) {
                for (const auto& w : row.warnings) {
                    std::cerr << "warning (k=" << row.k << "): " << w << "\n";
                }
            }
            return 0;
        }
        if (*ev) {
            const auto ra = dczip::read_partition_records(ev_a);
            const auto rb = dczip::read_partition_records(ev_b);
            if (ra.size() != rb.size()) {
                throw dczip::DataError("partition files have different node counts");
            }
            std::map<std::string, int> bmap;
            for (const auto& [node, label] : rb) bmap.emplace(node, label);
            std::vector<int> la, lb;
            int ka = 1, kb = 1;
            for (const auto& [node, label] : ra) {
                const auto it = bmap.find(node);
                if (it == bmap.end()) {
                    throw dczip::DataError("node '" + node + "' missing from '" + ev_b + "'");
                }
                la.push_back(label);
                lb.push_back(it->second);
                ka = std::max(ka, label);
                kb = std::max(kb, it->second);
            }
            const double value =
                dczip::nmi(dczip::Partition(std::move(la), ka), dczip::Partition(std::move(lb), kb));
            std::cout << fixed6(value) << "\n";
            return 0;
        }
        if (*sw) {
            const dczip::SweepConfig config = dczip::SweepConfig::from_json_file(sw_config);
            const dczip::SweepResult result = dczip::run_sweep(config, sw_out, sw_workers);
            std::size_t failed = 0;
            for (const auto& r : result.records) failed += r.failed ? 1 : 0;
            std::cout << "sweep records=" << result.records.size() << " failed=" << failed
                      << " -> " << sw_out << "\n";
            return 0;
        }
    } catch (const dczip::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const dczip::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
