#include "dczip/sweep.hpp"

#include "dczip/init_eval.hpp"
#include "dczip/io.hpp"
#include "dczip/sampler.hpp"
#include "dczip/selection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

namespace dczip {

namespace {

using nlohmann::json;

const std::vector<std::string> kKnownMethods = {"dczip", "zip", "spectral", "kmeans"};

struct Cell {
    double lambda_in = 0.0;
    double p_in = 0.0;
    double p_out = 0.0;
    bool global_p = false;
};

// Sampling setup for one cell: diagonal lambda_in, off-diagonal lambda_out,
// optional hub corrections applied to the planted partition.
struct CellDraw {
    WeightedDigraph A;
    Partition truth;
};

CellDraw draw_cell_network(const SweepConfig& cfg, const Cell& cell, std::uint64_t seed) {
    BlockParams params;
    params.K = cfg.k;
    params.pi = Eigen::Map<const Vector>(cfg.pi.data(), static_cast<Eigen::Index>(cfg.pi.size()));
    params.Lambda = Matrix::Constant(cfg.k, cfg.k, cfg.lambda_out);
    params.Lambda.diagonal().setConstant(cell.lambda_in);
    params.P = Matrix::Constant(cfg.k, cfg.k, cell.p_out);
    params.P.diagonal().setConstant(cell.p_in);
    params.mu = Vector::Ones(cfg.n);
    params.nu = Vector::Ones(cfg.n);
    params.sparsity_mode = cell.global_p ? SparsityMode::global : SparsityMode::local;

    const bool hubs = cfg.hub_fraction > 0.0 && cfg.hub_factor != 1.0;
    params.degree_corrected = hubs;
    params.validate();

    Partition z = sample_partition(params.pi, cfg.n, seed);
    if (hubs) {
        // Inflate mu for the first ceil(fraction * |C1|) nodes of community 1
        // and nu likewise within community 2.
        const auto sizes = z.community_sizes();
        auto n_hubs = [&](int comm) {
            return static_cast<int>(
                std::ceil(cfg.hub_fraction * sizes[static_cast<std::size_t>(comm - 1)]));
        };
        int left_mu = n_hubs(1);
        int left_nu = cfg.k >= 2 ? n_hubs(2) : 0;
        for (int i = 0; i < cfg.n && (left_mu > 0 || left_nu > 0); ++i) {
            if (z.labels[static_cast<std::size_t>(i)] == 1 && left_mu > 0) {
                params.mu(i) *= cfg.hub_factor;
                --left_mu;
            } else if (z.labels[static_cast<std::size_t>(i)] == 2 && left_nu > 0) {
                params.nu(i) *= cfg.hub_factor;
                --left_nu;
            }
        }
    }
    WeightedDigraph A = sample_weights(z, params, seed);
    return CellDraw{std::move(A), std::move(z)};
}

FitOptions method_options(const SweepConfig& cfg, bool degree_corrected, bool global_p) {
    FitOptions opts = cfg.fit;
    opts.degree_corrected = degree_corrected;
    opts.sparsity_mode = global_p ? SparsityMode::global : SparsityMode::local;
    return opts;
}

std::filesystem::path summary_path_for(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    const std::string stem = p.stem().string();
    const std::string ext = p.extension().string();
    p.replace_filename(stem + "_summary" + (ext.empty() ? std::string(".csv") : ext));
    return p;
}

}  // namespace

void SweepConfig::validate() const {
    if (n < 2) throw DataError("sweep config: n must be >= 2");
    if (k < 1) throw DataError("sweep config: k must be >= 1");
    if (static_cast<int>(pi.size()) != k) throw DataError("sweep config: pi must have k entries");
    double s = 0.0;
    for (double v : pi) {
        if (!(v >= 0.0)) throw DataError("sweep config: pi entries must be >= 0");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DataError("sweep config: pi must sum to 1");
    if (lambda_in.empty()) throw DataError("sweep config: lambda_in grid is empty");
    for (double v : lambda_in) {
        if (!(v >= 0.0)) throw DataError("sweep config: lambda_in must be >= 0");
    }
    if (!(lambda_out >= 0.0)) throw DataError("sweep config: lambda_out must be >= 0");
    auto check_p = [](double v, const char* what) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DataError(std::string("sweep config: ") + what + " must lie in [0, 1]");
        }
    };
    check_p(p_in, "p_in");
    check_p(p_out, "p_out");
    for (double v : global_p) check_p(v, "global_p");
    if (!(hub_fraction >= 0.0 && hub_fraction <= 1.0)) {
        throw DataError("sweep config: hub_fraction must lie in [0, 1]");
    }
    if (!(hub_factor > 0.0)) throw DataError("sweep config: hub_factor must be > 0");
    if (replications < 1) throw DataError("sweep config: replications must be >= 1");
    if (methods.empty()) throw DataError("sweep config: methods list is empty");
    for (const auto& m : methods) {
        if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end()) {
            throw DataError("sweep config: unknown method '" + m + "'");
        }
    }
    if (select_enabled) {
        if (select_k_min < 1 || select_k_min > select_k_max) {
            throw DataError("sweep config: need 1 <= select.k_min <= select.k_max");
        }
        if (select_restarts < 1) throw DataError("sweep config: select.restarts must be >= 1");
    }
}

SweepConfig SweepConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sweep config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("sweep config '" + path.string() + "': " + e.what());
    }
    SweepConfig cfg;
    try {
        cfg.n = j.at("n").get<int>();
        cfg.k = j.at("k").get<int>();
        cfg.pi = j.at("pi").get<std::vector<double>>();
        cfg.lambda_in = j.at("lambda_in").get<std::vector<double>>();
        cfg.lambda_out = j.at("lambda_out").get<double>();
        if (j.contains("global_p")) cfg.global_p = j.at("global_p").get<std::vector<double>>();
        if (j.contains("p_in")) cfg.p_in = j.at("p_in").get<double>();
        if (j.contains("p_out")) cfg.p_out = j.at("p_out").get<double>();
        if (j.contains("hub_fraction")) cfg.hub_fraction = j.at("hub_fraction").get<double>();
        if (j.contains("hub_factor")) cfg.hub_factor = j.at("hub_factor").get<double>();
        cfg.replications = j.at("replications").get<int>();
        if (j.contains("seed_base")) cfg.seed_base = j.at("seed_base").get<std::uint64_t>();
        cfg.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("fit")) {
            const auto& f = j.at("fit");
            if (f.contains("max_outer_iters")) cfg.fit.max_outer_iters = f.at("max_outer_iters").get<int>();
            if (f.contains("elbo_tol")) cfg.fit.elbo_tol = f.at("elbo_tol").get<double>();
            if (f.contains("estep_max_iters")) cfg.fit.estep_max_iters = f.at("estep_max_iters").get<int>();
            if (f.contains("estep_tol")) cfg.fit.estep_tol = f.at("estep_tol").get<double>();
            if (f.contains("ecm_max_iters")) cfg.fit.ecm_max_iters = f.at("ecm_max_iters").get<int>();
            if (f.contains("ecm_tol")) cfg.fit.ecm_tol = f.at("ecm_tol").get<double>();
            if (f.contains("symmetric_blocks")) cfg.fit.symmetric_blocks = f.at("symmetric_blocks").get<bool>();
        }
        if (j.contains("select")) {
            const auto& s = j.at("select");
            cfg.select_enabled = true;
            cfg.select_k_min = s.at("k_min").get<int>();
            cfg.select_k_max = s.at("k_max").get<int>();
            if (s.contains("restarts")) cfg.select_restarts = s.at("restarts").get<int>();
        }
    } catch (const json::exception& e) {
        throw DataError("sweep config '" + path.string() + "': " + e.what());
    }
    cfg.validate();
    return cfg;
}

SweepResult run_sweep(const SweepConfig& config, const std::filesystem::path& out_path,
                      int workers) {
    config.validate();
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers < 1) workers = 1;
    }

    std::vector<Cell> cells;
    if (config.global_p.empty()) {
        for (double li : config.lambda_in) cells.push_back({li, config.p_in, config.p_out, false});
    } else {
        for (double li : config.lambda_in) {
            for (double p : config.global_p) cells.push_back({li, p, p, true});
        }
    }

    struct Job {
        std::size_t cell_idx;
        int rep;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    std::uint64_t counter = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (int rep = 0; rep < config.replications; ++rep) {
            jobs.push_back({c, rep, config.seed_base + counter});
            ++counter;
        }
    }

    // records[job][method]
    std::vector<std::vector<SweepRecord>> results(jobs.size());
    std::atomic<std::size_t> next{0};

    auto run_job = [&](std::size_t jidx) {
        const Job& job = jobs[jidx];
        const Cell& cell = cells[job.cell_idx];
        std::vector<SweepRecord>& out = results[jidx];
        for (const auto& method : config.methods) {
            SweepRecord rec;
            rec.lambda_in = cell.lambda_in;
            rec.lambda_out = config.lambda_out;
            rec.p_in = cell.p_in;
            rec.p_out = cell.p_out;
            rec.method = method;
            rec.rep = job.rep;
            rec.seed = job.seed;
            try {
                const CellDraw draw = draw_cell_network(config, cell, job.seed);
                Partition est;
                if (method == "dczip" || method == "zip") {
                    const bool dc = method == "dczip";
                    FitOptions opts = method_options(config, dc, cell.global_p);
                    opts.seed = job.seed;
                    Partition init = dc ? kmeans_normalized_rows(draw.A, config.k, job.seed)
                                        : kmeans_rows(draw.A, config.k, job.seed);
                    FitResult fit = fit_vem(draw.A, config.k, init, opts);
                    est = fit.partition;
                    if (config.select_enabled) {
                        std::vector<std::uint64_t> restarts;
                        for (int r = 0; r < config.select_restarts; ++r) {
                            restarts.push_back(job.seed + static_cast<std::uint64_t>(r));
                        }
                        IclTable table =
                            select_k(draw.A, config.select_k_min, config.select_k_max, opts, restarts);
                        rec.selected_k = table.k_hat;
                    }
                } else if (method == "spectral") {
                    est = spectral_partition(draw.A, config.k, job.seed);
                } else {
                    est = kmeans_rows(draw.A, config.k, job.seed);
                }
                rec.nmi = nmi(est, draw.truth);
            } catch (const std::exception&) {
                rec.failed = true;  // missing-value row; the sweep never aborts
            }
            out.push_back(std::move(rec));
        }
    };

    if (workers == 1 || jobs.size() <= 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t j = next.fetch_add(1);
                    if (j >= jobs.size()) break;
                    run_job(j);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    SweepResult result;
    for (auto& per_job : results) {
        for (auto& rec : per_job) result.records.push_back(std::move(rec));
    }

    // Records file, deterministic grid order.
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw DataError("cannot open '" + out_path.string() + "' for writing");
        out << "lambda_in,lambda_out,p_in,p_out,hub_fraction,hub_factor,n,method,rep,seed,nmi,"
               "selected_k\n";
        for (const auto& r : result.records) {
            out << format_double(r.lambda_in) << ',' << format_double(r.lambda_out) << ','
                << format_double(r.p_in) << ',' << format_double(r.p_out) << ','
                << format_double(config.hub_fraction) << ',' << format_double(config.hub_factor)
                << ',' << config.n << ',' << r.method << ',' << r.rep << ',' << r.seed << ',';
            if (r.failed) {
                out << "NA";
            } else {
                out << format_double(r.nmi);
            }
            out << ',';
            if (r.selected_k) out << *r.selected_k;
            out << '\n';
        }
        if (!out) throw DataError("failed writing '" + out_path.string() + "'");
    }

    // Per-cell summary.
    {
        const auto path = summary_path_for(out_path);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
        out << "lambda_in,lambda_out,p_in,p_out,method,reps_ok,mean_nmi,sd_nmi,mean_selected_k\n";
        for (const Cell& cell : cells) {
            for (const auto& method : config.methods) {
                std::vector<double> nmis;
                std::vector<double> ks;
                for (const auto& r : result.records) {
                    if (r.method != method || r.lambda_in != cell.lambda_in ||
                        r.p_in != cell.p_in || r.p_out != cell.p_out || r.failed) {
                        continue;
                    }
                    nmis.push_back(r.nmi);
                    if (r.selected_k) ks.push_back(static_cast<double>(*r.selected_k));
                }
                double mean = 0.0, sd = 0.0;
                for (double v : nmis) mean += v;
                if (!nmis.empty()) mean /= static_cast<double>(nmis.size());
                if (nmis.size() > 1) {
                    for (double v : nmis) sd += (v - mean) * (v - mean);
                    sd = std::sqrt(sd / (static_cast<double>(nmis.size()) - 1.0));
                }
                std::string line = format_double(cell.lambda_in) + "," +
                                   format_double(config.lambda_out) + "," +
                                   format_double(cell.p_in) + "," + format_double(cell.p_out) +
                                   "," + method + "," + std::to_string(nmis.size()) + "," +
                                   (nmis.empty() ? "NA" : format_double(mean)) + "," +
                                   (nmis.size() > 1 ? format_double(sd) : "NA") + ",";
                if (!ks.empty()) {
                    double km = 0.0;
                    for (double v : ks) km += v;
                    line += format_double(km / static_cast<double>(ks.size()));
                } else {
                    line += "NA";
                }
                out << line << '\n';
                result.summary_lines.push_back(std::move(line));
            }
        }
        if (!out) throw DataError("failed writing '" + path.string() + "'");
    }
    return result;
}

}  // namespace dczip
