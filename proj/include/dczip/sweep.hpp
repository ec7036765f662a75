#pragma once

#include "dczip/inference.hpp"
#include "dczip/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dczip {

// Grid definition for the simulation protocols: networks are sampled on the
// cross product lambda_in x p-grid, each method is run per replication, and
// NMI against the planted partition (plus the selected k when a selection
// block is configured) is recorded.
struct SweepConfig {
    int n = 100;
    int k = 2;
    std::vector<double> pi;
    std::vector<double> lambda_in;         // grid axis
    double lambda_out = 5.0;
    std::vector<double> global_p;          // grid axis; empty -> local p_in/p_out
    double p_in = 0.5;
    double p_out = 0.7;
    double hub_fraction = 0.0;             // fraction of community-1 mu / community-2 nu hubs
    double hub_factor = 1.0;
    int replications = 1;
    std::uint64_t seed_base = 1;
    std::vector<std::string> methods;      // dczip | zip | spectral | kmeans
    FitOptions fit;                        // shared fit options (flags per method override)
    // Optional ICL selection sweep (adds selected_k for dczip/zip methods).
    bool select_enabled = false;
    int select_k_min = 1;
    int select_k_max = 5;
    int select_restarts = 3;

    void validate() const;
    static SweepConfig from_json_file(const std::filesystem::path& path);
};

struct SweepRecord {
    double lambda_in = 0.0;
    double lambda_out = 0.0;
    double p_in = 0.0;   // equal to p_out on the global grid
    double p_out = 0.0;
    std::string method;
    int rep = 0;
    std::uint64_t seed = 0;
    double nmi = 0.0;
    std::optional<int> selected_k;
    bool failed = false;
};

struct SweepResult {
    std::vector<SweepRecord> records;                 // deterministic grid order
    std::vector<std::string> summary_lines;           // per-cell means / sds
};

// Runs all cells (grid point x replication), in parallel up to `workers`, and
// writes the records file to out_path plus "<out_path>.summary.csv". Cell
// failures become missing-value rows; the sweep never aborts. Output bytes are
// deterministic for a fixed config.
SweepResult run_sweep(const SweepConfig& config, const std::filesystem::path& out_path,
                      int workers = 0);

}  // namespace dczip
