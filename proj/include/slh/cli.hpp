#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slh/hierarchy.hpp"

namespace slh {

inline constexpr const char* kReportSchemaVersion = "1.0";

struct PGridSpec {
    double start = 0.2;
    double stop = 5.0;
    double step = 0.2;
};

struct RunConfig {
    std::string input;
    std::string column = "0";
    bool log_prices = false;
    PGridSpec p_grid;
    std::vector<std::size_t> tau_grid = MomentGrid::pow2_taus(256);
    TauRange fit_range{2, 128};
    double n = 2.0;
    double q = 1.0;
    double delta_p = 0.2;
    double p_start = 0.2;
    double p_end = 4.8;
    std::vector<double> flat_p_set{1.0, 2.0, 3.0, 4.0};
    std::vector<double> flat_q_set{1.2, 1.6, 2.0, 2.4, 2.8};
    std::size_t tau0 = 64;
    double threshold = 0.05;
    double c_p_lo = 1.0;
    double c_p_hi = 4.0;
    std::size_t window_count = 0;    // equal split when > 0
    std::vector<Window> window_ranges; // explicit ranges otherwise
    std::string output_dir = "out";
    std::optional<std::uint64_t> seed;

    AnalysisConfig analysis(unsigned workers = 1) const;
    void validate(bool need_windows = false) const; // ConfigInvalid listing every problem

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& doc);
    std::string canonical() const; // sorted keys, 2-space indent, trailing newline
    static RunConfig load(const std::filesystem::path& path);
};

// Writes to a sibling temp file, then renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);

int exit_code_for(const Error& e);

int cmd_analyze(const RunConfig& config, unsigned workers = 1);
int cmd_windows(const RunConfig& config, unsigned workers = 1);

// Full command line entry point: analyze | windows | synth {cascade,fbm}.
int run_cli(int argc, char** argv);

} // namespace slh
