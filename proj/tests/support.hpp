#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "slh/error.hpp"
#include "slh/ingest.hpp"
#include "slh/structfn.hpp"

namespace slh::test {

// Code of the slh::Error thrown by f, or nothing when f returns normally.
inline std::optional<ErrorCode> code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// X_p(tau) = tau^(h0 p + C (1 - beta^p)) on the given grid.
inline StructureFunctionTable exact_table(double beta, double C, double h0,
                                          const MomentGrid& grid = MomentGrid::defaults()) {
    StructureFunctionTable t;
    t.grid = grid;
    t.source_label = "exact";
    for (double p : grid.p) {
        const double xi = h0 * p + C * (1.0 - std::pow(beta, p));
        std::vector<double> row;
        for (auto tau : grid.tau)
            row.push_back(std::pow(static_cast<double>(tau), xi));
        t.moments.push_back(row);
    }
    for (auto tau : grid.tau)
        t.counts.push_back(100000 - tau);
    return t;
}

// Gaussian random walk drawn with the standard library, independent of the synth module.
inline PriceSeries gaussian_walk(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> s(n);
    double acc = 0.0;
    for (auto& v : s) {
        v = acc;
        acc += scale * nd(eng);
    }
    return PriceSeries(std::move(s), "walk");
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("slh_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace slh::test
