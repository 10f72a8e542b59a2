#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slh/ingest.hpp"

namespace slh {

struct TauRange {
    std::size_t lo = 2;
    std::size_t hi = 128;
};

struct MomentGrid {
    std::vector<double> p;
    std::vector<std::size_t> tau;

    void validate() const;

    // start, start + step, ... up to stop inclusive; values rounded to 1e-12.
    static std::vector<double> p_range(double start, double stop, double step);
    static std::vector<std::size_t> pow2_taus(std::size_t max_tau);
    static MomentGrid defaults(bool high_frequency = false);
};

struct StructureFunctionTable {
    MomentGrid grid;
    std::vector<std::vector<double>> moments; // [p index][tau index]
    std::vector<std::size_t> counts;          // per tau
    std::string source_label;

    std::size_t p_index(double p) const;        // GridMismatch if absent
    std::size_t tau_index(std::size_t tau) const; // GridMismatch if absent
    double at(double p, std::size_t tau) const { return moments[p_index(p)][tau_index(tau)]; }
};

struct ScalingFit {
    std::vector<double> p;
    std::vector<double> xi;
    std::vector<double> se;
    std::vector<double> r2;
    TauRange tau_range;
};

// Mean of |r|^p with a fixed chunked summation order.
double structure_function(std::span<const double> returns, double p);
double structure_function(const ReturnSeries& returns, double p);

StructureFunctionTable build_table(const PriceSeries& series, const MomentGrid& grid, unsigned workers = 1);

ScalingFit fit_xi(const StructureFunctionTable& table, TauRange range);

// Grid taus falling inside range, in grid order.
std::vector<std::size_t> taus_in_range(const MomentGrid& grid, TauRange range);

std::string table_to_csv(const StructureFunctionTable& table);
nlohmann::json table_to_json(const StructureFunctionTable& table);
StructureFunctionTable table_from_json(const nlohmann::json& doc);

nlohmann::json fit_to_json(const ScalingFit& fit);

} // namespace slh
