#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "slh/ingest.hpp"

namespace slh {

struct CascadeSpec {
    double beta = 0.6;
    double C = 1.0;
    double h0 = 0.0;
    int levels = 20;
    std::uint64_t seed = 0;

    void validate() const; // SpecInvalid with every offending field named
    nlohmann::json to_json() const;
};

struct FbmSpec {
    double H = 0.5;
    std::size_t length = 0;
    std::uint64_t seed = 0;
    nlohmann::json to_json() const;
};

// Multiplier W = a * beta^Y with Y ~ Poisson(lambda).
struct CascadeParams {
    double lambda = 0;
    double a = 1;
};

struct SyntheticSeries {
    PriceSeries series;
    std::variant<CascadeSpec, FbmSpec> spec;
    double theoretical_xi(double p) const;
};

double theoretical_xi(double beta, double C, double h0, double p);

CascadeParams cascade_params(const CascadeSpec& spec);

// log2 E[W^p] per level; equals -xi(p) when the parameters are consistent.
double log2_multiplier_moment(const CascadeParams& params, double beta, double p);

SyntheticSeries generate_cascade(const CascadeSpec& spec);

// Cell weights at one tree level, drawn with the generator's sampling scheme.
std::vector<double> cascade_weights(const CascadeSpec& spec, int level);

SyntheticSeries generate_fbm(double H, std::size_t length, std::uint64_t seed);

// Naive reference for structure_function: one loop, long double accumulator.
long double brute_force_moment(std::span<const double> returns, double p);
long double brute_force_moment(const PriceSeries& series, double p, std::size_t tau);

nlohmann::json sidecar_json(const SyntheticSeries& s, const std::vector<double>& p_grid);

} // namespace slh
