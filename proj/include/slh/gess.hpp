#pragma once

#include <vector>

#include <json.hpp>

#include "slh/structfn.hpp"

namespace slh {

// Two-sided level of the test for a trend of ln[X_q/X_n^(q/n)] in ln tau; no
// significant trend means the series is indistinguishable from a monofractal.
inline constexpr double kMonofractalAlpha = 0.01;

struct RhoEstimate {
    double n = 0, q = 0, p = 0;
    double rho = 0;
    double se = 0;
    double r2 = 0;
};

struct DeltaRhoPair {
    double p = 0;      // Delta rho at p is rho(p + dp) - rho(p)
    double first = 0;  // Delta rho(p)
    double second = 0; // Delta rho(p + dp)
};

struct DeltaRhoSequence {
    double n = 2, q = 1, delta_p = 0.2, p_start = 0.2;
    std::vector<RhoEstimate> rho;
    std::vector<DeltaRhoPair> pairs;
};

struct BetaEstimate {
    double slope = 0;
    double slope_se = 0;
    double intercept = 0;
    double beta = 0;
    double stderr_beta = 0;
    double r2 = 0;
    double n = 2, q = 1, delta_p = 0.2;
    bool degenerate = false;
    double predicted_intercept = 0; // from the fitted beta; NaN when degenerate
    double intercept_discrepancy = 0;
};

double theoretical_rho(double beta, double n, double p, double q);
double theoretical_delta_rho_next(double beta, double n, double q, double delta_p, double delta_rho_current);
double predicted_intercept(double beta, double n, double q, double delta_p);

RhoEstimate estimate_rho(const StructureFunctionTable& table, double n, double p, double q, TauRange range);

// rho is evaluated at p_start, p_start + dp, ..., p_end + dp; one pair per p in [p_start, p_end - dp].
DeltaRhoSequence build_delta_rho_sequence(const StructureFunctionTable& table, double n, double q, double p_start,
                                          double p_end, double delta_p, TauRange range);

BetaEstimate estimate_beta(const DeltaRhoSequence& sequence);

std::string scatter_csv(const DeltaRhoSequence& sequence);
nlohmann::json to_json(const DeltaRhoSequence& sequence);
nlohmann::json to_json(const BetaEstimate& estimate);

} // namespace slh
