#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slh/error.hpp"
#include "slh/gess.hpp"
#include "slh/structfn.hpp"

namespace slh {

struct AnalysisConfig {
    MomentGrid grid = MomentGrid::defaults();
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
    unsigned workers = 1; // not part of the serialized record: results do not depend on it

    // Collects every violation; throws ConfigInvalid listing all of them.
    void validate() const;
    nlohmann::json to_json() const;
};

struct FlatnessCurve {
    double p = 0, q = 0;
    std::vector<double> f; // aligned with FlatnessReport::taus
};

struct FlatnessReport {
    std::vector<std::size_t> taus;
    std::size_t tau0 = 64;
    TauRange tau_range;
    std::vector<FlatnessCurve> curves;
    std::vector<std::pair<double, double>> skipped; // (p, q) with vanishing p - q*Gamma
    double max_abs_f = 0;
    double threshold = 0.05;
    bool flat = false;
};

struct StageFailure {
    std::string stage;
    ErrorCode code = ErrorCode::DegenerateRange;
    std::string message;
};

struct HierarchyEstimate {
    std::string label;
    std::size_t length = 0;
    std::int64_t start_index = 0;
    AnalysisConfig config;
    StructureFunctionTable table;
    ScalingFit xi_fit;
    DeltaRhoSequence sequence;
    BetaEstimate beta;
    std::optional<FlatnessReport> flatness;
    std::optional<double> h0;
    std::optional<double> C;
    std::optional<double> C_spread;
    std::vector<std::pair<double, double>> c_per_p;
    std::vector<StageFailure> failures;
    std::vector<std::string> notes;
};

struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct WindowResult {
    Window window;
    std::optional<HierarchyEstimate> estimate;
    std::vector<StageFailure> failures; // the fatal failure when estimate is empty
};

double gamma(double beta, double p, double q);

double f_pq(const StructureFunctionTable& table, double beta, double p, double q, std::size_t tau, std::size_t tau0);

FlatnessReport flatness_report(const StructureFunctionTable& table, double beta, const std::vector<double>& p_set,
                               const std::vector<double>& q_set, TauRange tau_range, std::size_t tau0,
                               double threshold);

double estimate_h0(const FlatnessReport& flatness);

struct CEstimate {
    double C = 0;
    double spread = 0;
    std::vector<std::pair<double, double>> per_p;
};

CEstimate estimate_C(const ScalingFit& xi_fit, double beta, double h0, double p_lo = 1.0, double p_hi = 4.0);

HierarchyEstimate analyze(const PriceSeries& series, const AnalysisConfig& config);

std::vector<WindowResult> windowed_analyze(const PriceSeries& series, const std::vector<Window>& windows,
                                           const AnalysisConfig& config);

std::vector<Window> equal_windows(std::size_t length, std::size_t count);

nlohmann::json to_json(const FlatnessReport& report);
nlohmann::json to_json(const HierarchyEstimate& estimate);
nlohmann::json to_json(const StageFailure& failure);

} // namespace slh
