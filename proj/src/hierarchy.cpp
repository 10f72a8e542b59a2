#include "slh/hierarchy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "slh/regression.hpp"

namespace slh {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool on_grid(const std::vector<double>& grid, double p) {
    return std::any_of(grid.begin(), grid.end(),
                       [&](double g) { return std::fabs(g - p) <= 1e-9 * std::max(1.0, std::fabs(p)); });
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

HierarchyEstimate run_pipeline(const PriceSeries& series, const AnalysisConfig& cfg, bool tolerant) {
    HierarchyEstimate est;
    est.label = series.label();
    est.length = series.size();
    est.start_index = series.start_index();
    est.config = cfg;

    staged("config", [&] { cfg.validate(); });
    est.table = staged("structure_table", [&] { return build_table(series, cfg.grid, cfg.workers); });
    est.xi_fit = staged("fit_xi", [&] { return fit_xi(est.table, cfg.fit_range); });
    est.sequence = staged("gess", [&] {
        return build_delta_rho_sequence(est.table, cfg.n, cfg.q, cfg.p_start, cfg.p_end, cfg.delta_p,
                                        cfg.fit_range);
    });
    est.beta = staged("gess", [&] { return estimate_beta(est.sequence); });
    if (est.beta.degenerate)
        throw StageError("gess", Error(ErrorCode::MonofractalDegenerate,
                                       "delta-rho slope " + fmt(est.beta.slope) + " >= 1 (beta = " +
                                           fmt(est.beta.beta) + "); beta -> 1, monofractal limit"));

    auto soft = [&](const char* stage, auto&& f) {
        try {
            staged(stage, f);
            return true;
        } catch (const StageError& e) {
            if (!tolerant)
                throw;
            est.failures.push_back({e.stage(), e.code(), e.detail()});
            return false;
        }
    };

    const bool have_flat = soft("flatness", [&] {
        est.flatness = flatness_report(est.table, est.beta.beta, cfg.flat_p_set, cfg.flat_q_set, cfg.fit_range,
                                       cfg.tau0, cfg.threshold);
    });
    if (!have_flat) {
        est.notes.push_back("h0 and C skipped: flatness stage failed");
        return est;
    }
    const bool have_h0 = soft("h0", [&] { est.h0 = estimate_h0(*est.flatness); });
    if (!have_h0) {
        est.notes.push_back("C skipped: h0 stage failed");
        return est;
    }
    if (!est.flatness->flat) {
        est.notes.push_back("C withheld: F is not flat within the threshold, so X-infinity is not tau-independent");
        return est;
    }
    soft("C", [&] {
        const auto c = estimate_C(est.xi_fit, est.beta.beta, *est.h0, cfg.c_p_lo, cfg.c_p_hi);
        est.C = c.C;
        est.C_spread = c.spread;
        est.c_per_p = c.per_p;
    });
    return est;
}

} // namespace

void AnalysisConfig::validate() const {
    std::vector<std::string> errs;
    try {
        grid.validate();
    } catch (const Error& e) {
        errs.push_back(e.detail());
    }
    const auto& pg = grid.p;
    if (fit_range.lo < 1 || fit_range.hi < fit_range.lo)
        errs.push_back("fit tau range must satisfy 1 <= lo <= hi");
    if (taus_in_range(grid, fit_range).size() < 3)
        errs.push_back("fit tau range must hold at least 3 tau grid points");
    if (!(delta_p > 0.0))
        errs.push_back("delta_p must be positive");
    if (!on_grid(pg, n))
        errs.push_back("n = " + fmt(n) + " is not on the p grid");
    if (!on_grid(pg, q))
        errs.push_back("q = " + fmt(q) + " is not on the p grid");
    if (std::fabs(n - q) < 1e-12)
        errs.push_back("q must differ from n");
    if (delta_p > 0.0) {
        if (!(p_start > 0.0) || p_end < p_start + 2.0 * delta_p - 1e-9)
            errs.push_back("need p_start > 0 and p_end >= p_start + 2*delta_p");
        const double steps = (p_end - p_start) / delta_p;
        if (std::fabs(steps - std::round(steps)) > 1e-9)
            errs.push_back("p_end is not delta_p-aligned with p_start");
        else
            for (long k = 0; k <= std::lround(steps) + 1; ++k) {
                const double p = std::round((p_start + static_cast<double>(k) * delta_p) * 1e12) / 1e12;
                if (!on_grid(pg, p)) {
                    errs.push_back("p grid lacks " + fmt(p) + " needed for the delta-rho sequence");
                    break;
                }
            }
    }
    if (flat_p_set.empty() || flat_q_set.empty())
        errs.push_back("flatness p and q sets must be nonempty");
    for (double p : flat_p_set)
        if (!on_grid(pg, p))
            errs.push_back("flatness p = " + fmt(p) + " is not on the p grid");
    for (double v : flat_q_set)
        if (!on_grid(pg, v))
            errs.push_back("flatness q = " + fmt(v) + " is not on the p grid");
    if (std::find(grid.tau.begin(), grid.tau.end(), tau0) == grid.tau.end())
        errs.push_back("tau0 = " + std::to_string(tau0) + " is not on the tau grid");
    if (tau0 < fit_range.lo || tau0 > fit_range.hi)
        errs.push_back("tau0 must lie inside the fit tau range");
    if (!(threshold > 0.0))
        errs.push_back("flatness threshold must be positive");
    if (!(c_p_lo > 0.0) || c_p_hi < c_p_lo)
        errs.push_back("C averaging range must satisfy 0 < lo <= hi");
    if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs)
            msg += (msg.empty() ? "" : "; ") + e;
        throw Error(ErrorCode::ConfigInvalid, msg);
    }
}

nlohmann::json AnalysisConfig::to_json() const {
    return {{"p_grid", grid.p},
            {"tau_grid", grid.tau},
            {"fit_tau_range", {fit_range.lo, fit_range.hi}},
            {"n", n},
            {"q", q},
            {"delta_p", delta_p},
            {"p_start", p_start},
            {"p_end", p_end},
            {"flatness_p_set", flat_p_set},
            {"flatness_q_set", flat_q_set},
            {"tau0", tau0},
            {"flatness_threshold", threshold},
            {"c_p_range", {c_p_lo, c_p_hi}}};
}

double gamma(double beta, double p, double q) { return (1.0 - std::pow(beta, p)) / (1.0 - std::pow(beta, q)); }

double f_pq(const StructureFunctionTable& table, double beta, double p, double q, std::size_t tau,
            std::size_t tau0) {
    const std::size_t ip = table.p_index(p), iq = table.p_index(q);
    const std::size_t it = table.tau_index(tau), i0 = table.tau_index(tau0);
    const double g = gamma(beta, p, q);
    const double den = p - q * g;
    if (std::fabs(den) < 1e-9)
        throw Error(ErrorCode::DegenerateDenominator,
                    "p - q*Gamma(p,q) vanishes at p = " + fmt(p) + ", q = " + fmt(q));
    const double xp = table.moments[ip][it], xp0 = table.moments[ip][i0];
    const double xq = table.moments[iq][it], xq0 = table.moments[iq][i0];
    if (!(xp > 0.0) || !(xp0 > 0.0) || !(xq > 0.0) || !(xq0 > 0.0))
        throw Error(ErrorCode::NonpositiveMoment, "zero moment in F at tau = " + std::to_string(tau));
    if (tau == tau0)
        return 0.0;
    return (std::log2(xp / xp0) - g * std::log2(xq / xq0)) / den;
}

FlatnessReport flatness_report(const StructureFunctionTable& table, double beta, const std::vector<double>& p_set,
                               const std::vector<double>& q_set, TauRange tau_range, std::size_t tau0,
                               double threshold) {
    if (p_set.empty() || q_set.empty())
        throw Error(ErrorCode::ConfigInvalid, "flatness needs nonempty p and q sets");
    if (!(beta > 0.0 && beta < 1.0))
        throw Error(ErrorCode::BetaOutOfRange, "beta = " + fmt(beta) + " outside (0, 1)");
    if (tau0 < tau_range.lo || tau0 > tau_range.hi)
        throw Error(ErrorCode::ConfigInvalid, "tau0 must lie inside the tested tau range");

    FlatnessReport rep;
    rep.tau0 = tau0;
    rep.tau_range = tau_range;
    rep.threshold = threshold;
    rep.taus = taus_in_range(table.grid, tau_range);
    std::size_t pairs = 0;
    for (double p : p_set)
        for (double q : q_set) {
            if (std::fabs(p - q) < 1e-12)
                continue;
            ++pairs;
            FlatnessCurve c{p, q, {}};
            try {
                for (auto tau : rep.taus)
                    c.f.push_back(f_pq(table, beta, p, q, tau, tau0));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateDenominator)
                    throw;
                rep.skipped.emplace_back(p, q);
                continue;
            }
            for (double v : c.f)
                rep.max_abs_f = std::max(rep.max_abs_f, std::fabs(v));
            rep.curves.push_back(std::move(c));
        }
    if (pairs == 0)
        throw Error(ErrorCode::ConfigInvalid, "no (p, q) pair with p != q");
    if (rep.curves.empty())
        throw Error(ErrorCode::AllPairsDegenerate, "every (p, q) pair has a vanishing p - q*Gamma");
    rep.flat = rep.max_abs_f <= threshold;
    return rep;
}

double estimate_h0(const FlatnessReport& flatness) {
    if (flatness.taus.size() < 3 || flatness.curves.empty())
        throw Error(ErrorCode::DegenerateRange, "h0 needs at least 3 tau values");
    std::vector<double> x, y;
    for (std::size_t k = 0; k < flatness.taus.size(); ++k) {
        double s = 0.0;
        for (const auto& c : flatness.curves)
            s += c.f[k];
        x.push_back(std::log2(static_cast<double>(flatness.taus[k])));
        y.push_back(s / static_cast<double>(flatness.curves.size()));
    }
    return ols(x, y).slope;
}

CEstimate estimate_C(const ScalingFit& xi_fit, double beta, double h0, double p_lo, double p_hi) {
    if (!(beta > 0.0 && beta < 1.0))
        throw Error(ErrorCode::BetaOutOfRange, "beta = " + fmt(beta) + " outside (0, 1)");
    CEstimate out;
    for (std::size_t i = 0; i < xi_fit.p.size(); ++i) {
        const double p = xi_fit.p[i];
        if (p < p_lo - 1e-12 || p > p_hi + 1e-12)
            continue;
        out.per_p.emplace_back(p, (xi_fit.xi[i] - h0 * p) / (1.0 - std::pow(beta, p)));
    }
    if (out.per_p.empty())
        throw Error(ErrorCode::InsufficientPoints, "no p in the C averaging range");
    double s = 0.0;
    for (const auto& [p, c] : out.per_p)
        s += c;
    out.C = s / static_cast<double>(out.per_p.size());
    double v = 0.0;
    for (const auto& [p, c] : out.per_p)
        v += (c - out.C) * (c - out.C);
    out.spread = std::sqrt(v / static_cast<double>(out.per_p.size()));
    return out;
}

HierarchyEstimate analyze(const PriceSeries& series, const AnalysisConfig& config) {
    return run_pipeline(series, config, false);
}

std::vector<WindowResult> windowed_analyze(const PriceSeries& series, const std::vector<Window>& windows,
                                           const AnalysisConfig& config) {
    std::vector<WindowResult> out;
    for (const auto& w : windows) {
        WindowResult r;
        r.window = w;
        try {
            const auto sub = series.slice(w.begin, w.end,
                                          series.label() + "[" + std::to_string(w.begin) + ":" +
                                              std::to_string(w.end) + ")");
            r.estimate = run_pipeline(sub, config, true);
        } catch (const StageError& e) {
            r.failures.push_back({e.stage(), e.code(), e.detail()});
        } catch (const Error& e) {
            r.failures.push_back({"window", e.code(), e.detail()});
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Window> equal_windows(std::size_t length, std::size_t count) {
    if (count == 0 || count > length)
        throw Error(ErrorCode::ConfigInvalid, "window count must be in [1, series length]");
    std::vector<Window> out;
    for (std::size_t k = 0; k < count; ++k)
        out.push_back({length * k / count, length * (k + 1) / count});
    return out;
}

nlohmann::json to_json(const FlatnessReport& r) {
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : r.curves)
        curves.push_back({{"p", c.p}, {"q", c.q}, {"F", c.f}});
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& [p, q] : r.skipped)
        skipped.push_back({p, q});
    return {{"tau0", r.tau0},
            {"tau_range", {r.tau_range.lo, r.tau_range.hi}},
            {"taus", r.taus},
            {"max_abs_f", r.max_abs_f},
            {"threshold", r.threshold},
            {"flat", r.flat},
            {"curves", curves},
            {"skipped_pairs", skipped}};
}

nlohmann::json to_json(const StageFailure& f) {
    return {{"stage", f.stage}, {"error", code_name(f.code)}, {"message", f.message}};
}

nlohmann::json to_json(const HierarchyEstimate& e) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : e.failures)
        failures.push_back(to_json(f));
    nlohmann::json cpp = nlohmann::json::array();
    for (const auto& [p, c] : e.c_per_p)
        cpp.push_back({{"p", p}, {"c", c}});
    return {{"label", e.label},
            {"length", e.length},
            {"start_index", e.start_index},
            {"beta", to_json(e.beta)},
            {"h0", opt(e.h0)},
            {"C", opt(e.C)},
            {"C_spread", opt(e.C_spread)},
            {"c_per_p", cpp},
            {"flatness", e.flatness ? to_json(*e.flatness) : nlohmann::json(nullptr)},
            {"xi_fit", fit_to_json(e.xi_fit)},
            {"gess", to_json(e.sequence)},
            {"structure_functions", table_to_json(e.table)},
            {"analysis_config", e.config.to_json()},
            {"failures", failures},
            {"notes", e.notes},
            {"f_formula", "F = {log2[X_p(tau)/X_p(tau0)] - Gamma(p,q) log2[X_q(tau)/X_q(tau0)]} / (p - q Gamma(p,q))"}};
}

} // namespace slh
