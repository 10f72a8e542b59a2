#include "slh/gess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "slh/error.hpp"
#include "slh/regression.hpp"

namespace slh {

namespace {

double denominator(double beta, double n, double q) {
    const double d = n * (1.0 - std::pow(beta, q)) - q * (1.0 - std::pow(beta, n));
    if (q == n || std::fabs(d) < 1e-300)
        throw Error(ErrorCode::DegenerateDenominator, "n(1-beta^q) - q(1-beta^n) vanishes");
    return d;
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double snap(double v) { return std::round(v * 1e12) / 1e12; }

} // namespace

double theoretical_rho(double beta, double n, double p, double q) {
    const double d = denominator(beta, n, q);
    return (n * (1.0 - std::pow(beta, p)) - p * (1.0 - std::pow(beta, n))) / d;
}

double theoretical_delta_rho_next(double beta, double n, double q, double delta_p, double delta_rho_current) {
    const double d = denominator(beta, n, q);
    const double b = std::pow(beta, delta_p);
    return b * delta_rho_current - delta_p * (1.0 - std::pow(beta, n)) * (1.0 - b) / d;
}

double predicted_intercept(double beta, double n, double q, double delta_p) {
    return theoretical_delta_rho_next(beta, n, q, delta_p, 0.0);
}

RhoEstimate estimate_rho(const StructureFunctionTable& table, double n, double p, double q, TauRange range) {
    if (std::fabs(q - n) < 1e-12)
        throw Error(ErrorCode::DegenerateDenominator, "q must differ from n");
    const std::size_t ip = table.p_index(p), iq = table.p_index(q), in = table.p_index(n);

    std::vector<double> x, y, ln_tau;
    for (std::size_t it = 0; it < table.grid.tau.size(); ++it) {
        const std::size_t tau = table.grid.tau[it];
        if (tau < range.lo || tau > range.hi)
            continue;
        ln_tau.push_back(std::log(static_cast<double>(tau)));
        const double xp = table.moments[ip][it], xq = table.moments[iq][it], xn = table.moments[in][it];
        if (!(xp > 0.0) || !(xq > 0.0) || !(xn > 0.0))
            throw Error(ErrorCode::NonpositiveMoment, "zero moment at tau = " + std::to_string(tau));
        const double ln_n = std::log(xn);
        y.push_back(std::log(xp) - p / n * ln_n);
        x.push_back(std::log(xq) - q / n * ln_n);
    }
    if (x.size() < 3)
        throw Error(ErrorCode::DegenerateRange, "fewer than 3 tau values in the fit range");

    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double scale = std::max(1.0, std::max(std::fabs(*lo), std::fabs(*hi)));
    if ((*hi - *lo) / scale < 1e-6)
        throw Error(ErrorCode::MonofractalDegenerate,
                    "normalized structure function X_q/X_n^(q/n) is constant over tau (q = " + fmt(q) +
                        ", n = " + fmt(n) + "); beta -> 1");

    // On sampled data the abscissa of a monofractal series is noise around a constant.
    const auto trend = ols(ln_tau, x);
    if (trend.slope_se > 0.0) {
        const boost::math::students_t dist(static_cast<double>(trend.n - 2));
        const double t_crit = boost::math::quantile(dist, 1.0 - kMonofractalAlpha / 2.0);
        if (std::fabs(trend.slope) < t_crit * trend.slope_se)
            throw Error(ErrorCode::MonofractalDegenerate,
                        "normalized structure function X_q/X_n^(q/n) has no significant trend in tau (slope " +
                            fmt(trend.slope) + " +- " + fmt(trend.slope_se) + ", q = " + fmt(q) + ", n = " + fmt(n) +
                            "); beta -> 1");
    }

    const auto f = ols(x, y);
    return RhoEstimate{n, q, p, f.slope, f.slope_se, f.r2};
}

DeltaRhoSequence build_delta_rho_sequence(const StructureFunctionTable& table, double n, double q, double p_start,
                                          double p_end, double delta_p, TauRange range) {
    if (!(delta_p > 0.0) || !(p_start > 0.0) || p_end < p_start)
        throw Error(ErrorCode::ConfigInvalid, "need 0 < p_start <= p_end and delta_p > 0");
    DeltaRhoSequence seq;
    seq.n = n;
    seq.q = q;
    seq.delta_p = delta_p;
    seq.p_start = p_start;

    const auto steps = static_cast<std::size_t>(std::llround((p_end - p_start) / delta_p));
    if (std::fabs(p_start + static_cast<double>(steps) * delta_p - p_end) > 1e-9)
        throw Error(ErrorCode::GridMismatch, "p_end is not delta_p-aligned with p_start");
    for (std::size_t k = 0; k <= steps + 1; ++k)
        seq.rho.push_back(estimate_rho(table, n, snap(p_start + static_cast<double>(k) * delta_p), q, range));

    std::vector<double> d(seq.rho.size() - 1);
    for (std::size_t k = 0; k + 1 < seq.rho.size(); ++k)
        d[k] = seq.rho[k + 1].rho - seq.rho[k].rho;
    for (std::size_t k = 0; k + 1 < d.size(); ++k)
        seq.pairs.push_back({seq.rho[k].p, d[k], d[k + 1]});
    if (seq.pairs.size() < 3)
        throw Error(ErrorCode::InsufficientPoints,
                    "only " + std::to_string(seq.pairs.size()) + " delta-rho pairs; need at least 3");
    return seq;
}

BetaEstimate estimate_beta(const DeltaRhoSequence& sequence) {
    if (sequence.pairs.size() < 3)
        throw Error(ErrorCode::InsufficientPoints, "need at least 3 delta-rho pairs");
    std::vector<double> x, y;
    for (const auto& pr : sequence.pairs) {
        x.push_back(pr.first);
        y.push_back(pr.second);
    }
    const auto f = ols(x, y);
    if (!(f.slope > 0.0))
        throw Error(ErrorCode::DegenerateSlope,
                    "delta-rho scatter slope " + fmt(f.slope) + " <= 0; no hierarchical structure");

    BetaEstimate b;
    b.slope = f.slope;
    b.slope_se = f.slope_se;
    b.intercept = f.intercept;
    b.r2 = f.r2;
    b.n = sequence.n;
    b.q = sequence.q;
    b.delta_p = sequence.delta_p;
    const double inv = 1.0 / sequence.delta_p;
    b.beta = std::pow(f.slope, inv);
    b.stderr_beta = inv * std::pow(f.slope, inv - 1.0) * f.slope_se;
    b.degenerate = f.slope >= 1.0;
    if (b.degenerate) {
        b.predicted_intercept = std::numeric_limits<double>::quiet_NaN();
        b.intercept_discrepancy = std::numeric_limits<double>::quiet_NaN();
    } else {
        b.predicted_intercept = predicted_intercept(b.beta, b.n, b.q, b.delta_p);
        b.intercept_discrepancy = b.intercept - b.predicted_intercept;
    }
    return b;
}

std::string scatter_csv(const DeltaRhoSequence& sequence) {
    std::string out = "delta_rho,delta_rho_next\n";
    for (const auto& pr : sequence.pairs)
        out += fmt(pr.first) + "," + fmt(pr.second) + "\n";
    return out;
}

nlohmann::json to_json(const DeltaRhoSequence& sequence) {
    nlohmann::json rho = nlohmann::json::array();
    for (const auto& r : sequence.rho)
        rho.push_back({{"p", r.p}, {"rho", r.rho}, {"stderr", r.se}, {"r2", r.r2}});
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& pr : sequence.pairs)
        pairs.push_back({{"p", pr.p}, {"delta_rho", pr.first}, {"delta_rho_next", pr.second}});
    return {{"n", sequence.n},   {"q", sequence.q}, {"delta_p", sequence.delta_p}, {"p_start", sequence.p_start},
            {"rho", rho}, {"pairs", pairs}};
}

nlohmann::json to_json(const BetaEstimate& b) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"beta", b.beta},
            {"stderr_beta", b.stderr_beta},
            {"slope", b.slope},
            {"slope_stderr", b.slope_se},
            {"intercept", b.intercept},
            {"predicted_intercept", num(b.predicted_intercept)},
            {"intercept_discrepancy", num(b.intercept_discrepancy)},
            {"r2", b.r2},
            {"n", b.n},
            {"q", b.q},
            {"delta_p", b.delta_p},
            {"degenerate", b.degenerate}};
}

} // namespace slh
