#include "slh/structfn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

#include "slh/error.hpp"
#include "slh/regression.hpp"

namespace slh {

namespace {

constexpr std::size_t kChunk = 4096;

// Fills out[k] with mean |x|^ps[k]. Each p accumulates chunk partials
// left to right, so the result does not depend on how many ps share a pass.
void chunked_moments(std::span<const double> x, std::span<const double> ps, std::span<double> out) {
    const std::size_t np = ps.size();
    std::vector<double> total(np, 0.0), part(np);
    for (std::size_t c0 = 0; c0 < x.size(); c0 += kChunk) {
        const std::size_t c1 = std::min(x.size(), c0 + kChunk);
        std::fill(part.begin(), part.end(), 0.0);
        for (std::size_t i = c0; i < c1; ++i) {
            const double a = std::fabs(x[i]);
            if (a == 0.0)
                continue;
            const double l = std::log(a);
            for (std::size_t k = 0; k < np; ++k)
                part[k] += std::exp(ps[k] * l);
        }
        for (std::size_t k = 0; k < np; ++k)
            total[k] += part[k];
    }
    for (std::size_t k = 0; k < np; ++k)
        out[k] = total[k] / static_cast<double>(x.size());
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); }

} // namespace

void MomentGrid::validate() const {
    if (p.empty() || tau.empty())
        throw Error(ErrorCode::ConfigInvalid, "moment grid must have at least one p and one tau");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0) || !std::isfinite(p[i]))
            throw Error(ErrorCode::ConfigInvalid, "p values must be positive and finite");
        if (i > 0 && !(p[i] > p[i - 1]))
            throw Error(ErrorCode::ConfigInvalid, "p grid must be strictly increasing");
    }
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] < 1)
            throw Error(ErrorCode::ConfigInvalid, "tau values must be >= 1");
        if (i > 0 && !(tau[i] > tau[i - 1]))
            throw Error(ErrorCode::ConfigInvalid, "tau grid must be strictly increasing");
    }
}

std::vector<double> MomentGrid::p_range(double start, double stop, double step) {
    if (!(step > 0.0) || !(start > 0.0) || stop < start)
        throw Error(ErrorCode::ConfigInvalid, "p range needs 0 < start <= stop and step > 0");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k)
        out.push_back(std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12);
    return out;
}

std::vector<std::size_t> MomentGrid::pow2_taus(std::size_t max_tau) {
    std::vector<std::size_t> out;
    for (std::size_t t = 1; t <= max_tau; t *= 2)
        out.push_back(t);
    return out;
}

MomentGrid MomentGrid::defaults(bool high_frequency) {
    return MomentGrid{p_range(0.2, 5.0, 0.2), pow2_taus(high_frequency ? 1024 : 256)};
}

std::size_t StructureFunctionTable::p_index(double p) const {
    for (std::size_t i = 0; i < grid.p.size(); ++i)
        if (near(grid.p[i], p))
            return i;
    throw Error(ErrorCode::GridMismatch, "p = " + fmt(p) + " is not on the table's p grid");
}

std::size_t StructureFunctionTable::tau_index(std::size_t tau) const {
    for (std::size_t i = 0; i < grid.tau.size(); ++i)
        if (grid.tau[i] == tau)
            return i;
    throw Error(ErrorCode::GridMismatch, "tau = " + std::to_string(tau) + " is not on the table's tau grid");
}

double structure_function(std::span<const double> returns, double p) {
    if (returns.empty())
        throw Error(ErrorCode::EmptySeries, "no returns to average");
    if (!(p > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "moment order must be positive");
    double out;
    chunked_moments(returns, std::span<const double>(&p, 1), std::span<double>(&out, 1));
    return out;
}

double structure_function(const ReturnSeries& returns, double p) { return structure_function(returns.values, p); }

StructureFunctionTable build_table(const PriceSeries& series, const MomentGrid& grid, unsigned workers) {
    grid.validate();
    const std::size_t max_tau = grid.tau.back();
    if (max_tau * 4 > series.size())
        throw Error(ErrorCode::GridTooLarge, "max tau " + std::to_string(max_tau) + " exceeds series length " +
                                                 std::to_string(series.size()) + " / 4");

    StructureFunctionTable t;
    t.grid = grid;
    t.source_label = series.label();
    t.moments.assign(grid.p.size(), std::vector<double>(grid.tau.size(), 0.0));
    t.counts.resize(grid.tau.size());

    std::vector<std::vector<double>> by_tau(grid.tau.size(), std::vector<double>(grid.p.size()));
    auto run = [&](std::size_t it) {
        const auto r = compute_returns(series, grid.tau[it]);
        t.counts[it] = r.values.size();
        chunked_moments(r.values, grid.p, by_tau[it]);
    };

    workers = std::max(1u, workers);
    if (workers == 1) {
        for (std::size_t it = 0; it < grid.tau.size(); ++it)
            run(it);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t it = w; it < grid.tau.size(); it += workers)
                    run(it);
            });
        for (auto& th : pool)
            th.join();
    }

    for (std::size_t ip = 0; ip < grid.p.size(); ++ip)
        for (std::size_t it = 0; it < grid.tau.size(); ++it)
            t.moments[ip][it] = by_tau[it][ip];
    return t;
}

std::vector<std::size_t> taus_in_range(const MomentGrid& grid, TauRange range) {
    std::vector<std::size_t> out;
    for (auto tau : grid.tau)
        if (tau >= range.lo && tau <= range.hi)
            out.push_back(tau);
    return out;
}

ScalingFit fit_xi(const StructureFunctionTable& table, TauRange range) {
    std::vector<std::size_t> idx;
    for (std::size_t it = 0; it < table.grid.tau.size(); ++it)
        if (table.grid.tau[it] >= range.lo && table.grid.tau[it] <= range.hi)
            idx.push_back(it);
    if (idx.size() < 3)
        throw Error(ErrorCode::DegenerateRange, "tau range [" + std::to_string(range.lo) + ", " +
                                                    std::to_string(range.hi) + "] holds fewer than 3 grid points");

    ScalingFit fit;
    fit.p = table.grid.p;
    fit.tau_range = {table.grid.tau[idx.front()], table.grid.tau[idx.back()]};
    std::vector<double> x(idx.size()), y(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
        x[k] = std::log(static_cast<double>(table.grid.tau[idx[k]]));
    for (std::size_t ip = 0; ip < table.grid.p.size(); ++ip) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const double m = table.moments[ip][idx[k]];
            if (!(m > 0.0))
                throw Error(ErrorCode::NonpositiveMoment, "X_p(tau) = 0 at p = " + fmt(table.grid.p[ip]) +
                                                              ", tau = " + std::to_string(table.grid.tau[idx[k]]));
            y[k] = std::log(m);
        }
        const auto lf = ols(x, y);
        fit.xi.push_back(lf.slope);
        fit.se.push_back(lf.slope_se);
        fit.r2.push_back(lf.r2);
    }
    return fit;
}

std::string table_to_csv(const StructureFunctionTable& table) {
    std::string out = "tau";
    for (double p : table.grid.p)
        out += "," + fmt(p);
    out += '\n';
    for (std::size_t it = 0; it < table.grid.tau.size(); ++it) {
        out += std::to_string(table.grid.tau[it]);
        for (std::size_t ip = 0; ip < table.grid.p.size(); ++ip)
            out += "," + fmt(table.moments[ip][it]);
        out += '\n';
    }
    return out;
}

nlohmann::json table_to_json(const StructureFunctionTable& table) {
    nlohmann::json j;
    j["p_grid"] = table.grid.p;
    j["tau_grid"] = table.grid.tau;
    j["moments"] = table.moments;
    j["counts"] = table.counts;
    j["metadata"] = {{"source_label", table.source_label}, {"overlap_mode", "overlapping, stride 1"}};
    return j;
}

StructureFunctionTable table_from_json(const nlohmann::json& doc) {
    StructureFunctionTable t;
    try {
        t.grid.p = doc.at("p_grid").get<std::vector<double>>();
        t.grid.tau = doc.at("tau_grid").get<std::vector<std::size_t>>();
        t.moments = doc.at("moments").get<std::vector<std::vector<double>>>();
        t.counts = doc.at("counts").get<std::vector<std::size_t>>();
        t.source_label = doc.at("metadata").at("source_label").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed table document: ") + e.what());
    }
    t.grid.validate();
    if (t.moments.size() != t.grid.p.size() || t.counts.size() != t.grid.tau.size())
        throw Error(ErrorCode::ConfigInvalid, "table dimensions do not match its grid");
    for (const auto& row : t.moments)
        if (row.size() != t.grid.tau.size())
            throw Error(ErrorCode::ConfigInvalid, "table dimensions do not match its grid");
    return t;
}

nlohmann::json fit_to_json(const ScalingFit& fit) {
    return {{"p", fit.p},
            {"xi", fit.xi},
            {"stderr", fit.se},
            {"r2", fit.r2},
            {"tau_range", {fit.tau_range.lo, fit.tau_range.hi}}};
}

} // namespace slh
