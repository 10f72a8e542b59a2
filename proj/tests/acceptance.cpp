#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "slh/cli.hpp"
#include "slh/gess.hpp"
#include "slh/regression.hpp"
#include "slh/hierarchy.hpp"
#include "slh/structfn.hpp"
#include "slh/synth.hpp"
#include "support.hpp"

using namespace slh;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

unsigned workers() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

const std::vector<double> kBetas{0.3, 0.5, 0.7, 0.9};
const std::vector<double> kNs{1.6, 1.8, 2.0, 2.2, 2.4};
const std::vector<double> kQs{0.6, 0.8, 1.0, 1.2, 1.4};

Outcome identity_suite() {
    double worst = 0.0;
    int checked = 0;
    const auto ps = MomentGrid::p_range(0.2, 5.0, 0.2);
    for (double b : kBetas)
        for (double n : kNs)
            for (double q : kQs) {
                if (q == n)
                    continue;
                for (double p : ps) {
                    const double dp = 0.2;
                    const double d0 = theoretical_rho(b, n, p + dp, q) - theoretical_rho(b, n, p, q);
                    const double d1 = theoretical_rho(b, n, p + 2 * dp, q) - theoretical_rho(b, n, p + dp, q);
                    worst = std::max(worst, std::abs(theoretical_delta_rho_next(b, n, q, dp, d0) - d1));
                    ++checked;
                }
            }
    return {worst <= 1e-12, std::to_string(checked) + " cases, max residual " + num(worst, 3)};
}

Outcome exact_recovery() {
    struct Case {
        double beta, C, h0;
        bool flat;
    };
    const std::vector<Case> cases{{0.5, 1.0, 0.0, true}, {0.6, 1.5, 0.0, true}, {0.7, 0.8, 0.05, false}};
    const AnalysisConfig cfg;
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto t = test::exact_table(c.beta, c.C, c.h0);
        const auto fit = fit_xi(t, cfg.fit_range);
        const auto seq = build_delta_rho_sequence(t, cfg.n, cfg.q, cfg.p_start, cfg.p_end, cfg.delta_p, cfg.fit_range);
        const auto b = estimate_beta(seq);
        const auto fr = flatness_report(t, b.beta, cfg.flat_p_set, cfg.flat_q_set, cfg.fit_range, cfg.tau0,
                                        cfg.threshold);
        const double h0 = estimate_h0(fr);
        const auto C = estimate_C(fit, b.beta, h0, cfg.c_p_lo, cfg.c_p_hi);
        const double eb = std::abs(b.beta - c.beta), eC = std::abs(C.C - c.C), eh = std::abs(h0 - c.h0);
        const bool this_ok = eb <= 1e-8 && eC <= 1e-8 && eh <= 1e-10 && fr.flat == c.flat;
        ok = ok && this_ok;
        detail += (detail.empty() ? "" : "; ") + std::string("(") + num(c.beta, 2) + "," + num(c.C, 2) + "," +
                  num(c.h0, 2) + ") dbeta " + num(eb, 2) + " dC " + num(eC, 2) + " dh0 " + num(eh, 2) + " flat " +
                  (fr.flat ? "true" : "false");
    }
    return {ok, detail};
}

const SyntheticSeries& criterion3_cascade() {
    static const SyntheticSeries s = generate_cascade({0.6, 1.0, 0.0, 20, 42});
    return s;
}

const HierarchyEstimate& criterion3_estimate() {
    static const HierarchyEstimate e = [] {
        AnalysisConfig cfg;
        cfg.workers = workers();
        return analyze(criterion3_cascade().series, cfg);
    }();
    return e;
}

Outcome cascade_oracle() {
    const auto& e = criterion3_estimate();
    const double beta = e.beta.beta;
    const bool beta_ok = beta >= 0.55 && beta <= 0.65;
    const bool h0_ok = e.h0 && std::abs(*e.h0) <= 0.02;
    const bool flat_ok = e.flatness && e.flatness->flat;
    const bool C_ok = e.C && *e.C >= 0.85 && *e.C <= 1.15;
    std::string d = "beta " + num(beta) + (beta_ok ? " ok" : " OUT") + ", h0 " + (e.h0 ? num(*e.h0, 3) : "n/a") +
                    (h0_ok ? " ok" : " OUT") + ", max|F| " +
                    (e.flatness ? num(e.flatness->max_abs_f, 3) : std::string("n/a")) + (flat_ok ? " flat" : " NOT flat") +
                    ", C " + (e.C ? num(*e.C) : std::string("withheld")) + (C_ok ? " ok" : " OUT");
    return {beta_ok && h0_ok && flat_ok && C_ok, d};
}

Outcome brownian_boundary() {
    const auto walk = generate_fbm(0.5, std::size_t{1} << 18, 7);
    AnalysisConfig cfg;
    cfg.workers = workers();
    const auto t = build_table(walk.series, cfg.grid, cfg.workers);
    const auto fit = fit_xi(t, cfg.fit_range);
    std::vector<double> ps, xs;
    double min_r2 = 1.0;
    for (std::size_t i = 0; i < fit.p.size(); ++i)
        if (fit.p[i] <= 4.0 + 1e-9) {
            ps.push_back(fit.p[i]);
            xs.push_back(fit.xi[i]);
            min_r2 = std::min(min_r2, fit.r2[i]);
        }
    const double slope = ols(ps, xs).slope;
    std::string gess;
    bool gess_ok = false;
    try {
        const auto e = analyze(walk.series, cfg);
        gess = "beta " + num(e.beta.beta);
        gess_ok = e.beta.beta >= 0.95;
    } catch (const StageError& err) {
        gess = err.stage() + ":" + code_name(err.code());
        gess_ok = err.stage() == "gess" && err.code() == ErrorCode::MonofractalDegenerate;
    }
    const bool ok = std::abs(slope - 0.5) <= 0.05 && min_r2 >= 0.99 && gess_ok;
    return {ok, "dxi/dp " + num(slope) + ", min r2 " + num(min_r2, 5) + ", gess " + gess};
}

Outcome nq_insensitivity() {
    const auto& e = criterion3_estimate();
    const AnalysisConfig cfg;
    double lo = 1e9, hi = -1e9;
    for (double n : kNs)
        for (double q : kQs) {
            const auto seq = build_delta_rho_sequence(e.table, n, q, cfg.p_start, cfg.p_end, cfg.delta_p, cfg.fit_range);
            const double b = estimate_beta(seq).beta;
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
    return {hi - lo <= 0.03, "beta in [" + num(lo) + ", " + num(hi) + "], spread " + num(hi - lo, 3)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 eng(20240601);
    std::uniform_real_distribution<double> pu(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (int c = 0; c < 1000; ++c) {
        std::vector<double> s(10000);
        double acc = 0.0;
        const double scale = std::exp(4.0 * nd(eng));
        for (auto& v : s) {
            v = acc;
            acc += scale * nd(eng) * (pu(eng) < 0.05 ? 10.0 : 1.0);
        }
        const PriceSeries series(std::move(s));
        const double p = 5.0 * (1.0 - pu(eng)); // (0, 5]
        const std::size_t tau = 1 + static_cast<std::size_t>(pu(eng) * 2000);
        const double fast = structure_function(compute_returns(series, tau), p);
        const long double slow = brute_force_moment(series, p, tau);
        worst = std::max(worst, static_cast<double>(std::abs((fast - slow) / slow)));
    }
    const auto walk = test::gaussian_walk(1 << 16, 11);
    const auto grid = MomentGrid::defaults();
    const auto t1 = build_table(walk, grid, 1);
    double wdiff = 0.0;
    for (unsigned w : {2u, 8u}) {
        const auto tw = build_table(walk, grid, w);
        for (std::size_t i = 0; i < grid.p.size(); ++i)
            for (std::size_t j = 0; j < grid.tau.size(); ++j)
                wdiff = std::max(wdiff, std::abs(tw.moments[i][j] - t1.moments[i][j]) / t1.moments[i][j]);
    }
    return {worst <= 1e-12 && wdiff <= 1e-12,
            "1000 cases max rel diff " + num(worst, 3) + ", workers 1/2/8 max rel diff " + num(wdiff, 3)};
}

Outcome windowed_protocol() {
    const std::vector<double> betas{0.5, 0.6, 0.7};
    std::vector<double> all;
    for (std::size_t k = 0; k < betas.size(); ++k) {
        const auto s = generate_cascade({betas[k], 1.0, 0.0, 18, 100 + k});
        const double offset = all.empty() ? 0.0 : all.back() - s.series[0];
        for (double v : s.series.values())
            all.push_back(v + offset);
    }
    const auto dir = test::scratch_dir("acceptance_windows");
    atomic_write(dir / "three.csv", to_csv(PriceSeries(all)));
    RunConfig cfg;
    cfg.input = (dir / "three.csv").string();
    cfg.window_count = 3;
    cfg.output_dir = (dir / "out").string();
    const int rc = cmd_windows(cfg, workers());
    if (rc != 0)
        return {false, "cmd_windows exit " + std::to_string(rc)};
    const auto doc = nlohmann::json::parse(test::slurp(dir / "out" / "windows.json"));
    std::vector<double> est;
    for (const auto& w : doc.at("windows"))
        if (w.at("window") != "total")
            est.push_back(w.at("result").is_null() ? NAN : w.at("result").at("beta").at("beta").get<double>());
    bool ok = est.size() == 3;
    std::string d;
    for (std::size_t k = 0; k < est.size(); ++k) {
        ok = ok && std::abs(est[k] - betas[k]) <= 0.05;
        d += (d.empty() ? "" : ", ") + ("beta " + num(betas[k], 2) + " -> " + num(est[k]));
    }
    const bool ordered = est.size() == 3 && est[0] < est[1] && est[1] < est[2];
    return {ok && ordered, d + (ordered ? ", ordered" : ", NOT ordered")};
}

Outcome golden_determinism() {
    const fs::path fixture = fs::path(SLH_TEST_DATA) / "cascade_fixture.csv";
    const auto dir = test::scratch_dir("acceptance_golden");
    std::vector<std::string> reports;
    RunConfig cfg;
    cfg.input = fixture.string();
    cfg.output_dir = (dir / "out").string();
    for (unsigned w : {1u, 1u, 4u}) {
        fs::remove_all(cfg.output_dir);
        if (cmd_analyze(cfg, w) != 0)
            return {false, "cmd_analyze failed"};
        reports.push_back(test::slurp(fs::path(cfg.output_dir) / "report.json"));
    }
    const bool same = reports[0] == reports[1] && reports[0] == reports[2];
    // The golden copy is compared without the input path, which depends on the checkout location.
    auto strip = [](std::string text) {
        auto j = nlohmann::json::parse(text);
        j["input"].erase("path");
        j["config"].erase("input");
        j["config"].erase("output_dir");
        j.erase("config_hash");
        return j.dump(2);
    };
    const auto golden = test::slurp(fs::path(SLH_TEST_DATA) / "golden_report.json");
    const bool matches = !golden.empty() && strip(golden) == strip(reports[0]);
    return {same && matches, std::string("repeat runs ") + (same ? "identical" : "DIFFER") + " (workers 1,1,4), golden " +
                                 (matches ? "matches" : "DIFFERS")};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "rho / delta-rho identity suite", identity_suite},
        {2, "exact-table recovery", exact_recovery},
        {3, "end-to-end cascade oracle", cascade_oracle},
        {4, "monofractal boundary", brownian_boundary},
        {5, "(n,q) insensitivity", nq_insensitivity},
        {6, "oracle equivalence", oracle_equivalence},
        {7, "windowed variation", windowed_protocol},
        {8, "determinism and golden report", golden_determinism},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s (%s) [%.1fs]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
