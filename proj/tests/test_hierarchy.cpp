#include <doctest.h>

#include <cmath>

#include "slh/hierarchy.hpp"
#include "slh/synth.hpp"
#include "support.hpp"

using namespace slh;
using slh::test::code_of;

namespace {

const std::vector<double> kP{1, 2, 3, 4};
const std::vector<double> kQ{1.2, 1.6, 2.0, 2.4, 2.8};

} // namespace

TEST_CASE("gamma identities") {
    CHECK(gamma(0.5, 2, 1) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(gamma(1e-12, 2, 1) == doctest::Approx(1.0).epsilon(1e-10));
    for (double b : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99})
        for (double p = 0.2; p <= 5.0; p += 0.4)
            for (double q = 0.2; q <= 5.0; q += 0.6) {
                CHECK(gamma(b, q, q) == 1.0);
                CHECK(std::abs(gamma(b, p, q) * gamma(b, q, p) - 1.0) <= 1e-14);
                CHECK(gamma(b, p, q) > 0.0);
            }
}

TEST_CASE("F on exact tables") {
    const auto flat = test::exact_table(0.6, 1.0, 0.0);
    const auto tilted = test::exact_table(0.6, 1.0, 0.1);
    for (double p : kP)
        for (double q : kQ) {
            if (p == q)
                continue;
            CHECK(f_pq(tilted, 0.6, p, q, 64, 64) == 0.0);
            CHECK(f_pq(tilted, 0.6, p, q, 16, 64) == doctest::Approx(-0.2).epsilon(1e-10));
            for (std::size_t tau : {1u, 2u, 4u, 8u, 16u, 32u, 128u, 256u}) {
                CHECK(std::abs(f_pq(flat, 0.6, p, q, tau, 64)) <= 1e-10);
                CHECK(std::abs(f_pq(tilted, 0.6, p, q, tau, 64) + f_pq(tilted, 0.6, p, q, 64, tau)) <= 1e-10);
            }
        }
    CHECK(code_of([&] { f_pq(flat, 0.6, 2, 2, 16, 64); }) == ErrorCode::DegenerateDenominator);
    CHECK(code_of([&] { f_pq(flat, 0.6, 2, 1, 3, 64); }) == ErrorCode::GridMismatch);
}

TEST_CASE("F is independent of p and q on exact tables") {
    const auto t = test::exact_table(0.7, 0.8, 0.05);
    for (std::size_t tau : {2u, 8u, 32u, 128u}) {
        double lo = 1e9, hi = -1e9;
        for (double p : kP)
            for (double q : kQ) {
                if (p == q)
                    continue;
                const double f = f_pq(t, 0.7, p, q, tau, 64);
                lo = std::min(lo, f);
                hi = std::max(hi, f);
            }
        CHECK(hi - lo <= 1e-10);
    }
}

TEST_CASE("flatness_report verdicts") {
    const auto flat = flatness_report(test::exact_table(0.6, 1.0, 0.0), 0.6, kP, kQ, {2, 128}, 64, 0.05);
    CHECK(flat.flat);
    CHECK(flat.max_abs_f <= 1e-10);
    const auto tilted = flatness_report(test::exact_table(0.6, 1.0, 0.1), 0.6, kP, kQ, {4, 256}, 64, 0.05);
    CHECK(!tilted.flat);
    // F = h0 log2(tau/tau0): -0.4 at tau = 4 and 0.2 at tau = 256.
    CHECK(tilted.max_abs_f == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(tilted.taus.front() == 4);
    CHECK(tilted.taus.back() == 256);
    for (const auto& c : tilted.curves) {
        CHECK(c.f.front() == doctest::Approx(-0.4).epsilon(1e-10));
        CHECK(c.f.back() == doctest::Approx(0.2).epsilon(1e-10));
    }
    for (const auto& c : tilted.curves)
        for (std::size_t k = 0; k < tilted.taus.size(); ++k)
            if (tilted.taus[k] == 64)
                CHECK(c.f[k] == 0.0);
    CHECK(code_of([] { flatness_report(test::exact_table(0.6, 1, 0), 0.6, kP, {}, {2, 128}, 64, 0.05); }) ==
          ErrorCode::ConfigInvalid);
    CHECK(code_of([] { flatness_report(test::exact_table(0.6, 1, 0), 0.6, {2.0}, {2.0 + 1e-11}, {2, 128}, 64, 0.05); }) ==
          ErrorCode::AllPairsDegenerate);
    CHECK(code_of([] { flatness_report(test::exact_table(0.6, 1, 0), 0.6, {2.0}, {2.0}, {2, 128}, 64, 0.05); }) ==
          ErrorCode::ConfigInvalid);
    CHECK(code_of([] { flatness_report(test::exact_table(0.6, 1, 0), 1.0, kP, kQ, {2, 128}, 64, 0.05); }) ==
          ErrorCode::BetaOutOfRange);
}

TEST_CASE("estimate_h0") {
    CHECK(estimate_h0(flatness_report(test::exact_table(0.6, 1.0, 0.0), 0.6, kP, kQ, {2, 128}, 64, 0.05)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    const double h = estimate_h0(flatness_report(test::exact_table(0.6, 1.0, 0.1), 0.6, kP, kQ, {2, 128}, 64, 0.05));
    CHECK(std::abs(h - 0.1) <= 1e-10);
    FlatnessReport tiny;
    tiny.taus = {32, 64};
    tiny.curves = {{1, 2, {0.0, 0.0}}};
    CHECK(code_of([&] { estimate_h0(tiny); }) == ErrorCode::DegenerateRange);
}

TEST_CASE("estimate_C on exact exponents") {
    ScalingFit fit;
    for (double p = 0.2; p <= 5.0 + 1e-9; p += 0.2) {
        fit.p.push_back(std::round(p * 1e12) / 1e12);
        fit.xi.push_back(1.5 * (1 - std::pow(0.6, fit.p.back())));
    }
    auto c = estimate_C(fit, 0.6, 0.0);
    CHECK(c.C == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(c.spread <= 1e-12);
    for (std::size_t i = 0; i < fit.p.size(); ++i)
        fit.xi[i] = 0.05 * fit.p[i] + 2 * (1 - std::pow(0.4, fit.p[i]));
    c = estimate_C(fit, 0.4, 0.05);
    CHECK(c.C == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.spread <= 1e-12);
    CHECK(code_of([&] { estimate_C(fit, 1.0, 0.0); }) == ErrorCode::BetaOutOfRange);
}

TEST_CASE("Brownian walk: monofractal verdict and h0 equal to H") {
    const auto walk = test::gaussian_walk(1 << 17, 31);
    AnalysisConfig cfg;
    cfg.workers = 4;
    try {
        const auto e = analyze(walk, cfg);
        CHECK(e.beta.beta >= 0.95);
    } catch (const StageError& err) {
        CHECK(err.stage() == "gess");
        CHECK(err.code() == ErrorCode::MonofractalDegenerate);
    }
    // With xi(p) = p/2 the largest fluctuations scale like every other order: F = 0.5 log2(tau/tau0)
    // whatever beta is used, so h0 recovers H.
    const auto t = build_table(walk, cfg.grid, 4);
    for (double beta : {0.3, 0.6, 0.9}) {
        const auto fr = flatness_report(t, beta, kP, kQ, {2, 128}, 64, 0.05);
        CHECK(std::abs(estimate_h0(fr) - 0.5) <= 0.05);
        CHECK(!fr.flat);
    }
}

TEST_CASE("analyze errors carry the stage") {
    AnalysisConfig cfg;
    try {
        analyze(PriceSeries(std::vector<double>(100, 1.0)), cfg);
        FAIL("expected failure");
    } catch (const StageError& e) {
        CHECK(e.stage() == "structure_table");
        CHECK(e.code() == ErrorCode::GridTooLarge);
    }
    cfg.tau0 = 3;
    cfg.threshold = -1;
    try {
        analyze(PriceSeries(std::vector<double>(100, 1.0)), cfg);
        FAIL("expected failure");
    } catch (const StageError& e) {
        CHECK(e.stage() == "config");
        const std::string msg = e.what();
        CHECK(msg.find("tau0") != std::string::npos);
        CHECK(msg.find("threshold") != std::string::npos);
    }
}

TEST_CASE("pipeline determinism, scale invariance, window consistency") {
    const auto s = generate_cascade({0.6, 1.0, 0.0, 14, 3});
    AnalysisConfig cfg;
    cfg.grid.tau = MomentGrid::pow2_taus(256);
    const auto a = analyze(s.series, cfg);
    cfg.workers = 4;
    const auto b = analyze(s.series, cfg);
    CHECK(to_json(a).dump() == to_json(b).dump());

    std::vector<double> scaled;
    for (double v : s.series.values())
        scaled.push_back(v * 250.0);
    const auto c = analyze(PriceSeries(scaled, s.series.label()), cfg);
    CHECK(std::abs(a.beta.beta - c.beta.beta) <= 1e-8);
    REQUIRE(a.h0);
    REQUIRE(c.h0);
    CHECK(std::abs(*a.h0 - *c.h0) <= 1e-8);
    CHECK(a.C.has_value() == c.C.has_value());
    if (a.C && c.C)
        CHECK(std::abs(*a.C - *c.C) <= 1e-8);

    const auto whole = windowed_analyze(s.series, {{0, s.series.size()}}, cfg);
    REQUIRE(whole.size() == 1);
    REQUIRE(whole[0].estimate);
    auto values = [](nlohmann::json r) {
        r.erase("label");
        r["structure_functions"]["metadata"].erase("source_label");
        return r.dump();
    };
    CHECK(values(to_json(*whole[0].estimate)) == values(to_json(a)));
}

TEST_CASE("windowed_analyze isolates failing windows") {
    const auto s = generate_cascade({0.6, 1.0, 0.0, 13, 8});
    AnalysisConfig cfg;
    const auto r = windowed_analyze(s.series, {{0, 10}, {0, 4096}, {4096, 8192}}, cfg);
    REQUIRE(r.size() == 3);
    CHECK(!r[0].estimate);
    REQUIRE(!r[0].failures.empty());
    CHECK(r[0].failures[0].code == ErrorCode::GridTooLarge);
    CHECK(r[1].estimate);
    CHECK(r[2].estimate);
    const auto eq = equal_windows(10, 3);
    REQUIRE(eq.size() == 3);
    CHECK(eq.front().begin == 0);
    CHECK(eq.back().end == 10);
}

TEST_CASE("flat reports keep h0 within the threshold and C is only emitted when flat") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto s = generate_cascade({0.6, 1.0, 0.0, 14, seed});
        const auto e = analyze(s.series, AnalysisConfig{});
        REQUIRE(e.flatness);
        if (e.flatness->flat) {
            REQUIRE(e.h0);
            CHECK(std::abs(*e.h0) <= e.config.threshold);
            CHECK(e.C);
        } else {
            CHECK(!e.C);
        }
    }
}
