#include "slh/synth.hpp"

#include <charconv>
#include <cmath>
#include <complex>

#include <fftw3.h>

#include "rng.hpp"
#include "slh/error.hpp"

namespace slh {

namespace {

using detail::PoissonTable;
using detail::Rng;

constexpr int kSubgridLevels = 40;

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Sibling multipliers share one uniform: u and u + 1/2 (mod 1). Each marginal
// is exactly Poisson and at C = 1 exactly one sibling has Y = 0.
struct SiblingDraw {
    int y0, y1;
};

SiblingDraw draw_siblings(Rng& rng, const PoissonTable& pt) {
    const double u = rng.uniform();
    const double v = u < 0.5 ? u + 0.5 : u - 0.5;
    return {pt(u), pt(v)};
}

// True when the first child continues the parent's chain (larger weight wins).
bool first_continues(Rng& rng, const SiblingDraw& d) {
    if (d.y0 != d.y1)
        return d.y0 < d.y1;
    return rng.coin();
}

std::vector<double> powers(double beta, int max_y) {
    std::vector<double> out(static_cast<std::size_t>(max_y) + 1);
    for (int y = 0; y <= max_y; ++y)
        out[static_cast<std::size_t>(y)] = std::pow(beta, y);
    return out;
}

// Linear convolution of x with the causal (1 - B)^(-d) filter, truncated to len(x).
std::vector<double> fractional_integrate(const std::vector<double>& x, double d) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n)
        m *= 2;
    std::vector<double> a(m, 0.0), w(m, 0.0);
    std::copy(x.begin(), x.end(), a.begin());
    w[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k)
        w[k] = w[k - 1] * (static_cast<double>(k) - 1.0 + d) / static_cast<double>(k);

    const std::size_t nc = m / 2 + 1;
    auto* fa = fftw_alloc_complex(nc);
    auto* fw = fftw_alloc_complex(nc);
    fftw_plan pa = fftw_plan_dft_r2c_1d(static_cast<int>(m), a.data(), fa, FFTW_ESTIMATE);
    fftw_plan pw = fftw_plan_dft_r2c_1d(static_cast<int>(m), w.data(), fw, FFTW_ESTIMATE);
    fftw_execute(pa);
    fftw_execute(pw);
    for (std::size_t k = 0; k < nc; ++k) {
        const double re = fa[k][0] * fw[k][0] - fa[k][1] * fw[k][1];
        const double im = fa[k][0] * fw[k][1] + fa[k][1] * fw[k][0];
        fa[k][0] = re / static_cast<double>(m);
        fa[k][1] = im / static_cast<double>(m);
    }
    fftw_plan pb = fftw_plan_dft_c2r_1d(static_cast<int>(m), fa, a.data(), FFTW_ESTIMATE);
    fftw_execute(pb);
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pw);
    fftw_destroy_plan(pb);
    fftw_free(fa);
    fftw_free(fw);
    a.resize(n);
    return a;
}

// Samples sit at t + theta. theta has no short binary expansion, so it never
// meets a box edge and its digits cover the sub-grid like a typical point.
const double kTheta = std::sqrt(2.0) - 1.0;

// Range of sample offsets o in [0, len) whose point o + theta lies in the
// central half [len/4, 3 len/4) of a node of length len.
std::pair<std::size_t, std::size_t> central_half(std::size_t len) {
    const double l = static_cast<double>(len);
    const double lo = std::max(0.0, std::ceil(l / 4.0 - kTheta));
    const double hi = std::ceil(3.0 * l / 4.0 - kTheta);
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// covered[m]: theta lies in the central half of its node m levels below a cell.
std::vector<bool> subgrid_coverage() {
    std::vector<int> bits;
    double x = kTheta;
    for (int k = 0; k < kSubgridLevels + 2; ++k) {
        x *= 2.0;
        bits.push_back(x >= 1.0 ? 1 : 0);
        x -= bits.back();
    }
    std::vector<bool> covered(kSubgridLevels + 1);
    for (int m = 0; m <= kSubgridLevels; ++m)
        covered[static_cast<std::size_t>(m)] = bits[static_cast<std::size_t>(m)] != bits[static_cast<std::size_t>(m) + 1];
    return covered;
}

} // namespace

void CascadeSpec::validate() const {
    std::string errs;
    auto add = [&](const std::string& e) { errs += (errs.empty() ? "" : "; ") + e; };
    if (!(beta > 0.0 && beta < 1.0))
        add("beta must lie in (0, 1), got " + fmt(beta));
    if (!(C > 0.0) || !std::isfinite(C))
        add("C must be positive, got " + fmt(C));
    if (!(h0 >= 0.0 && h0 < 1.0))
        add("h0 must lie in [0, 1), got " + fmt(h0));
    if (levels < 1 || levels > 24)
        add("levels must lie in [1, 24], got " + std::to_string(levels));
    if (!errs.empty())
        throw Error(ErrorCode::SpecInvalid, errs);
}

nlohmann::json CascadeSpec::to_json() const {
    return {{"kind", "cascade"}, {"beta", beta}, {"C", C}, {"h0", h0}, {"levels", levels}, {"seed", seed}};
}

nlohmann::json FbmSpec::to_json() const { return {{"kind", "fbm"}, {"H", H}, {"length", length}, {"seed", seed}}; }

double theoretical_xi(double beta, double C, double h0, double p) { return h0 * p + C * (1.0 - std::pow(beta, p)); }

double SyntheticSeries::theoretical_xi(double p) const {
    if (const auto* c = std::get_if<CascadeSpec>(&spec))
        return slh::theoretical_xi(c->beta, c->C, c->h0, p);
    return std::get<FbmSpec>(spec).H * p;
}

CascadeParams cascade_params(const CascadeSpec& spec) {
    // a^p exp(lambda (beta^p - 1)) = 2^-(h0 p + C (1 - beta^p)) for all p
    return {spec.C * std::log(2.0), std::pow(2.0, -spec.h0)};
}

double log2_multiplier_moment(const CascadeParams& params, double beta, double p) {
    return p * std::log2(params.a) + params.lambda * (std::pow(beta, p) - 1.0) / std::log(2.0);
}

std::vector<double> cascade_weights(const CascadeSpec& spec, int level) {
    spec.validate();
    if (level < 0 || level > spec.levels)
        throw Error(ErrorCode::SpecInvalid, "level must lie in [0, levels]");
    const auto prm = cascade_params(spec);
    const PoissonTable pt(prm.lambda);
    const auto bp = powers(spec.beta, pt.max_value());
    Rng rng(spec.seed);
    std::vector<double> c{1.0};
    for (int j = 0; j < level; ++j) {
        std::vector<double> next(c.size() * 2);
        for (std::size_t k = 0; k < c.size(); ++k) {
            const auto d = draw_siblings(rng, pt);
            next[2 * k] = c[k] * prm.a * bp[static_cast<std::size_t>(d.y0)];
            next[2 * k + 1] = c[k] * prm.a * bp[static_cast<std::size_t>(d.y1)];
        }
        c.swap(next);
    }
    return c;
}

// Each node passes its chain to the child with the larger multiplier; the
// other child starts a new chain. A chain contributes one box of height
// +-(weight of its first node) over the central half of that node, so at
// lag tau the box edges reproduce the cell weights of the matching level.
// Below the grid the tree is continued along each sample's own path.
SyntheticSeries generate_cascade(const CascadeSpec& spec) {
    spec.validate();
    const auto prm = cascade_params(spec);
    const PoissonTable pt(prm.lambda);
    const auto bp = powers(spec.beta, pt.max_value());
    Rng rng(spec.seed);

    const std::size_t n = std::size_t{1} << spec.levels;
    std::vector<double> diff(n + 1, 0.0);
    std::vector<double> c{1.0};
    std::vector<unsigned char> start{1};

    for (int j = 0; j <= spec.levels; ++j) {
        const std::size_t len = n >> j;
        const auto [lo, hi] = central_half(len);
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (!start[k])
                continue;
            const double amp = rng.sign() * c[k];
            diff[k * len + lo] += amp;
            diff[k * len + hi] -= amp;
        }
        if (j == spec.levels)
            break;
        std::vector<double> nc(c.size() * 2);
        std::vector<unsigned char> ns(c.size() * 2);
        for (std::size_t k = 0; k < c.size(); ++k) {
            const auto d = draw_siblings(rng, pt);
            const bool first = first_continues(rng, d);
            nc[2 * k] = c[k] * bp[static_cast<std::size_t>(d.y0)];
            nc[2 * k + 1] = c[k] * bp[static_cast<std::size_t>(d.y1)];
            ns[2 * k] = first ? 0 : 1;
            ns[2 * k + 1] = first ? 1 : 0;
        }
        c.swap(nc);
        start.swap(ns);
    }

    const auto covered = subgrid_coverage();
    std::vector<double> s(n);
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        acc += diff[t];
        double cc = c[t], extra = 0.0;
        for (int m = 1; m <= kSubgridLevels && cc > 1e-12; ++m) {
            const auto d = draw_siblings(rng, pt);
            const bool cont = first_continues(rng, d);
            cc *= bp[static_cast<std::size_t>(d.y0)];
            if (!cont && covered[static_cast<std::size_t>(m)])
                extra += rng.sign() * cc;
        }
        s[t] = acc + extra;
    }

    if (spec.h0 > 0.0) {
        std::vector<double> x(n - 1);
        for (std::size_t t = 0; t + 1 < n; ++t)
            x[t] = s[t + 1] - s[t];
        const auto y = fractional_integrate(x, spec.h0);
        s[0] = 0.0;
        for (std::size_t t = 0; t + 1 < n; ++t)
            s[t + 1] = s[t] + y[t];
    }

    std::string label = "cascade(beta=" + fmt(spec.beta) + ",C=" + fmt(spec.C) + ",h0=" + fmt(spec.h0) +
                        ",levels=" + std::to_string(spec.levels) + ",seed=" + std::to_string(spec.seed) + ")";
    return SyntheticSeries{PriceSeries(std::move(s), std::move(label)), spec};
}

// Davies-Harte circulant embedding of fractional Gaussian noise.
SyntheticSeries generate_fbm(double H, std::size_t length, std::uint64_t seed) {
    if (!(H > 0.0 && H < 1.0))
        throw Error(ErrorCode::InvalidH, "H must lie in (0, 1), got " + fmt(H));
    const bool pow2 = length >= 2 && (length & (length - 1)) == 0;
    if (length < 2 || (!pow2 && H != 0.5))
        throw Error(ErrorCode::LengthUnsupported,
                    "length must be a power of 2 (any length >= 2 when H = 0.5), got " + std::to_string(length));

    Rng rng(seed);
    std::vector<double> inc(length - 1);
    if (!pow2) {
        for (auto& v : inc)
            v = rng.normal();
    } else {
        const std::size_t m = length, big = 2 * m;
        auto gam = [H](double k) {
            const double h2 = 2.0 * H;
            return 0.5 * (std::pow(std::fabs(k + 1.0), h2) - 2.0 * std::pow(std::fabs(k), h2) +
                          std::pow(std::fabs(k - 1.0), h2));
        };
        auto* row = fftw_alloc_complex(big);
        auto* eig = fftw_alloc_complex(big);
        for (std::size_t k = 0; k < big; ++k) {
            const std::size_t lag = k <= m ? k : big - k;
            row[k][0] = gam(static_cast<double>(lag));
            row[k][1] = 0.0;
        }
        fftw_plan pe = fftw_plan_dft_1d(static_cast<int>(big), row, eig, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(pe);
        for (std::size_t k = 0; k < big; ++k) {
            double lam = eig[k][0];
            if (lam < 0.0) {
                if (lam < -1e-8) {
                    fftw_destroy_plan(pe);
                    fftw_free(row);
                    fftw_free(eig);
                    throw Error(ErrorCode::LengthUnsupported, "circulant embedding is not nonnegative definite");
                }
                lam = 0.0;
            }
            const double a = std::sqrt(lam / static_cast<double>(big));
            row[k][0] = a * rng.normal();
            row[k][1] = a * rng.normal();
        }
        fftw_plan pz = fftw_plan_dft_1d(static_cast<int>(big), row, eig, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(pz);
        for (std::size_t k = 0; k + 1 < length; ++k)
            inc[k] = eig[k][0];
        fftw_destroy_plan(pe);
        fftw_destroy_plan(pz);
        fftw_free(row);
        fftw_free(eig);
    }

    std::vector<double> s(length, 0.0);
    for (std::size_t k = 0; k + 1 < length; ++k)
        s[k + 1] = s[k] + inc[k];
    std::string label = "fbm(H=" + fmt(H) + ",length=" + std::to_string(length) + ",seed=" + std::to_string(seed) + ")";
    return SyntheticSeries{PriceSeries(std::move(s), std::move(label)), FbmSpec{H, length, seed}};
}

long double brute_force_moment(std::span<const double> returns, double p) {
    if (returns.empty())
        throw Error(ErrorCode::EmptySeries, "no returns to average");
    if (!(p > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "moment order must be positive");
    long double sum = 0.0L;
    for (double r : returns)
        sum += std::pow(std::fabs(static_cast<long double>(r)), static_cast<long double>(p));
    return sum / static_cast<long double>(returns.size());
}

long double brute_force_moment(const PriceSeries& series, double p, std::size_t tau) {
    if (tau < 1 || tau >= series.size())
        throw Error(ErrorCode::TauOutOfRange, "tau out of range");
    std::vector<double> r;
    for (std::size_t i = 0; i + tau < series.size(); ++i)
        r.push_back(series[i + tau] - series[i]);
    return brute_force_moment(r, p);
}

nlohmann::json sidecar_json(const SyntheticSeries& s, const std::vector<double>& p_grid) {
    nlohmann::json xi = nlohmann::json::array();
    for (double p : p_grid)
        xi.push_back({{"p", p}, {"xi", s.theoretical_xi(p)}});
    nlohmann::json spec = std::visit([](const auto& v) { return v.to_json(); }, s.spec);
    return {{"label", s.series.label()}, {"length", s.series.size()}, {"spec", spec}, {"theoretical_xi", xi}};
}

} // namespace slh
