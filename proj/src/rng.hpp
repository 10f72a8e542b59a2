#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace slh::detail {

// mt19937_64 has a fully specified output sequence; the transforms below
// avoid std distributions, whose output is implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; } // [0, 1)

    bool coin() { return (eng_() >> 63) != 0; }

    double sign() { return coin() ? 1.0 : -1.0; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Inverse-CDF Poisson sampler.
class PoissonTable {
public:
    explicit PoissonTable(double lambda) {
        double pmf = std::exp(-lambda), cdf = pmf;
        cdf_.push_back(cdf);
        for (int k = 1; 1.0 - cdf > 1e-17 && k < 1000; ++k) {
            pmf *= lambda / k;
            cdf += pmf;
            cdf_.push_back(cdf);
        }
    }

    int operator()(double u) const {
        int k = 0;
        const int last = static_cast<int>(cdf_.size()) - 1;
        while (k < last && u >= cdf_[static_cast<std::size_t>(k)])
            ++k;
        return k;
    }

    int max_value() const { return static_cast<int>(cdf_.size()) - 1; }

private:
    std::vector<double> cdf_;
};

} // namespace slh::detail
