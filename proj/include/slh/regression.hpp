#pragma once

#include <cstddef>
#include <span>

namespace slh {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    double rss = 0.0;
    std::size_t n = 0;
};

// Unweighted least squares y = intercept + slope * x.
// Throws DegenerateRange for fewer than 3 points or constant x.
LineFit ols(std::span<const double> x, std::span<const double> y);

} // namespace slh
