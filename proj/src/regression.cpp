#include "slh/regression.hpp"

#include <algorithm>
#include <cmath>

#include "slh/error.hpp"

namespace slh {

LineFit ols(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size())
        throw Error(ErrorCode::DegenerateRange, "x and y differ in length");
    if (n < 3)
        throw Error(ErrorCode::DegenerateRange, "need at least 3 points, got " + std::to_string(n));

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0))
        throw Error(ErrorCode::DegenerateRange, "abscissa has zero variance");

    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        rss += e * e;
    }
    f.rss = rss;
    f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    f.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
    return f;
}

} // namespace slh
