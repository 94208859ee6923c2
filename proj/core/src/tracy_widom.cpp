#include "lincov/tracy_widom.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "lincov/errors.hpp"
#include "lincov/tracy_widom_data.hpp"

namespace lincov {

namespace {

struct Interpolant {
    double x0, step;
    int n;
    const double* f;
    std::vector<double> slope;  // Fritsch-Carlson tangents at the knots
    double left_scale;          // calibrates the left tail at the first knot
    double right_scale;         // calibrates the right tail at the last knot

    static double left_tail_shape(double x) {
        const double a = -x;
        return std::pow(a, -1.0 / 16.0) *
               std::exp(-a * a * a / 24.0 - std::pow(a, 1.5) / (3.0 * std::sqrt(2.0)));
    }

    static double right_tail_shape(double x) {
        return std::pow(x, -0.75) * std::exp(-(2.0 / 3.0) * std::pow(x, 1.5));
    }

    Interpolant() {
        x0 = detail::kTwGridX0;
        step = detail::kTwGridStep;
        n = detail::kTwGridSize;
        f = detail::kTwF1;

        // Uniform-grid Fritsch-Carlson: harmonic-mean tangents preserve
        // monotonicity of the knot values.
        slope.resize(n);
        std::vector<double> d(n - 1);
        for (int i = 0; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i]) / step;
        slope[0] = d[0];
        slope[n - 1] = d[n - 2];
        for (int i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                slope[i] = 0.0;
            } else {
                slope[i] = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
            }
        }

        left_scale = f[0] / left_tail_shape(x0);
        const double x_last = x0 + step * (n - 1);
        right_scale = (1.0 - f[n - 1]) / right_tail_shape(x_last);
    }

    [[nodiscard]] double eval(double x) const {
        const double x_last = x0 + step * (n - 1);
        if (x <= x0) {
            const double v = left_scale * left_tail_shape(x);
            return v > 0.0 ? v : 0.0;  // 0 once exp underflows (x < ~ -100)
        }
        if (x >= x_last) {
            const double v = 1.0 - right_scale * right_tail_shape(x);
            return v < 1.0 ? v : 1.0;
        }
        int i = static_cast<int>((x - x0) / step);
        if (i > n - 2) i = n - 2;
        const double t = (x - (x0 + step * i)) / step;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * f[i] + h10 * step * slope[i] + h01 * f[i + 1] + h11 * step * slope[i + 1];
    }
};

const Interpolant& table() {
    static const Interpolant instance;
    return instance;
}

}  // namespace

double tracy_widom_cdf(double x) {
    if (std::isnan(x)) throw DomainError("tracy_widom_cdf: argument is NaN");
    return table().eval(x);
}

double tracy_widom_reflected_cdf(double z) { return 1.0 - tracy_widom_cdf(-z); }

double tracy_widom_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidRange("tracy_widom_quantile: q must lie in (0,1), got " + std::to_string(q));
    }
    // The CDF is strictly increasing, so plain bisection is safe. Start from
    // a bracket wide enough for q down to ~1e-300 on the left.
    double lo = -40.0, hi = 20.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (tracy_widom_cdf(mid) < q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace lincov
