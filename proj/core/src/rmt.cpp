#include "lincov/rmt.hpp"

#include <cmath>
#include <string>

#include "lincov/errors.hpp"
#include "lincov/special_functions.hpp"
#include "lincov/tracy_widom.hpp"

namespace lincov {

MaConstants ma_constants(long n, long p) {
    if (p < 1 || n <= p) {
        throw InvalidRange("ma_constants: need n > p >= 1, got n = " + std::to_string(n) +
                           ", p = " + std::to_string(p));
    }
    const double a = std::sqrt(static_cast<double>(n) - 0.5);
    const double b = std::sqrt(static_cast<double>(p) - 0.5);
    MaConstants c;
    c.mu = (a - b) * (a - b);
    c.sigma = (a - b) * std::cbrt(1.0 / b - 1.0 / a);
    c.tau = c.sigma / c.mu;
    c.nu = std::log(c.mu) + c.tau * c.tau / 8.0;
    return c;
}

namespace {

double region_argument(long n, long p) {
    const MaConstants c = ma_constants(n - 1, p);
    return (c.nu - std::log(static_cast<double>(n) / 2.0)) / c.tau;
}

}  // namespace

double prob_true_in_region(long n, long p) {
    if (n - 1 <= p) {
        throw InvalidRange("prob_true_in_region: need n - 1 > p, got n = " + std::to_string(n) +
                           ", p = " + std::to_string(p));
    }
    return tracy_widom_cdf(region_argument(n, p));
}

long min_sample_size(long p, double level) {
    if (p < 2) throw InvalidRange("min_sample_size: need p >= 2, got " + std::to_string(p));
    if (!(level > 0.0 && level < 1.0)) {
        throw InvalidRange("min_sample_size: level must lie in (0,1), got " +
                           std::to_string(level));
    }
    const double threshold = tracy_widom_quantile(level);

    // Gallop up from the smallest admissible n, then bisect on the first n
    // whose argument exceeds the threshold.
    long lo = p + 2;  // smallest n with n - 1 > p
    long hi = lo;
    while (region_argument(hi, p) <= threshold) {
        const long next = hi + std::max<long>(1, hi / 8);
        lo = hi + 1;
        hi = next;
    }
    while (lo < hi) {
        const long mid = lo + (hi - lo) / 2;
        if (region_argument(mid, p) > threshold) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // One extra observation beyond the first clearing sample size — the
    // conservative convention used by the classical tables.
    return lo + 1;
}

double gamma_star() { return 6.0 + 4.0 * std::sqrt(2.0); }

int step_limit(double gamma) { return gamma >= gamma_star() ? 1 : 0; }

MleRegionBound mle_region_lower_bound(long n, long p) {
    if (p < 1 || n <= p) {
        throw InvalidRange("mle_region_lower_bound: need n > p >= 1, got n = " +
                           std::to_string(n) + ", p = " + std::to_string(p));
    }
    const double eps = -0.5 * std::log(0.5) - 0.25;
    const double nd = static_cast<double>(n);
    const double pd = static_cast<double>(p);

    // Chebyshev moments of log det(W_{n-1}) - p log n.
    double trigamma_sum = 0.0;
    double digamma_sum = 0.0;
    for (long i = 1; i <= p; ++i) {
        trigamma_sum += trigamma((nd - i) / 2.0);
        digamma_sum += digamma((nd - i) / 2.0);
    }
    const double mean_term = pd * std::log(2.0 / nd) + digamma_sum;

    MleRegionBound out;
    out.epsilon = eps;
    out.exact = 1.0 - 2.0 * (nd - 1.0) * pd / (nd * nd * eps * eps) -
                (trigamma_sum + mean_term * mean_term) / (eps * eps);
    out.asymptotic = 1.0 - 4.0 * pd / (nd * eps * eps);
    return out;
}

double lse_epsilon(long n, long p, double kappa) {
    if (p < 1 || n < 1) {
        throw InvalidRange("lse_epsilon: need n, p >= 1, got n = " + std::to_string(n) +
                           ", p = " + std::to_string(p));
    }
    if (kappa < 1.0) {
        throw InvalidRange("lse_epsilon: condition number kappa must be >= 1, got " +
                           std::to_string(kappa));
    }
    const double nd = static_cast<double>(n);
    const double sp = std::sqrt(static_cast<double>(p));
    return std::sqrt((2.0 + kappa * sp) / (1.0 + kappa * sp)) - std::sqrt((nd - 1.0) / nd) -
           std::sqrt(static_cast<double>(p) / nd);
}

double lse_region_lower_bound(long n, long p, double kappa) {
    const double eps = lse_epsilon(n, p, kappa);
    if (n < 15) {
        throw HypothesisViolated("lse_region_lower_bound: requires n >= 15, got n = " +
                                 std::to_string(n));
    }
    if (eps <= 0.0) {
        throw HypothesisViolated("lse_region_lower_bound: requires eps(n) > 0, got eps = " +
                                 std::to_string(eps) + " at n = " + std::to_string(n) +
                                 ", p = " + std::to_string(p) + ", kappa = " +
                                 std::to_string(kappa));
    }
    return 1.0 - 4.0 * std::exp(-static_cast<double>(n) * eps * eps / 2.0);
}

TraceBounds trace_bounds(long n, long p, double eps) {
    if (n < 1 || p < 1) {
        throw InvalidRange("trace_bounds: need n, p >= 1, got n = " + std::to_string(n) +
                           ", p = " + std::to_string(p));
    }
    if (!(eps > 0.0)) {
        throw InvalidRange("trace_bounds: eps must be > 0, got " + std::to_string(eps));
    }
    const double d = static_cast<double>(n) * static_cast<double>(p);  // tr(W_n) ~ chi^2_d
    TraceBounds out;
    out.chebyshev = 1.0 - 2.0 * d / (eps * eps);
    out.laurent_massart = 1.0 - std::exp(-0.5 * (d + eps - std::sqrt(d * (d + 2.0 * eps)))) -
                          std::exp(-eps * eps / (4.0 * d));
    return out;
}

LogDetMoments logdet_moments(long n, long p) {
    if (p < 1 || n < p) {
        throw InvalidRange("logdet_moments: need n >= p >= 1, got n = " + std::to_string(n) +
                           ", p = " + std::to_string(p));
    }
    LogDetMoments out{0.0, 0.0};
    for (long i = 1; i <= p; ++i) {
        const double arg = (static_cast<double>(n) + 1.0 - i) / 2.0;
        out.mean += digamma(arg);
        out.variance += trigamma(arg);
    }
    out.mean += static_cast<double>(p) * std::log(2.0);
    return out;
}

double logdet_chebyshev_bound(long n, long p, double eps) {
    if (!(eps > 0.0)) {
        throw InvalidRange("logdet_chebyshev_bound: eps must be > 0, got " + std::to_string(eps));
    }
    const LogDetMoments m = logdet_moments(n, p);
    const double mean_term = m.mean - static_cast<double>(p) * std::log(static_cast<double>(n));
    return 1.0 - (m.variance + mean_term * mean_term) / (eps * eps);
}

double subgaussian_prob_approx(long n, long p) {
    if (p < 1 || n <= p) {
        throw InvalidRange("subgaussian_prob_approx: need n > p >= 1, got n = " +
                           std::to_string(n) + ", p = " + std::to_string(p));
    }
    const double sn = std::sqrt(static_cast<double>(n));
    const double sp = std::sqrt(static_cast<double>(p));
    const double centering = static_cast<double>(n) / 2.0 - (sp - sn) * (sp - sn);
    const double scale = (sp - sn) * std::cbrt(1.0 / sp - 1.0 / sn);
    return tracy_widom_cdf(centering / scale);
}

}  // namespace lincov
