#include "lincov/special_functions.hpp"

#include <cmath>
#include <string>

#include "lincov/errors.hpp"

namespace lincov {

namespace {

void check_domain(const char* name, double x) {
    if (!(x > 0.0)) {
        throw DomainError(std::string(name) + ": argument must be > 0, got " + std::to_string(x));
    }
}

}  // namespace

double log_gamma(double x) {
    check_domain("log_gamma", x);
    return std::lgamma(x);
}

// psi(x) by upward recurrence psi(x) = psi(x+1) - 1/x until x >= 10, then the
// asymptotic series psi(x) ~ log x - 1/(2x) - sum B_2k / (2k x^{2k}).
double digamma(double x) {
    check_domain("digamma", x);
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli coefficients B_2k/(2k): 1/12, 1/120, 1/252, 1/240, 1/132,
    // 691/32760, 1/12 — truncation error ~ B_16/(16 x^16) < 1e-17 at x = 10.
    const double series = inv2 * (1.0 / 12.0 -
                          inv2 * (1.0 / 120.0 -
                          inv2 * (1.0 / 252.0 -
                          inv2 * (1.0 / 240.0 -
                          inv2 * (1.0 / 132.0 -
                          inv2 * (691.0 / 32760.0 -
                          inv2 * (1.0 / 12.0)))))));
    return acc + std::log(x) - 0.5 * inv - series;
}

// psi'(x) by psi'(x) = psi'(x+1) + 1/x^2 until x >= 10, then
// psi'(x) ~ 1/x + 1/(2x^2) + sum B_2k / x^{2k+1}.
double trigamma(double x) {
    check_domain("trigamma", x);
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Coefficients are the Bernoulli numbers B_2k: 1/6, -1/30, 1/42, -1/30,
    // 5/66, -691/2730, 7/6.
    const double series = inv2 * (1.0 / 6.0 -
                          inv2 * (1.0 / 30.0 -
                          inv2 * (1.0 / 42.0 -
                          inv2 * (1.0 / 30.0 -
                          inv2 * (5.0 / 66.0 -
                          inv2 * (691.0 / 2730.0 -
                          inv2 * (7.0 / 6.0)))))));
    return acc + inv * (1.0 + 0.5 * inv) + inv * series;
}

}  // namespace lincov
