#include "lincov/rng.hpp"

#include <cmath>

#include "lincov/errors.hpp"

namespace lincov {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Seed mix_seed(Seed seed, std::uint64_t stream) {
    std::uint64_t state = seed;
    std::uint64_t mixed = splitmix64(state);
    state ^= stream * 0xD1342543DE82EF95ULL;
    mixed ^= splitmix64(state);
    return mixed;
}

double Rng::uniform() {
    // 53 random bits shifted into (0, 1].
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
    if (shape < 1.0) {
        // Boost: Gamma(a) = Gamma(a + 1) * U^{1/a}.
        const double boost = std::pow(uniform(), 1.0 / shape);
        return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::chi_square(double dof) {
    if (!(dof > 0.0)) throw DomainError("chi-square degrees of freedom must be positive");
    return 2.0 * gamma(0.5 * dof);
}

}  // namespace lincov
