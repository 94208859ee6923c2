#pragma once

#include <cstdint>
#include <random>

namespace lincov {

using Seed = std::uint64_t;

// Derives a decorrelated child seed for the given stream index, so that
// replication r of grid cell g can draw from an independent-looking stream
// regardless of how many variates earlier cells consumed.
Seed mix_seed(Seed seed, std::uint64_t stream);

// Deterministic generator wrapping mt19937_64. Gaussians use the Marsaglia
// polar method (pairs cached), gamma variates the Marsaglia-Tsang rejection
// sampler. All draws depend only on the seed and call order.
class Rng {
  public:
    explicit Rng(Seed seed) : gen_(seed) {}

    // Uniform on (0, 1]; never returns 0, so log(u) is always finite.
    double uniform();

    // Standard normal.
    double normal();

    // Gamma(shape, 1) for shape > 0.
    double gamma(double shape);

    // Chi-square with dof degrees of freedom (dof > 0).
    double chi_square(double dof);

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lincov
