#pragma once

namespace lincov {

// log Gamma(x), digamma psi(x) = d/dx log Gamma, trigamma psi'(x).
// Domain x > 0 (DomainError otherwise); absolute error < 1e-12 for x >= 1e-3.
double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

}  // namespace lincov
