#pragma once

namespace lincov {

// GOE Tracy-Widom distribution function F1, evaluated by monotone cubic
// (Fritsch-Carlson) interpolation of a precomputed knot table on
// x in [-10, 6] (step 0.01), with the classical tail expansions outside:
//   left:   F1(s)   ~ c_L |s|^{-1/16} exp(-|s|^3/24 - |s|^{3/2}/(3 sqrt 2))
//   right:  1-F1(s) ~ c_R s^{-3/4}   exp(-(2/3) s^{3/2})
// The tail constants are calibrated so F1 is continuous at the seams.
double tracy_widom_cdf(double x);

// Reflected variant G(z) = 1 - F1(-z) (law of the smallest-eigenvalue
// fluctuations after Ma's centering).
double tracy_widom_reflected_cdf(double z);

// Inverse of tracy_widom_cdf on (0, 1), by bisection to 1e-12 in x.
double tracy_widom_quantile(double q);

}  // namespace lincov
