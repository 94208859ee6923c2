#pragma once

namespace lincov {

// Ma's centering constants for the smallest eigenvalue of a white Wishart
// matrix with n degrees of freedom in dimension p:
//   mu    = (sqrt(n-1/2) - sqrt(p-1/2))^2
//   sigma = (sqrt(n-1/2) - sqrt(p-1/2)) * ((p-1/2)^{-1/2} - (n-1/2)^{-1/2})^{1/3}
//   tau   = sigma / mu,  nu = log(mu) + tau^2 / 8
struct MaConstants {
    double mu;
    double sigma;
    double tau;
    double nu;
};

MaConstants ma_constants(long n, long p);

// Tracy-Widom approximation of P(Sigma* in Delta_{2 S_n}) for Gaussian data
// in dimension p with n samples: F1((nu_{n-1,p} - log(n/2)) / tau_{n-1,p}).
// The probability does not depend on Sigma*. Requires n - 1 > p.
double prob_true_in_region(long n, long p);

// Minimal sample size recommendation for P(Sigma* in Delta_{2 S_n}) > level.
// Returns one observation beyond the first n whose region probability
// clears `level` — the conservative convention behind the classical table
// (p = 3 -> 51, 5 -> 77, 10 -> 140, 20 -> 262, 100 -> 1214, 1000 -> 11759
// at the default level). Search is gallop-then-bisect on the Tracy-Widom
// argument, which is increasing in n throughout the search range.
long min_sample_size(long p, double level = 0.95);

// Critical aspect ratio 6 + 4*sqrt(2) ~ 11.657: as n, p -> infinity with
// n/p -> gamma, the region probability tends to 1 if gamma >= gamma_star
// and to 0 otherwise.
double gamma_star();

// The step-function limit above: 1 if gamma >= gamma_star(), else 0.
int step_limit(double gamma);

// Lower bound on P(MLE in Delta_{2 S_n}) from Chebyshev bounds on the
// normalized likelihood at the truth, with the threshold
// epsilon = -log(1/2)/2 - 1/4. `exact` may be negative (vacuous) — callers
// decide how to present it; `asymptotic` = 1 - 4p/(n eps^2) agrees with
// `exact` to O(1/n^2).
struct MleRegionBound {
    double exact;
    double asymptotic;
    double epsilon;
};

MleRegionBound mle_region_lower_bound(long n, long p);

// epsilon(n) = sqrt((2 + kappa sqrt p)/(1 + kappa sqrt p))
//            - sqrt((n-1)/n) - sqrt(p/n)
// for the least-squares region bound below; kappa is the condition number
// of the true covariance matrix.
double lse_epsilon(long n, long p, double kappa);

// Lower bound 1 - 4 exp(-n eps^2 / 2) on P(LSE in Delta_{2 S_n}), valid
// under the hypotheses n >= 15 and eps(n) > 0 (HypothesisViolated names the
// failing one otherwise).
double lse_region_lower_bound(long n, long p, double kappa);

// Lower bounds on P(|tr(W_n) - np| <= eps) via tr(W_n) ~ chi^2_{np}:
// Chebyshev 1 - 2np/eps^2 and the Laurent-Massart exponential pair.
// Either may be negative; returned as-is.
struct TraceBounds {
    double chebyshev;
    double laurent_massart;
};

TraceBounds trace_bounds(long n, long p, double eps);

// Mean and variance of log det(W_n), W_n ~ W_p(n, I):
//   mean = p log 2 + sum_i psi((n+1-i)/2),  variance = sum_i psi1((n+1-i)/2).
struct LogDetMoments {
    double mean;
    double variance;
};

LogDetMoments logdet_moments(long n, long p);

// Chebyshev lower bound on P(|log det W_n - p log n| <= eps) built from the
// moments above (may be negative).
double logdet_chebyshev_bound(long n, long p, double eps);

// Tracy-Widom approximation of the region probability for subgaussian data,
// evaluated exactly as displayed in its source:
//   F1((n/2 - (sqrt p - sqrt n)^2) / ((sqrt p - sqrt n)(1/sqrt p - 1/sqrt n)^{1/3}))
// Note both centering and scale carry the negative factor (sqrt p - sqrt n);
// kept verbatim rather than normalized.
double subgaussian_prob_approx(long n, long p);

}  // namespace lincov
