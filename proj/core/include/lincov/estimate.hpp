#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lincov/model.hpp"
#include "lincov/symmetric_matrix.hpp"

namespace lincov {

// Sample covariance S = (1/n) sum (x_i - xbar)(x_i - xbar)^T together with
// the sample size and mean. Note the 1/n convention (not 1/(n-1)).
struct SampleCovariance {
    SymmetricMatrix S;
    long n;
    Eigen::VectorXd mean;

    SampleCovariance(SymmetricMatrix s, long n_samples, Eigen::VectorXd sample_mean);
    SampleCovariance(SymmetricMatrix s, long n_samples);

    [[nodiscard]] int dim() const { return S.dim(); }
};

struct NewtonOptions {
    int max_iterations = 100;
    double gradient_tol = 1e-8;   // sup-norm stopping threshold
    double step_shrink = 0.5;     // backtracking factor
    double min_step = 1e-12;      // line search gives up below this
    double loglik_tol = 1e-12;    // relative log-likelihood stall threshold
};

struct FitDiagnostics {
    bool sigma_pd = false;
    bool in_delta = false;
    bool hessian_negdef_at_solution = false;
};

struct FitResult {
    ParameterVector v_hat;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> loglik_trace;      // value at init, then per accepted step
    std::vector<ParameterVector> iterates; // matching parameter history
    FitDiagnostics diagnostics;
};

// Gaussian log-likelihood -(n/2) log det Sigma_v - (n/2) tr(S Sigma_v^{-1}),
// additive constant dropped.
double log_likelihood(const LinearCovarianceModel& model, const ParameterVector& v,
                      const SampleCovariance& sample);

// Normalized likelihood sum_i (log l_i - l_i + 1) over the eigenvalues l_i
// of Sigma^{-1/2} S Sigma^{-1/2}; zero exactly at Sigma = S, negative
// elsewhere. Requires both matrices positive definite.
double normalized_loglik(const SymmetricMatrix& sigma, const SampleCovariance& sample);

// Directional derivative of the log-likelihood at Sigma along symmetric A:
//   -(n/2) tr(A Sigma^{-1}) + (n/2) tr(S Sigma^{-1} A Sigma^{-1})
double directional_derivative(const SymmetricMatrix& sigma, const SampleCovariance& sample,
                              const SymmetricMatrix& a);

// Second directional derivative along (A, B):
//   -(n/2) tr((2S - Sigma) Sigma^{-1} B Sigma^{-1} A Sigma^{-1})
double second_directional_derivative(const SymmetricMatrix& sigma, const SampleCovariance& sample,
                                     const SymmetricMatrix& a, const SymmetricMatrix& b);

// Score vector: component i is the directional derivative along G_i.
Eigen::VectorXd gradient(const LinearCovarianceModel& model, const ParameterVector& v,
                         const SampleCovariance& sample);

// Hessian in model coordinates, symmetrized to kill round-off asymmetry.
Eigen::MatrixXd hessian(const LinearCovarianceModel& model, const ParameterVector& v,
                        const SampleCovariance& sample);

// Orthogonal (Frobenius) projection of S onto the model's affine subspace:
// solves gram * v = [tr(S G_j)].
ParameterVector least_squares(const LinearCovarianceModel& model, const SymmetricMatrix& s);
ParameterVector least_squares(const LinearCovarianceModel& model, const SampleCovariance& sample);

// Anderson's unbiased variant (n/(n-1)) * least_squares; requires G0 = 0.
ParameterVector anderson_unbiased(const LinearCovarianceModel& model,
                                  const SampleCovariance& sample);

// Membership in the concavity region Delta_{2S}: Sigma_v and 2S - Sigma_v
// both positive definite (Cholesky tests).
bool in_delta_region(const SymmetricMatrix& sigma, const SymmetricMatrix& s);
bool in_delta_region(const LinearCovarianceModel& model, const ParameterVector& v,
                     const SampleCovariance& sample);

// Maximizes the log-likelihood by damped Newton ascent: the step solves
// H d = -g via Cholesky of -H when -H is positive definite and falls back
// to steepest ascent otherwise; backtracking keeps Sigma_v positive
// definite and the log-likelihood strictly increasing. Convergence is
// declared on gradient sup-norm < gradient_tol or relative log-likelihood
// stall < loglik_tol; hitting max_iterations leaves converged = false with
// the partial result returned.
FitResult newton_raphson_mle(const LinearCovarianceModel& model, const SampleCovariance& sample,
                             const ParameterVector& init, const NewtonOptions& opts = {});

// Starting point guaranteed to lie in Delta_{2S}: shrink the least-squares
// solution toward the anchor Sigma0 until positive definite, then scale
// below 2S. Requires G0 = 0, Sigma0 in the model span and positive
// definite. The two-argument form picks the default anchor diag(S) when the
// model contains all diagonal matrices, else (tr(S)/p) I when the identity
// lies in the span.
ParameterVector safe_init(const LinearCovarianceModel& model, const SampleCovariance& sample,
                          const SymmetricMatrix& sigma0);
ParameterVector safe_init(const LinearCovarianceModel& model, const SampleCovariance& sample);

enum class LossKind { linf, frobenius, quadratic, entropy };

// Estimation losses between an estimate and the truth:
//   linf      max |entry difference|
//   frobenius Frobenius norm of the difference
//   quadratic max |l_i - 1| over eigenvalues l_i of the symmetrized
//             Sigma*^{-1/2} Sigma_hat Sigma*^{-1/2} (the spectral norm of
//             Sigma_hat Sigma*^{-1} - I)
//   entropy   tr(Sigma_hat Sigma*^{-1}) - log det(Sigma_hat Sigma*^{-1}) - p
double loss(LossKind kind, const SymmetricMatrix& sigma_hat, const SymmetricMatrix& sigma_star);

}  // namespace lincov
