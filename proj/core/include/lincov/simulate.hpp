#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "lincov/estimate.hpp"
#include "lincov/model.hpp"
#include "lincov/rng.hpp"
#include "lincov/symmetric_matrix.hpp"

namespace lincov {

// Tabular Monte Carlo results. One row per grid point and quantity;
// serializes to CSV with columns <param_names...>,estimate,stderr,reps,seed.
// Identical (seed, parameters) produce byte-identical CSV output.
struct ExperimentReport {
    std::string experiment;
    std::vector<std::string> param_names;

    struct Row {
        std::vector<std::string> params;
        double estimate = 0.0;
        double std_error = 0.0;
    };

    std::vector<Row> rows;
    long reps = 0;
    Seed seed = 0;

    void write_csv(std::ostream& os) const;
    void write_csv(const std::string& path) const;
};

// n i.i.d. rows from N(mean, sigma), generated as mean + L z with L the
// Cholesky factor of sigma.
Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const SymmetricMatrix& sigma,
                                long n, Seed seed);

// Mean-centered sample covariance with divisor n (not n - 1).
SampleCovariance sample_covariance(const Eigen::MatrixXd& data);

// Wishart draw W_p(n_dof, I) computed definitionally as A A^T with A a
// p x n_dof standard normal matrix.
SymmetricMatrix sample_wishart(long n_dof, int p, Seed seed);

// n rows of z / sqrt(u/d) with z ~ N(0, I_p) and u ~ chi-square(d); d must
// be finite and >= 1 (the Gaussian limit d -> infinity is sampled directly
// with sample_gaussian).
Eigen::MatrixXd sample_multivariate_t(double d, int p, long n, Seed seed);

// Fraction of replications in which a white Wishart W_p(n-1, I) has minimal
// eigenvalue above n/2, next to the Tracy-Widom approximation of the same
// probability (rows "sim_min_eig" / "tw_region_prob").
ExperimentReport experiment_min_eigenvalue(int p, const std::vector<long>& n_grid, long reps,
                                           Seed seed);

// Fraction of replications in which the least-squares estimate lands in the
// concavity region 0 < Sigma < 2S, sampling from Sigma_{v_star}.
ExperimentReport experiment_lse_region(const LinearCovarianceModel& model,
                                       const ParameterVector& v_star,
                                       const std::vector<long>& n_grid, long reps, Seed seed);

// Plain Newton-Raphson on the score equations of the correlation model,
// started at the least-squares estimate and run without any domain guard, so
// iterates are free to leave the positive definite cone. Emits per-step
// likelihood ratios against the data-generating correlation matrix for as
// long as the iterates stay positive definite (replications whose start is
// already outside the cone contribute no path), plus terminal-iterate
// classification frequencies: "freq_mle_not_pd" (terminal point not positive
// definite), "freq_upper_boundary" (positive definite but 2S - Sigma is not),
// "frac_converged" (score settled at a positive definite local maximum) and
// "freq_sandwich_violated" (converged fits whose likelihood falls outside
// [L(Sigma_star), L(S)]).
ExperimentReport experiment_newton_paths(int p, const SymmetricMatrix& sigma_star,
                                         const std::vector<long>& n_grid, long reps, int steps,
                                         Seed seed);

// Mean losses (linf / Frobenius / quadratic / entropy) of the MLE and the
// least-squares estimator over the replications where the least-squares
// estimate is positive definite, plus the frequency of the complement.
ExperimentReport experiment_losses(const LinearCovarianceModel& model,
                                   const std::vector<ParameterVector>& v_star_list,
                                   const std::vector<long>& n_grid, long reps, Seed seed);

// Frequency of 2S - I > 0 under multivariate t data with identity scale for
// each d in d_list; d = infinity selects the Gaussian sampler.
ExperimentReport experiment_t_robustness(int p, const std::vector<double>& d_list,
                                         const std::vector<long>& n_grid, long reps, Seed seed);

}  // namespace lincov
