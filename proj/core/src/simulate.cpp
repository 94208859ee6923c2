#include "lincov/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "lincov/errors.hpp"
#include "lincov/rmt.hpp"

namespace lincov {

namespace {

std::string fmt_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string fmt_param_vector(const ParameterVector& v) {
    std::string out = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ';';
        out += fmt_short(v(i));
    }
    out += ')';
    return out;
}

double binomial_se(double phat, long reps) {
    return std::sqrt(std::max(phat * (1.0 - phat), 0.0) / static_cast<double>(reps));
}

void check_grid(const std::vector<long>& n_grid) {
    if (n_grid.empty()) throw InvalidRange("sample size grid is empty");
    for (long n : n_grid)
        if (n < 2) throw InvalidRange("grid sample sizes must be >= 2");
}

void check_reps(long reps) {
    if (reps < 1) throw InvalidRange("reps must be >= 1");
}

struct running_mean {
    double sum = 0.0;
    double sum_sq = 0.0;
    long count = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++count;
    }
    [[nodiscard]] double mean() const { return sum / static_cast<double>(count); }
    [[nodiscard]] double std_error() const {
        if (count < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - static_cast<double>(count) * m * m) /
                                             static_cast<double>(count - 1));
        return std::sqrt(var / static_cast<double>(count));
    }
};

}  // namespace

void ExperimentReport::write_csv(std::ostream& os) const {
    for (const auto& name : param_names) os << name << ',';
    os << "estimate,stderr,reps,seed\n";
    for (const auto& row : rows) {
        for (const auto& p : row.params) os << p << ',';
        os << fmt_full(row.estimate) << ',' << fmt_full(row.std_error) << ',' << reps << ','
           << seed << '\n';
    }
}

void ExperimentReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    write_csv(out);
}

Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const SymmetricMatrix& sigma,
                                long n, Seed seed) {
    const int p = sigma.dim();
    if (mean.size() != p) throw DimensionMismatch("mean length does not match sigma");
    if (n < 1) throw InvalidRange("sample size must be >= 1");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma.dense());
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("sigma must be positive definite to sample from");
    const Eigen::MatrixXd l = llt.matrixL();

    Rng rng(seed);
    Eigen::MatrixXd data(n, p);
    Eigen::VectorXd z(p);
    for (long i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z(j) = rng.normal();
        data.row(i) = (mean + l * z).transpose();
    }
    return data;
}

SampleCovariance sample_covariance(const Eigen::MatrixXd& data) {
    const long n = data.rows();
    if (n < 2) throw InsufficientData("sample covariance needs at least two observations");
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    const Eigen::MatrixXd s = (centered.adjoint() * centered) / static_cast<double>(n);
    return {SymmetricMatrix::from_dense(s), n, mean.transpose()};
}

SymmetricMatrix sample_wishart(long n_dof, int p, Seed seed) {
    if (n_dof < 1) throw InvalidRange("Wishart degrees of freedom must be >= 1");
    if (p < 1) throw InvalidDimension("dimension must be >= 1");
    Rng rng(seed);
    Eigen::MatrixXd a(p, n_dof);
    for (int i = 0; i < p; ++i)
        for (long j = 0; j < n_dof; ++j) a(i, j) = rng.normal();
    return SymmetricMatrix::from_dense(a * a.transpose());
}

Eigen::MatrixXd sample_multivariate_t(double d, int p, long n, Seed seed) {
    if (!(d >= 1.0) || std::isinf(d))
        throw InvalidRange("t degrees of freedom must be finite and >= 1");
    if (p < 1) throw InvalidDimension("dimension must be >= 1");
    if (n < 1) throw InvalidRange("sample size must be >= 1");
    Rng rng(seed);
    Eigen::MatrixXd data(n, p);
    for (long i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data(i, j) = rng.normal();
        const double u = rng.chi_square(d);
        data.row(i) /= std::sqrt(u / d);
    }
    return data;
}

ExperimentReport experiment_min_eigenvalue(int p, const std::vector<long>& n_grid, long reps,
                                           Seed seed) {
    if (p < 1) throw InvalidDimension("dimension must be >= 1");
    check_grid(n_grid);
    check_reps(reps);

    ExperimentReport report;
    report.experiment = "mineig";
    report.param_names = {"p", "n", "quantity"};
    report.reps = reps;
    report.seed = seed;

    std::uint64_t cell = 0;
    for (long n : n_grid) {
        long count = 0;
        for (long rep = 0; rep < reps; ++rep) {
            const SymmetricMatrix w =
                sample_wishart(n - 1, p, mix_seed(seed, cell * static_cast<std::uint64_t>(reps) +
                                                            static_cast<std::uint64_t>(rep)));
            if (w.min_eigenvalue() > 0.5 * static_cast<double>(n)) ++count;
        }
        const double est = static_cast<double>(count) / static_cast<double>(reps);
        report.rows.push_back(
            {{fmt_short(p), std::to_string(n), "sim_min_eig"}, est, binomial_se(est, reps)});
        if (n - 1 > p)
            report.rows.push_back({{fmt_short(p), std::to_string(n), "tw_region_prob"},
                                   prob_true_in_region(n, p),
                                   0.0});
        ++cell;
    }
    return report;
}

ExperimentReport experiment_lse_region(const LinearCovarianceModel& model,
                                       const ParameterVector& v_star,
                                       const std::vector<long>& n_grid, long reps, Seed seed) {
    check_grid(n_grid);
    check_reps(reps);
    const SymmetricMatrix sigma_star = model.sigma_of(v_star);
    if (!sigma_star.is_positive_definite())
        throw NotPositiveDefinite("sigma_of(v_star) must be positive definite");
    const int p = model.dim();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);

    ExperimentReport report;
    report.experiment = "lse-region";
    report.param_names = {"p", "n", "quantity"};
    report.reps = reps;
    report.seed = seed;

    std::uint64_t cell = 0;
    for (long n : n_grid) {
        long count = 0;
        for (long rep = 0; rep < reps; ++rep) {
            const Seed s = mix_seed(seed, cell * static_cast<std::uint64_t>(reps) +
                                              static_cast<std::uint64_t>(rep));
            const SampleCovariance sc = sample_covariance(sample_gaussian(zero, sigma_star, n, s));
            const ParameterVector vbar = least_squares(model, sc);
            if (in_delta_region(model, vbar, sc)) ++count;
        }
        const double est = static_cast<double>(count) / static_cast<double>(reps);
        report.rows.push_back(
            {{fmt_short(p), std::to_string(n), "lse_in_delta"}, est, binomial_se(est, reps)});
        if (n - 1 > p)
            report.rows.push_back({{fmt_short(p), std::to_string(n), "tw_region_prob"},
                                   prob_true_in_region(n, p),
                                   0.0});
        ++cell;
    }
    return report;
}

ExperimentReport experiment_newton_paths(int p, const SymmetricMatrix& sigma_star,
                                         const std::vector<long>& n_grid, long reps, int steps,
                                         Seed seed) {
    if (sigma_star.dim() != p)
        throw DimensionMismatch("sigma_star dimension does not match p");
    for (int i = 0; i < p; ++i)
        if (std::abs(sigma_star(i, i) - 1.0) > 1e-12)
            throw InvalidRange("sigma_star must be a correlation matrix (unit diagonal)");
    if (!sigma_star.is_positive_definite())
        throw NotPositiveDefinite("sigma_star must be positive definite");
    if (steps < 1) throw InvalidRange("steps must be >= 1");
    check_grid(n_grid);
    check_reps(reps);

    const LinearCovarianceModel model = correlation_model(p);
    const auto v_star_opt = model.coordinates_of(sigma_star);
    if (!v_star_opt) throw InvalidRange("sigma_star does not lie in the correlation model");
    const ParameterVector v_star = *v_star_opt;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);

    // Individual paths are interesting for figure-sized runs; for large
    // table-sized runs emit the per-step mean instead to keep the CSV sane.
    const bool per_rep_paths = reps <= 200;

    ExperimentReport report;
    report.experiment = "newton-paths";
    report.param_names = {"p", "n", "quantity", "rep", "step"};
    report.reps = reps;
    report.seed = seed;

    const int r = model.size();
    std::vector<Eigen::MatrixXd> gdense;
    gdense.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) gdense.push_back(model.basis(i).dense());

    std::uint64_t cell = 0;
    for (long n : n_grid) {
        long not_pd = 0;        // terminal iterate outside the positive definite cone
        long upper_fail = 0;    // terminal iterate PD but 2S - Sigma not PD
        long converged = 0;     // score settled at a PD local maximum
        long sandwich_bad = 0;  // converged fit violating the likelihood sandwich
        std::vector<running_mean> step_means(static_cast<std::size_t>(steps) + 1);

        for (long rep = 0; rep < reps; ++rep) {
            const Seed s = mix_seed(seed, cell * static_cast<std::uint64_t>(reps) +
                                              static_cast<std::uint64_t>(rep));
            const SampleCovariance sc = sample_covariance(sample_gaussian(zero, sigma_star, n, s));
            const ParameterVector vbar = least_squares(model, sc);
            const double ll_star = log_likelihood(model, v_star, sc);
            const Eigen::MatrixXd s_dense = sc.S.dense();
            const double half_n = 0.5 * static_cast<double>(n);

            // Score and curvature of the log-likelihood at w. These only
            // need Sigma_w to be invertible, not positive definite; a
            // numerically singular iterate returns false and ends the walk.
            Eigen::VectorXd g(r);
            Eigen::MatrixXd h(r, r);
            std::vector<Eigen::MatrixXd> a(static_cast<std::size_t>(r));
            const auto score_at = [&](const ParameterVector& w) -> bool {
                const Eigen::FullPivLU<Eigen::MatrixXd> lu(model.sigma_of(w).dense());
                if (!lu.isInvertible()) return false;
                const Eigen::MatrixXd inv = lu.inverse();
                if (!inv.allFinite()) return false;
                const Eigen::MatrixXd k = inv * s_dense;
                const Eigen::MatrixXd m = inv - k * inv;
                for (int i = 0; i < r; ++i) {
                    a[static_cast<std::size_t>(i)] = inv * gdense[static_cast<std::size_t>(i)];
                    g(i) = -half_n * (m * gdense[static_cast<std::size_t>(i)]).trace();
                }
                for (int i = 0; i < r; ++i)
                    for (int j = i; j < r; ++j) {
                        const Eigen::MatrixXd aij = a[static_cast<std::size_t>(i)] *
                                                    a[static_cast<std::size_t>(j)];
                        const Eigen::MatrixXd aji = a[static_cast<std::size_t>(j)] *
                                                    a[static_cast<std::size_t>(i)];
                        h(i, j) = h(j, i) =
                            half_n * (aij.trace() - (aij * k).trace() - (aji * k).trace());
                    }
                return true;
            };

            // Full Newton steps v <- v - H^{-1} g, no step-size control and
            // no domain guard: where the terminal iterate lands is the
            // quantity under study. Likelihood ratios are recorded while the
            // iterates stay positive definite.
            ParameterVector v = vbar;
            std::vector<double> trace;
            bool recording = model.sigma_of(v).is_positive_definite();
            if (recording) trace.push_back(std::exp(log_likelihood(model, v, sc) - ll_star));
            bool settled = false;
            for (int it = 0; it < steps; ++it) {
                if (!score_at(v)) break;
                if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
                    settled = true;
                    break;
                }
                const Eigen::VectorXd d = h.fullPivLu().solve(g);
                if (!d.allFinite()) break;
                v -= d;
                if (recording) {
                    if (model.sigma_of(v).is_positive_definite())
                        trace.push_back(std::exp(log_likelihood(model, v, sc) - ll_star));
                    else
                        recording = false;
                }
            }

            const SymmetricMatrix sig_hat = model.sigma_of(v);
            const bool pd_hat = sig_hat.is_positive_definite();
            if (!pd_hat) {
                ++not_pd;
            } else {
                SymmetricMatrix upper = sc.S;
                upper *= 2.0;
                upper -= sig_hat;
                if (!upper.is_positive_definite()) ++upper_fail;
            }

            // "Converged" means a positive definite critical point with
            // negative definite curvature — a genuine local maximum. A
            // settled score with an indefinite Hessian is a saddle, not a
            // maximum, and is left unconverged.
            if (settled && pd_hat && score_at(v)) {
                const Eigen::LLT<Eigen::MatrixXd> neg_h_llt(Eigen::MatrixXd(-h));
                if (neg_h_llt.info() == Eigen::Success) {
                    ++converged;
                    // 1 <= L(hat)/L(star) <= L(S)/L(star), with 1e-9 slack.
                    const double ll_hat = log_likelihood(model, v, sc);
                    Eigen::LLT<Eigen::MatrixXd> s_llt(s_dense);
                    if (s_llt.info() == Eigen::Success) {
                        double logdet_s = 0.0;
                        for (int i = 0; i < p; ++i) logdet_s += std::log(s_llt.matrixLLT()(i, i));
                        logdet_s *= 2.0;
                        const double ll_s = -half_n * (logdet_s + static_cast<double>(p));
                        if (ll_hat - ll_star < -1e-9 || ll_hat - ll_s > 1e-9) ++sandwich_bad;
                    }
                }
            }

            // Paths end where the iterates leave the cone; fits that settle
            // early hold their final value for the remaining steps.
            const std::size_t len = trace.size();
            if (len == 0) continue;
            const std::size_t want =
                settled && recording ? static_cast<std::size_t>(steps) + 1 : len;
            for (std::size_t k = 0; k < want; ++k) {
                const double ratio = trace[std::min(k, len - 1)];
                if (per_rep_paths)
                    report.rows.push_back({{fmt_short(p), std::to_string(n), "likelihood_ratio",
                                            std::to_string(rep), std::to_string(k)},
                                           ratio,
                                           0.0});
                step_means[k].add(ratio);
            }
        }

        if (!per_rep_paths) {
            for (int k = 0; k <= steps; ++k) {
                const auto& acc = step_means[static_cast<std::size_t>(k)];
                if (acc.count > 0)
                    report.rows.push_back({{fmt_short(p), std::to_string(n),
                                            "mean_likelihood_ratio", "", std::to_string(k)},
                                           acc.mean(),
                                           acc.std_error()});
            }
        }

        const auto freq_row = [&](const char* name, long numer, long denom) {
            const double est =
                denom > 0 ? static_cast<double>(numer) / static_cast<double>(denom) : 0.0;
            report.rows.push_back({{fmt_short(p), std::to_string(n), name, "", ""},
                                   est,
                                   denom > 0 ? binomial_se(est, denom) : 0.0});
        };
        freq_row("freq_mle_not_pd", not_pd, reps);
        freq_row("freq_upper_boundary", upper_fail, reps);
        freq_row("frac_converged", converged, reps);
        freq_row("freq_sandwich_violated", sandwich_bad, converged);
        ++cell;
    }
    return report;
}

ExperimentReport experiment_losses(const LinearCovarianceModel& model,
                                   const std::vector<ParameterVector>& v_star_list,
                                   const std::vector<long>& n_grid, long reps, Seed seed) {
    if (v_star_list.empty()) throw InvalidRange("v_star_list is empty");
    check_grid(n_grid);
    check_reps(reps);
    for (const auto& v : v_star_list)
        if (!model.sigma_of(v).is_positive_definite())
            throw NotPositiveDefinite("every sigma_of(v_star) must be positive definite");

    const int p = model.dim();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
    constexpr LossKind kinds[] = {LossKind::linf, LossKind::frobenius, LossKind::quadratic,
                                  LossKind::entropy};
    constexpr const char* kind_names[] = {"linf", "frobenius", "quadratic", "entropy"};

    ExperimentReport report;
    report.experiment = "losses";
    report.param_names = {"p", "n", "vstar", "quantity"};
    report.reps = reps;
    report.seed = seed;

    std::uint64_t cell = 0;
    for (const auto& v_star : v_star_list) {
        const SymmetricMatrix sigma_star = model.sigma_of(v_star);
        const std::string label = fmt_param_vector(v_star);
        for (long n : n_grid) {
            running_mean mle_acc[4], lse_acc[4];
            long lse_fail = 0;
            for (long rep = 0; rep < reps; ++rep) {
                const Seed s = mix_seed(seed, cell * static_cast<std::uint64_t>(reps) +
                                                  static_cast<std::uint64_t>(rep));
                const SampleCovariance sc =
                    sample_covariance(sample_gaussian(zero, sigma_star, n, s));
                const ParameterVector vbar = least_squares(model, sc);
                const SymmetricMatrix sigma_bar = model.sigma_of(vbar);
                if (!sigma_bar.is_positive_definite()) {
                    ++lse_fail;
                    continue;
                }
                const FitResult fit = newton_raphson_mle(model, sc, vbar);
                const SymmetricMatrix sigma_hat = model.sigma_of(fit.v_hat);
                for (int k = 0; k < 4; ++k) {
                    mle_acc[k].add(loss(kinds[k], sigma_hat, sigma_star));
                    lse_acc[k].add(loss(kinds[k], sigma_bar, sigma_star));
                }
            }
            for (int k = 0; k < 4; ++k) {
                if (mle_acc[k].count > 0) {
                    report.rows.push_back({{fmt_short(p), std::to_string(n), label,
                                            std::string("mle_") + kind_names[k]},
                                           mle_acc[k].mean(),
                                           mle_acc[k].std_error()});
                    report.rows.push_back({{fmt_short(p), std::to_string(n), label,
                                            std::string("lse_") + kind_names[k]},
                                           lse_acc[k].mean(),
                                           lse_acc[k].std_error()});
                }
            }
            const double fail_est = static_cast<double>(lse_fail) / static_cast<double>(reps);
            report.rows.push_back({{fmt_short(p), std::to_string(n), label, "freq_lse_not_pd"},
                                   fail_est,
                                   binomial_se(fail_est, reps)});
            ++cell;
        }
    }
    return report;
}

ExperimentReport experiment_t_robustness(int p, const std::vector<double>& d_list,
                                         const std::vector<long>& n_grid, long reps, Seed seed) {
    if (p < 1) throw InvalidDimension("dimension must be >= 1");
    if (d_list.empty()) throw InvalidRange("d_list is empty");
    for (double d : d_list)
        if (!(d >= 1.0)) throw InvalidRange("every d must be >= 1");
    check_grid(n_grid);
    check_reps(reps);

    const SymmetricMatrix identity = SymmetricMatrix::identity(p);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);

    ExperimentReport report;
    report.experiment = "t-robustness";
    report.param_names = {"p", "n", "d", "quantity"};
    report.reps = reps;
    report.seed = seed;

    std::uint64_t cell = 0;
    for (double d : d_list) {
        const std::string d_label = std::isinf(d) ? "inf" : fmt_short(d);
        for (long n : n_grid) {
            long count = 0;
            for (long rep = 0; rep < reps; ++rep) {
                const Seed s = mix_seed(seed, cell * static_cast<std::uint64_t>(reps) +
                                                  static_cast<std::uint64_t>(rep));
                const Eigen::MatrixXd data = std::isinf(d)
                                                 ? sample_gaussian(zero, identity, n, s)
                                                 : sample_multivariate_t(d, p, n, s);
                const SampleCovariance sc = sample_covariance(data);
                SymmetricMatrix upper = sc.S;
                upper *= 2.0;
                upper -= identity;
                if (upper.is_positive_definite()) ++count;
            }
            const double est = static_cast<double>(count) / static_cast<double>(reps);
            report.rows.push_back({{fmt_short(p), std::to_string(n), d_label, "freq_upper_region"},
                                   est,
                                   binomial_se(est, reps)});
            ++cell;
        }
    }
    return report;
}

}  // namespace lincov
