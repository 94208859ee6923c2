#include "lincov/estimate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <optional>

#include "lincov/errors.hpp"

namespace lincov {

namespace {

double trace_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.cwiseProduct(b).sum();
}

// Shared per-iterate quantities: P = Sigma^{-1}, M = P S P, and the
// log-likelihood. Everything downstream (value, score, Hessian) reads
// these instead of refactorizing.
struct likelihood_state {
    bool pd = false;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd p_mat;
    Eigen::MatrixXd m_mat;
    double loglik = 0.0;
};

likelihood_state make_state(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s_dense,
                            long n) {
    likelihood_state st;
    st.sigma = sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) return st;
    st.pd = true;
    const auto p = sigma.rows();
    st.p_mat = llt.solve(Eigen::MatrixXd::Identity(p, p));
    st.m_mat = st.p_mat * s_dense * st.p_mat;
    double logdet = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < p; ++i) logdet += std::log(l(i, i));
    logdet *= 2.0;
    const double trace_sp = trace_inner(s_dense, st.p_mat);
    st.loglik = -0.5 * static_cast<double>(n) * (logdet + trace_sp);
    return st;
}

Eigen::VectorXd gradient_from_state(const likelihood_state& st,
                                    const std::vector<Eigen::MatrixXd>& basis, long n) {
    const int r = static_cast<int>(basis.size());
    Eigen::VectorXd g(r);
    const Eigen::MatrixXd diff = st.m_mat - st.p_mat;
    for (int i = 0; i < r; ++i) g(i) = 0.5 * static_cast<double>(n) * trace_inner(basis[i], diff);
    return g;
}

Eigen::MatrixXd hessian_from_state(const likelihood_state& st,
                                   const std::vector<Eigen::MatrixXd>& basis, long n) {
    const int r = static_cast<int>(basis.size());
    Eigen::MatrixXd h(r, r);
    const Eigen::MatrixXd t_mat = 2.0 * st.m_mat - st.p_mat;
    for (int j = 0; j < r; ++j) {
        // H_ij = -(n/2) tr(G_i T G_j P); build T G_j P once per column.
        const Eigen::MatrixXd k = t_mat * basis[j] * st.p_mat;
        for (int i = 0; i < r; ++i)
            h(i, j) = -0.5 * static_cast<double>(n) * trace_inner(basis[i], k.transpose());
    }
    return 0.5 * (h + h.transpose());
}

std::vector<Eigen::MatrixXd> dense_basis(const LinearCovarianceModel& model) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(model.basis().size());
    for (const auto& g : model.basis()) out.push_back(g.dense());
    return out;
}

void check_param_dim(const LinearCovarianceModel& model, const ParameterVector& v) {
    if (v.size() != model.size())
        throw DimensionMismatch("parameter vector length does not match the model");
}

void check_sample_dim(const LinearCovarianceModel& model, const SampleCovariance& sample) {
    if (sample.dim() != model.dim())
        throw DimensionMismatch("sample covariance dimension does not match the model");
}

}  // namespace

SampleCovariance::SampleCovariance(SymmetricMatrix s, long n_samples, Eigen::VectorXd sample_mean)
    : S(std::move(s)), n(n_samples), mean(std::move(sample_mean)) {
    if (n < 2) throw InsufficientData("sample covariance needs n >= 2");
    if (mean.size() != S.dim())
        throw DimensionMismatch("sample mean length does not match the covariance");
    const Eigen::VectorXd eig = S.eigenvalues();
    const double scale = std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
    if (eig(0) < -1e-10 * std::max(scale, 1.0))
        throw NotPositiveDefinite("sample covariance is not positive semidefinite");
}

SampleCovariance::SampleCovariance(SymmetricMatrix s, long n_samples)
    : SampleCovariance(std::move(s), n_samples, Eigen::VectorXd::Zero(s.dim())) {}

double log_likelihood(const LinearCovarianceModel& model, const ParameterVector& v,
                      const SampleCovariance& sample) {
    check_param_dim(model, v);
    check_sample_dim(model, sample);
    const auto st = make_state(model.sigma_of(v).dense(), sample.S.dense(), sample.n);
    if (!st.pd) throw NotPositiveDefinite("sigma_of(v) is not positive definite");
    return st.loglik;
}

double normalized_loglik(const SymmetricMatrix& sigma, const SampleCovariance& sample) {
    if (sigma.dim() != sample.dim())
        throw DimensionMismatch("sigma dimension does not match the sample");
    if (!sigma.is_positive_definite())
        throw NotPositiveDefinite("sigma is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        sample.S.dense(), sigma.dense(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = solver.eigenvalues();
    if (lam(0) <= 0.0)
        throw NotPositiveDefinite("normalized log-likelihood needs a positive definite sample");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) acc += std::log(lam(i)) - lam(i) + 1.0;
    return acc;
}

double directional_derivative(const SymmetricMatrix& sigma, const SampleCovariance& sample,
                              const SymmetricMatrix& a) {
    if (sigma.dim() != sample.dim() || a.dim() != sigma.dim())
        throw DimensionMismatch("directional derivative arguments disagree in dimension");
    const auto st = make_state(sigma.dense(), sample.S.dense(), sample.n);
    if (!st.pd) throw NotPositiveDefinite("sigma is not positive definite");
    return 0.5 * static_cast<double>(sample.n) * trace_inner(a.dense(), st.m_mat - st.p_mat);
}

double second_directional_derivative(const SymmetricMatrix& sigma, const SampleCovariance& sample,
                                     const SymmetricMatrix& a, const SymmetricMatrix& b) {
    if (sigma.dim() != sample.dim() || a.dim() != sigma.dim() || b.dim() != sigma.dim())
        throw DimensionMismatch("second directional derivative arguments disagree in dimension");
    const auto st = make_state(sigma.dense(), sample.S.dense(), sample.n);
    if (!st.pd) throw NotPositiveDefinite("sigma is not positive definite");
    const Eigen::MatrixXd t_mat = 2.0 * st.m_mat - st.p_mat;
    const Eigen::MatrixXd x = t_mat * b.dense() * st.p_mat;
    return -0.5 * static_cast<double>(sample.n) * trace_inner(x, a.dense());
}

Eigen::VectorXd gradient(const LinearCovarianceModel& model, const ParameterVector& v,
                         const SampleCovariance& sample) {
    check_param_dim(model, v);
    check_sample_dim(model, sample);
    const auto st = make_state(model.sigma_of(v).dense(), sample.S.dense(), sample.n);
    if (!st.pd) throw NotPositiveDefinite("sigma_of(v) is not positive definite");
    return gradient_from_state(st, dense_basis(model), sample.n);
}

Eigen::MatrixXd hessian(const LinearCovarianceModel& model, const ParameterVector& v,
                        const SampleCovariance& sample) {
    check_param_dim(model, v);
    check_sample_dim(model, sample);
    const auto st = make_state(model.sigma_of(v).dense(), sample.S.dense(), sample.n);
    if (!st.pd) throw NotPositiveDefinite("sigma_of(v) is not positive definite");
    return hessian_from_state(st, dense_basis(model), sample.n);
}

ParameterVector least_squares(const LinearCovarianceModel& model, const SymmetricMatrix& s) {
    if (s.dim() != model.dim())
        throw DimensionMismatch("matrix dimension does not match the model");
    return model.project_coordinates(s);
}

ParameterVector least_squares(const LinearCovarianceModel& model, const SampleCovariance& sample) {
    return least_squares(model, sample.S);
}

ParameterVector anderson_unbiased(const LinearCovarianceModel& model,
                                  const SampleCovariance& sample) {
    if (!model.g0_is_zero())
        throw UnsupportedModel("the unbiased rescaling applies only when G0 = 0");
    const double factor =
        static_cast<double>(sample.n) / static_cast<double>(sample.n - 1);
    return factor * least_squares(model, sample.S);
}

bool in_delta_region(const SymmetricMatrix& sigma, const SymmetricMatrix& s) {
    if (sigma.dim() != s.dim())
        throw DimensionMismatch("region test arguments disagree in dimension");
    if (!sigma.is_positive_definite()) return false;
    SymmetricMatrix upper = s;
    upper *= 2.0;
    upper -= sigma;
    return upper.is_positive_definite();
}

bool in_delta_region(const LinearCovarianceModel& model, const ParameterVector& v,
                     const SampleCovariance& sample) {
    check_param_dim(model, v);
    check_sample_dim(model, sample);
    return in_delta_region(model.sigma_of(v), sample.S);
}

FitResult newton_raphson_mle(const LinearCovarianceModel& model, const SampleCovariance& sample,
                             const ParameterVector& init, const NewtonOptions& opts) {
    check_param_dim(model, init);
    check_sample_dim(model, sample);
    if (opts.max_iterations < 0) throw InvalidRange("max_iterations must be nonnegative");
    if (!(opts.step_shrink > 0.0 && opts.step_shrink < 1.0))
        throw InvalidRange("step_shrink must lie in (0, 1)");

    const Eigen::VectorXd s_eigs = sample.S.eigenvalues();
    if (s_eigs(0) <= 1e-12 * std::max(s_eigs.cwiseAbs().maxCoeff(), 1.0))
        throw SingularSample("sample covariance is not full rank; the maximum may not exist");

    const Eigen::MatrixXd s_dense = sample.S.dense();
    const auto basis = dense_basis(model);
    const long n = sample.n;

    FitResult result;
    result.v_hat = init;
    auto st = make_state(model.sigma_of(init).dense(), s_dense, n);
    if (!st.pd) throw NotPositiveDefinite("starting point has a non-positive-definite sigma");
    result.loglik = st.loglik;
    result.loglik_trace.push_back(st.loglik);
    result.iterates.push_back(init);

    ParameterVector v = init;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const Eigen::VectorXd g = gradient_from_state(st, basis, n);
        if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
            result.converged = true;
            break;
        }
        const Eigen::MatrixXd h = hessian_from_state(st, basis, n);
        Eigen::VectorXd step;
        Eigen::LLT<Eigen::MatrixXd> neg_h_llt((-h).eval());
        if (neg_h_llt.info() == Eigen::Success) {
            step = neg_h_llt.solve(g);
        } else {
            step = g;  // outside the concavity region: fall back to ascent direction
        }

        double alpha = 1.0;
        bool accepted = false;
        likelihood_state trial_state;
        ParameterVector trial;
        while (alpha >= opts.min_step) {
            trial = v + alpha * step;
            trial_state = make_state(model.sigma_of(trial).dense(), s_dense, n);
            if (trial_state.pd && trial_state.loglik > st.loglik) {
                accepted = true;
                break;
            }
            alpha *= opts.step_shrink;
        }
        if (!accepted) {
            // No admissible increase left. If the quadratic model predicts a
            // gain below what the floating-point log-likelihood can resolve,
            // the point is a maximum at numerical precision.
            const double predicted_gain = 0.5 * g.dot(step);
            const double resolution = 64.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(st.loglik));
            if (std::abs(predicted_gain) < resolution) result.converged = true;
            break;
        }

        const double rel_change =
            std::abs(trial_state.loglik - st.loglik) / std::max(1.0, std::abs(trial_state.loglik));
        v = trial;
        st = trial_state;
        result.v_hat = v;
        result.loglik = st.loglik;
        result.loglik_trace.push_back(st.loglik);
        result.iterates.push_back(v);
        ++result.iterations;
        if (rel_change < opts.loglik_tol) {
            result.converged = true;
            break;
        }
    }

    result.diagnostics.sigma_pd = st.pd;
    result.diagnostics.in_delta = in_delta_region(model.sigma_of(result.v_hat), sample.S);
    const Eigen::MatrixXd h_final = hessian_from_state(st, basis, n);
    Eigen::LLT<Eigen::MatrixXd> final_llt((-h_final).eval());
    result.diagnostics.hessian_negdef_at_solution = final_llt.info() == Eigen::Success;
    return result;
}

ParameterVector safe_init(const LinearCovarianceModel& model, const SampleCovariance& sample,
                          const SymmetricMatrix& sigma0) {
    check_sample_dim(model, sample);
    if (!model.g0_is_zero())
        throw UnsupportedModel("safe starting points are defined for linear models (G0 = 0)");
    if (sigma0.dim() != model.dim())
        throw DimensionMismatch("anchor dimension does not match the model");
    const auto w0 = model.coordinates_of(sigma0);
    if (!w0) throw InvalidAnchor("anchor does not lie in the model span");
    if (!sigma0.is_positive_definite())
        throw InvalidAnchor("anchor must be positive definite");
    if (!sample.S.is_positive_definite())
        throw SingularSample("sample covariance is singular: 2S admits no interior point");

    const ParameterVector vbar = least_squares(model, sample.S);
    double t = 1.0;
    if (!model.sigma_of(vbar).is_positive_definite()) {
        const double lam_bar = std::min(model.sigma_of(vbar).min_eigenvalue(), 0.0);
        const double lam0 = sigma0.min_eigenvalue();
        t = 0.9 * lam0 / (lam0 - lam_bar);
    }
    const ParameterVector w = (1.0 - t) * *w0 + t * vbar;
    const SymmetricMatrix sigma_w = model.sigma_of(w);

    SymmetricMatrix upper = sample.S;
    upper *= 2.0;
    upper -= sigma_w;
    if (upper.is_positive_definite()) return w;

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        sample.S.dense(), sigma_w.dense(), Eigen::EigenvaluesOnly);
    const double lam_min = solver.eigenvalues()(0);
    const double s = 0.9 * 2.0 * lam_min;
    return s * w;
}

ParameterVector safe_init(const LinearCovarianceModel& model, const SampleCovariance& sample) {
    check_sample_dim(model, sample);
    const int p = model.dim();

    SymmetricMatrix diag(p);
    for (int i = 0; i < p; ++i) diag.set(i, i, sample.S(i, i));
    if (model.coordinates_of(diag).has_value()) return safe_init(model, sample, diag);

    SymmetricMatrix scaled = SymmetricMatrix::identity(p);
    scaled *= sample.S.trace() / static_cast<double>(p);
    if (model.coordinates_of(scaled).has_value()) return safe_init(model, sample, scaled);

    throw InvalidAnchor("model admits no default anchor; supply sigma0 explicitly");
}

double loss(LossKind kind, const SymmetricMatrix& sigma_hat, const SymmetricMatrix& sigma_star) {
    if (sigma_hat.dim() != sigma_star.dim())
        throw DimensionMismatch("loss arguments disagree in dimension");
    switch (kind) {
        case LossKind::linf:
        case LossKind::frobenius: {
            SymmetricMatrix diff = sigma_hat;
            diff -= sigma_star;
            return kind == LossKind::linf ? diff.max_abs() : diff.frobenius_norm();
        }
        case LossKind::quadratic:
        case LossKind::entropy:
            break;
    }
    if (!sigma_star.is_positive_definite())
        throw NotPositiveDefinite("reference matrix must be positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        sigma_hat.dense(), sigma_star.dense(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = solver.eigenvalues();
    if (kind == LossKind::quadratic) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            worst = std::max(worst, std::abs(lam(i) - 1.0));
        return worst;
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) <= 0.0)
            throw NotPositiveDefinite("entropy loss needs a positive definite estimate");
        acc += lam(i) - std::log(lam(i)) - 1.0;
    }
    return acc;
}

}  // namespace lincov
