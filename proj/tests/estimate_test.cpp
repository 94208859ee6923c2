#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lincov/errors.hpp"
#include "lincov/estimate.hpp"
#include "lincov/model.hpp"
#include "lincov/rng.hpp"
#include "lincov/simulate.hpp"
#include "test_util.hpp"

using lincov::DimensionMismatch;
using lincov::InsufficientData;
using lincov::InvalidAnchor;
using lincov::LinearCovarianceModel;
using lincov::LossKind;
using lincov::NotPositiveDefinite;
using lincov::ParameterVector;
using lincov::Rng;
using lincov::SampleCovariance;
using lincov::SingularSample;
using lincov::SymmetricMatrix;
using lincov::UnsupportedModel;
using test_util::full_basis;
using test_util::gaussian_sample;
using test_util::random_model_instance;
using test_util::random_pd;
using test_util::sym;
using test_util::unit_sym;

namespace {

ParameterVector pv(std::initializer_list<double> xs) {
    ParameterVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

LinearCovarianceModel diagonal_model(int p) {
    std::vector<SymmetricMatrix> basis;
    for (int i = 0; i < p; ++i) basis.push_back(unit_sym(p, i, i));
    return {SymmetricMatrix::zero(p), basis};
}

Eigen::VectorXd fd_gradient(const LinearCovarianceModel& model, const ParameterVector& v,
                            const SampleCovariance& sample, double h) {
    Eigen::VectorXd g(model.size());
    for (int i = 0; i < model.size(); ++i) {
        ParameterVector hi = v, lo = v;
        hi(i) += h;
        lo(i) -= h;
        g(i) = (lincov::log_likelihood(model, hi, sample) -
                lincov::log_likelihood(model, lo, sample)) /
               (2.0 * h);
    }
    return g;
}

Eigen::MatrixXd fd_hessian(const LinearCovarianceModel& model, const ParameterVector& v,
                           const SampleCovariance& sample, double h) {
    Eigen::MatrixXd hess(model.size(), model.size());
    for (int j = 0; j < model.size(); ++j) {
        ParameterVector hi = v, lo = v;
        hi(j) += h;
        lo(j) -= h;
        hess.col(j) =
            (lincov::gradient(model, hi, sample) - lincov::gradient(model, lo, sample)) /
            (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

// matrix square root through the spectral decomposition
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    return eig.eigenvectors() *
           eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
}

}  // namespace

TEST_CASE("SampleCovariance validates its invariants") {
    const SymmetricMatrix s = sym({{1.0, 0.3}, {0.3, 1.0}});
    const SampleCovariance sample(s, 10);
    CHECK(sample.dim() == 2);
    CHECK(sample.n == 10);
    CHECK(sample.mean.size() == 2);

    CHECK_THROWS_AS(SampleCovariance(s, 1), InsufficientData);
    // indefinite "covariance"
    CHECK_THROWS_AS(SampleCovariance(sym({{1.0, 2.0}, {2.0, 1.0}}), 10), NotPositiveDefinite);
    // mean with the wrong length
    CHECK_THROWS_AS(SampleCovariance(s, 10, Eigen::VectorXd::Zero(3)), DimensionMismatch);
    // positive semidefinite (singular) is fine here; only estimation rejects it
    CHECK_NOTHROW(SampleCovariance(sym({{1.0, 1.0}, {1.0, 1.0}}), 10));
}

TEST_CASE("log likelihood agrees with hand evaluations") {
    // identity truth, identity sample: -(n/2)(0 + p)
    const LinearCovarianceModel diag3 = diagonal_model(3);
    const SampleCovariance id3(SymmetricMatrix::identity(3), 2);
    CHECK(lincov::log_likelihood(diag3, pv({1.0, 1.0, 1.0}), id3) ==
          doctest::Approx(-3.0).epsilon(1e-14));

    // at sigma = S the value is -(n/2)(log det S + p)
    Rng rng(17);
    const SymmetricMatrix s = random_pd(3, 0.5, 2.0, rng);
    const SampleCovariance sample(s, 10);
    const LinearCovarianceModel full(SymmetricMatrix::zero(3), full_basis(3));
    const auto coords = full.coordinates_of(s);
    REQUIRE(coords.has_value());
    const double expected =
        -5.0 * (std::log(s.dense().determinant()) + 3.0);
    CHECK(lincov::log_likelihood(full, *coords, sample) ==
          doctest::Approx(expected).epsilon(1e-12));

    const LinearCovarianceModel corr = lincov::correlation_model(2);
    CHECK_THROWS_AS(lincov::log_likelihood(corr, pv({1.0}), id3), DimensionMismatch);
    const SampleCovariance id2(SymmetricMatrix::identity(2), 4);
    CHECK_THROWS_AS(lincov::log_likelihood(corr, pv({1.0}), id2), NotPositiveDefinite);
}

TEST_CASE("normalized likelihood is zero at S and negative elsewhere") {
    Rng rng(23);
    const SymmetricMatrix s = random_pd(3, 0.5, 2.0, rng);
    const SampleCovariance sample(s, 25);
    CHECK(std::fabs(lincov::normalized_loglik(s, sample)) < 1e-12);

    // doubling S: all relative eigenvalues are 1/2
    const SymmetricMatrix twice = 2.0 * s;
    CHECK(lincov::normalized_loglik(twice, sample) ==
          doctest::Approx(3.0 * (std::log(0.5) + 0.5)).epsilon(1e-12));

    // direct sum: (log 2 - 1) + (log .5 + .5)
    const SampleCovariance diag_sample(sym({{2.0, 0.0}, {0.0, 0.5}}), 8);
    CHECK(lincov::normalized_loglik(SymmetricMatrix::identity(2), diag_sample) ==
          doctest::Approx(-0.5).epsilon(1e-13));

    for (int trial = 0; trial < 10; ++trial) {
        const SymmetricMatrix other = random_pd(3, 0.3, 3.0, rng);
        CHECK(lincov::normalized_loglik(other, sample) < 1e-12);
    }

    CHECK_THROWS_AS(
        lincov::normalized_loglik(sym({{1.0, 2.0}, {2.0, 1.0}}),
                                  SampleCovariance(SymmetricMatrix::identity(2), 5)),
        NotPositiveDefinite);
    // singular S has log det = -inf; rejected
    CHECK_THROWS_AS(
        lincov::normalized_loglik(SymmetricMatrix::identity(2),
                                  SampleCovariance(sym({{1.0, 1.0}, {1.0, 1.0}}), 5)),
        NotPositiveDefinite);
}

TEST_CASE("score vector at simple anchor points") {
    // at sigma = S every direction is stationary
    Rng rng(29);
    const SymmetricMatrix s = random_pd(4, 0.5, 2.0, rng);
    const SampleCovariance sample(s, 12);
    const LinearCovarianceModel full(SymmetricMatrix::zero(4), full_basis(4));
    const auto coords = full.coordinates_of(s);
    REQUIRE(coords.has_value());
    CHECK(lincov::gradient(full, *coords, sample).lpNorm<Eigen::Infinity>() < 1e-10);

    // correlation model at v = 0 with S = [[1, .3], [.3, 1]]: slope n * 0.3
    const LinearCovarianceModel corr = lincov::correlation_model(2);
    const SampleCovariance sc(sym({{1.0, 0.3}, {0.3, 1.0}}), 2);
    const Eigen::VectorXd g = lincov::gradient(corr, pv({0.0}), sc);
    CHECK(g(0) == doctest::Approx(0.6).epsilon(1e-13));

    // separable diagonal family: (n/2)(s_i - a_i)/a_i^2
    const LinearCovarianceModel diag2 = diagonal_model(2);
    const SampleCovariance sd(sym({{3.0, 0.0}, {0.0, 0.5}}), 6);
    const Eigen::VectorXd gd = lincov::gradient(diag2, pv({2.0, 1.0}), sd);
    CHECK(gd(0) == doctest::Approx(3.0 * (3.0 - 2.0) / 4.0).epsilon(1e-13));
    CHECK(gd(1) == doctest::Approx(3.0 * (0.5 - 1.0) / 1.0).epsilon(1e-13));
}

TEST_CASE("curvature matrix at separable anchor points") {
    const LinearCovarianceModel diag2 = diagonal_model(2);
    const SampleCovariance sd(sym({{3.0, 0.0}, {0.0, 0.5}}), 6);
    const Eigen::MatrixXd h = lincov::hessian(diag2, pv({2.0, 1.0}), sd);
    CHECK(h(0, 0) == doctest::Approx(-3.0 * (6.0 - 2.0) / 8.0).epsilon(1e-13));
    CHECK(std::fabs(h(1, 1)) < 1e-12);  // 2 s_1 - a_1 = 0 at this point
    CHECK(std::fabs(h(0, 1)) < 1e-12);
    CHECK((h - h.transpose().eval()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("directional derivatives match the coordinate functions") {
    Rng rng(31);
    const auto inst = random_model_instance(2, 4, rng);
    const SymmetricMatrix s = random_pd(4, 0.5, 2.0, rng);
    const SampleCovariance sample(s, 9);
    const SymmetricMatrix sigma = inst.model.sigma_of(inst.v);

    const Eigen::VectorXd g = lincov::gradient(inst.model, inst.v, sample);
    const Eigen::MatrixXd h = lincov::hessian(inst.model, inst.v, sample);
    for (int i = 0; i < inst.model.size(); ++i) {
        CHECK(lincov::directional_derivative(sigma, sample, inst.model.basis(i)) ==
              doctest::Approx(g(i)).epsilon(1e-11));
        for (int j = 0; j < inst.model.size(); ++j) {
            CHECK(lincov::second_directional_derivative(sigma, sample, inst.model.basis(i),
                                                        inst.model.basis(j)) ==
                  doctest::Approx(h(i, j)).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("analytic derivatives agree with finite differences on random models") {
    Rng rng(424242);
    int done = 0;
    int attempts = 0;
    while (done < 100 && attempts < 400) {
        ++attempts;
        const int p = 2 + static_cast<int>(rng.uniform() * 4.999);  // 2..6
        const auto inst = random_model_instance(attempts, p, rng);
        const int dim = inst.model.dim();
        const SampleCovariance sample =
            gaussian_sample(random_pd(dim, 0.4, 2.5, rng), 4 * dim + 10,
                            lincov::mix_seed(99, static_cast<std::uint64_t>(attempts)));

        // all probe points must stay inside Theta
        const double h = 1e-6;
        bool probes_ok = true;
        for (int i = 0; i < inst.model.size() && probes_ok; ++i) {
            ParameterVector hi = inst.v, lo = inst.v;
            hi(i) += 2.0 * h;
            lo(i) -= 2.0 * h;
            probes_ok = inst.model.is_in_theta(hi) && inst.model.is_in_theta(lo);
        }
        if (!probes_ok) continue;

        const Eigen::VectorXd g = lincov::gradient(inst.model, inst.v, sample);
        const Eigen::VectorXd g_fd = fd_gradient(inst.model, inst.v, sample, h);
        const double g_scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
        CHECK((g - g_fd).lpNorm<Eigen::Infinity>() / g_scale < 1e-6);

        const Eigen::MatrixXd hess = lincov::hessian(inst.model, inst.v, sample);
        const Eigen::MatrixXd hess_fd = fd_hessian(inst.model, inst.v, sample, h);
        const double h_scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
        CHECK((hess - hess_fd).cwiseAbs().maxCoeff() / h_scale < 1e-5);
        ++done;
    }
    CHECK(done == 100);
}

TEST_CASE("curvature is negative definite inside the concavity region") {
    Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 2 + static_cast<int>(rng.uniform() * 4.999);
        const SymmetricMatrix s = random_pd(p, 0.5, 2.0, rng);
        const Eigen::MatrixXd s_half = sqrt_psd(s.dense());
        // sigma = S^(1/2) A S^(1/2) with spec(A) in (0, 2) lies strictly
        // between 0 and 2S
        const SymmetricMatrix a = random_pd(p, 0.05, 1.9, rng);
        const SymmetricMatrix sigma =
            SymmetricMatrix::from_dense(s_half * a.dense() * s_half);
        REQUIRE(lincov::in_delta_region(sigma, s));

        const LinearCovarianceModel full(SymmetricMatrix::zero(p), full_basis(p));
        const auto coords = full.coordinates_of(sigma);
        REQUIRE(coords.has_value());
        const SampleCovariance sample(s, 7);
        const Eigen::MatrixXd h = lincov::hessian(full, *coords, sample);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        CHECK(eig.eigenvalues().maxCoeff() < 0.0);
    }
}

TEST_CASE("outside the region a flat direction certifies non-concavity") {
    Rng rng(778);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 2 + static_cast<int>(rng.uniform() * 4.999);
        const SymmetricMatrix s = random_pd(p, 0.5, 2.0, rng);
        const Eigen::MatrixXd s_half = sqrt_psd(s.dense());
        // force at least one relative eigenvalue above 2
        Rng inner(lincov::mix_seed(5150, static_cast<std::uint64_t>(trial)));
        const Eigen::MatrixXd q = test_util::random_orthogonal(p, inner);
        Eigen::VectorXd eigs(p);
        for (int i = 0; i < p; ++i) eigs(i) = 0.1 + 1.8 * inner.uniform();
        eigs(0) = 2.1 + 1.4 * inner.uniform();
        const Eigen::MatrixXd a = q * eigs.asDiagonal() * q.transpose();
        const SymmetricMatrix sigma = SymmetricMatrix::from_dense(s_half * a * s_half);
        REQUIRE(sigma.is_positive_definite());
        REQUIRE_FALSE(lincov::in_delta_region(sigma, s));

        // z: most negative direction of 2S - sigma
        const Eigen::MatrixXd gap = 2.0 * s.dense() - sigma.dense();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gap);
        const Eigen::VectorXd z = eig.eigenvectors().col(0);
        REQUIRE(eig.eigenvalues()(0) <= 0.0);

        const Eigen::MatrixXd a_dir = sigma.dense() * z * z.transpose() * sigma.dense();
        const SymmetricMatrix dir = SymmetricMatrix::from_dense(a_dir);
        const SampleCovariance sample(s, 7);
        const double d2 = lincov::second_directional_derivative(sigma, sample, dir, dir);

        // closed form: -(n/2) (z' sigma z)(z' (2S - sigma) z)
        const double closed = -3.5 * (z.dot(sigma.dense() * z)) * (z.dot(gap * z));
        CHECK(d2 >= -1e-9 * std::max(1.0, std::fabs(closed)));
        CHECK(d2 == doctest::Approx(closed).epsilon(1e-8));
    }
}

TEST_CASE("least squares reproduces entries of the correlation family") {
    Rng rng(37);
    const SymmetricMatrix s = random_pd(4, 0.5, 2.0, rng);
    const LinearCovarianceModel corr = lincov::correlation_model(4);
    const ParameterVector vbar = lincov::least_squares(corr, s);
    int k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) CHECK(vbar(k++) == doctest::Approx(s(i, j)).epsilon(1e-12));
}

TEST_CASE("least squares projection is idempotent and Frobenius-minimal") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 2 + static_cast<int>(rng.uniform() * 4.999);
        const auto inst = random_model_instance(trial, p, rng);

        // idempotence: points already in the span project to themselves
        ParameterVector w(inst.model.size());
        for (int i = 0; i < inst.model.size(); ++i) w(i) = 2.0 * rng.uniform() - 1.0;
        const ParameterVector back = lincov::least_squares(inst.model, inst.model.sigma_of(w));
        CHECK((back - w).lpNorm<Eigen::Infinity>() < 1e-10);

        // minimality against random competitors
        const SymmetricMatrix s = random_pd(inst.model.dim(), 0.3, 2.5, rng);
        const ParameterVector vbar = lincov::least_squares(inst.model, s);
        const double best = (s - inst.model.sigma_of(vbar)).frobenius_norm();
        for (int c = 0; c < 20; ++c) {
            ParameterVector other(inst.model.size());
            for (int i = 0; i < inst.model.size(); ++i) other(i) = 4.0 * rng.uniform() - 2.0;
            const double dist = (s - inst.model.sigma_of(other)).frobenius_norm();
            CHECK(best <= dist + 1e-12);
        }
    }
}

TEST_CASE("star tree least squares has the closed form") {
    Rng rng(43);
    const int p = 5;
    const LinearCovarianceModel star = lincov::brownian_tree_model(lincov::star_tree(p));
    const SymmetricMatrix s = random_pd(p, 0.5, 2.0, rng);
    const SymmetricMatrix fitted = star.sigma_of(lincov::least_squares(star, s));

    double off_sum = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < i; ++j) off_sum += s(i, j);
    const double off_mean = off_sum / (p * (p - 1) / 2.0);

    for (int i = 0; i < p; ++i) {
        CHECK(fitted(i, i) == doctest::Approx(s(i, i)).epsilon(1e-12));
        for (int j = 0; j < i; ++j) CHECK(fitted(i, j) == doctest::Approx(off_mean).epsilon(1e-12));
    }
}

TEST_CASE("unbiased variant rescales by n/(n-1)") {
    Rng rng(47);
    const LinearCovarianceModel star = lincov::brownian_tree_model(lincov::star_tree(3));
    const SymmetricMatrix s = random_pd(3, 0.5, 2.0, rng);

    const ParameterVector base = lincov::least_squares(star, s);
    const ParameterVector anders2 = lincov::anderson_unbiased(star, SampleCovariance(s, 2));
    CHECK((anders2 - 2.0 * base).lpNorm<Eigen::Infinity>() < 1e-12);

    const ParameterVector anders100 = lincov::anderson_unbiased(star, SampleCovariance(s, 100));
    CHECK((anders100 - (100.0 / 99.0) * base).lpNorm<Eigen::Infinity>() < 1e-12);

    // needs a purely linear family
    CHECK_THROWS_AS(lincov::anderson_unbiased(lincov::correlation_model(3),
                                              SampleCovariance(SymmetricMatrix::identity(3), 5)),
                    UnsupportedModel);
}

TEST_CASE("region membership tests both cone conditions") {
    Rng rng(53);
    const SymmetricMatrix s = random_pd(3, 0.5, 2.0, rng);
    CHECK(lincov::in_delta_region(s, s));  // 0 < S < 2S
    CHECK_FALSE(lincov::in_delta_region(2.0 * s, s));  // upper boundary
    CHECK_FALSE(lincov::in_delta_region(-1.0 * s, s));  // not positive definite
    CHECK(lincov::in_delta_region(0.5 * s, s));
    CHECK_FALSE(lincov::in_delta_region(2.5 * s, s));

    // parameter-space overload
    const LinearCovarianceModel corr = lincov::correlation_model(2);
    const SampleCovariance sample(sym({{1.0, 0.2}, {0.2, 1.0}}), 30);
    CHECK(lincov::in_delta_region(corr, pv({0.2}), sample));
}

TEST_CASE("ascent converges to the separable exact solution") {
    Rng rng(59);
    const SymmetricMatrix s = random_pd(3, 0.5, 2.0, rng);
    // keep only the diagonal as data for the diagonal family
    SymmetricMatrix diag_s(3);
    for (int i = 0; i < 3; ++i) diag_s.set(i, i, s(i, i));
    const SampleCovariance sample(diag_s, 20);

    const LinearCovarianceModel diag3 = diagonal_model(3);
    const lincov::FitResult fit =
        lincov::newton_raphson_mle(diag3, sample, pv({1.0, 1.0, 1.0}));
    CHECK(fit.converged);
    for (int i = 0; i < 3; ++i) CHECK(fit.v_hat(i) == doctest::Approx(diag_s(i, i)).epsilon(1e-7));
    CHECK(fit.diagnostics.sigma_pd);
    CHECK(fit.diagnostics.in_delta);
    CHECK(fit.diagnostics.hessian_negdef_at_solution);
}

TEST_CASE("two-dimensional correlation fit recovers the sample correlation") {
    // with a unit-diagonal sample matrix the score has the single root v = s12
    const LinearCovarianceModel corr = lincov::correlation_model(2);
    for (double s12 : {-0.7, -0.2, 0.0, 0.35, 0.9}) {
        const SampleCovariance sample(sym({{1.0, s12}, {s12, 1.0}}), 50);
        const lincov::FitResult fit =
            lincov::newton_raphson_mle(corr, sample, lincov::least_squares(corr, sample));
        CHECK(fit.converged);
        CHECK(fit.v_hat(0) == doctest::Approx(s12).epsilon(1e-7));

        // nearby parameters do strictly worse
        for (double delta : {-0.01, 0.01}) {
            CHECK(lincov::log_likelihood(corr, pv({s12 + delta}), sample) < fit.loglik);
        }
    }
}

TEST_CASE("likelihood trace increases strictly until convergence") {
    Rng rng(61);
    const LinearCovarianceModel corr = lincov::correlation_model(3);
    const SymmetricMatrix truth =
        sym({{1.0, 0.5, 1.0 / 3.0}, {0.5, 1.0, 0.25}, {1.0 / 3.0, 0.25, 1.0}});
    const SampleCovariance sample = gaussian_sample(truth, 100, 31337);

    const lincov::FitResult fit =
        lincov::newton_raphson_mle(corr, sample, lincov::least_squares(corr, sample));
    CHECK(fit.converged);
    CHECK(fit.iterations <= 10);  // quadratic convergence from a good start
    REQUIRE(fit.loglik_trace.size() >= 2);
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) {
        CHECK(fit.loglik_trace[k] > fit.loglik_trace[k - 1]);
    }
    CHECK(fit.loglik == doctest::Approx(fit.loglik_trace.back()));
    CHECK(fit.iterates.size() == fit.loglik_trace.size());

    // gradient small at the solution (convergence may trigger on the
    // likelihood stall criterion slightly before the gradient threshold)
    CHECK(lincov::gradient(corr, fit.v_hat, sample).lpNorm<Eigen::Infinity>() < 1e-6);

    // whenever an iterate sits inside the region, curvature there is negative
    // definite, so the next step is a true ascent step
    for (const ParameterVector& v : fit.iterates) {
        if (!lincov::in_delta_region(corr, v, sample)) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lincov::hessian(corr, v, sample));
        CHECK(eig.eigenvalues().maxCoeff() < 0.0);
    }
}

TEST_CASE("ascent errors are typed") {
    const LinearCovarianceModel corr = lincov::correlation_model(2);
    const SampleCovariance ok(sym({{1.0, 0.3}, {0.3, 1.0}}), 10);
    // starting point outside Theta
    CHECK_THROWS_AS(lincov::newton_raphson_mle(corr, ok, pv({1.5})), NotPositiveDefinite);

    // rank-deficient sample covariance
    const SampleCovariance singular(sym({{1.0, 1.0}, {1.0, 1.0}}), 10);
    CHECK_THROWS_AS(lincov::newton_raphson_mle(corr, singular, pv({0.0})), SingularSample);

    // option validation
    lincov::NewtonOptions bad;
    bad.step_shrink = 1.5;
    CHECK_THROWS_AS(lincov::newton_raphson_mle(corr, ok, pv({0.0}), bad), lincov::InvalidRange);

    // iteration cap leaves converged false with the partial path reported
    lincov::NewtonOptions one_step;
    one_step.max_iterations = 1;
    one_step.gradient_tol = 1e-300;  // unreachable
    one_step.loglik_tol = 0.0;
    const lincov::FitResult partial = lincov::newton_raphson_mle(corr, ok, pv({0.0}), one_step);
    CHECK_FALSE(partial.converged);
    CHECK(partial.iterations == 1);
}

TEST_CASE("guarded start lands inside the region on adversarial samples") {
    Rng rng(67);
    int made = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        // tree and circular families only (linear families through the origin)
        const int pick = static_cast<int>(rng.uniform() * 2.0);
        const int p = 3 + static_cast<int>(rng.uniform() * 3.999);
        const LinearCovarianceModel model =
            pick == 0 ? lincov::brownian_tree_model(lincov::star_tree(p))
                      : lincov::circular_serial_model(p);
        // tiny samples make the projection land outside the cone regularly
        const long n = p + 1 + static_cast<long>(rng.uniform() * 3.0);
        const SampleCovariance sample =
            gaussian_sample(random_pd(p, 0.2, 3.0, rng), n,
                            lincov::mix_seed(404, static_cast<std::uint64_t>(trial)));
        const ParameterVector v0 = lincov::safe_init(model, sample);
        CHECK(lincov::in_delta_region(model, v0, sample));
        ++made;
    }
    CHECK(made == 1000);
}

TEST_CASE("guarded start returns the projection when it is already usable") {
    const LinearCovarianceModel star = lincov::brownian_tree_model(lincov::star_tree(3));
    const SampleCovariance sample = gaussian_sample(
        star.sigma_of(pv({1.0, 1.0, 1.0, 0.5})), 200, 777);
    const ParameterVector vbar = lincov::least_squares(star, sample);
    REQUIRE(lincov::in_delta_region(star, vbar, sample));
    const ParameterVector v0 = lincov::safe_init(star, sample);
    CHECK((v0 - vbar).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("guarded start shrinks off-diagonals toward the diagonal anchor") {
    // engineered sample whose star-tree projection is indefinite: large
    // off-diagonal average against two tiny variances
    const SymmetricMatrix s = sym({{4.0, 0.15, 0.15}, {0.15, 0.01, 0.005}, {0.15, 0.005, 0.01}});
    REQUIRE(s.is_positive_definite());
    const LinearCovarianceModel star = lincov::brownian_tree_model(lincov::star_tree(3));
    const SampleCovariance sample(s, 25);

    const ParameterVector vbar = lincov::least_squares(star, sample);
    REQUIRE_FALSE(star.is_in_theta(vbar));  // the raw projection is unusable here

    const ParameterVector v0 = lincov::safe_init(star, sample);
    CHECK(lincov::in_delta_region(star, v0, sample));

    const SymmetricMatrix fitted = star.sigma_of(v0);
    const SymmetricMatrix projected = star.sigma_of(vbar);
    // diagonal scaled by s alone, off-diagonals by s*t: the common ratio test
    const double s_ratio = fitted(0, 0) / s(0, 0);
    for (int i = 0; i < 3; ++i)
        CHECK(fitted(i, i) == doctest::Approx(s_ratio * s(i, i)).epsilon(1e-10));
    const double st_ratio = fitted(0, 1) / projected(0, 1);
    CHECK(st_ratio < s_ratio);  // off-diagonals shrink strictly more
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < i; ++j)
            CHECK(fitted(i, j) == doctest::Approx(st_ratio * projected(i, j)).epsilon(1e-10));
}

TEST_CASE("guarded start validates model, anchor, and sample") {
    const SampleCovariance id3(SymmetricMatrix::identity(3), 10);
    // affine families are out of contract
    CHECK_THROWS_AS(lincov::safe_init(lincov::correlation_model(3), id3), UnsupportedModel);

    const LinearCovarianceModel star = lincov::brownian_tree_model(lincov::star_tree(3));
    // anchor outside the model span
    SymmetricMatrix off(3);
    off.set(0, 1, 1.0);
    CHECK_THROWS_AS(lincov::safe_init(star, id3, off), InvalidAnchor);
    // anchor in the span but not positive definite
    CHECK_THROWS_AS(lincov::safe_init(star, id3, -1.0 * SymmetricMatrix::identity(3)),
                    InvalidAnchor);
    // singular sample covariance with a usable (positive definite) anchor
    const SampleCovariance rank2(sym({{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}), 10);
    CHECK_THROWS_AS(lincov::safe_init(star, rank2), SingularSample);

    // no usable default anchor: a family with neither the diagonals nor the
    // identity in its span
    const LinearCovarianceModel skew(SymmetricMatrix::zero(2), {unit_sym(2, 0, 1)});
    const SampleCovariance id2(SymmetricMatrix::identity(2), 10);
    CHECK_THROWS_AS(lincov::safe_init(skew, id2), InvalidAnchor);
}

TEST_CASE("loss functions match hand values") {
    const SymmetricMatrix id2 = SymmetricMatrix::identity(2);
    const SymmetricMatrix two = 2.0 * id2;

    CHECK(lincov::loss(LossKind::linf, two, id2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lincov::loss(LossKind::frobenius, two, id2) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(lincov::loss(LossKind::quadratic, two, id2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lincov::loss(LossKind::entropy, two, id2) ==
          doctest::Approx(2.0 * (1.0 - std::log(2.0))).epsilon(1e-13));

    // zero at the truth, for every kind
    Rng rng(71);
    const SymmetricMatrix sigma = random_pd(3, 0.5, 2.0, rng);
    for (LossKind kind :
         {LossKind::linf, LossKind::frobenius, LossKind::quadratic, LossKind::entropy}) {
        CHECK(std::fabs(lincov::loss(kind, sigma, sigma)) < 1e-10);
    }
}

TEST_CASE("entropy and quadratic losses follow the relative spectrum") {
    Rng rng(73);
    const SymmetricMatrix truth = random_pd(4, 0.5, 2.0, rng);
    const SymmetricMatrix est = random_pd(4, 0.3, 3.0, rng);

    const Eigen::MatrixXd t_half_inv = sqrt_psd(truth.dense()).inverse();
    const Eigen::MatrixXd rel = t_half_inv * est.dense() * t_half_inv;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (rel + rel.transpose()));
    double entropy = 0.0, quadratic = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double l = eig.eigenvalues()(i);
        entropy += l - std::log(l) - 1.0;
        quadratic = std::max(quadratic, std::fabs(l - 1.0));
    }
    CHECK(lincov::loss(LossKind::entropy, est, truth) ==
          doctest::Approx(entropy).epsilon(1e-11));
    CHECK(lincov::loss(LossKind::quadratic, est, truth) ==
          doctest::Approx(quadratic).epsilon(1e-11));

    CHECK_THROWS_AS(lincov::loss(LossKind::entropy, est, SymmetricMatrix::identity(3)),
                    DimensionMismatch);
    // truth must be invertible for the spectral kinds
    CHECK_THROWS_AS(
        lincov::loss(LossKind::quadratic, est, SymmetricMatrix::zero(4)),
        NotPositiveDefinite);
    // entropy additionally needs an invertible estimate
    CHECK_THROWS_AS(lincov::loss(LossKind::entropy, SymmetricMatrix::zero(4), truth),
                    NotPositiveDefinite);
}

TEST_CASE("fits from the data-generating family satisfy the sandwich bounds") {
    Rng rng(79);
    const LinearCovarianceModel corr = lincov::correlation_model(3);
    const SymmetricMatrix truth =
        sym({{1.0, 0.5, 1.0 / 3.0}, {0.5, 1.0, 0.25}, {1.0 / 3.0, 0.25, 1.0}});
    const auto v_star = corr.coordinates_of(truth);
    REQUIRE(v_star.has_value());

    for (int rep = 0; rep < 25; ++rep) {
        const SampleCovariance sample =
            gaussian_sample(truth, 100, lincov::mix_seed(808, static_cast<std::uint64_t>(rep)));
        const ParameterVector vbar = lincov::least_squares(corr, sample);
        if (!corr.is_in_theta(vbar)) continue;
        const lincov::FitResult fit = lincov::newton_raphson_mle(corr, sample, vbar);
        if (!fit.converged) continue;

        const double ll_star = lincov::log_likelihood(corr, *v_star, sample);
        const double n_half = sample.n / 2.0;
        const Eigen::MatrixXd s_dense = sample.S.dense();
        const double ll_s =
            -n_half * (std::log(s_dense.determinant()) + 3.0);
        CHECK(fit.loglik >= ll_star - 1e-9 * std::fabs(ll_star));
        CHECK(fit.loglik <= ll_s + 1e-9 * std::fabs(ll_s));
    }
}
