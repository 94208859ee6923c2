#include "lincov/symmetric_matrix.hpp"

#include <cmath>
#include <cstddef>

namespace lincov {

SymmetricMatrix::SymmetricMatrix(int p) : p_(p) {
    if (p < 1) {
        throw InvalidDimension("SymmetricMatrix: dimension must be >= 1, got " + std::to_string(p));
    }
    tri_.assign(static_cast<std::size_t>(p) * (p + 1) / 2, 0.0);
}

std::size_t SymmetricMatrix::index(int i, int j) const {
    if (i < 0 || j < 0 || i >= p_ || j >= p_) {
        throw DimensionMismatch("SymmetricMatrix: index (" + std::to_string(i) + "," +
                                std::to_string(j) + ") out of range for dimension " +
                                std::to_string(p_));
    }
    if (i < j) std::swap(i, j);
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
}

SymmetricMatrix SymmetricMatrix::identity(int p) {
    SymmetricMatrix m(p);
    for (int i = 0; i < p; ++i) m.set(i, i, 1.0);
    return m;
}

SymmetricMatrix SymmetricMatrix::from_dense(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("from_dense: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected square");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > rel_tol * std::max(scale, 1.0)) {
        throw DimensionMismatch("from_dense: matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
    }
    SymmetricMatrix out(static_cast<int>(m.rows()));
    for (int i = 0; i < out.p_; ++i)
        for (int j = 0; j <= i; ++j) out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    return out;
}

Eigen::MatrixXd SymmetricMatrix::dense() const {
    Eigen::MatrixXd out(p_, p_);
    for (int i = 0; i < p_; ++i)
        for (int j = 0; j <= i; ++j) out(i, j) = out(j, i) = (*this)(i, j);
    return out;
}

double SymmetricMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < p_; ++i) t += (*this)(i, i);
    return t;
}

double SymmetricMatrix::frobenius_norm() const {
    double sum = 0.0;
    for (int i = 0; i < p_; ++i) {
        for (int j = 0; j < i; ++j) {
            const double v = (*this)(i, j);
            sum += 2.0 * v * v;
        }
        const double d = (*this)(i, i);
        sum += d * d;
    }
    return std::sqrt(sum);
}

double SymmetricMatrix::max_abs() const {
    double m = 0.0;
    for (double v : tri_) m = std::max(m, std::abs(v));
    return m;
}

double SymmetricMatrix::trace_product(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    if (a.p_ != b.p_) {
        throw DimensionMismatch("trace_product: dimensions " + std::to_string(a.p_) + " vs " +
                                std::to_string(b.p_));
    }
    // tr(AB) = sum_ij A_ij B_ij for symmetric A, B.
    double sum = 0.0;
    for (int i = 0; i < a.p_; ++i) {
        for (int j = 0; j < i; ++j) sum += 2.0 * a(i, j) * b(i, j);
        sum += a(i, i) * b(i, i);
    }
    return sum;
}

SymmetricMatrix& SymmetricMatrix::operator+=(const SymmetricMatrix& other) {
    if (p_ != other.p_) {
        throw DimensionMismatch("operator+=: dimensions " + std::to_string(p_) + " vs " +
                                std::to_string(other.p_));
    }
    for (std::size_t k = 0; k < tri_.size(); ++k) tri_[k] += other.tri_[k];
    return *this;
}

SymmetricMatrix& SymmetricMatrix::operator-=(const SymmetricMatrix& other) {
    if (p_ != other.p_) {
        throw DimensionMismatch("operator-=: dimensions " + std::to_string(p_) + " vs " +
                                std::to_string(other.p_));
    }
    for (std::size_t k = 0; k < tri_.size(); ++k) tri_[k] -= other.tri_[k];
    return *this;
}

SymmetricMatrix& SymmetricMatrix::operator*=(double scale) {
    for (double& v : tri_) v *= scale;
    return *this;
}

bool SymmetricMatrix::is_positive_definite() const {
    Eigen::LLT<Eigen::MatrixXd> llt(dense());
    return llt.info() == Eigen::Success;
}

Eigen::VectorXd SymmetricMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double SymmetricMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

}  // namespace lincov
