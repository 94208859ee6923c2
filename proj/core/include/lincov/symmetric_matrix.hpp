#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lincov/errors.hpp"

namespace lincov {

// Symmetric p x p matrix stored as a packed lower triangle, so that
// (i,j) and (j,i) share one storage cell and symmetry holds exactly.
class SymmetricMatrix {
  public:
    // Zero matrix of dimension p.
    explicit SymmetricMatrix(int p);

    static SymmetricMatrix identity(int p);
    static SymmetricMatrix zero(int p) { return SymmetricMatrix(p); }

    // Symmetrizes as (M + M^T)/2; rejects inputs whose asymmetry exceeds
    // rel_tol * max|entry| since that indicates caller error, not round-off.
    static SymmetricMatrix from_dense(const Eigen::MatrixXd& m, double rel_tol = 1e-9);

    [[nodiscard]] int dim() const { return p_; }

    [[nodiscard]] double operator()(int i, int j) const { return tri_[index(i, j)]; }

    void set(int i, int j, double value) { tri_[index(i, j)] = value; }

    [[nodiscard]] Eigen::MatrixXd dense() const;

    [[nodiscard]] double trace() const;
    [[nodiscard]] double frobenius_norm() const;
    [[nodiscard]] double max_abs() const;

    // tr(A * B) for symmetric A, B (sum over entry products).
    [[nodiscard]] static double trace_product(const SymmetricMatrix& a, const SymmetricMatrix& b);

    SymmetricMatrix& operator+=(const SymmetricMatrix& other);
    SymmetricMatrix& operator-=(const SymmetricMatrix& other);
    SymmetricMatrix& operator*=(double scale);

    friend SymmetricMatrix operator+(SymmetricMatrix a, const SymmetricMatrix& b) { return a += b; }
    friend SymmetricMatrix operator-(SymmetricMatrix a, const SymmetricMatrix& b) { return a -= b; }
    friend SymmetricMatrix operator*(double s, SymmetricMatrix a) { return a *= s; }

    // Cholesky-based positive definiteness test (all pivots > 0).
    [[nodiscard]] bool is_positive_definite() const;

    [[nodiscard]] Eigen::VectorXd eigenvalues() const;
    [[nodiscard]] double min_eigenvalue() const;

  private:
    [[nodiscard]] std::size_t index(int i, int j) const;

    int p_;
    std::vector<double> tri_;  // row-major lower triangle, size p(p+1)/2
};

}  // namespace lincov
