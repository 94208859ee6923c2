#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lincov/symmetric_matrix.hpp"

namespace lincov {

// Point in model coordinates (length r).
using ParameterVector = Eigen::VectorXd;

// Rooted tree given by a parent array; parent[i] == -1 marks the root.
// Node ids are 0-based indices into `parent`; `leaves` lists the p leaf ids
// in the order that fixes the rows/columns of the covariance matrix.
struct TreeSpec {
    std::vector<int> parent;
    std::vector<int> leaves;

    [[nodiscard]] int node_count() const { return static_cast<int>(parent.size()); }

    // Throws InvalidTree unless `parent` encodes a single rooted tree and
    // `leaves` lists exactly the childless nodes (in any order, no repeats).
    void validate() const;
};

// Covariance family Sigma_v = G0 + sum_i v_i * G_i over symmetric matrices.
// The basis G_1..G_r must be linearly independent and G0 orthogonal to its
// span (checked at construction; the Gram matrix tr(G_i G_j) is cached).
class LinearCovarianceModel {
  public:
    LinearCovarianceModel(SymmetricMatrix g0, std::vector<SymmetricMatrix> basis);

    [[nodiscard]] int dim() const { return p_; }
    [[nodiscard]] int size() const { return static_cast<int>(basis_.size()); }

    [[nodiscard]] const SymmetricMatrix& g0() const { return g0_; }
    [[nodiscard]] const SymmetricMatrix& basis(int i) const { return basis_.at(i); }
    [[nodiscard]] const std::vector<SymmetricMatrix>& basis() const { return basis_; }
    [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
    [[nodiscard]] bool g0_is_zero() const { return g0_zero_; }

    [[nodiscard]] SymmetricMatrix sigma_of(const ParameterVector& v) const;

    // True iff Sigma_v is positive definite (Cholesky test).
    [[nodiscard]] bool is_in_theta(const ParameterVector& v) const;

    // Solves gram * w = [tr(A G_j)] — the coordinates of the orthogonal
    // projection of A onto span{G_1..G_r}.
    [[nodiscard]] ParameterVector project_coordinates(const SymmetricMatrix& a) const;

    // Coordinates of A if A - G0 lies in the span (within rel_tol of the
    // Frobenius norm of A), otherwise nullopt.
    [[nodiscard]] std::optional<ParameterVector> coordinates_of(const SymmetricMatrix& a,
                                                                double rel_tol = 1e-8) const;

  private:
    int p_;
    SymmetricMatrix g0_;
    std::vector<SymmetricMatrix> basis_;
    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> gram_llt_;
    bool g0_zero_;
};

// Validated construction of a model from explicit matrices.
LinearCovarianceModel build_model(const SymmetricMatrix& g0,
                                  const std::vector<SymmetricMatrix>& basis);

// All p x p correlation matrices: G0 = I, basis {E_ij + E_ji : i < j}
// ordered lexicographically by (i, j); r = p(p-1)/2.
LinearCovarianceModel correlation_model(int p);

// Brownian motion tree model: G0 = 0 and one basis matrix
// e_de(i) e_de(i)^T per tree node (root branch included), where de(i) is the
// indicator of the leaves descending from node i. Basis in node-id order.
LinearCovarianceModel brownian_tree_model(const TreeSpec& tree);

// Circular serial correlation family: G0 = 0, basis {I_p, C} with
// C_ij = 1 iff |i-j| = 1 (mod p); r = 2.
LinearCovarianceModel circular_serial_model(int p);

// Star tree on p leaves: every leaf attached directly to the root.
TreeSpec star_tree(int p);

}  // namespace lincov
