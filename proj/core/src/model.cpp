#include "lincov/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lincov {

namespace {
constexpr double kIndependenceTol = 1e-10;  // relative, on Gram eigenvalues
constexpr double kOrthogonalityTol = 1e-10;  // relative, on tr(G0 G_i)
}  // namespace

void TreeSpec::validate() const {
    const int m = node_count();
    if (m < 2) throw InvalidTree("tree needs at least 2 nodes, got " + std::to_string(m));

    int root = -1;
    std::vector<int> child_count(m, 0);
    for (int i = 0; i < m; ++i) {
        if (parent[i] == -1) {
            if (root != -1) throw InvalidTree("multiple roots (nodes " + std::to_string(root) +
                                              " and " + std::to_string(i) + ")");
            root = i;
        } else if (parent[i] < 0 || parent[i] >= m) {
            throw InvalidTree("node " + std::to_string(i) + " has parent " +
                              std::to_string(parent[i]) + " outside [0," + std::to_string(m) + ")");
        } else {
            ++child_count[parent[i]];
        }
    }
    if (root == -1) throw InvalidTree("no root (every node has a parent)");

    // Walking parent pointers from every node must reach the root without
    // revisiting — this rules out cycles and disconnected components.
    for (int i = 0; i < m; ++i) {
        int hops = 0;
        for (int v = i; v != root; v = parent[v]) {
            if (++hops > m) throw InvalidTree("cycle reachable from node " + std::to_string(i));
        }
    }

    if (leaves.empty()) throw InvalidTree("leaf list is empty");
    std::vector<bool> seen(m, false);
    for (int leaf : leaves) {
        if (leaf < 0 || leaf >= m) {
            throw InvalidTree("leaf id " + std::to_string(leaf) + " outside node range");
        }
        if (seen[leaf]) throw InvalidTree("leaf id " + std::to_string(leaf) + " repeated");
        seen[leaf] = true;
        if (child_count[leaf] != 0) {
            throw InvalidTree("node " + std::to_string(leaf) + " listed as leaf but has children");
        }
    }
    for (int i = 0; i < m; ++i) {
        if (child_count[i] == 0 && !seen[i]) {
            throw InvalidTree("childless node " + std::to_string(i) + " missing from leaf list");
        }
    }
}

LinearCovarianceModel::LinearCovarianceModel(SymmetricMatrix g0,
                                             std::vector<SymmetricMatrix> basis)
    : p_(g0.dim()), g0_(std::move(g0)), basis_(std::move(basis)) {
    if (basis_.empty()) throw InvalidDimension("model needs a non-empty basis");
    for (const auto& g : basis_) {
        if (g.dim() != p_) {
            throw DimensionMismatch("basis matrix dimension " + std::to_string(g.dim()) +
                                    " does not match G0 dimension " + std::to_string(p_));
        }
    }

    const int r = static_cast<int>(basis_.size());
    gram_.resize(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j <= i; ++j)
            gram_(i, j) = gram_(j, i) = SymmetricMatrix::trace_product(basis_[i], basis_[j]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_, Eigen::EigenvaluesOnly);
    const double max_eig = es.eigenvalues().maxCoeff();
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < kIndependenceTol * max_eig) {
        throw LinearlyDependentBasis("basis is linearly dependent (Gram eigenvalue ratio " +
                                     std::to_string(min_eig / max_eig) + ")");
    }

    const double g0_norm = g0_.frobenius_norm();
    g0_zero_ = (g0_norm == 0.0);
    if (!g0_zero_) {
        for (int i = 0; i < r; ++i) {
            const double dot = SymmetricMatrix::trace_product(g0_, basis_[i]);
            const double scale = g0_norm * basis_[i].frobenius_norm();
            if (std::abs(dot) > kOrthogonalityTol * scale) {
                throw NonOrthogonalG0("tr(G0 G_" + std::to_string(i + 1) + ") = " +
                                      std::to_string(dot) + " violates orthogonality");
            }
        }
    }

    gram_llt_.compute(gram_);
    if (gram_llt_.info() != Eigen::Success) {
        throw LinearlyDependentBasis("Gram matrix Cholesky failed");
    }
}

SymmetricMatrix LinearCovarianceModel::sigma_of(const ParameterVector& v) const {
    if (v.size() != size()) {
        throw DimensionMismatch("parameter length " + std::to_string(v.size()) +
                                " does not match model size " + std::to_string(size()));
    }
    SymmetricMatrix sigma = g0_;
    for (int i = 0; i < size(); ++i) {
        if (v[i] != 0.0) sigma += v[i] * basis_[i];
    }
    return sigma;
}

bool LinearCovarianceModel::is_in_theta(const ParameterVector& v) const {
    return sigma_of(v).is_positive_definite();
}

ParameterVector LinearCovarianceModel::project_coordinates(const SymmetricMatrix& a) const {
    if (a.dim() != p_) {
        throw DimensionMismatch("matrix dimension " + std::to_string(a.dim()) +
                                " does not match model dimension " + std::to_string(p_));
    }
    Eigen::VectorXd rhs(size());
    for (int j = 0; j < size(); ++j) rhs[j] = SymmetricMatrix::trace_product(a, basis_[j]);
    return gram_llt_.solve(rhs);
}

std::optional<ParameterVector> LinearCovarianceModel::coordinates_of(const SymmetricMatrix& a,
                                                                     double rel_tol) const {
    SymmetricMatrix shifted = a;
    shifted -= g0_;
    ParameterVector w = project_coordinates(shifted);
    SymmetricMatrix residual = sigma_of(w);
    residual -= a;
    const double scale = std::max(a.frobenius_norm(), 1e-300);
    if (residual.frobenius_norm() > rel_tol * scale) return std::nullopt;
    return w;
}

LinearCovarianceModel build_model(const SymmetricMatrix& g0,
                                  const std::vector<SymmetricMatrix>& basis) {
    return LinearCovarianceModel(g0, basis);
}

LinearCovarianceModel correlation_model(int p) {
    if (p < 2) throw InvalidDimension("correlation model needs p >= 2, got " + std::to_string(p));
    std::vector<SymmetricMatrix> basis;
    basis.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            SymmetricMatrix e(p);
            e.set(i, j, 1.0);  // one packed cell covers both (i,j) and (j,i)
            basis.push_back(e);
        }
    }
    return LinearCovarianceModel(SymmetricMatrix::identity(p), std::move(basis));
}

LinearCovarianceModel brownian_tree_model(const TreeSpec& tree) {
    tree.validate();
    const int m = tree.node_count();
    const int p = static_cast<int>(tree.leaves.size());
    if (p < 2) throw InvalidTree("tree model needs at least 2 leaves");

    // leaf node id -> row index of the covariance matrix
    std::vector<int> leaf_row(m, -1);
    for (int k = 0; k < p; ++k) leaf_row[tree.leaves[k]] = k;

    // descendant leaf indicator per node: walk each leaf up to the root
    std::vector<std::vector<bool>> descends(m, std::vector<bool>(p, false));
    for (int k = 0; k < p; ++k) {
        int v = tree.leaves[k];
        descends[v][k] = true;
        while (tree.parent[v] != -1) {
            v = tree.parent[v];
            descends[v][k] = true;
        }
    }

    std::vector<SymmetricMatrix> basis;
    basis.reserve(m);
    for (int node = 0; node < m; ++node) {
        SymmetricMatrix g(p);
        for (int i = 0; i < p; ++i) {
            if (!descends[node][i]) continue;
            for (int j = 0; j <= i; ++j) {
                if (descends[node][j]) g.set(i, j, 1.0);
            }
        }
        basis.push_back(g);
    }

    try {
        return LinearCovarianceModel(SymmetricMatrix(p), std::move(basis));
    } catch (const LinearlyDependentBasis& e) {
        // Topologies like a non-root chain node with a single child give two
        // nodes the same descendant set, hence duplicate basis matrices.
        throw DegenerateModel(std::string("tree induces a dependent basis: ") + e.what());
    }
}

LinearCovarianceModel circular_serial_model(int p) {
    if (p < 3) {
        throw InvalidDimension("circular serial model needs p >= 3, got " + std::to_string(p));
    }
    SymmetricMatrix adjacency(p);
    for (int i = 0; i < p; ++i) {
        adjacency.set(i, (i + 1) % p, 1.0);
    }
    std::vector<SymmetricMatrix> basis{SymmetricMatrix::identity(p), adjacency};
    return LinearCovarianceModel(SymmetricMatrix(p), std::move(basis));
}

TreeSpec star_tree(int p) {
    if (p < 2) throw InvalidTree("star tree needs p >= 2 leaves, got " + std::to_string(p));
    TreeSpec tree;
    tree.parent.assign(p + 1, p);  // nodes 0..p-1 are leaves, node p is the root
    tree.parent[p] = -1;
    tree.leaves.resize(p);
    for (int i = 0; i < p; ++i) tree.leaves[i] = i;
    return tree;
}

}  // namespace lincov
