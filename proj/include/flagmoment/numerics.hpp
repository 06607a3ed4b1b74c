#pragma once
// Dense linear-algebra helpers shared by every geometry module:
// orthonormal subspaces with projection/intersection/complement,
// kernels and images of linear maps, non-negative least squares, and a
// union-find used for counting connected components of sample clouds.
// Eigen supplies the matrix backend; everything here works in real
// coordinates.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flagmoment/errors.hpp"

namespace flagmoment {

using Mat  = Eigen::MatrixXcd;   // ambient matrices (complex N x N)
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;    // coordinate matrices
using RVec = Eigen::VectorXd;    // coordinate vectors
using cxd  = std::complex<double>;

namespace tol {
inline constexpr double geometric    = 1e-9;   // rank / membership decisions
inline constexpr double orthonormal  = 1e-10;  // basis self-checks
inline constexpr double root_cluster = 1e-7;   // eigenvalue clustering
}

/// A linear subspace of R^n stored as an orthonormal column basis.
/// The zero subspace has a 0-column basis; the ambient dimension is
/// always explicit so mismatches fail loudly instead of broadcasting.
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(Eigen::Index ambient_dim)
        : ambient_(ambient_dim), basis_(ambient_dim, 0) {}

    Subspace(Eigen::Index ambient_dim, RMat basis)
        : ambient_(ambient_dim), basis_(std::move(basis)) {
        if (basis_.rows() != ambient_) {
            throw dimension_error("Subspace: basis rows do not match ambient dimension");
        }
        if (basis_.cols() > 0) {
            const double defect =
                (basis_.transpose() * basis_ - RMat::Identity(basis_.cols(), basis_.cols()))
                    .cwiseAbs()
                    .maxCoeff();
            if (defect > 1e-8) {
                throw validation_error("Subspace: basis is not orthonormal");
            }
        }
    }

    static Subspace full(Eigen::Index ambient_dim) {
        return Subspace(ambient_dim, RMat::Identity(ambient_dim, ambient_dim));
    }

    /// Span of the columns of `vectors` (no orthonormality required).
    static Subspace span(Eigen::Index ambient_dim, const RMat& vectors,
                         double drop_tol = tol::orthonormal);

    Eigen::Index ambient_dim() const { return ambient_; }
    Eigen::Index dim() const { return basis_.cols(); }
    const RMat& basis() const { return basis_; }

    RVec project(const RVec& v) const {
        check_vector(v);
        return basis_ * (basis_.transpose() * v);
    }

    /// Coordinates of (the projection of) v in this basis.
    RVec coords(const RVec& v) const {
        check_vector(v);
        return basis_.transpose() * v;
    }

    RVec from_coords(const RVec& c) const {
        if (c.size() != basis_.cols()) {
            throw dimension_error("Subspace: coordinate vector has wrong length");
        }
        return basis_ * c;
    }

    double distance(const RVec& v) const {
        check_vector(v);
        return (v - project(v)).norm();
    }

    bool contains_vector(const RVec& v, double tolerance = tol::geometric) const {
        return distance(v) <= tolerance * std::max(1.0, v.norm());
    }

    bool contains(const Subspace& other, double tolerance = tol::geometric) const {
        if (other.ambient_dim() != ambient_) {
            throw dimension_error("Subspace::contains: ambient dimensions differ");
        }
        for (Eigen::Index j = 0; j < other.dim(); ++j) {
            if (!contains_vector(other.basis().col(j), tolerance)) return false;
        }
        return true;
    }

    bool equals(const Subspace& other, double tolerance = tol::geometric) const {
        return dim() == other.dim() && contains(other, tolerance) && other.contains(*this, tolerance);
    }

private:
    void check_vector(const RVec& v) const {
        if (v.size() != ambient_) {
            throw dimension_error("Subspace: vector has wrong ambient dimension");
        }
    }

    Eigen::Index ambient_ = 0;
    RMat basis_;
};

/// Modified Gram-Schmidt with a re-orthogonalization pass. Vectors whose
/// residual after projection is below `drop_tol` are dropped, so the
/// result is a basis of the span of the inputs.
inline Subspace orthonormalize(Eigen::Index ambient_dim, const std::vector<RVec>& vectors,
                               double drop_tol = tol::orthonormal) {
    RMat basis(ambient_dim, static_cast<Eigen::Index>(vectors.size()));
    Eigen::Index kept = 0;
    for (const RVec& v : vectors) {
        if (v.size() != ambient_dim) {
            throw dimension_error("orthonormalize: vector has wrong ambient dimension");
        }
        RVec u = v;
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < kept; ++j) {
                u -= basis.col(j).dot(u) * basis.col(j);
            }
        }
        const double r = u.norm();
        if (r < drop_tol) continue;
        basis.col(kept++) = u / r;
    }
    return Subspace(ambient_dim, basis.leftCols(kept));
}

inline Subspace Subspace::span(Eigen::Index ambient_dim, const RMat& vectors, double drop_tol) {
    std::vector<RVec> cols;
    cols.reserve(static_cast<std::size_t>(vectors.cols()));
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) cols.push_back(vectors.col(j));
    return orthonormalize(ambient_dim, cols, drop_tol);
}

/// Numerical rank with threshold `tolerance * max(1, sigma_max)`.
inline Eigen::Index numerical_rank(const RMat& A, double tolerance = tol::geometric) {
    if (A.rows() == 0 || A.cols() == 0) return 0;
    Eigen::JacobiSVD<RMat> svd(A);
    const RVec& s = svd.singularValues();
    const double cut = tolerance * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > cut) ++r;
    return r;
}

/// Right null space of A (the kernel of v -> A v).
inline Subspace kernel_of_map(const RMat& A, double tolerance = tol::geometric) {
    if (A.cols() == 0) return Subspace(0);
    if (A.rows() == 0) return Subspace::full(A.cols());
    Eigen::JacobiSVD<RMat> svd(A, Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    const double cut = tolerance * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > cut) ++r;
    return Subspace(A.cols(), svd.matrixV().rightCols(A.cols() - r));
}

/// Column space of A.
inline Subspace image_of_map(const RMat& A, double tolerance = tol::geometric) {
    if (A.rows() == 0) return Subspace(0);
    if (A.cols() == 0) return Subspace(A.rows());
    Eigen::JacobiSVD<RMat> svd(A, Eigen::ComputeFullU);
    const RVec& s = svd.singularValues();
    const double cut = tolerance * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > cut) ++r;
    return Subspace(A.rows(), svd.matrixU().leftCols(r));
}

inline Subspace orthogonal_complement(const Subspace& S, double tolerance = tol::geometric) {
    return kernel_of_map(S.basis().transpose(), tolerance);
}

/// A cap B computed as the complement of (A-perp + B-perp).
inline Subspace intersection(const Subspace& A, const Subspace& B,
                             double tolerance = tol::geometric) {
    if (A.ambient_dim() != B.ambient_dim()) {
        throw dimension_error("intersection: ambient dimensions differ");
    }
    const Subspace ac = orthogonal_complement(A, tolerance);
    const Subspace bc = orthogonal_complement(B, tolerance);
    RMat stacked(A.ambient_dim(), ac.dim() + bc.dim());
    stacked << ac.basis(), bc.basis();
    return orthogonal_complement(Subspace::span(A.ambient_dim(), stacked), tolerance);
}

inline Subspace subspace_sum(const Subspace& A, const Subspace& B,
                             double tolerance = tol::orthonormal) {
    if (A.ambient_dim() != B.ambient_dim()) {
        throw dimension_error("subspace_sum: ambient dimensions differ");
    }
    RMat stacked(A.ambient_dim(), A.dim() + B.dim());
    stacked << A.basis(), B.basis();
    return Subspace::span(A.ambient_dim(), stacked, tolerance);
}

// ---------------------------------------------------------------------------
// Non-negative least squares (Lawson-Hanson active set). Small systems
// only; used for convex-hull membership when the facet representation is
// unavailable and as an independent check of the facet route.

inline RVec nnls(const RMat& A, const RVec& b, double tolerance = 1e-12, int max_iter = 0) {
    const Eigen::Index n = A.cols();
    if (A.rows() != b.size()) throw dimension_error("nnls: dimensions differ");
    if (max_iter == 0) max_iter = static_cast<int>(8 * std::max<Eigen::Index>(n, 8));
    RVec x = RVec::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    RVec w = A.transpose() * (b - A * x);
    for (int iter = 0; iter < max_iter; ++iter) {
        // most violated KKT multiplier among the active (zero) variables
        Eigen::Index best = -1;
        double best_w = tolerance;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!passive[static_cast<std::size_t>(i)] && w[i] > best_w) {
                best_w = w[i];
                best = i;
            }
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;
        for (;;) {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
            }
            RMat Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t j = 0; j < idx.size(); ++j) Ap.col(static_cast<Eigen::Index>(j)) = A.col(idx[j]);
            const RVec z = Ap.colPivHouseholderQr().solve(b);
            bool feasible = true;
            for (Eigen::Index j = 0; j < z.size(); ++j) {
                if (z[j] <= 0.0) { feasible = false; break; }
            }
            if (feasible) {
                x.setZero();
                for (std::size_t j = 0; j < idx.size(); ++j) x[idx[j]] = z[static_cast<Eigen::Index>(j)];
                break;
            }
            // step toward z until the first passive variable hits zero
            double alpha = 1.0;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const double zj = z[static_cast<Eigen::Index>(j)];
                const double xj = x[idx[j]];
                if (zj <= 0.0 && xj - zj > 0.0) alpha = std::min(alpha, xj / (xj - zj));
            }
            for (std::size_t j = 0; j < idx.size(); ++j) {
                x[idx[j]] += alpha * (z[static_cast<Eigen::Index>(j)] - x[idx[j]]);
                if (x[idx[j]] <= tolerance) {
                    x[idx[j]] = 0.0;
                    passive[static_cast<std::size_t>(idx[j])] = false;
                }
            }
        }
        w = A.transpose() * (b - A * x);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Union-find with component labels numbered by first appearance, so the
// labeling is deterministic for a fixed edge order.

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
};

inline std::vector<int> union_find_components(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    UnionFind uf(n);
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) throw input_error("union_find_components: vertex index out of range");
        uf.unite(a, b);
    }
    std::vector<int> label(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = uf.find(i);
        if (label[root] < 0) label[root] = next++;
        label[i] = label[root];
    }
    return label;
}

inline int component_count(const std::vector<int>& labels) {
    int mx = -1;
    for (int l : labels) mx = std::max(mx, l);
    return mx + 1;
}

} // namespace flagmoment
