#pragma once
// Compact symmetric pairs presented concretely: a Lie algebra g of
// skew-Hermitian matrices with an involution, split g = k + p, and a
// maximal abelian subspace a inside p. The catalog builds the standard
// families; arbitrary models round-trip through a validated document
// format. Restricted roots, their k/p root spaces, multiplicities, and
// centralizers are computed numerically from the bracket.
//
// Conventions: the invariant inner product is <x,y> = -Re tr(xy), under
// which every stored basis is orthonormal. The basis is always laid out
// [k | a | rest of p], so the involution acts as +1 on the first dim_k
// coordinates and -1 on the rest. Restricted-root functionals are stored
// in a-coordinates: alpha acts on x in a as the euclidean pairing with
// coords(x).

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "flagmoment/errors.hpp"
#include "flagmoment/numerics.hpp"
#include "flagmoment/rng.hpp"

namespace flagmoment {

inline double trace_inner(const Mat& x, const Mat& y) {
    // tr(xy) without forming the product
    return -(x.transpose().cwiseProduct(y).sum()).real();
}

struct SymmetricSpaceModel {
    std::string name;
    std::vector<int> params;
    Eigen::Index matrix_size = 0;  // matrices are matrix_size x matrix_size complex
    Eigen::Index dim_k = 0;
    Eigen::Index rank = 0;
    std::vector<Mat> basis;        // orthonormal, layout [k | a | rest of p]
    double inner_scale = 1.0;      // recorded scale of -Re tr(xy)

    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
    Eigen::Index dim_p() const { return dim() - dim_k; }

    Subspace k_space() const {
        RMat b = RMat::Zero(dim(), dim_k);
        b.topRows(dim_k).setIdentity();
        return Subspace(dim(), b);
    }
    Subspace p_space() const {
        RMat b = RMat::Zero(dim(), dim_p());
        b.bottomRows(dim_p()).setIdentity();
        return Subspace(dim(), b);
    }
    Subspace a_space() const {
        RMat b = RMat::Zero(dim(), rank);
        b.block(dim_k, 0, rank, rank).setIdentity();
        return Subspace(dim(), b);
    }

    /// Involution on g-coordinates: +1 on k, -1 on p.
    RMat involution() const {
        RVec d(dim());
        d.head(dim_k).setOnes();
        d.tail(dim_p()).setConstant(-1.0);
        return d.asDiagonal();
    }

    double inner(const Mat& x, const Mat& y) const { return inner_scale * trace_inner(x, y); }

    RVec to_coords(const Mat& x) const {
        RVec c(dim());
        for (Eigen::Index i = 0; i < dim(); ++i) c[i] = inner(basis[static_cast<std::size_t>(i)], x);
        return c;
    }

    Mat from_coords(const RVec& c) const {
        if (c.size() != dim()) throw dimension_error("from_coords: wrong coordinate length");
        Mat x = Mat::Zero(matrix_size, matrix_size);
        for (Eigen::Index i = 0; i < dim(); ++i) x += c[i] * basis[static_cast<std::size_t>(i)];
        return x;
    }

    /// a-coordinates of (the a-projection of) x.
    RVec a_coords(const Mat& x) const {
        RVec c(rank);
        for (Eigen::Index j = 0; j < rank; ++j) {
            c[j] = inner(basis[static_cast<std::size_t>(dim_k + j)], x);
        }
        return c;
    }

    Mat a_matrix(const RVec& a_coords_vec) const {
        if (a_coords_vec.size() != rank) throw dimension_error("a_matrix: wrong coordinate length");
        Mat x = Mat::Zero(matrix_size, matrix_size);
        for (Eigen::Index j = 0; j < rank; ++j) {
            x += a_coords_vec[j] * basis[static_cast<std::size_t>(dim_k + j)];
        }
        return x;
    }

    const Mat& basis_k(Eigen::Index i) const { return basis[static_cast<std::size_t>(i)]; }
    const Mat& basis_p(Eigen::Index i) const { return basis[static_cast<std::size_t>(dim_k + i)]; }
    const Mat& basis_a(Eigen::Index j) const { return basis[static_cast<std::size_t>(dim_k + j)]; }

    /// p-coordinates (length dim_p) of a matrix known to lie in p.
    RVec p_coords(const Mat& x) const {
        RVec c(dim_p());
        for (Eigen::Index i = 0; i < dim_p(); ++i) c[i] = inner(basis_p(i), x);
        return c;
    }

    Mat p_matrix(const RVec& c) const {
        if (c.size() != dim_p()) throw dimension_error("p_matrix: wrong coordinate length");
        Mat x = Mat::Zero(matrix_size, matrix_size);
        for (Eigen::Index i = 0; i < dim_p(); ++i) x += c[i] * basis_p(i);
        return x;
    }

    /// k-coordinates (length dim_k) of a matrix known to lie in k.
    RVec k_coords(const Mat& x) const {
        RVec c(dim_k);
        for (Eigen::Index i = 0; i < dim_k; ++i) c[i] = inner(basis_k(i), x);
        return c;
    }

    Mat k_matrix(const RVec& c) const {
        if (c.size() != dim_k) throw dimension_error("k_matrix: wrong coordinate length");
        Mat x = Mat::Zero(matrix_size, matrix_size);
        for (Eigen::Index i = 0; i < dim_k; ++i) x += c[i] * basis_k(i);
        return x;
    }
};

inline Mat commutator(const Mat& x, const Mat& y) { return x * y - y * x; }

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void check(bool ok, const std::string& what) {
    if (!ok) throw validation_error("model validation failed: " + what);
}

} // namespace detail

/// Structural self-check; throws validation_error naming the first
/// violated property.
inline void validate_model(const SymmetricSpaceModel& m) {
    using detail::check;
    const Eigen::Index n = m.dim();
    check(m.matrix_size >= 1, "matrix size must be positive");
    check(n >= 1, "empty basis");
    check(m.dim_k >= 0 && m.rank >= 1 && m.dim_k + m.rank <= n, "inconsistent dim_k/rank layout");

    for (const Mat& x : m.basis) {
        check(x.rows() == m.matrix_size && x.cols() == m.matrix_size, "basis matrix has wrong size");
        check((x + x.adjoint()).norm() <= 1e-10 * std::max(1.0, x.norm()), "basis matrix not skew-Hermitian");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double g = m.inner(m.basis[static_cast<std::size_t>(i)], m.basis[static_cast<std::size_t>(j)]);
            check(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-8, "basis not orthonormal");
        }
    }

    // bracket closure and compatibility with the k/p split
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Mat br = commutator(m.basis[static_cast<std::size_t>(i)], m.basis[static_cast<std::size_t>(j)]);
            const RVec c = m.to_coords(br);
            check((m.from_coords(c) - br).norm() <= 1e-8 * std::max(1.0, br.norm()),
                  "bracket leaves the span of the basis");
            const bool i_in_k = i < m.dim_k;
            const bool j_in_k = j < m.dim_k;
            const double k_part = c.head(m.dim_k).norm();
            const double p_part = c.tail(m.dim_p()).norm();
            if (i_in_k == j_in_k) {
                check(p_part <= 1e-8, "involution is not an automorphism ([k,k] or [p,p] leaks into p)");
            } else {
                check(k_part <= 1e-8, "involution is not an automorphism ([k,p] leaks into k)");
            }
        }
    }

    // a is abelian ...
    for (Eigen::Index i = 0; i < m.rank; ++i) {
        for (Eigen::Index j = i + 1; j < m.rank; ++j) {
            check(commutator(m.basis_a(i), m.basis_a(j)).norm() <= 1e-10, "a is not abelian");
        }
    }
    // ... and maximal: the zero-weight space of ad(a) on p is a itself
    // (brackets of a against p land in k, so the map goes p -> k)
    RMat stacked(m.rank * m.dim_k, m.dim_p());
    for (Eigen::Index j = 0; j < m.rank; ++j) {
        for (Eigen::Index i = 0; i < m.dim_p(); ++i) {
            stacked.block(j * m.dim_k, i, m.dim_k, 1) =
                m.k_coords(commutator(m.basis_a(j), m.basis_p(i)));
        }
    }
    const Subspace zero_p = kernel_of_map(stacked, 1e-9);
    check(zero_p.dim() == m.rank, "zero-weight space exceeds a (a is not maximal abelian in p)");
}

// ---------------------------------------------------------------------------
// Catalog

namespace detail {

/// Orthonormal basis of su(N): diagonal directions then off-diagonal
/// pairs, all unit length for -Re tr(xy).
inline std::vector<Mat> su_basis(Eigen::Index N) {
    std::vector<Mat> out;
    const cxd I(0.0, 1.0);
    for (Eigen::Index mth = 1; mth < N; ++mth) {
        Mat d = Mat::Zero(N, N);
        for (Eigen::Index t = 0; t < mth; ++t) d(t, t) = I;
        d(mth, mth) = -static_cast<double>(mth) * I;
        out.push_back(d / std::sqrt(static_cast<double>(mth * (mth + 1))));
    }
    for (Eigen::Index r = 0; r < N; ++r) {
        for (Eigen::Index s = r + 1; s < N; ++s) {
            Mat x = Mat::Zero(N, N), y = Mat::Zero(N, N);
            x(r, s) = 1.0;
            x(s, r) = -1.0;
            y(r, s) = I;
            y(s, r) = I;
            out.push_back(x / std::sqrt(2.0));
            out.push_back(y / std::sqrt(2.0));
        }
    }
    return out;
}

/// Gram-Schmidt over matrices with the trace inner product.
inline std::vector<Mat> matrix_onb(const std::vector<Mat>& raw, double drop_tol = 1e-10) {
    std::vector<Mat> onb;
    for (const Mat& x : raw) {
        Mat u = x;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Mat& b : onb) u -= trace_inner(b, u) * b;
        }
        const double r = std::sqrt(std::max(0.0, trace_inner(u, u)));
        if (r < drop_tol) continue;
        onb.push_back(u / r);
    }
    return onb;
}

/// Assembles a model from a spanning set of g, an involution given as a
/// matrix map, and the chosen maximal abelian subspace; the basis is
/// re-ordered to the [k | a | rest of p] layout and validated.
inline SymmetricSpaceModel assemble_model(std::string name, std::vector<int> params,
                                          Eigen::Index N, const std::vector<Mat>& g_raw,
                                          const std::function<Mat(const Mat&)>& tau,
                                          const std::vector<Mat>& a_choice) {
    const std::vector<Mat> g_onb = matrix_onb(g_raw);
    const Eigen::Index n = static_cast<Eigen::Index>(g_onb.size());

    RMat theta(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Mat tj = tau(g_onb[static_cast<std::size_t>(j)]);
        Mat recon = Mat::Zero(N, N);
        for (Eigen::Index i = 0; i < n; ++i) {
            theta(i, j) = trace_inner(g_onb[static_cast<std::size_t>(i)], tj);
            recon += theta(i, j) * g_onb[static_cast<std::size_t>(i)];
        }
        if ((recon - tj).norm() > 1e-9 * std::max(1.0, tj.norm())) {
            throw validation_error("catalog assembly: involution does not preserve g");
        }
    }
    if ((theta * theta - RMat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9) {
        throw validation_error("catalog assembly: involution does not square to the identity");
    }

    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (theta + theta.transpose()));
    std::vector<Mat> k_mats, p_mats;
    for (Eigen::Index c = 0; c < n; ++c) {
        const double lambda = es.eigenvalues()[c];
        if (std::abs(std::abs(lambda) - 1.0) > 1e-8) {
            throw validation_error("catalog assembly: involution eigenvalue away from +-1");
        }
        Mat v = Mat::Zero(N, N);
        for (Eigen::Index i = 0; i < n; ++i) {
            v += es.eigenvectors()(i, c) * g_onb[static_cast<std::size_t>(i)];
        }
        (lambda > 0 ? k_mats : p_mats).push_back(v);
    }

    std::vector<Mat> a_onb = matrix_onb(a_choice);
    if (a_onb.size() != a_choice.size()) {
        throw validation_error("catalog assembly: chosen a directions are dependent");
    }
    // p-basis completing a: project the p eigenvectors against a
    std::vector<Mat> ordered = a_onb;
    for (const Mat& x : p_mats) ordered.push_back(x);
    std::vector<Mat> p_ordered = matrix_onb(ordered);
    if (p_ordered.size() != p_mats.size()) {
        throw validation_error("catalog assembly: a does not lie in p");
    }

    SymmetricSpaceModel m;
    m.name = std::move(name);
    m.params = std::move(params);
    m.matrix_size = N;
    m.dim_k = static_cast<Eigen::Index>(k_mats.size());
    m.rank = static_cast<Eigen::Index>(a_onb.size());
    m.basis = std::move(k_mats);
    for (Mat& x : p_ordered) m.basis.push_back(std::move(x));
    validate_model(m);
    return m;
}

} // namespace detail

/// Round sphere presented as a symmetric pair of rank one with a single
/// multiplicity-one root: orbits are circles.
inline SymmetricSpaceModel build_su2_over_so2() {
    const std::vector<Mat> g = detail::su_basis(2);
    auto tau = [](const Mat& x) { return Mat(x.conjugate()); };
    // a = the diagonal direction
    std::vector<Mat> a = {g[0]};
    return detail::assemble_model("su2-over-so2", {}, 2, g, tau, a);
}

/// Adjoint orbits of SU(n): the pair (g + g, diagonal), with p a copy of
/// su(n) and restricted roots the full A_{n-1} system, multiplicity 2.
inline SymmetricSpaceModel build_adjoint_su(int n) {
    if (n < 2 || n > 6) throw input_error("adjoint-su: parameter n must be in [2,6]");
    const Eigen::Index nn = n;
    const std::vector<Mat> small = detail::su_basis(nn);
    const Eigen::Index N = 2 * nn;
    std::vector<Mat> g;
    for (const Mat& x : small) {
        Mat top = Mat::Zero(N, N), bot = Mat::Zero(N, N);
        top.topLeftCorner(nn, nn) = x;
        bot.bottomRightCorner(nn, nn) = x;
        g.push_back(top);
        g.push_back(bot);
    }
    auto tau = [nn, N](const Mat& x) {
        Mat y = Mat::Zero(N, N);
        y.topLeftCorner(nn, nn) = x.bottomRightCorner(nn, nn);
        y.bottomRightCorner(nn, nn) = x.topLeftCorner(nn, nn);
        return y;
    };
    std::vector<Mat> a;
    for (int mth = 1; mth < n; ++mth) {
        const Mat& d = small[static_cast<std::size_t>(mth - 1)];
        Mat x = Mat::Zero(N, N);
        x.topLeftCorner(nn, nn) = d;
        x.bottomRightCorner(nn, nn) = -d;
        a.push_back(x / std::sqrt(2.0));
    }
    return detail::assemble_model("adjoint-su", {n}, N, g, tau, a);
}

/// SU(2n)/Sp(n): rank n-1, type A_{n-1}, every multiplicity 4.
inline SymmetricSpaceModel build_su2n_over_spn(int n) {
    if (n < 2 || n > 4) throw input_error("su2n-over-spn: parameter n must be in [2,4]");
    const Eigen::Index nn = n;
    const Eigen::Index N = 2 * nn;
    const std::vector<Mat> g = detail::su_basis(N);
    Mat J = Mat::Zero(N, N);
    J.topRightCorner(nn, nn) = Mat::Identity(nn, nn);
    J.bottomLeftCorner(nn, nn) = -Mat::Identity(nn, nn);
    auto tau = [J](const Mat& x) { return Mat(-J * x.conjugate() * J); };
    // a = repeated traceless diagonals diag(iD, iD)
    std::vector<Mat> a;
    const std::vector<Mat> small = detail::su_basis(nn);
    for (int mth = 1; mth < n; ++mth) {
        const Mat& d = small[static_cast<std::size_t>(mth - 1)];
        Mat x = Mat::Zero(N, N);
        x.topLeftCorner(nn, nn) = d;
        x.bottomRightCorner(nn, nn) = d;
        a.push_back(x / std::sqrt(2.0));
    }
    return detail::assemble_model("su2n-over-spn", {n}, N, g, tau, a);
}

/// SU(m+n)/S(U(m) x U(n)): complex Grassmannian, rank min(m,n), type BC
/// (or C when m = n).
inline SymmetricSpaceModel build_su_over_s_uxu(int m, int n) {
    if (m < 1 || n < 1 || m + n < 2 || m + n > 8) {
        throw input_error("su-over-s-uxu: parameters must satisfy m,n >= 1 and 2 <= m+n <= 8");
    }
    const Eigen::Index N = m + n;
    const std::vector<Mat> g = detail::su_basis(N);
    RVec s(N);
    for (Eigen::Index i = 0; i < N; ++i) s[i] = i < m ? 1.0 : -1.0;
    auto tau = [s](const Mat& x) { return Mat(s.asDiagonal() * x * s.asDiagonal()); };
    std::vector<Mat> a;
    const Eigen::Index r = std::min(m, n);
    for (Eigen::Index j = 0; j < r; ++j) {
        Mat x = Mat::Zero(N, N);
        x(j, m + j) = 1.0;
        x(m + j, j) = -1.0;
        a.push_back(x / std::sqrt(2.0));
    }
    return detail::assemble_model("su-over-s-uxu", {m, n}, N, g, tau, a);
}

/// The projective-plane example SU(3)/U(2): rank one with roots alpha and
/// 2*alpha, multiplicity 2 + 1 = 3.
inline SymmetricSpaceModel build_su3_over_u2() {
    SymmetricSpaceModel m = build_su_over_s_uxu(1, 2);
    m.name = "su3-over-u2";
    m.params.clear();
    return m;
}

struct CatalogEntry {
    std::string name;
    std::string display;
    std::string params_doc;
    std::size_t n_params;
    std::function<SymmetricSpaceModel(const std::vector<int>&)> build;
};

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"su2-over-so2", "SU(2)/SO(2)", "(none)", 0,
         [](const std::vector<int>&) { return build_su2_over_so2(); }},
        {"su3-over-u2", "SU(3)/U(2)", "(none)", 0,
         [](const std::vector<int>&) { return build_su3_over_u2(); }},
        {"adjoint-su", "adjoint orbits of SU(n)", "n in [2,6]", 1,
         [](const std::vector<int>& p) { return build_adjoint_su(p[0]); }},
        {"su2n-over-spn", "SU(2n)/Sp(n)", "n in [2,4]", 1,
         [](const std::vector<int>& p) { return build_su2n_over_spn(p[0]); }},
        {"su-over-s-uxu", "SU(m+n)/S(U(m) x U(n))", "m,n >= 1, m+n <= 8", 2,
         [](const std::vector<int>& p) { return build_su_over_s_uxu(p[0], p[1]); }},
    };
    return entries;
}

inline SymmetricSpaceModel build_catalog_model(const std::string& name,
                                               const std::vector<int>& params = {}) {
    for (const auto& e : catalog()) {
        if (e.name == name) {
            if (params.size() != e.n_params) {
                throw input_error("catalog model '" + name + "' expects " +
                                  std::to_string(e.n_params) + " parameter(s): " + e.params_doc);
            }
            return e.build(params);
        }
    }
    std::string known;
    for (const auto& e : catalog()) known += (known.empty() ? "" : ", ") + e.name;
    throw input_error("unknown catalog model '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Restricted roots

struct RestrictedRoot {
    RVec alpha;                 // functional in a-coordinates
    Subspace k_space;           // root space intersected with k (g-coordinates)
    Subspace p_space;           // ... and with p
    Eigen::MatrixXcd witness;   // complex root-space basis (g-coordinates)
    bool indivisible = true;
    int two_alpha_index = -1;   // index into positive[] when 2*alpha is a root

    double operator()(const RVec& a_coords_vec) const { return alpha.dot(a_coords_vec); }
};

struct RestrictedRootSystem {
    std::vector<RestrictedRoot> positive;    // all positive roots, divisible included
    std::vector<std::size_t> indivisible;    // indices into positive
    std::vector<int> multiplicities;         // m_alpha per indivisible root
    Subspace k0;                             // centralizer of a in k (g-coordinates)
    Eigen::Index rank = 0;

    const RestrictedRoot& indivisible_root(std::size_t i) const { return positive[indivisible[i]]; }
};

namespace detail {

struct WeightCluster {
    RVec weight;                // partial weight vector
    Eigen::MatrixXcd basis;     // complex orthonormal columns, g-coordinates
};

/// Real span of the columns of a complex matrix, as a subspace of the
/// real coordinate space.
inline Subspace real_span(const Eigen::MatrixXcd& cols, Eigen::Index ambient) {
    std::vector<RVec> vs;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        vs.push_back(cols.col(j).real());
        vs.push_back(cols.col(j).imag());
    }
    return orthonormalize(ambient, vs, 1e-8);
}

} // namespace detail

/// Joint eigenspace decomposition of ad(a) on the complexification,
/// clustered at `cluster_tol`; returns the positive restricted roots with
/// their k/p root spaces, multiplicities over the indivisible roots, and
/// the centralizer k0. Fails loudly when the zero-weight space of p
/// exceeds a (that is, when a was not maximal abelian).
inline RestrictedRootSystem restricted_roots(const SymmetricSpaceModel& m,
                                             double cluster_tol = tol::root_cluster) {
    const Eigen::Index n = m.dim();

    // real matrices of ad(a_j) on g-coordinates
    std::vector<RMat> ad(static_cast<std::size_t>(m.rank));
    for (Eigen::Index j = 0; j < m.rank; ++j) {
        RMat R(n, n);
        for (Eigen::Index t = 0; t < n; ++t) {
            R.col(t) = m.to_coords(commutator(m.basis_a(j), m.basis[static_cast<std::size_t>(t)]));
        }
        ad[static_cast<std::size_t>(j)] = R;
    }

    // simultaneous diagonalization by recursive clustering; i*ad(a_j) is
    // Hermitian on the complexified coordinates
    std::vector<detail::WeightCluster> clusters;
    clusters.push_back({RVec(0), Eigen::MatrixXcd::Identity(n, n)});
    for (Eigen::Index j = 0; j < m.rank; ++j) {
        const Eigen::MatrixXcd iR = cxd(0.0, 1.0) * ad[static_cast<std::size_t>(j)].cast<cxd>();
        std::vector<detail::WeightCluster> next;
        for (const auto& cl : clusters) {
            const Eigen::MatrixXcd H = cl.basis.adjoint() * iR * cl.basis;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
            const RVec& ev = es.eigenvalues();
            Eigen::Index start = 0;
            for (Eigen::Index c = 1; c <= ev.size(); ++c) {
                if (c == ev.size() || ev[c] - ev[start] > cluster_tol) {
                    detail::WeightCluster sub;
                    sub.weight = RVec(j + 1);
                    sub.weight.head(j) = cl.weight;
                    // eigenvalue of i*ad(a_j) on the root space of alpha is -alpha(a_j)
                    sub.weight[j] = -ev.segment(start, c - start).mean();
                    sub.basis = cl.basis * es.eigenvectors().middleCols(start, c - start);
                    next.push_back(std::move(sub));
                    start = c;
                }
            }
        }
        clusters = std::move(next);
    }

    RestrictedRootSystem sys;
    sys.rank = m.rank;

    // zero-weight cluster: k0 plus (exactly) a
    const Subspace k_sub = m.k_space();
    const Subspace p_sub = m.p_space();
    const Subspace a_sub = m.a_space();
    std::vector<std::pair<RVec, Eigen::MatrixXcd>> nonzero;
    bool saw_zero = false;
    for (auto& cl : clusters) {
        if (cl.weight.norm() <= 10.0 * cluster_tol) {
            saw_zero = true;
            const Subspace v0 = detail::real_span(cl.basis, n);
            std::vector<RVec> k_parts, p_parts;
            for (Eigen::Index j = 0; j < v0.dim(); ++j) {
                k_parts.push_back(k_sub.project(v0.basis().col(j)));
                p_parts.push_back(p_sub.project(v0.basis().col(j)));
            }
            sys.k0 = orthonormalize(n, k_parts, 1e-8);
            const Subspace p0 = orthonormalize(n, p_parts, 1e-8);
            if (p0.dim() != m.rank || !p0.contains(a_sub, 1e-7)) {
                throw validation_error("restricted roots: zero-weight space exceeds a");
            }
        } else {
            nonzero.emplace_back(cl.weight, cl.basis);
        }
    }
    if (!saw_zero) sys.k0 = Subspace(n);

    // keep one representative of each +-alpha pair, on the positive side
    // of a fixed generic functional
    RVec generic(m.rank);
    for (Eigen::Index j = 0; j < m.rank; ++j) generic[j] = 1.0 / (1.0 + 0.6180339887498949 * static_cast<double>(j));
    {
        RandomStream rng(411);
        int guard = 0;
        auto separated = [&] {
            for (const auto& [w, b] : nonzero) {
                if (std::abs(generic.dot(w)) <= 1e-6 * w.norm()) return false;
            }
            return true;
        };
        while (!separated()) {
            generic = rng.gaussian_vector(m.rank);
            if (++guard > 50) throw numerical_error("restricted roots: could not separate roots from zero");
        }
    }

    for (auto& [w, basis] : nonzero) {
        if (generic.dot(w) < 0.0) continue;
        // fold in the mirror cluster -alpha
        Eigen::MatrixXcd mirror;
        for (auto& [w2, basis2] : nonzero) {
            if ((w + w2).norm() <= 10.0 * cluster_tol) {
                mirror = basis2;
                break;
            }
        }
        if (mirror.cols() == 0) throw numerical_error("restricted roots: unpaired root cluster");
        Eigen::MatrixXcd both(n, basis.cols() + mirror.cols());
        both << basis, mirror;

        RestrictedRoot root;
        root.alpha = w;
        root.witness = basis;
        const Subspace va = detail::real_span(both, n);
        std::vector<RVec> k_parts, p_parts;
        for (Eigen::Index j = 0; j < va.dim(); ++j) {
            k_parts.push_back(k_sub.project(va.basis().col(j)));
            p_parts.push_back(p_sub.project(va.basis().col(j)));
        }
        root.k_space = orthonormalize(n, k_parts, 1e-8);
        root.p_space = orthonormalize(n, p_parts, 1e-8);
        if (root.k_space.dim() != basis.cols() || root.p_space.dim() != basis.cols()) {
            throw numerical_error("restricted roots: root space does not split evenly between k and p");
        }
        sys.positive.push_back(std::move(root));
    }

    // deterministic order
    std::sort(sys.positive.begin(), sys.positive.end(),
              [](const RestrictedRoot& a, const RestrictedRoot& b) {
                  for (Eigen::Index c = 0; c < a.alpha.size(); ++c) {
                      if (a.alpha[c] < b.alpha[c] - 1e-9) return true;
                      if (a.alpha[c] > b.alpha[c] + 1e-9) return false;
                  }
                  return false;
              });

    // divisibility bookkeeping
    for (std::size_t i = 0; i < sys.positive.size(); ++i) {
        for (std::size_t j = 0; j < sys.positive.size(); ++j) {
            if ((2.0 * sys.positive[i].alpha - sys.positive[j].alpha).norm() <= 10.0 * cluster_tol) {
                sys.positive[i].two_alpha_index = static_cast<int>(j);
            }
            if ((0.5 * sys.positive[i].alpha - sys.positive[j].alpha).norm() <= 10.0 * cluster_tol) {
                sys.positive[i].indivisible = false;
            }
        }
    }
    for (std::size_t i = 0; i < sys.positive.size(); ++i) {
        if (!sys.positive[i].indivisible) continue;
        sys.indivisible.push_back(i);
        int mult = static_cast<int>(sys.positive[i].k_space.dim());
        if (sys.positive[i].two_alpha_index >= 0) {
            mult += static_cast<int>(sys.positive[static_cast<std::size_t>(sys.positive[i].two_alpha_index)].k_space.dim());
        }
        sys.multiplicities.push_back(mult);
    }

    // defining relation [x, z] = i alpha(x) z spot-checked on every root
    RandomStream rng(2025);
    const RVec xa = rng.gaussian_vector(m.rank);
    const Mat xmat = m.a_matrix(xa);
    for (const auto& root : sys.positive) {
        for (Eigen::Index c = 0; c < root.witness.cols(); ++c) {
            Mat z = Mat::Zero(m.matrix_size, m.matrix_size);
            for (Eigen::Index t = 0; t < n; ++t) {
                z += root.witness(t, c) * m.basis[static_cast<std::size_t>(t)];
            }
            const Mat lhs = commutator(xmat, z);
            const Mat rhs = cxd(0.0, 1.0) * root.alpha.dot(xa) * z;
            if ((lhs - rhs).norm() > 1e-8 * std::max(1.0, z.norm())) {
                throw numerical_error("restricted roots: defining relation failed a spot check");
            }
        }
    }

    // dimension bookkeeping: everything accounted for
    Eigen::Index total = sys.k0.dim() + m.rank;
    for (const auto& root : sys.positive) total += root.k_space.dim() + root.p_space.dim();
    if (total != n) throw numerical_error("restricted roots: dimensions do not sum to dim g");

    return sys;
}

// ---------------------------------------------------------------------------
// Centralizers

/// Z_k(b) for b in a, as a subspace of g-coordinates. Computed as the
/// kernel of ad(b): k -> p and cross-checked against the root-space sum
/// k0 + sum of k_alpha over roots vanishing at b.
inline Subspace centralizer_in_k(const SymmetricSpaceModel& m, const RestrictedRootSystem& roots,
                                 const RVec& b, double tolerance = tol::geometric) {
    if (b.size() != m.rank) throw dimension_error("centralizer_in_k: b has wrong length");
    const Mat bm = m.a_matrix(b);
    RMat map(m.dim_p(), m.dim_k);
    for (Eigen::Index i = 0; i < m.dim_k; ++i) map.col(i) = m.p_coords(commutator(m.basis_k(i), bm));
    const Subspace ker_k = kernel_of_map(map, tolerance);  // k-coordinates
    std::vector<RVec> lifted;
    for (Eigen::Index j = 0; j < ker_k.dim(); ++j) {
        RVec v = RVec::Zero(m.dim());
        v.head(m.dim_k) = ker_k.basis().col(j);
        lifted.push_back(v);
    }
    const Subspace kernel_route = orthonormalize(m.dim(), lifted, 1e-10);

    Subspace formula = roots.k0;
    const double scale = std::max(1.0, b.norm());
    for (const auto& root : roots.positive) {
        if (std::abs(root.alpha.dot(b)) <= 1e-8 * scale) {
            formula = subspace_sum(formula, root.k_space);
        }
    }
    if (!kernel_route.equals(formula, 1e-7)) {
        throw numerical_error("centralizer_in_k: kernel and root-space formula disagree");
    }
    return kernel_route;
}

/// Z_p(b): the kernel of ad(b): p -> k; equals a + sum of p_alpha over
/// roots vanishing at b.
inline Subspace centralizer_in_p(const SymmetricSpaceModel& m, const RestrictedRootSystem& roots,
                                 const RVec& b, double tolerance = tol::geometric) {
    if (b.size() != m.rank) throw dimension_error("centralizer_in_p: b has wrong length");
    const Mat bm = m.a_matrix(b);
    RMat map(m.dim_k, m.dim_p());
    for (Eigen::Index i = 0; i < m.dim_p(); ++i) map.col(i) = m.k_coords(commutator(m.basis_p(i), bm));
    const Subspace ker_p = kernel_of_map(map, tolerance);  // p-coordinates
    std::vector<RVec> lifted;
    for (Eigen::Index j = 0; j < ker_p.dim(); ++j) {
        RVec v = RVec::Zero(m.dim());
        v.tail(m.dim_p()) = ker_p.basis().col(j);
        lifted.push_back(v);
    }
    const Subspace kernel_route = orthonormalize(m.dim(), lifted, 1e-10);

    Subspace formula = m.a_space();
    const double scale = std::max(1.0, b.norm());
    for (const auto& root : roots.positive) {
        if (std::abs(root.alpha.dot(b)) <= 1e-8 * scale) {
            formula = subspace_sum(formula, root.p_space);
        }
    }
    if (!kernel_route.equals(formula, 1e-7)) {
        throw numerical_error("centralizer_in_p: kernel and root-space formula disagree");
    }
    return kernel_route;
}

// ---------------------------------------------------------------------------
// Document IO

inline nlohmann::ordered_json model_to_json(const SymmetricSpaceModel& m) {
    nlohmann::ordered_json doc;
    doc["schema"] = "flagmoment-model/1";
    doc["name"] = m.name;
    doc["params"] = m.params;
    doc["matrix_size"] = m.matrix_size;
    doc["dim_k"] = m.dim_k;
    doc["rank"] = m.rank;
    doc["inner_scale"] = m.inner_scale;
    auto& basis = doc["basis"] = nlohmann::ordered_json::array();
    for (const Mat& x : m.basis) {
        nlohmann::ordered_json entry = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                entry.push_back(x(r, c).real());
                entry.push_back(x(r, c).imag());
            }
        }
        basis.push_back(std::move(entry));
    }
    return doc;
}

inline SymmetricSpaceModel model_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("schema").get<std::string>() != "flagmoment-model/1") {
            throw input_error("model document: unknown schema (expected flagmoment-model/1)");
        }
        SymmetricSpaceModel m;
        m.name = doc.at("name").get<std::string>();
        if (doc.contains("params")) m.params = doc.at("params").get<std::vector<int>>();
        m.matrix_size = doc.at("matrix_size").get<Eigen::Index>();
        m.dim_k = doc.at("dim_k").get<Eigen::Index>();
        m.rank = doc.at("rank").get<Eigen::Index>();
        if (doc.contains("inner_scale")) m.inner_scale = doc.at("inner_scale").get<double>();
        const Eigen::Index N = m.matrix_size;
        if (N < 1 || N > 64) throw input_error("model document: matrix_size out of range [1,64]");
        if (m.dim_k < 0 || m.rank < 1 || doc.at("basis").size() > 4096) {
            throw input_error("model document: implausible dimensions");
        }
        for (const auto& entry : doc.at("basis")) {
            const auto flat = entry.get<std::vector<double>>();
            if (static_cast<Eigen::Index>(flat.size()) != 2 * N * N) {
                throw input_error("model document: basis entry has wrong length");
            }
            Mat x(N, N);
            std::size_t idx = 0;
            for (Eigen::Index r = 0; r < N; ++r) {
                for (Eigen::Index c = 0; c < N; ++c) {
                    x(r, c) = cxd(flat[idx], flat[idx + 1]);
                    idx += 2;
                }
            }
            m.basis.push_back(std::move(x));
        }
        validate_model(m);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("model document: ") + e.what());
    }
}

inline void save_model(const SymmetricSpaceModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("save_model: cannot open '" + path + "' for writing");
    out << model_to_json(m).dump(2) << "\n";
}

inline SymmetricSpaceModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("load_model: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("load_model: malformed document: ") + e.what());
    }
    return model_from_json(doc);
}

} // namespace flagmoment
