#pragma once
// Weyl group of the restricted root system acting on a, orbits of the
// isotropy group through a regular point, the moment map (orthogonal
// projection to a) and its polytope, and the curvature normals of the
// orbit with their focal geometry. The moment image of the full orbit
// equals the hull of the finite Weyl orbit, which is what makes the
// polytope computable exactly.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flagmoment/errors.hpp"
#include "flagmoment/numerics.hpp"
#include "flagmoment/polytope.hpp"
#include "flagmoment/rng.hpp"
#include "flagmoment/symmetric_space.hpp"

namespace flagmoment {

/// exp of a skew-Hermitian matrix through the eigendecomposition of its
/// Hermitian partner i*z; the result is unitary.
inline Mat expm_skew_hermitian(const Mat& z) {
    const Mat h = cxd(0.0, 1.0) * z;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
    const Eigen::Index n = z.rows();
    Mat phase = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        phase(i, i) = std::exp(cxd(0.0, -es.eigenvalues()[i]));
    }
    return es.eigenvectors() * phase * es.eigenvectors().adjoint();
}

/// Conjugation Ad(u) x = u x u^-1 for unitary u.
inline Mat adjoint_action(const Mat& u, const Mat& x) { return u * x * u.adjoint(); }

// ---------------------------------------------------------------------------
// Weyl group

struct WeylGroup {
    Eigen::Index rank = 0;
    std::vector<RMat> elements;    // orthogonal maps on a-coordinates, identity first
    std::vector<RMat> generators;  // the root reflections

    std::size_t order() const { return elements.size(); }

    /// Index of w in elements, or -1 when absent.
    int find(const RMat& w, double tolerance = 1e-8) const {
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if ((elements[i] - w).cwiseAbs().maxCoeff() <= tolerance) return static_cast<int>(i);
        }
        return -1;
    }
};

/// Closure of the root reflections under multiplication (breadth-first,
/// deduplicated at 1e-9). The safety bound guards against a tolerance
/// mishap producing an infinite "group".
inline WeylGroup generate_weyl(const RestrictedRootSystem& roots,
                               std::size_t safety_bound = 1000000) {
    WeylGroup W;
    W.rank = roots.rank;
    const RMat id = RMat::Identity(W.rank, W.rank);

    for (std::size_t i : roots.indivisible) {
        const RVec& a = roots.positive[i].alpha;
        const RMat s = id - 2.0 / a.squaredNorm() * (a * a.transpose());
        bool dup = false;
        for (const RMat& g : W.generators) {
            if ((g - s).cwiseAbs().maxCoeff() <= 1e-9) { dup = true; break; }
        }
        if (!dup) W.generators.push_back(s);
    }

    W.elements.push_back(id);
    std::size_t frontier_start = 0;
    while (frontier_start < W.elements.size()) {
        const std::size_t frontier_end = W.elements.size();
        for (std::size_t i = frontier_start; i < frontier_end; ++i) {
            for (const RMat& g : W.generators) {
                const RMat cand = g * W.elements[i];
                bool known = false;
                for (const RMat& w : W.elements) {
                    if ((w - cand).cwiseAbs().maxCoeff() <= 1e-9) { known = true; break; }
                }
                if (!known) {
                    W.elements.push_back(cand);
                    if (W.elements.size() > safety_bound) {
                        throw numerical_error("generate_weyl: closure exceeded the safety bound");
                    }
                }
            }
        }
        frontier_start = frontier_end;
    }

    // deterministic order: identity first, the rest lexicographic
    std::sort(W.elements.begin() + 1, W.elements.end(), [](const RMat& a, const RMat& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            const double x = a.reshaped()[i], y = b.reshaped()[i];
            if (x < y - 1e-9) return true;
            if (x > y + 1e-9) return false;
        }
        return false;
    });
    return W;
}

/// Orbit W*q, deduplicated at 1e-9 and sorted; each point carries the
/// index of one Weyl element realizing it.
struct WeylOrbitPoint {
    RVec point;
    std::size_t w_index;
};

inline std::vector<WeylOrbitPoint> weyl_orbit(const WeylGroup& W, const RVec& q) {
    if (q.size() != W.rank) throw dimension_error("weyl_orbit: q has wrong length");
    std::vector<WeylOrbitPoint> orbit;
    for (std::size_t i = 0; i < W.elements.size(); ++i) {
        const RVec p = W.elements[i] * q;
        bool known = false;
        for (const auto& o : orbit) {
            if ((o.point - p).norm() <= 1e-9) { known = true; break; }
        }
        if (!known) orbit.push_back({p, i});
    }
    std::sort(orbit.begin(), orbit.end(), [](const WeylOrbitPoint& a, const WeylOrbitPoint& b) {
        for (Eigen::Index c = 0; c < a.point.size(); ++c) {
            if (a.point[c] < b.point[c] - 1e-9) return true;
            if (a.point[c] > b.point[c] + 1e-9) return false;
        }
        return false;
    });
    return orbit;
}

// ---------------------------------------------------------------------------
// Moment map and polytope

/// mu(x): a-coordinates of the orthogonal projection of x onto a.
inline RVec moment_map(const SymmetricSpaceModel& m, const Mat& x) { return m.a_coords(x); }

/// Moment image of the orbit through q: the hull of the Weyl orbit of q.
inline Polytope moment_polytope(const WeylGroup& W, const RVec& q, double tolerance = tol::geometric) {
    std::vector<RVec> pts;
    for (const auto& o : weyl_orbit(W, q)) pts.push_back(o.point);
    return convex_hull(pts, tolerance);
}

inline double min_root_value(const RestrictedRootSystem& roots, const RVec& q) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& r : roots.positive) mn = std::min(mn, std::abs(r.alpha.dot(q)));
    return mn;
}

inline bool is_regular(const RestrictedRootSystem& roots, const RVec& q, double tolerance = 1e-8) {
    return min_root_value(roots, q) > tolerance;
}

/// Deterministic regular unit direction in a, usable as a default base
/// point: decreasing coordinates, jittered if a root happens to vanish.
inline RVec default_regular_direction(const SymmetricSpaceModel& m,
                                      const RestrictedRootSystem& roots) {
    RVec q(m.rank);
    for (Eigen::Index j = 0; j < m.rank; ++j) q[j] = 1.0 / (2.0 + static_cast<double>(j));
    q.normalize();
    RandomStream rng(7);
    for (int attempt = 0; attempt < 64; ++attempt) {
        if (min_root_value(roots, q) > 1e-3) return q;
        q = rng.gaussian_vector(m.rank).normalized();
    }
    throw numerical_error("default_regular_direction: could not find a regular direction");
}

// ---------------------------------------------------------------------------
// Orbit machinery

/// A point of the orbit M = Ad(K) q together with the group element that
/// produced it.
struct OrbitPoint {
    Mat x;        // element of p
    Mat witness;  // unitary u with x = Ad(u) q
};

/// Random orbit points: gaussian directions in k (std 1), exponentiated
/// and applied to q. Per-sample substreams keep the batch reproducible
/// regardless of evaluation order.
inline std::vector<OrbitPoint> sample_orbit(const SymmetricSpaceModel& m, const RVec& q_acoords,
                                            std::size_t count, std::uint64_t seed) {
    const Mat qm = m.a_matrix(q_acoords);
    std::vector<OrbitPoint> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        RandomStream rng = RandomStream::substream(seed, i);
        const RVec zc = rng.gaussian_vector(m.dim_k);
        const Mat u = expm_skew_hermitian(m.k_matrix(zc));
        out[i] = {adjoint_action(u, qm), u};
    }
    return out;
}

struct MomentContainment {
    std::size_t samples = 0;
    std::size_t inside = 0;
    double worst_violation = 0.0;
};

/// Samples the orbit and checks mu(x) against the moment polytope.
inline MomentContainment check_moment_containment(const SymmetricSpaceModel& m,
                                                  const WeylGroup& W, const RVec& q_acoords,
                                                  std::size_t count, std::uint64_t seed,
                                                  double tolerance = 1e-7) {
    const Polytope P = moment_polytope(W, q_acoords);
    MomentContainment r;
    r.samples = count;
    for (const OrbitPoint& o : sample_orbit(m, q_acoords, count, seed)) {
        const double v = P.violation(moment_map(m, o.x));
        r.worst_violation = std::max(r.worst_violation, v);
        if (v <= tolerance) ++r.inside;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Curvature normals

struct CurvatureNormal {
    std::size_t root_index;  // into roots.indivisible
    RVec eta;                // in a-coordinates
    int multiplicity;
    Subspace tangent_block;  // E_alpha(q) = [q, k_alpha + k_2alpha], g-coordinates
};

///// Second-difference pairing <d^2/dt^2 Ad(exp(tz)) q, xi> at t = 0: the
/// finite-difference side of the shape-operator identity. Public so the
/// validation can be reproduced independently of curvature_normals.
inline double fd_second_derivative_pairing(const SymmetricSpaceModel& m, const Mat& q,
                                           const Mat& z, const Mat& xi, double h = 1e-3) {
    const Mat up = adjoint_action(expm_skew_hermitian(h * z), q);
    const Mat dn = adjoint_action(expm_skew_hermitian(-h * z), q);
    return m.inner(up - 2.0 * q + dn, xi) / (h * h);
}

/// Curvature normals eta_alpha = -alpha-sharp / alpha(q) of the orbit
/// through regular q, one per indivisible positive root, each with its
/// tangent block E_alpha(q). With validate set, the shape-operator
/// identity <A_xi u, u> = <eta, xi> |u|^2 is checked by second
/// differences and the focal data (<eta,q> = -1, eta parallel to alpha)
/// is asserted.
inline std::vector<CurvatureNormal> curvature_normals(const SymmetricSpaceModel& m,
                                                      const RestrictedRootSystem& roots,
                                                      const RVec& q_acoords,
                                                      bool validate = true) {
    if (!is_regular(roots, q_acoords)) {
        throw input_error("curvature_normals: q must be regular (no vanishing root)");
    }
    const Mat qm = m.a_matrix(q_acoords);
    std::vector<CurvatureNormal> out;

    for (std::size_t ii = 0; ii < roots.indivisible.size(); ++ii) {
        const RestrictedRoot& root = roots.positive[roots.indivisible[ii]];
        CurvatureNormal cn;
        cn.root_index = ii;
        cn.multiplicity = roots.multiplicities[ii];
        cn.eta = -root.alpha / root.alpha.dot(q_acoords);

        // E_alpha(q) = [q, k_alpha + k_2alpha]
        Subspace k_block = root.k_space;
        if (root.two_alpha_index >= 0) {
            k_block = subspace_sum(k_block, roots.positive[static_cast<std::size_t>(root.two_alpha_index)].k_space);
        }
        std::vector<RVec> image;
        for (Eigen::Index j = 0; j < k_block.dim(); ++j) {
            const Mat z = m.from_coords(k_block.basis().col(j));
            image.push_back(m.to_coords(commutator(qm, z)));
        }
        cn.tangent_block = orthonormalize(m.dim(), image, 1e-9);
        if (cn.tangent_block.dim() != cn.multiplicity) {
            throw numerical_error("curvature_normals: tangent block dimension disagrees with the multiplicity");
        }

        if (validate) {
            // focal data: <eta, q> = -1 and eta on the alpha-line, so the
            // focal hyperplane is the wall ker(alpha)
            if (std::abs(cn.eta.dot(q_acoords) + 1.0) > 1e-8) {
                throw numerical_error("curvature_normals: <eta, q> = -1 failed");
            }
            const RVec residual =
                cn.eta - cn.eta.dot(root.alpha) / root.alpha.squaredNorm() * root.alpha;
            if (residual.norm() > 1e-8 * cn.eta.norm()) {
                throw numerical_error("curvature_normals: eta is not parallel to its root");
            }

            // shape operator by second differences along orbit curves
            RMat lift_map(m.dim_p(), k_block.dim());
            for (Eigen::Index j = 0; j < k_block.dim(); ++j) {
                const Mat z = m.from_coords(k_block.basis().col(j));
                lift_map.col(j) = m.p_coords(commutator(z, qm));
            }
            const Eigen::Index n_dirs = std::min<Eigen::Index>(cn.tangent_block.dim(), 3);
            for (Eigen::Index d = 0; d < n_dirs; ++d) {
                const RVec u = cn.tangent_block.basis().col(d);
                const RVec u_p = u.tail(m.dim_p());
                const RVec zeta = lift_map.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(u_p);
                const Mat z = m.from_coords(k_block.from_coords(zeta));
                // Truncation error in the second difference grows like
                // (h |z|)^2, and |z| ~ 1/|alpha(q)| can be large near a
                // wall; shrink the step accordingly.
                const double h = 1e-3 / std::max(1.0, z.norm());
                for (Eigen::Index j = 0; j < std::min<Eigen::Index>(m.rank, 2); ++j) {
                    const Mat xi = m.basis_a(j);
                    const double fd = fd_second_derivative_pairing(m, qm, z, xi, h);
                    const double predicted = cn.eta[j];  // <eta, a_j> |u|^2 with |u| = 1
                    if (std::abs(fd - predicted) > 1e-5 * std::max(1.0, std::abs(predicted))) {
                        throw numerical_error("curvature_normals: finite-difference shape check failed");
                    }
                }
            }
        }
        out.push_back(std::move(cn));
    }
    return out;
}

} // namespace flagmoment
