#pragma once
// Critical structure of the squared moment-distance f(x) = |mu(x) - a|^2
// on an isotropy orbit M = Ad(K) q: monotone gradient flows with a
// Gauss-Newton finish, finite enumeration of critical levels, critical
// components with Morse indices, Hessian assembly and a minimal-
// degeneracy audit, fiber sampling, and connectivity verdicts for the
// fibers mu^{-1}(a).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flagmoment/parallel.hpp"
#include "flagmoment/weyl.hpp"

namespace flagmoment {

// ---------------------------------------------------------------------------
// Objective, gradient, height functions

/// f(x) = |mu(x) - a|^2.
inline double fiber_objective(const SymmetricSpaceModel& m, const Mat& x, const RVec& a) {
    return (moment_map(m, x) - a).squaredNorm();
}

namespace detail {

/// Columns are p-coordinates of [u_j, x] for u_j running over the
/// columns (g-coordinates) of dir_basis. Its image is the tangent space
/// of the orbit of x under the subgroup generated by those directions.
inline RMat lift_matrix(const SymmetricSpaceModel& m, const Mat& x, const RMat& dir_basis) {
    RMat L(m.dim_p(), dir_basis.cols());
    for (Eigen::Index j = 0; j < dir_basis.cols(); ++j) {
        L.col(j) = m.p_coords(commutator(m.from_coords(dir_basis.col(j)), x));
    }
    return L;
}

/// Embed an a-coordinate vector into p-coordinates (a sits first in the
/// p block of the model layout).
inline RVec embed_a_in_p(const SymmetricSpaceModel& m, const RVec& v) {
    RVec out = RVec::Zero(m.dim_p());
    out.head(m.rank) = v;
    return out;
}

/// One-parameter subgroup through a fixed skew-Hermitian z, factored so
/// that exp(t z) for many t costs one matrix product each.
struct ExpCurve {
    Mat vectors;
    RVec freqs;

    explicit ExpCurve(const Mat& z) {
        Eigen::SelfAdjointEigenSolver<Mat> es(cxd(0.0, 1.0) * z);
        if (es.info() != Eigen::Success) throw numerical_error("ExpCurve: eigensolver failed");
        vectors = es.eigenvectors();
        freqs = es.eigenvalues();
    }

    /// exp(t z)
    Mat at(double t) const {
        CVec phases(freqs.size());
        for (Eigen::Index k = 0; k < freqs.size(); ++k) {
            phases[k] = std::exp(cxd(0.0, -t * freqs[k]));
        }
        return vectors * phases.asDiagonal() * vectors.adjoint();
    }
};

} // namespace detail

/// Gradient of f on the orbit at x: the orthogonal projection of
/// 2(mu(x) - a) onto the tangent space [k, x], in p-coordinates. A zero
/// gradient is exactly the critical-point condition.
inline RVec grad_f(const SymmetricSpaceModel& m, const Mat& x, const RVec& a) {
    if (a.size() != m.rank) throw dimension_error("grad_f: a has wrong length");
    const RMat L = detail::lift_matrix(m, x, m.k_space().basis());
    const RVec rhs = detail::embed_a_in_p(m, 2.0 * (moment_map(m, x) - a));
    Eigen::BDCSVD<RMat> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return L * svd.solve(rhs);
}

/// Linear height h_b(x) = <b, x> = <b, mu(x)> for b in a.
struct HeightFunction {
    RVec b;

    double value(const SymmetricSpaceModel& m, const Mat& x) const {
        return trace_inner(m.a_matrix(b), x);
    }

    /// Tangential projection of b at x, in p-coordinates; vanishes
    /// exactly on the critical set of the height.
    RVec gradient(const SymmetricSpaceModel& m, const Mat& x) const {
        const RMat L = detail::lift_matrix(m, x, m.k_space().basis());
        const RVec rhs = detail::embed_a_in_p(m, b);
        Eigen::BDCSVD<RMat> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return L * svd.solve(rhs);
    }
};

// ---------------------------------------------------------------------------
// Descent on the orbit

struct DescentOptions {
    int max_iterations = 600;       // gradient-flow steps
    double grad_tol = 1e-10;        // stop when the restricted gradient is this small
    double target = -1.0;           // stop once f <= target (ignored when negative)
    double initial_step = 0.1;
    double polish_threshold = 1e-4; // hand over to Gauss-Newton below this f
    int max_polish = 40;
};

struct DescentResult {
    Mat x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimizes |mu(x) - target|^2 over the orbit of x0 under the subgroup
/// with Lie algebra `directions` (a subspace of k in g-coordinates).
/// Steps are first-order retractions x <- Ad(exp(-eta z)) x with z the
/// minimal-norm lift of the gradient, kept monotone by a halving line
/// search; once the residual is small, Gauss-Newton steps on the moment
/// residual finish the job quadratically.
inline DescentResult descend_to_moment_target(const SymmetricSpaceModel& m, const Mat& x0,
                                              const RVec& target, const Subspace& directions,
                                              const DescentOptions& opt = {}) {
    if (target.size() != m.rank) throw dimension_error("descend_to_moment_target: bad target");
    const RMat dirs = directions.basis();
    const Eigen::Index nd = dirs.cols();
    std::vector<Mat> u;
    u.reserve(static_cast<std::size_t>(nd));
    for (Eigen::Index j = 0; j < nd; ++j) u.push_back(m.from_coords(dirs.col(j)));

    DescentResult res;
    Mat x = x0;
    RVec r = moment_map(m, x) - target;
    double f = r.squaredNorm();
    if (nd == 0) {
        // No directions to move along: the start is the answer.
        res.x = std::move(x);
        res.f = f;
        res.grad_norm = grad_f(m, res.x, target).norm();
        res.converged = opt.target >= 0.0 ? f <= opt.target : true;
        return res;
    }
    double eta = opt.initial_step;
    const bool has_target = opt.target >= 0.0;
    const double grad_break = std::max(opt.polish_threshold, has_target ? opt.target : 0.0);

    auto gradient_phase = [&](int budget) {
        for (int it = 0; it < budget; ++it) {
            if (f <= grad_break) return;
            RMat L(m.dim_p(), nd);
            for (Eigen::Index j = 0; j < nd; ++j) L.col(j) = m.p_coords(commutator(u[j], x));
            const RVec rhs = detail::embed_a_in_p(m, 2.0 * r);
            Eigen::BDCSVD<RMat> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const RVec zeta = svd.solve(rhs);
            const RVec grad_p = L * zeta;
            const double g2 = grad_p.squaredNorm();
            res.grad_norm = std::sqrt(g2);
            if (res.grad_norm <= opt.grad_tol) return;
            const detail::ExpCurve curve(m.from_coords(directions.from_coords(zeta)));
            bool accepted = false;
            for (int half = 0; half < 48; ++half) {
                const Mat xn = adjoint_action(curve.at(-eta), x);
                const RVec rn = moment_map(m, xn) - target;
                const double fn = rn.squaredNorm();
                if (fn <= f - 1e-4 * eta * g2) {
                    x = xn;
                    r = rn;
                    f = fn;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            ++res.iterations;
            if (!accepted) return;  // flat to machine precision
            eta = std::min(eta * 2.0, 1.0);
        }
    };

    auto newton_phase = [&]() {
        for (int it = 0; it < opt.max_polish; ++it) {
            if ((has_target && f <= opt.target) || f <= 1e-28) return;
            RMat J(m.rank, nd);
            for (Eigen::Index j = 0; j < nd; ++j) J.col(j) = m.a_coords(commutator(u[j], x));
            Eigen::BDCSVD<RMat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const RVec step = svd.solve(-r);
            const detail::ExpCurve curve(m.from_coords(directions.from_coords(step)));
            double s = 1.0;
            bool accepted = false;
            for (int half = 0; half < 30; ++half) {
                const Mat xn = adjoint_action(curve.at(s), x);
                const RVec rn = moment_map(m, xn) - target;
                const double fn = rn.squaredNorm();
                if (fn < f) {
                    x = xn;
                    r = rn;
                    f = fn;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            ++res.iterations;
            if (!accepted) return;
        }
    };

    gradient_phase(opt.max_iterations);
    newton_phase();
    if (has_target && f > opt.target && res.iterations < opt.max_iterations + opt.max_polish) {
        // One more gradient stint pulls out of a slow region, then retry.
        gradient_phase(opt.max_iterations / 2);
        newton_phase();
    }

    // Report the unrestricted gradient so callers can certify criticality.
    res.x = std::move(x);
    res.f = f;
    res.grad_norm = grad_f(m, res.x, target).norm();
    res.converged = has_target ? f <= opt.target : res.grad_norm <= opt.grad_tol;
    return res;
}

// ---------------------------------------------------------------------------
// Critical level enumeration

struct CriticalCandidate {
    RVec b;
    double level = 0.0;              // |b|^2
    std::vector<int> active_roots;   // indivisible indices with alpha_i(b) = 0
};

/// All possible critical values b of mu - a on the orbit of q: for every
/// subset I of indivisible root walls, the affine slice a + (walls of I)
/// meets the hull of each sub-Weyl-orbit in at most one point; that
/// point, when the hull contains it, contributes b = point - a. The
/// sub-orbits range over W_I-orbits of Weyl points, W_I being the
/// pointwise stabilizer of the wall intersection.
inline std::vector<CriticalCandidate> enumerate_critical_levels(
    const SymmetricSpaceModel& m, const RestrictedRootSystem& roots, const WeylGroup& W,
    const RVec& q, const RVec& a, double tolerance = 1e-8) {
    if (q.size() != m.rank || a.size() != m.rank) {
        throw dimension_error("enumerate_critical_levels: bad q or a length");
    }
    if (!is_regular(roots, q)) {
        throw input_error("enumerate_critical_levels: q must be regular");
    }
    const std::size_t n_ind = roots.indivisible.size();
    if (n_ind > 16) throw input_error("enumerate_critical_levels: too many root walls");

    std::vector<RVec> found;
    for (std::uint32_t mask = 0; mask < (1u << n_ind); ++mask) {
        // Wall intersection and its pointwise stabilizer in W.
        std::vector<RVec> rows;
        for (std::size_t i = 0; i < n_ind; ++i) {
            if (mask & (1u << i)) rows.push_back(roots.indivisible_root(i).alpha);
        }
        RMat alpha_rows(static_cast<Eigen::Index>(rows.size()), m.rank);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            alpha_rows.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        }
        const Subspace walls = kernel_of_map(alpha_rows, tol::geometric);
        std::vector<const RMat*> stab;
        for (const RMat& w : W.elements) {
            if (walls.dim() == 0 || (w * walls.basis() - walls.basis()).norm() <= 1e-9) {
                stab.push_back(&w);
            }
        }

        // One candidate per stabilizer orbit of Weyl points.
        std::vector<RVec> covered;
        auto seen = [&](const RVec& y) {
            for (const RVec& c : covered) {
                if ((c - y).norm() <= 1e-9) return true;
            }
            return false;
        };
        for (const RMat& w : W.elements) {
            const RVec y = w * q;
            if (seen(y)) continue;
            std::vector<RVec> orbit;
            for (const RMat* v : stab) {
                const RVec vy = (*v) * y;
                bool dup = false;
                for (const RVec& o : orbit) {
                    if ((o - vy).norm() <= 1e-9) {
                        dup = true;
                        break;
                    }
                }
                if (!dup) orbit.push_back(vy);
            }
            covered.insert(covered.end(), orbit.begin(), orbit.end());
            const Polytope hull = convex_hull(orbit, tol::geometric);
            const RMat& B = hull.chart_basis();
            const RVec c = hull.chart_origin() + B * (B.transpose() * (a - hull.chart_origin()));
            if (hull.violation(c) <= 1e-7) found.push_back(c - a);
        }
    }

    // Merge near-duplicates, smallest level first.
    std::sort(found.begin(), found.end(), [](const RVec& x, const RVec& y) {
        const double lx = x.squaredNorm(), ly = y.squaredNorm();
        if (std::abs(lx - ly) > 1e-14) return lx < ly;
        return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(),
                                            y.data() + y.size());
    });
    std::vector<CriticalCandidate> out;
    for (const RVec& b : found) {
        bool dup = false;
        for (const CriticalCandidate& c : out) {
            if ((c.b - b).norm() <= tolerance) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        CriticalCandidate cand;
        cand.b = b;
        cand.level = b.squaredNorm();
        const double scale = std::max(1.0, b.norm());
        for (std::size_t i = 0; i < n_ind; ++i) {
            if (std::abs(roots.indivisible_root(i).alpha.dot(b)) <= 1e-9 * scale) {
                cand.active_roots.push_back(static_cast<int>(i));
            }
        }
        out.push_back(std::move(cand));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Critical components

struct CriticalComponent {
    RVec b;                       // zero for the minimum set
    std::size_t weyl_index = 0;   // representative w into W.elements
    double level = 0.0;           // |b|^2
    Mat representative;           // x0 with mu(x0) = a + b, [x0, b] = 0
    double f_at_representative = 0.0;
    double grad_norm = 0.0;       // |grad f(x0)|
    int index = 0;                // sum of multiplicities over <b, eta_i> < 0
    std::vector<int> active_roots;
    bool resolved = false;
    double slice_height_residual = 0.0;  // |h_b(x0) - h_b(w q)|
    double slice_grad_norm = 0.0;        // |grad h_b(x0)|
};

namespace detail {

/// Morse index and active walls of the component through w q for offset
/// b: pair b against the curvature normals at w q and sum multiplicities
/// over the strictly negative pairings.
inline void index_from_normals(const SymmetricSpaceModel& m, const RestrictedRootSystem& roots,
                               const RVec& wq, const RVec& b, int& index,
                               std::vector<int>& active) {
    index = 0;
    active.clear();
    const auto normals = curvature_normals(m, roots, wq, false);
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const double pairing = b.dot(normals[i].eta);
        const double thr = 1e-8 * std::max(1.0, b.norm() * normals[i].eta.norm());
        if (pairing < -thr) {
            index += normals[i].multiplicity;
        } else if (pairing <= thr) {
            active.push_back(static_cast<int>(i));
        }
    }
}

/// Newton iterations on the critical-point equation [x, mu(x) - a] = 0
/// over the full isotropy algebra: SVD least-squares steps (the critical
/// set is a manifold, so the Jacobian is singular along it) kept
/// monotone in |phi| by a halving line search. `u` holds the lifted
/// k-basis; phi_norm reports the final residual.
inline Mat newton_critical_polish(const SymmetricSpaceModel& m, Mat x, const Mat& am,
                                  const std::vector<Mat>& u, int budget, double& phi_norm) {
    for (int it = 0; it < budget; ++it) {
        const Mat bm = m.a_matrix(moment_map(m, x)) - am;
        const RVec phi = m.k_coords(commutator(x, bm));
        phi_norm = phi.norm();
        if (phi_norm <= 1e-11) return x;
        RMat J(m.dim_k, m.dim_k);
        for (Eigen::Index j = 0; j < m.dim_k; ++j) {
            const Mat v = commutator(u[j], x);
            J.col(j) = m.k_coords(commutator(v, bm) +
                                  commutator(x, m.a_matrix(m.a_coords(v))));
        }
        Eigen::BDCSVD<RMat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RVec step = svd.solve(-phi);
        const ExpCurve curve(m.k_matrix(step));
        double s = 1.0;
        bool accepted = false;
        const double merit = phi_norm * phi_norm;
        for (int half = 0; half < 30; ++half) {
            const Mat xn = adjoint_action(curve.at(s), x);
            const Mat bn = m.a_matrix(moment_map(m, xn)) - am;
            const double mn = m.k_coords(commutator(xn, bn)).squaredNorm();
            if (mn < merit) {
                x = xn;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) return x;
    }
    const Mat bm = m.a_matrix(moment_map(m, x)) - am;
    phi_norm = m.k_coords(commutator(x, bm)).norm();
    return x;
}

} // namespace detail

/// Resolve candidates into critical components: for each nonzero b and
/// each Weyl point w q whose height along b matches <a+b, b>, descend
/// within the b-centralizer orbit of w q to a representative of
/// mu^{-1}(a+b) on that slice, certify it, and compute the Morse index.
/// Weyl points connected by the stabilizer of b carry the same slice and
/// are merged. The b = 0 component is the fiber mu^{-1}(a) itself.
inline std::vector<CriticalComponent> resolve_critical_components(
    const SymmetricSpaceModel& m, const RestrictedRootSystem& roots, const WeylGroup& W,
    const RVec& q, const RVec& a, const std::vector<CriticalCandidate>& candidates,
    std::uint64_t seed = 0x6d6f727365ULL) {
    if (!is_regular(roots, q)) {
        throw input_error("resolve_critical_components: q must be regular");
    }
    const Mat qm = m.a_matrix(q);
    const Mat am = m.a_matrix(a);
    const RMat k_basis = m.k_space().basis();
    std::vector<Mat> k_lifts;
    for (Eigen::Index j = 0; j < m.dim_k; ++j) k_lifts.push_back(m.from_coords(k_basis.col(j)));
    std::vector<CriticalComponent> out;

    DescentOptions opt;
    opt.target = 1e-18;
    opt.max_iterations = 800;

    auto descend_from = [&](const Mat& start, const RVec& target_mu, const Subspace& dirs,
                            std::uint64_t perturb_key) -> DescentResult {
        DescentResult best;
        best.f = std::numeric_limits<double>::infinity();
        for (int attempt = 0; attempt < 5; ++attempt) {
            RandomStream rng = RandomStream::substream(seed, perturb_key * 8 + attempt);
            RVec coeffs = rng.gaussian_vector(dirs.dim());
            if (coeffs.size() > 0 && coeffs.norm() > 0) coeffs *= 0.05 / coeffs.norm();
            const Mat x0 =
                dirs.dim() > 0
                    ? adjoint_action(expm_skew_hermitian(m.from_coords(dirs.from_coords(coeffs))),
                                     start)
                    : start;
            DescentResult r = descend_to_moment_target(m, x0, target_mu, dirs, opt);
            if (r.f < best.f) best = std::move(r);
            if (best.converged) break;
        }
        return best;
    };

    std::size_t cand_idx = 0;
    for (const CriticalCandidate& cand : candidates) {
        ++cand_idx;
        if (cand.level <= 1e-16) {
            // Minimum set: the fiber itself, reached from a generic start.
            CriticalComponent comp;
            comp.b = RVec::Zero(m.rank);
            comp.weyl_index = 0;
            comp.level = 0.0;
            DescentResult r = descend_from(qm, a, m.k_space(), 1);
            comp.representative = r.x;
            comp.f_at_representative = r.f;
            comp.grad_norm = r.grad_norm;
            comp.resolved = r.converged && r.grad_norm <= 1e-7;
            comp.index = 0;  // b = 0 pairs to zero against every normal
            for (std::size_t i = 0; i < roots.indivisible.size(); ++i) {
                comp.active_roots.push_back(static_cast<int>(i));
            }
            out.push_back(std::move(comp));
            continue;
        }

        const RVec c = a + cand.b;
        const double wanted_height = c.dot(cand.b);
        const Subspace dirs = centralizer_in_k(m, roots, cand.b);
        const HeightFunction height{cand.b};

        // Accepted Weyl points and their merge classes under the
        // stabilizer of b.
        std::vector<std::size_t> accepted;
        for (std::size_t wi = 0; wi < W.elements.size(); ++wi) {
            const RVec wq = W.elements[wi] * q;
            if (std::abs(wq.dot(cand.b) - wanted_height) <= 1e-8 * std::max(1.0, cand.level)) {
                accepted.push_back(wi);
            }
        }
        std::vector<const RMat*> stab_b;
        for (const RMat& v : W.elements) {
            if ((v * cand.b - cand.b).norm() <= 1e-9 * std::max(1.0, cand.b.norm())) {
                stab_b.push_back(&v);
            }
        }
        UnionFind uf(accepted.size());
        for (std::size_t i = 0; i < accepted.size(); ++i) {
            const RVec yi = W.elements[accepted[i]] * q;
            for (const RMat* v : stab_b) {
                const RVec vy = (*v) * yi;
                for (std::size_t j = i + 1; j < accepted.size(); ++j) {
                    if ((W.elements[accepted[j]] * q - vy).norm() <= 1e-9) uf.unite(i, j);
                }
            }
        }

        std::vector<char> emitted(accepted.size(), 0);
        for (std::size_t i = 0; i < accepted.size(); ++i) {
            const std::size_t root_class = uf.find(i);
            if (emitted[root_class]) continue;
            emitted[root_class] = 1;

            CriticalComponent comp;
            comp.b = cand.b;
            comp.weyl_index = accepted[i];
            comp.level = cand.level;
            const RVec wq = W.elements[comp.weyl_index] * q;
            const Mat wqm = m.a_matrix(wq);
            DescentResult r = descend_from(wqm, c, dirs, cand_idx * 64 + comp.weyl_index);
            bool certified = r.converged;
            if (!certified) {
                // When the slice moment image is lower-dimensional the
                // target sits at the edge of first-order reach (long
                // descents leak height off the exact slice); Newton on
                // the critical-point equation over the full isotropy
                // algebra restores quadratic convergence there.
                double phi = std::numeric_limits<double>::infinity();
                const Mat polished = detail::newton_critical_polish(m, r.x, am, k_lifts, 60, phi);
                if (phi <= 1e-11) {
                    r.x = polished;
                    certified = true;
                }
            }
            comp.representative = r.x;
            comp.f_at_representative = fiber_objective(m, r.x, a);
            comp.grad_norm = grad_f(m, r.x, a).norm();
            comp.slice_height_residual =
                std::abs(height.value(m, r.x) - height.value(m, wqm));
            comp.slice_grad_norm = height.gradient(m, r.x).norm();
            comp.resolved = certified && comp.grad_norm <= 1e-7 &&
                            comp.slice_height_residual <= 1e-8 && comp.slice_grad_norm <= 1e-7;
            detail::index_from_normals(m, roots, wq, comp.b, comp.index, comp.active_roots);
            out.push_back(std::move(comp));
        }
    }

    std::sort(out.begin(), out.end(), [](const CriticalComponent& x, const CriticalComponent& y) {
        if (std::abs(x.level - y.level) > 1e-14) return x.level < y.level;
        if ((x.b - y.b).norm() > 1e-12) {
            return std::lexicographical_compare(x.b.data(), x.b.data() + x.b.size(), y.b.data(),
                                                y.b.data() + y.b.size());
        }
        return x.weyl_index < y.weyl_index;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Hessian of f at critical points

struct HessianData {
    RMat tangent_basis;      // dim_p x t, orthonormal tangent frame at x0
    std::vector<Mat> lifts;  // minimal-norm lifts of the frame columns
    RMat form;               // t x t assembled Hessian
};

/// Hessian of f at a critical point x0 with offset b = mu(x0) - a,
/// assembled as 2(P + A_b): P pairs the a-components of tangent vectors,
/// A_b is the shape-operator term in the normal direction b. Requires
/// the gradient to vanish at x0 (tolerance 1e-7).
inline HessianData hessian_f(const SymmetricSpaceModel& m, const Mat& x0, const RVec& b,
                             double grad_gate = 1e-7) {
    if (b.size() != m.rank) throw dimension_error("hessian_f: b has wrong length");
    const RVec a = moment_map(m, x0) - b;
    const double gnorm = grad_f(m, x0, a).norm();
    if (gnorm > grad_gate) {
        throw validation_error("hessian_f: point is not critical (gradient norm " +
                               std::to_string(gnorm) + ")");
    }

    HessianData out;
    const RMat L = detail::lift_matrix(m, x0, m.k_space().basis());
    const Subspace tangent = image_of_map(L, tol::geometric);
    out.tangent_basis = tangent.basis();
    const Eigen::Index t = out.tangent_basis.cols();
    Eigen::BDCSVD<RMat> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.lifts.reserve(static_cast<std::size_t>(t));
    const Mat bm = m.a_matrix(b);
    RMat shape_cols(m.dim_p(), t);
    for (Eigen::Index n = 0; n < t; ++n) {
        const RVec zeta = svd.solve(out.tangent_basis.col(n));
        const Mat z = m.k_matrix(zeta);
        out.lifts.push_back(z);
        shape_cols.col(n) = m.p_coords(commutator(z, bm));
    }
    const RMat Ta = out.tangent_basis.topRows(m.rank);
    const RMat P = Ta.transpose() * Ta;
    const RMat BC = out.tangent_basis.transpose() * shape_cols;
    const RMat A = -0.5 * (BC + BC.transpose());
    out.form = 2.0 * (P + A);
    return out;
}

/// Finite-difference Hessian of f at a critical x0 in the frame of hd:
/// second differences along the lifted one-parameter subgroups, diagonal
/// first, off-diagonal by polarization. Steps shrink with the lift norm
/// to keep truncation error in check.
inline RMat fd_hessian_f(const SymmetricSpaceModel& m, const Mat& x0, const RVec& a,
                         const HessianData& hd, double h = 1e-3) {
    const Eigen::Index t = hd.tangent_basis.cols();
    const double f0 = fiber_objective(m, x0, a);
    auto second_difference = [&](const Mat& z) {
        const double step = h / std::max(1.0, z.norm());
        const detail::ExpCurve curve(z);
        const double fp = fiber_objective(m, adjoint_action(curve.at(step), x0), a);
        const double fm = fiber_objective(m, adjoint_action(curve.at(-step), x0), a);
        return (fp - 2.0 * f0 + fm) / (step * step);
    };
    RVec diag(t);
    for (Eigen::Index n = 0; n < t; ++n) diag[n] = second_difference(hd.lifts[n]);
    RMat H(t, t);
    for (Eigen::Index n = 0; n < t; ++n) {
        H(n, n) = diag[n];
        for (Eigen::Index k = n + 1; k < t; ++k) {
            const double mixed = second_difference(hd.lifts[n] + hd.lifts[k]);
            H(n, k) = H(k, n) = 0.5 * (mixed - diag[n] - diag[k]);
        }
    }
    return H;
}

// ---------------------------------------------------------------------------
// Minimal-degeneracy audit

struct ComponentAudit {
    double level = 0.0;
    int index = 0;
    int negative_count = 0;
    double level_error = 0.0;
    double hessian_rel_error = 0.0;
    bool resolved = false;
    bool ok = false;
};

struct DegeneracyReport {
    std::vector<ComponentAudit> rows;
    bool index_zero_only_at_minimum = true;
    bool codim2_ok = true;  // every nonminimal component has index >= 2
    std::vector<std::string> violations;
};

/// Pointwise minimal-degeneracy audit at the resolved representatives:
/// the assembled Hessian must match finite differences, its negative
/// eigenvalue count must equal the Morse index, levels must equal |b|^2,
/// index 0 must occur only at b = 0, and nonminimal components must have
/// index >= 2 (models with a multiplicity-1 root fail that last check by
/// design).
inline DegeneracyReport audit_minimal_degeneracy(const SymmetricSpaceModel& m, const RVec& a,
                                                 const std::vector<CriticalComponent>& components,
                                                 double hess_tol = 1e-4, double level_tol = 1e-8) {
    DegeneracyReport report;
    for (const CriticalComponent& comp : components) {
        ComponentAudit row;
        row.level = comp.level;
        row.index = comp.index;
        row.resolved = comp.resolved;
        if (!comp.resolved) {
            report.violations.push_back("level " + std::to_string(comp.level) +
                                        ": representative unresolved");
            report.rows.push_back(row);
            continue;
        }
        row.level_error = std::abs(comp.f_at_representative - comp.level);

        const HessianData hd = hessian_f(m, comp.representative, comp.b);
        const RMat fd = fd_hessian_f(m, comp.representative, a, hd);
        const double scale = std::max(1.0, hd.form.norm());
        row.hessian_rel_error = (hd.form - fd).norm() / scale;
        Eigen::SelfAdjointEigenSolver<RMat> es(hd.form);
        const RVec eig = es.eigenvalues();
        const double eig_tol = 1e-6 * std::max(1.0, eig.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < eig.size(); ++i) {
            if (eig[i] < -eig_tol) ++row.negative_count;
        }

        row.ok = row.level_error <= level_tol && row.hessian_rel_error <= hess_tol &&
                 row.negative_count == comp.index;
        if (row.level_error > level_tol) {
            report.violations.push_back("level " + std::to_string(comp.level) +
                                        ": level error " + std::to_string(row.level_error));
        }
        if (row.hessian_rel_error > hess_tol) {
            report.violations.push_back("level " + std::to_string(comp.level) +
                                        ": Hessian mismatch " +
                                        std::to_string(row.hessian_rel_error));
        }
        if (row.negative_count != comp.index) {
            report.violations.push_back(
                "level " + std::to_string(comp.level) + ": negative eigenvalue count " +
                std::to_string(row.negative_count) + " != index " + std::to_string(comp.index));
        }
        if (comp.index == 0 && comp.level > 1e-12) {
            report.index_zero_only_at_minimum = false;
            report.violations.push_back("level " + std::to_string(comp.level) +
                                        ": index 0 away from the minimum");
        }
        if (comp.level > 1e-12 && comp.index < 2) {
            report.codim2_ok = false;
            report.violations.push_back("level " + std::to_string(comp.level) +
                                        ": codim-2 hypothesis fails (index " +
                                        std::to_string(comp.index) + ")");
        }
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Fiber sampling and connectivity

struct FiberSample {
    Mat x;
    double f = 0.0;
    int iterations = 0;
};

struct SweepRow {
    double epsilon = 0.0;
    int components = 0;
};

struct FiberReport {
    RVec a;
    std::string regime;          // "interior" | "boundary" | "outside"
    std::size_t requested = 0;
    std::vector<FiberSample> samples;
    std::vector<SweepRow> sweep;
    int component_count = 0;
    std::string verdict;         // "connected" | "disconnected(k)" | "empty" | "inconclusive"
    std::string warning;
};

/// N descent runs toward mu(x) = a from seeded orbit starts (the first
/// start is q itself); endpoints with f <= tol^2 are kept. Outside the
/// moment polytope the fiber is empty and no runs happen.
inline std::vector<FiberSample> sample_fiber(const SymmetricSpaceModel& m, const WeylGroup& W,
                                             const RVec& q, const RVec& a, std::size_t count,
                                             std::uint64_t seed, double tol = 1e-6,
                                             std::size_t n_threads = 0) {
    const Polytope P = moment_polytope(W, q);
    if (P.violation(a) > 1e-9) return {};
    const Mat qm = m.a_matrix(q);
    DescentOptions opt;
    opt.target = tol * tol;

    std::vector<DescentResult> runs(count);
    parallel_for(
        count,
        [&](std::size_t i) {
            Mat x0 = qm;
            if (i > 0) {
                RandomStream rng = RandomStream::substream(seed, i);
                const Mat z = m.k_matrix(rng.gaussian_vector(m.dim_k));
                x0 = adjoint_action(expm_skew_hermitian(z), qm);
            }
            runs[i] = descend_to_moment_target(m, x0, a, m.k_space(), opt);
        },
        static_cast<unsigned>(n_threads));

    std::vector<FiberSample> kept;
    for (const DescentResult& r : runs) {
        if (r.f <= tol * tol) kept.push_back({r.x, r.f, r.iterations});
    }
    return kept;
}

/// Epsilon-graph component counts over the kept samples, swept over
/// multiples of the median nearest-neighbour distance; the verdict is
/// the count on the widest stable plateau (ties toward larger epsilon).
/// cluster_floor keeps the sweep scale meaningful on zero-dimensional
/// fibers, where all samples of one component coincide to solver
/// precision and the raw nearest-neighbour scale collapses.
inline void connectivity_verdict(const SymmetricSpaceModel& m, FiberReport& report,
                                 double cluster_floor = 0.0) {
    const std::vector<FiberSample>& samples = report.samples;
    report.sweep.clear();
    if (samples.empty()) {
        report.component_count = 0;
        if (report.verdict.empty()) report.verdict = "empty";
        return;
    }
    if (samples.size() == 1) {
        report.component_count = 1;
        report.verdict = "connected";
        return;
    }

    const std::size_t n = samples.size();
    RMat coords(static_cast<Eigen::Index>(n), m.dim_p());
    for (std::size_t i = 0; i < n; ++i) {
        coords.row(static_cast<Eigen::Index>(i)) = m.p_coords(samples[i].x).transpose();
    }
    RMat dist(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = (coords.row(static_cast<Eigen::Index>(i)) -
                              coords.row(static_cast<Eigen::Index>(j)))
                                 .norm();
            dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
            dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
        }
    }
    std::vector<double> nn(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                nn[i] = std::min(nn[i],
                                 dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
        }
    }
    std::vector<double> sorted_nn = nn;
    std::nth_element(sorted_nn.begin(), sorted_nn.begin() + static_cast<long>(n / 2),
                     sorted_nn.end());
    const double d_med = std::max({sorted_nn[n / 2], cluster_floor, 1e-12});

    const double factors[] = {1.5, 2.0, 3.0, 4.0, 6.0};
    for (double c : factors) {
        const double eps = c * d_med;
        UnionFind uf(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps) {
                    uf.unite(i, j);
                }
            }
        }
        int comps = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (uf.find(i) == i) ++comps;
        }
        report.sweep.push_back({eps, comps});
    }

    // Widest run of equal counts, preferring larger epsilon on ties.
    int best_len = 0, best_count = 0;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= report.sweep.size(); ++i) {
        if (i == report.sweep.size() ||
            report.sweep[i].components != report.sweep[run_start].components) {
            const int len = static_cast<int>(i - run_start);
            if (len >= best_len) {
                best_len = len;
                best_count = report.sweep[run_start].components;
            }
            run_start = i;
        }
    }
    if (best_len < 2) {
        report.component_count = 0;
        report.verdict = "inconclusive";
        return;
    }
    report.component_count = best_count;
    report.verdict = best_count == 1 ? "connected"
                                     : "disconnected(" + std::to_string(best_count) + ")";
}

/// Full fiber pipeline: containment regime, sampling, sweep, verdict.
inline FiberReport fiber_report(const SymmetricSpaceModel& m, const WeylGroup& W, const RVec& q,
                                const RVec& a, std::size_t count, std::uint64_t seed,
                                double tol = 1e-6, std::size_t n_threads = 0) {
    FiberReport report;
    report.a = a;
    report.requested = count;
    const Polytope P = moment_polytope(W, q);
    const double v = P.violation(a);
    if (v > 1e-9) {
        report.regime = "outside";
        report.verdict = "empty";
        return report;
    }
    report.regime = v > -1e-7 ? "boundary" : "interior";
    report.samples = sample_fiber(m, W, q, a, count, seed, tol, n_threads);
    if (report.samples.empty()) {
        if (report.regime == "interior") {
            report.verdict = "inconclusive";
            report.warning =
                "no sample reached the fiber tolerance from " + std::to_string(count) +
                " starts; consider more iterations or a looser tolerance";
        } else {
            report.verdict = "empty";
        }
        return report;
    }
    // Residual tolerance tol converts to position spread ~tol at a regular
    // target but ~sqrt(tol) at a boundary target, where the moment map is
    // degenerate transverse to the face; floor the cluster scale accordingly.
    const double cluster_floor =
        report.regime == "boundary" ? 10.0 * std::sqrt(tol) : 10.0 * tol;
    connectivity_verdict(m, report, cluster_floor);
    if (report.regime == "boundary") {
        report.warning = report.warning.empty()
                             ? "target on the polytope boundary; verdict in boundary regime"
                             : report.warning;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Multistart completeness check

struct MultistartReport {
    int starts = 0;
    int converged = 0;
    double max_match_distance = 0.0;
    std::vector<double> unmatched;  // critical values with no enumerated level nearby
};

/// Root-finding oracle for the enumeration: Newton iterations on the
/// critical-point equation [x, mu(x) - a] = 0 from seeded random starts;
/// every converged critical value must lie near an enumerated level.
inline MultistartReport multistart_critical_search(const SymmetricSpaceModel& m,
                                                   const RestrictedRootSystem& roots,
                                                   const WeylGroup& W, const RVec& q, const RVec& a,
                                                   int n_starts, std::uint64_t seed,
                                                   double level_tol = 1e-6,
                                                   std::size_t n_threads = 0) {
    const auto candidates = enumerate_critical_levels(m, roots, W, q, a);
    std::vector<double> levels;
    for (const auto& c : candidates) levels.push_back(c.level);

    const Mat qm = m.a_matrix(q);
    const Mat am = m.a_matrix(a);
    const RMat kb = m.k_space().basis();
    std::vector<Mat> u;
    for (Eigen::Index j = 0; j < m.dim_k; ++j) u.push_back(m.from_coords(kb.col(j)));

    auto newton_run = [&](Mat x, int budget, double& phi_norm) {
        return detail::newton_critical_polish(m, std::move(x), am, u, budget, phi_norm);
    };

    struct RunOutcome {
        bool converged = false;
        double value = 0.0;
    };
    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(n_starts));
    parallel_for(
        static_cast<std::size_t>(n_starts),
        [&](std::size_t i) {
            RandomStream rng = RandomStream::substream(seed, i);
            const Mat z = m.k_matrix(rng.gaussian_vector(m.dim_k));
            Mat x = adjoint_action(expm_skew_hermitian(z), qm);
            double phi_norm = std::numeric_limits<double>::infinity();
            x = newton_run(x, 40, phi_norm);
            if (phi_norm > 1e-11) {
                // Pull toward a basin with plain descent, then retry.
                DescentOptions opt;
                opt.max_iterations = 150;
                opt.polish_threshold = 0.0;
                opt.max_polish = 0;
                const DescentResult r = descend_to_moment_target(m, x, a, m.k_space(), opt);
                x = newton_run(r.x, 40, phi_norm);
            }
            outcomes[i].converged = phi_norm <= 1e-11;
            outcomes[i].value = fiber_objective(m, x, a);
        },
        static_cast<unsigned>(n_threads));

    MultistartReport report;
    report.starts = n_starts;
    for (const RunOutcome& o : outcomes) {
        if (!o.converged) continue;
        ++report.converged;
        double nearest = std::numeric_limits<double>::infinity();
        for (double l : levels) nearest = std::min(nearest, std::abs(l - o.value));
        if (levels.empty()) nearest = std::numeric_limits<double>::infinity();
        if (nearest > level_tol) {
            report.unmatched.push_back(o.value);
        } else {
            report.max_match_distance = std::max(report.max_match_distance, nearest);
        }
    }
    return report;
}

} // namespace flagmoment
