#pragma once
// Torus criterion on the centralizer K0: for each wall type b in a,
// decide whether some one-parameter subgroup exp(tZ) with Z in k0 has
// fixed-point set on p exactly equal to the centralizer Z_p(b). The
// criterion for the model combines these wall verdicts with the
// multiplicity gate (every restricted-root multiplicity at least 2).
//
// A torus in K0 is the closure of a one-parameter subgroup, and the
// fixed set of Ad(exp(tZ)) on p is ker(ad_Z|_p), so the whole search is
// linear algebra on commutators: the admissible generators form
// G_b = {Z in k0 : [Z, Z_p(b)] = 0}, a witness is a generic Z in G_b
// whose kernel on p is no larger than Z_p(b), and impossibility is
// certified by a subspace that every admissible generator annihilates
// beyond Z_p(b).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flagmoment/morse.hpp"

namespace flagmoment {

// ---------------------------------------------------------------------------
// Wall types

/// One representative target direction per wall stratum: the centralizers
/// Z_k(b), Z_p(b) depend only on which roots vanish at b, so finitely
/// many b decide the criterion for every b in a.
struct WallType {
    RVec b;                          ///< generic point of the stratum (unit norm, or 0)
    std::uint32_t vanishing_mask = 0;  ///< bit i set <=> indivisible root i vanishes at b
    int weyl_class = 0;              ///< wall types in one Weyl conjugacy class share this id
};

namespace detail {

/// Bitmask of indivisible roots vanishing on the whole subspace L.
inline std::uint32_t vanishing_mask_of(const RestrictedRootSystem& roots, const Subspace& L) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < roots.indivisible.size(); ++i) {
        const RVec& alpha = roots.indivisible_root(i).alpha;
        bool vanishes = true;
        for (Eigen::Index j = 0; j < L.dim(); ++j) {
            if (std::abs(alpha.dot(L.basis().col(j))) > 1e-9 * std::max(1.0, alpha.norm())) {
                vanishes = false;
                break;
            }
        }
        if (mask == 0 && L.dim() == 0) vanishes = true;  // zero subspace: all roots vanish
        if (vanishes) mask |= (1u << i);
    }
    return mask;
}

/// Bitmask of indivisible roots vanishing at the single point b.
inline std::uint32_t vanishing_mask_at(const RestrictedRootSystem& roots, const RVec& b) {
    std::uint32_t mask = 0;
    const double scale = std::max(1.0, b.norm());
    for (std::size_t i = 0; i < roots.indivisible.size(); ++i) {
        if (std::abs(roots.indivisible_root(i).alpha.dot(b)) <= 1e-8 * scale) mask |= (1u << i);
    }
    return mask;
}

}  // namespace detail

/// Enumerate wall types: intersect kernels over every subset of
/// indivisible roots, deduplicate by the full vanishing set of the
/// resulting subspace, and pick a generic unit representative in each.
/// Sorted by vanishing-root bitmask (regular first, b = 0 last);
/// weyl_class groups types whose strata are Weyl conjugate.
inline std::vector<WallType> wall_types(const SymmetricSpaceModel& m,
                                        const RestrictedRootSystem& roots, const WeylGroup& W,
                                        std::uint64_t seed = 0x77616c6c73ULL) {
    const std::size_t nr = roots.indivisible.size();
    if (nr > 16) throw input_error("wall_types: too many indivisible roots");

    struct Stratum {
        std::uint32_t mask;
        Subspace L;
    };
    std::vector<Stratum> strata;
    std::vector<std::uint32_t> seen;
    for (std::uint32_t subset = 0; subset < (1u << nr); ++subset) {
        Subspace L(m.rank);
        if (subset == 0) {
            L = Subspace(m.rank, RMat::Identity(m.rank, m.rank));
        } else {
            std::vector<RVec> rows;
            for (std::size_t i = 0; i < nr; ++i) {
                if (subset & (1u << i)) rows.push_back(roots.indivisible_root(i).alpha);
            }
            RMat A(static_cast<Eigen::Index>(rows.size()), m.rank);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                A.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
            }
            L = kernel_of_map(A);
        }
        const std::uint32_t closure = detail::vanishing_mask_of(roots, L);
        if (std::find(seen.begin(), seen.end(), closure) == seen.end()) {
            seen.push_back(closure);
            strata.push_back({closure, L});
        }
    }
    std::sort(strata.begin(), strata.end(),
              [](const Stratum& x, const Stratum& y) { return x.mask < y.mask; });

    std::vector<WallType> out;
    for (const Stratum& s : strata) {
        WallType wt;
        wt.vanishing_mask = s.mask;
        if (s.L.dim() == 0) {
            wt.b = RVec::Zero(m.rank);
        } else {
            bool ok = false;
            for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
                RandomStream rng = RandomStream::substream(
                    seed, (static_cast<std::uint64_t>(s.mask) << 8) + static_cast<std::uint64_t>(attempt));
                RVec b = s.L.basis() * rng.gaussian_vector(s.L.dim());
                if (b.norm() < 1e-6) continue;
                b /= b.norm();
                if (detail::vanishing_mask_at(roots, b) == s.mask) {
                    wt.b = b;
                    ok = true;
                }
            }
            if (!ok) throw numerical_error("wall_types: no generic representative found");
        }
        out.push_back(std::move(wt));
    }

    // Weyl conjugacy classes: w maps one stratum onto another iff the
    // vanishing mask of w(b) matches that stratum's mask.
    UnionFind uf(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const RMat& w : W.elements) {
            const std::uint32_t image = detail::vanishing_mask_at(roots, RVec(w * out[i].b));
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (out[j].vanishing_mask == image) uf.unite(i, j);
            }
        }
    }
    std::vector<int> class_of(out.size(), -1);
    int next_class = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t root_i = uf.find(i);
        if (class_of[root_i] < 0) class_of[root_i] = next_class++;
        out[i].weyl_class = class_of[root_i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Torus witnesses

/// A one-parameter subgroup generator certifying the wall b: Z lies in
/// k0, commutes with all of Z_p(b), and its fixed set on p is exactly
/// Z_p(b). The kernel on k is kept for reporting.
struct TorusWitness {
    Mat generator;        ///< Z in k0, unit trace norm (0 for the trivial torus)
    Subspace fixed_set_p;  ///< ker(ad_Z|_p) in g-coordinates
    Subspace target_p;     ///< Z_p(b) in g-coordinates
    Subspace fixed_set_k;  ///< ker(ad_Z|_k) in g-coordinates
};

/// Verdict for one wall type. "impossible" carries an obstruction: a
/// subspace beyond the centralizer annihilated by every admissible
/// generator (reported on the k side when nonzero there, else on p).
struct WallVerdict {
    WallType wall;
    std::string verdict;  ///< "witness found" | "impossible" | "undecided"
    std::optional<TorusWitness> witness;
    Subspace obstruction{0};
    std::string obstruction_side;  ///< "k" | "p" | ""
    std::string note;
};

namespace detail {

/// Kernel of ad_Z restricted to p (or to k), lifted to g-coordinates.
inline Subspace ad_kernel(const SymmetricSpaceModel& m, const Mat& z, bool on_p) {
    const Eigen::Index n = on_p ? m.dim_p() : m.dim_k;
    RMat A(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Mat bj = on_p ? m.basis_p(j) : m.basis_k(j);
        const Mat c = commutator(z, bj);
        A.col(j) = on_p ? m.p_coords(c) : m.k_coords(c);
    }
    const Subspace ker = kernel_of_map(A);
    RMat lifted = RMat::Zero(m.dim(), ker.dim());
    for (Eigen::Index j = 0; j < ker.dim(); ++j) {
        if (on_p) {
            lifted.col(j).tail(m.dim_p()) = ker.basis().col(j);
        } else {
            lifted.col(j).head(m.dim_k) = ker.basis().col(j);
        }
    }
    return Subspace(m.dim(), lifted);
}

/// Intersection of ad-kernels over a set of generators: kernel of the
/// stacked commutator maps.
inline Subspace joint_ad_kernel(const SymmetricSpaceModel& m, const std::vector<Mat>& gens,
                                bool on_p) {
    const Eigen::Index n = on_p ? m.dim_p() : m.dim_k;
    if (gens.empty()) {
        // No constraints: the kernel is all of p (or k).
        RMat full = RMat::Zero(m.dim(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (on_p) {
                full(m.dim_k + j, j) = 1.0;
            } else {
                full(j, j) = 1.0;
            }
        }
        return Subspace(m.dim(), full);
    }
    RMat A(static_cast<Eigen::Index>(gens.size()) * n, n);
    for (std::size_t g = 0; g < gens.size(); ++g) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Mat bj = on_p ? m.basis_p(j) : m.basis_k(j);
            const Mat c = commutator(gens[g], bj);
            A.block(static_cast<Eigen::Index>(g) * n, j, n, 1) =
                on_p ? m.p_coords(c) : m.k_coords(c);
        }
    }
    const Subspace ker = kernel_of_map(A);
    RMat lifted = RMat::Zero(m.dim(), ker.dim());
    for (Eigen::Index j = 0; j < ker.dim(); ++j) {
        if (on_p) {
            lifted.col(j).tail(m.dim_p()) = ker.basis().col(j);
        } else {
            lifted.col(j).head(m.dim_k) = ker.basis().col(j);
        }
    }
    return Subspace(m.dim(), lifted);
}

/// Part of `big` orthogonal to `small` (both in the same ambient).
inline Subspace excess_over(const Subspace& big, const Subspace& small) {
    return intersection(big, orthogonal_complement(small));
}

}  // namespace detail

/// Search K0 for a torus whose fixed set on p is exactly Z_p(b).
/// Admissible generators G_b = {Z in k0 : [Z, Z_p(b)] = 0} are found by
/// a linear solve; a generic element is tested (5 retries), and failure
/// is classified as "impossible" (with certificate) when the joint
/// kernel over a basis of G_b strictly exceeds Z_p(b), else "undecided".
inline WallVerdict find_torus_witness(const SymmetricSpaceModel& m,
                                      const RestrictedRootSystem& roots, const RVec& b,
                                      std::uint64_t seed = 0x6b697277616eULL) {
    if (b.size() != m.rank) throw dimension_error("find_torus_witness: b has wrong length");
    WallVerdict result;
    result.wall.b = b;
    result.wall.vanishing_mask = detail::vanishing_mask_at(roots, b);

    const Subspace Zp = centralizer_in_p(m, roots, b);
    const Subspace Zk = centralizer_in_k(m, roots, b);
    const Subspace& k0 = roots.k0;

    // Admissible generator space G_b = {Z in k0 : [Z, Z_p(b)] = 0},
    // as coefficients over the k0 basis.
    std::vector<Mat> g_basis;
    if (k0.dim() > 0 && Zp.dim() > 0) {
        RMat A(Zp.dim() * m.dim_p(), k0.dim());
        for (Eigen::Index c = 0; c < k0.dim(); ++c) {
            const Mat z = m.from_coords(k0.basis().col(c));
            for (Eigen::Index r = 0; r < Zp.dim(); ++r) {
                const Mat x = m.from_coords(Zp.basis().col(r));
                A.block(r * m.dim_p(), c, m.dim_p(), 1) = m.p_coords(commutator(z, x));
            }
        }
        const Subspace G = kernel_of_map(A);
        for (Eigen::Index j = 0; j < G.dim(); ++j) {
            g_basis.push_back(m.from_coords(k0.basis() * G.basis().col(j)));
        }
    } else if (k0.dim() > 0) {
        for (Eigen::Index j = 0; j < k0.dim(); ++j) {
            g_basis.push_back(m.from_coords(k0.basis().col(j)));
        }
    }

    auto accept = [&](const Mat& z) -> bool {
        const Subspace fixed_p = detail::ad_kernel(m, z, true);
        if (fixed_p.dim() != Zp.dim()) return false;
        if (!fixed_p.contains(Zp, 1e-7)) {
            throw numerical_error("find_torus_witness: admissible generator moves the centralizer");
        }
        TorusWitness w;
        w.generator = z;
        w.fixed_set_p = fixed_p;
        w.target_p = Zp;
        w.fixed_set_k = detail::ad_kernel(m, z, false);
        result.witness = std::move(w);
        result.verdict = "witness found";
        return true;
    };

    if (g_basis.empty()) {
        // Only the trivial torus is admissible; its fixed set is all of p.
        if (Zp.dim() == m.dim_p()) {
            TorusWitness w;
            w.generator = Mat::Zero(m.matrix_size, m.matrix_size);
            w.fixed_set_p = Zp;
            w.target_p = Zp;
            RMat kfull = RMat::Zero(m.dim(), m.dim_k);
            for (Eigen::Index j = 0; j < m.dim_k; ++j) kfull(j, j) = 1.0;
            w.fixed_set_k = Subspace(m.dim(), kfull);
            result.witness = std::move(w);
            result.verdict = "witness found";
            result.note = "trivial torus: the centralizer is all of p";
            return result;
        }
        result.verdict = "impossible";
        const Subspace Ik = detail::joint_ad_kernel(m, {}, false);
        const Subspace excess_k = detail::excess_over(Ik, Zk);
        if (excess_k.dim() > 0) {
            result.obstruction = excess_k;
            result.obstruction_side = "k";
        } else {
            result.obstruction = detail::excess_over(detail::joint_ad_kernel(m, {}, true), Zp);
            result.obstruction_side = "p";
        }
        result.note = "no admissible generator: G_b = 0 while the centralizer is proper";
        return result;
    }

    for (int attempt = 0; attempt < 5; ++attempt) {
        RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(attempt));
        RVec c = rng.gaussian_vector(static_cast<Eigen::Index>(g_basis.size()));
        if (c.norm() < 1e-12) continue;
        c /= c.norm();
        Mat z = Mat::Zero(m.matrix_size, m.matrix_size);
        for (std::size_t j = 0; j < g_basis.size(); ++j) z += c[static_cast<Eigen::Index>(j)] * g_basis[j];
        if (accept(z)) return result;
    }

    const Subspace Ip = detail::joint_ad_kernel(m, g_basis, true);
    if (Ip.dim() > Zp.dim()) {
        result.verdict = "impossible";
        const Subspace Ik = detail::joint_ad_kernel(m, g_basis, false);
        const Subspace excess_k = detail::excess_over(Ik, Zk);
        if (excess_k.dim() > 0) {
            result.obstruction = excess_k;
            result.obstruction_side = "k";
        } else {
            result.obstruction = detail::excess_over(Ip, Zp);
            result.obstruction_side = "p";
        }
        result.note = "every admissible generator annihilates the obstruction";
        return result;
    }
    result.verdict = "undecided";
    result.note = "generic samples failed but the joint kernel matches the centralizer";
    return result;
}

// ---------------------------------------------------------------------------
// Fixed points on the orbit

/// Empirical check that the witness torus fixes exactly the orbit points
/// lying in Z_p(b): Ad(exp(tZ))-invariance over a t-grid against
/// membership, with the height gradient vanishing on fixed samples.
struct FixedPointReport {
    std::size_t checked = 0;
    std::size_t fixed = 0;
    std::size_t members = 0;
    std::size_t mismatches = 0;
    double max_fixed_height_grad = 0.0;
    double min_moved_displacement = std::numeric_limits<double>::infinity();
};

inline FixedPointReport check_fixed_points_on_M(const SymmetricSpaceModel& m,
                                                const RestrictedRootSystem& roots,
                                                const WeylGroup& W, const TorusWitness& witness,
                                                const RVec& b, const RVec& q, std::size_t samples,
                                                std::uint64_t seed = 0x6669786564ULL) {
    if (q.size() != m.rank || b.size() != m.rank) {
        throw dimension_error("check_fixed_points_on_M: wrong vector length");
    }
    const Mat qm = m.a_matrix(q);
    const Subspace Zk = centralizer_in_k(m, roots, b);
    const HeightFunction height{b};

    std::vector<Mat> points;
    for (const auto& o : weyl_orbit(W, q)) points.push_back(m.a_matrix(o.point));
    const std::size_t n_member = samples / 3;
    for (std::size_t i = 0; i < n_member; ++i) {
        // K_b-orbit points: exp of a centralizer direction keeps the
        // sample inside Z_p(b) while leaving the a-part generic.
        RandomStream rng = RandomStream::substream(seed, 2 * i);
        if (Zk.dim() == 0) break;
        const RVec c = 0.7 * rng.gaussian_vector(Zk.dim());
        const Mat z = m.from_coords(Zk.basis() * c);
        points.push_back(adjoint_action(expm_skew_hermitian(z), qm));
    }
    while (points.size() < samples) {
        RandomStream rng = RandomStream::substream(seed, 2 * points.size() + 1);
        const Mat z = m.k_matrix(0.7 * rng.gaussian_vector(m.dim_k));
        points.push_back(adjoint_action(expm_skew_hermitian(z), qm));
    }

    const double t_grid[] = {0.37, 0.81, 1.43};
    std::vector<Mat> flows;
    for (double t : t_grid) flows.push_back(expm_skew_hermitian(Mat(t * witness.generator)));

    FixedPointReport report;
    for (const Mat& x : points) {
        ++report.checked;
        double move = 0.0;
        for (const Mat& u : flows) {
            move = std::max(move, m.p_coords(adjoint_action(u, x) - x).norm());
        }
        const bool is_fixed = move <= 1e-8 * std::max(1.0, m.p_coords(x).norm());
        RVec gx = RVec::Zero(m.dim());
        gx.tail(m.dim_p()) = m.p_coords(x);
        const bool is_member = witness.target_p.contains_vector(gx, 1e-8);
        if (is_fixed) {
            ++report.fixed;
            report.max_fixed_height_grad =
                std::max(report.max_fixed_height_grad, height.gradient(m, x).norm());
        } else {
            report.min_moved_displacement = std::min(report.min_moved_displacement, move);
        }
        if (is_member) ++report.members;
        if (is_fixed != is_member) ++report.mismatches;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Model verdict

/// Aggregated criterion: the multiplicity gate (all m_alpha >= 2) plus a
/// torus witness on every wall type.
struct CriterionReport {
    bool multiplicity_gate = false;
    std::vector<int> multiplicities;
    std::vector<WallVerdict> walls;
    std::string model_verdict;  ///< "criterion satisfied" | "criterion not satisfied"
    std::string reason;
};

inline CriterionReport criterion_verdict(const SymmetricSpaceModel& m,
                                         const RestrictedRootSystem& roots, const WeylGroup& W,
                                         std::uint64_t seed = 0x6b697277616eULL,
                                         std::size_t n_threads = 0) {
    CriterionReport report;
    report.multiplicities = roots.multiplicities;
    report.multiplicity_gate =
        std::all_of(roots.multiplicities.begin(), roots.multiplicities.end(),
                    [](int mult) { return mult >= 2; });

    const std::vector<WallType> types = wall_types(m, roots, W);
    report.walls.resize(types.size());
    parallel_for(
        types.size(),
        [&](std::size_t i) {
            report.walls[i] = find_torus_witness(m, roots, types[i].b, seed);
            report.walls[i].wall = types[i];
        },
        static_cast<unsigned>(n_threads));

    std::vector<std::string> failures;
    if (!report.multiplicity_gate) {
        std::string ms;
        for (std::size_t i = 0; i < roots.multiplicities.size(); ++i) {
            ms += (i ? "," : "") + std::to_string(roots.multiplicities[i]);
        }
        failures.push_back("multiplicity gate: m = {" + ms + "} has an entry below 2");
    }
    for (const WallVerdict& wv : report.walls) {
        if (wv.verdict != "witness found") {
            failures.push_back("wall mask " + std::to_string(wv.wall.vanishing_mask) + ": " +
                               wv.verdict);
        }
    }
    if (failures.empty()) {
        report.model_verdict = "criterion satisfied";
        report.reason = "all multiplicities at least 2 and every wall type has a torus witness";
    } else {
        report.model_verdict = "criterion not satisfied";
        for (std::size_t i = 0; i < failures.size(); ++i) {
            report.reason += (i ? "; " : "") + failures[i];
        }
    }
    return report;
}

}  // namespace flagmoment
