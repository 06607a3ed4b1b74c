#pragma once
// Convex polytopes as used for moment images: the hull of a finite point
// set in R^rank. Points are first reduced to an orthonormal chart of
// their affine span; inside the chart a beneath-beyond incremental hull
// produces simplicial facets, which are then merged into maximal faces.
// Ranks up to 4 get the full facet representation; above that only the
// vertex set is extracted and membership falls back to a non-negative
// least-squares feasibility test.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flagmoment/errors.hpp"
#include "flagmoment/numerics.hpp"

namespace flagmoment {

/// One inequality <normal, y> <= offset in chart coordinates; the normal
/// is a unit vector, so slack is measured in ambient length units.
struct Halfspace {
    RVec normal;
    double offset = 0.0;
    std::vector<Eigen::Index> vertex_ids;  // hull vertices lying on this face
};

namespace detail {

struct SimplicialFacet {
    std::vector<Eigen::Index> verts;  // k point indices
    RVec normal;
    double offset = 0.0;
    bool alive = true;
};

/// Outward hyperplane through the points `ids`; `interior` stays on the
/// <= side. Throws numerical_error when the points are affinely
/// degenerate beyond repair.
inline void facet_plane(const RMat& Y, const std::vector<Eigen::Index>& ids,
                        const RVec& interior, RVec& normal, double& offset) {
    const Eigen::Index k = Y.rows();
    RMat D(static_cast<Eigen::Index>(ids.size()) - 1, k);
    for (std::size_t j = 1; j < ids.size(); ++j) {
        D.row(static_cast<Eigen::Index>(j - 1)) = (Y.col(ids[j]) - Y.col(ids[0])).transpose();
    }
    Eigen::JacobiSVD<RMat> svd(D, Eigen::ComputeFullV);
    if (D.rows() > 0) {
        const RVec& s = svd.singularValues();
        if (s[s.size() - 1] <= 1e-9 * std::max(1.0, s[0])) {
            throw numerical_error("convex_hull: degenerate facet (affinely dependent vertices)");
        }
    }
    normal = svd.matrixV().col(k - 1);
    offset = normal.dot(Y.col(ids[0]));
    const double side = normal.dot(interior) - offset;
    if (side > 0.0) {
        normal = -normal;
        offset = -offset;
    }
}

/// Beneath-beyond hull of the chart points Y (k x n, k >= 2, affine rank
/// k). Returns simplicial facets with outward unit normals.
inline std::vector<SimplicialFacet> simplicial_hull(const RMat& Y, double eps) {
    const Eigen::Index k = Y.rows();
    const Eigen::Index n = Y.cols();

    // initial simplex: greedy farthest-point selection
    std::vector<Eigen::Index> simplex;
    Eigen::Index first = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index c = 0; c < k; ++c) {
            if (Y(c, i) < Y(c, first) - 1e-15) { first = i; break; }
            if (Y(c, i) > Y(c, first) + 1e-15) break;
        }
    }
    simplex.push_back(first);
    RMat frame(k, 0);  // orthonormal directions already spanned
    while (simplex.size() < static_cast<std::size_t>(k) + 1) {
        Eigen::Index best = -1;
        double best_res = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            RVec d = Y.col(i) - Y.col(simplex[0]);
            d -= frame * (frame.transpose() * d);
            const double r = d.norm();
            if (r > best_res) { best_res = r; best = i; }
        }
        if (best < 0 || best_res <= eps) {
            throw numerical_error("convex_hull: affine rank collapsed during simplex seeding");
        }
        simplex.push_back(best);
        RVec d = Y.col(best) - Y.col(simplex[0]);
        d -= frame * (frame.transpose() * d);
        frame.conservativeResize(k, frame.cols() + 1);
        frame.col(frame.cols() - 1) = d / d.norm();
    }

    RVec interior = RVec::Zero(k);
    for (Eigen::Index id : simplex) interior += Y.col(id);
    interior /= static_cast<double>(simplex.size());

    std::vector<SimplicialFacet> facets;
    for (std::size_t drop = 0; drop < simplex.size(); ++drop) {
        SimplicialFacet f;
        for (std::size_t j = 0; j < simplex.size(); ++j) {
            if (j != drop) f.verts.push_back(simplex[j]);
        }
        facet_plane(Y, f.verts, interior, f.normal, f.offset);
        facets.push_back(std::move(f));
    }

    std::vector<char> in_simplex(static_cast<std::size_t>(n), 0);
    for (Eigen::Index id : simplex) in_simplex[static_cast<std::size_t>(id)] = 1;

    for (Eigen::Index p = 0; p < n; ++p) {
        if (in_simplex[static_cast<std::size_t>(p)]) continue;
        std::vector<std::size_t> visible;
        for (std::size_t fi = 0; fi < facets.size(); ++fi) {
            if (!facets[fi].alive) continue;
            if (facets[fi].normal.dot(Y.col(p)) - facets[fi].offset > eps) visible.push_back(fi);
        }
        if (visible.empty()) continue;

        // horizon = ridges incident to exactly one visible facet
        std::map<std::vector<Eigen::Index>, int> ridge_count;
        for (std::size_t fi : visible) {
            const auto& vs = facets[fi].verts;
            for (std::size_t drop = 0; drop < vs.size(); ++drop) {
                std::vector<Eigen::Index> ridge;
                for (std::size_t j = 0; j < vs.size(); ++j) {
                    if (j != drop) ridge.push_back(vs[j]);
                }
                std::sort(ridge.begin(), ridge.end());
                ++ridge_count[ridge];
            }
        }
        for (std::size_t fi : visible) facets[fi].alive = false;
        for (const auto& [ridge, count] : ridge_count) {
            if (count != 1) continue;
            SimplicialFacet f;
            f.verts = ridge;
            f.verts.push_back(p);
            facet_plane(Y, f.verts, interior, f.normal, f.offset);
            facets.push_back(std::move(f));
        }
    }

    std::vector<SimplicialFacet> alive;
    for (auto& f : facets) {
        if (f.alive) alive.push_back(std::move(f));
    }
    return alive;
}

} // namespace detail

/// Convex hull of finitely many points. Vertices are stored in ambient
/// coordinates; facets live in an orthonormal chart of the affine span
/// and are exposed together with that chart.
class Polytope {
public:
    Eigen::Index ambient_dim() const { return ambient_; }
    Eigen::Index intrinsic_dim() const { return span_.dim(); }
    bool has_facets() const { return has_facets_; }

    /// Hull vertices, one per column, deterministic (lexicographic) order.
    const RMat& vertices() const { return vertices_; }

    /// Facets in chart coordinates y = chart_basis^T (x - chart_origin).
    const std::vector<Halfspace>& facets() const {
        if (!has_facets_) throw input_error("Polytope: facet representation unavailable above intrinsic dimension 4");
        return facets_;
    }

    const RVec& chart_origin() const { return origin_; }
    const RMat& chart_basis() const { return span_.basis(); }

    RVec barycenter() const {
        RVec b = RVec::Zero(ambient_);
        for (Eigen::Index j = 0; j < vertices_.cols(); ++j) b += vertices_.col(j);
        return b / static_cast<double>(vertices_.cols());
    }

    /// Signed slack of x: max facet violation together with the distance
    /// to the affine span. Negative means strictly inside (with margin
    /// |result|); in vertex-only mode the result is a non-negative
    /// residual, so interior points report 0 instead of a margin.
    double violation(const RVec& x) const {
        if (x.size() != ambient_) throw dimension_error("Polytope::violation: wrong ambient dimension");
        const RVec rel = x - origin_;
        const RVec y = span_.basis().transpose() * rel;
        const double off_span = (rel - span_.basis() * y).norm();
        if (has_facets_) {
            double worst = std::numeric_limits<double>::lowest();
            for (const auto& h : facets_) worst = std::max(worst, h.normal.dot(y) - h.offset);
            // off_span is non-negative by construction; below the geometric
            // tolerance it is projection round-off and must not mask an
            // interior margin.
            return off_span > tol::geometric ? std::max(worst, off_span) : worst;
        }
        // vertex-only: non-negative least squares on the affine combination
        const Eigen::Index m = vertices_.cols();
        RMat A(intrinsic_dim() + 1, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            A.block(0, j, intrinsic_dim(), 1) = span_.basis().transpose() * (vertices_.col(j) - origin_);
            A(intrinsic_dim(), j) = scale_;
        }
        RVec b(intrinsic_dim() + 1);
        b.head(intrinsic_dim()) = y;
        b[intrinsic_dim()] = scale_;
        const RVec lambda = nnls(A, b);
        return std::max((A * lambda - b).norm(), off_span);
    }

    bool contains(const RVec& x, double tolerance = tol::geometric) const {
        return violation(x) <= tolerance;
    }

    friend Polytope convex_hull(const std::vector<RVec>&, double);

private:
    Eigen::Index ambient_ = 0;
    RMat vertices_;
    RVec origin_;
    Subspace span_;
    std::vector<Halfspace> facets_;
    bool has_facets_ = false;
    double scale_ = 1.0;
};

/// Hull of `points`. Facet representation is built for intrinsic
/// dimension <= 4; beyond that the polytope is vertex-only.
inline Polytope convex_hull(const std::vector<RVec>& points, double tolerance = tol::geometric) {
    if (points.empty()) throw input_error("convex_hull: no points");
    const Eigen::Index d = points[0].size();
    for (const RVec& p : points) {
        if (p.size() != d) throw dimension_error("convex_hull: points of mixed dimension");
    }

    // deduplicate, keeping first occurrences
    std::vector<RVec> pts;
    for (const RVec& p : points) {
        bool seen = false;
        for (const RVec& q : pts) {
            if ((p - q).norm() <= tolerance) { seen = true; break; }
        }
        if (!seen) pts.push_back(p);
    }

    Polytope P;
    P.ambient_ = d;
    double scale = 1.0;
    for (const RVec& p : pts) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
    P.scale_ = scale;
    const double eps = tolerance * scale;

    RVec centroid = RVec::Zero(d);
    for (const RVec& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    P.origin_ = centroid;

    std::vector<RVec> dirs;
    dirs.reserve(pts.size());
    for (const RVec& p : pts) dirs.push_back(p - centroid);
    P.span_ = orthonormalize(d, dirs, eps);
    const Eigen::Index k = P.span_.dim();

    RMat Y(k, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Y.col(static_cast<Eigen::Index>(i)) = P.span_.basis().transpose() * (pts[i] - centroid);
    }

    auto lift = [&](const std::vector<Eigen::Index>& ids) {
        RMat V(d, static_cast<Eigen::Index>(ids.size()));
        for (std::size_t j = 0; j < ids.size(); ++j) {
            V.col(static_cast<Eigen::Index>(j)) = pts[static_cast<std::size_t>(ids[j])];
        }
        return V;
    };
    auto sort_columns = [](RMat& V) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(V.cols()));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            for (Eigen::Index c = 0; c < V.rows(); ++c) {
                if (V(c, a) < V(c, b) - 1e-15) return true;
                if (V(c, a) > V(c, b) + 1e-15) return false;
            }
            return false;
        });
        RMat W(V.rows(), V.cols());
        for (std::size_t j = 0; j < order.size(); ++j) W.col(static_cast<Eigen::Index>(j)) = V.col(order[j]);
        V = W;
    };

    if (k == 0) {
        P.vertices_ = lift({0});
        P.has_facets_ = true;  // no inequalities: membership is span distance alone
        return P;
    }

    if (k == 1) {
        Eigen::Index lo = 0, hi = 0;
        for (Eigen::Index i = 1; i < Y.cols(); ++i) {
            if (Y(0, i) < Y(0, lo)) lo = i;
            if (Y(0, i) > Y(0, hi)) hi = i;
        }
        P.vertices_ = lift({lo, hi});  // kept in chart order so facet vertex ids stay valid
        Halfspace up, down;
        up.normal = RVec::Ones(1);
        up.offset = Y(0, hi);
        up.vertex_ids = {1};
        down.normal = -RVec::Ones(1);
        down.offset = -Y(0, lo);
        down.vertex_ids = {0};
        P.facets_ = {down, up};
        P.has_facets_ = true;
        return P;
    }

    if (k > 4) {
        // vertex-only: p is a vertex iff it is not a convex combination of
        // the others (non-negative least squares feasibility)
        std::vector<Eigen::Index> vert_ids;
        for (Eigen::Index i = 0; i < Y.cols(); ++i) {
            RMat A(k + 1, Y.cols() - 1);
            Eigen::Index col = 0;
            for (Eigen::Index j = 0; j < Y.cols(); ++j) {
                if (j == i) continue;
                A.block(0, col, k, 1) = Y.col(j);
                A(k, col) = scale;
                ++col;
            }
            RVec b(k + 1);
            b.head(k) = Y.col(i);
            b[k] = scale;
            const RVec lambda = nnls(A, b);
            if ((A * lambda - b).norm() > eps) vert_ids.push_back(i);
        }
        P.vertices_ = lift(vert_ids);
        sort_columns(P.vertices_);
        P.has_facets_ = false;
        return P;
    }

    auto simplicial = detail::simplicial_hull(Y, eps);

    // merge coplanar simplicial facets into maximal faces
    std::vector<Halfspace> merged;
    std::vector<std::vector<Eigen::Index>> face_points;
    const double merge_tol = 1e-9 * std::max(1.0, scale);
    for (const auto& f : simplicial) {
        bool placed = false;
        for (std::size_t m = 0; m < merged.size(); ++m) {
            if ((merged[m].normal - f.normal).norm() <= merge_tol &&
                std::abs(merged[m].offset - f.offset) <= merge_tol) {
                face_points[m].insert(face_points[m].end(), f.verts.begin(), f.verts.end());
                placed = true;
                break;
            }
        }
        if (!placed) {
            merged.push_back({f.normal, f.offset, {}});
            face_points.push_back(f.verts);
        }
    }

    // vertices: points whose active facet normals span the chart
    std::vector<Eigen::Index> candidates;
    for (const auto& fp : face_points) candidates.insert(candidates.end(), fp.begin(), fp.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const double active_tol = 100.0 * eps;
    std::vector<Eigen::Index> vert_ids;
    for (Eigen::Index c : candidates) {
        RMat normals(static_cast<Eigen::Index>(merged.size()), k);
        Eigen::Index rows = 0;
        for (const auto& h : merged) {
            if (std::abs(h.normal.dot(Y.col(c)) - h.offset) <= active_tol) {
                normals.row(rows++) = h.normal.transpose();
            }
        }
        if (rows >= k && numerical_rank(normals.topRows(rows), 1e-6) == k) {
            vert_ids.push_back(c);
        }
    }

    RMat V = lift(vert_ids);
    sort_columns(V);
    P.vertices_ = V;

    // record, per merged facet, which hull vertices are active on it
    for (auto& h : merged) {
        for (Eigen::Index j = 0; j < P.vertices_.cols(); ++j) {
            const RVec y = P.span_.basis().transpose() * (P.vertices_.col(j) - P.origin_);
            if (std::abs(h.normal.dot(y) - h.offset) <= active_tol) h.vertex_ids.push_back(j);
        }
    }
    P.facets_ = std::move(merged);
    P.has_facets_ = true;
    return P;
}

} // namespace flagmoment
