#pragma once
// Machine-readable report documents for the pipeline: JSON (ordered,
// schema-versioned, append-only), CSV for tabular views, and SVG for
// rank-1/2 moment polytopes. All serialization is deterministic: field
// order is fixed, numbers render identically for identical inputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flagmoment/kirwan.hpp"

namespace flagmoment {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "flagmoment.report/1";

namespace detail {

inline ordered_json json_vec(const RVec& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline ordered_json json_mat_cols(const RMat& m) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(json_vec(m.col(j)));
    return a;
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Root system label from rank, indivisible count, and divisibility.
inline std::string root_type_label(const RestrictedRootSystem& roots) {
    const std::size_t n = roots.indivisible.size();
    const bool divisible =
        roots.positive.size() > n;  // some positive root is a double
    if (roots.rank == 1) return divisible ? "BC1" : "A1";
    if (roots.rank == 2) {
        if (n == 2) return "A1 x A1";
        if (n == 3) return "A2";
        if (n == 4) return divisible ? "BC2" : "B2";
    }
    return "rank-" + std::to_string(roots.rank);
}

}  // namespace detail

inline ordered_json report_header(const std::string& kind) {
    ordered_json h;
    h["schema"] = kReportSchema;
    h["kind"] = kind;
    return h;
}

/// Common model block embedded in every document.
inline ordered_json model_block(const SymmetricSpaceModel& m, const RestrictedRootSystem& roots) {
    ordered_json j;
    j["name"] = m.name;
    j["params"] = m.params;
    j["rank"] = m.rank;
    j["dim_g"] = m.dim();
    j["dim_k"] = m.dim_k;
    j["dim_p"] = m.dim_p();
    j["dim_k0"] = roots.k0.dim();
    j["root_type"] = detail::root_type_label(roots);
    j["multiplicities"] = roots.multiplicities;
    return j;
}

// ---------------------------------------------------------------------------
// catalog

inline ordered_json catalog_document() {
    ordered_json doc = report_header("catalog");
    ordered_json families = ordered_json::array();
    for (const auto& e : catalog()) {
        ordered_json f;
        f["name"] = e.name;
        f["display"] = e.display;
        f["params"] = e.params_doc;
        families.push_back(f);
    }
    doc["families"] = families;

    static const std::vector<std::pair<const char*, std::vector<int>>> instances = {
        {"su2-over-so2", {}}, {"su3-over-u2", {}},       {"adjoint-su", {2}},
        {"adjoint-su", {3}},  {"su2n-over-spn", {2}},    {"su2n-over-spn", {3}},
        {"su-over-s-uxu", {3, 1}}, {"su-over-s-uxu", {2, 2}},
    };
    ordered_json rows = ordered_json::array();
    for (const auto& [name, params] : instances) {
        const SymmetricSpaceModel m = build_catalog_model(name, params);
        const RestrictedRootSystem roots = restricted_roots(m);
        const WeylGroup W = generate_weyl(roots);
        ordered_json r = model_block(m, roots);
        r["weyl_order"] = W.order();
        rows.push_back(r);
    }
    doc["models"] = rows;
    return doc;
}

inline std::string catalog_csv() {
    const ordered_json doc = catalog_document();
    std::string out = "name,params,rank,dim_g,dim_k,dim_p,dim_k0,root_type,multiplicities,weyl_order\n";
    for (const auto& r : doc["models"]) {
        std::string params, mults;
        for (const auto& p : r["params"]) params += (params.empty() ? "" : " ") + p.dump();
        for (const auto& mu : r["multiplicities"]) mults += (mults.empty() ? "" : " ") + mu.dump();
        out += r["name"].get<std::string>() + "," + params + "," + r["rank"].dump() + "," +
               r["dim_g"].dump() + "," + r["dim_k"].dump() + "," + r["dim_p"].dump() + "," +
               r["dim_k0"].dump() + "," + r["root_type"].get<std::string>() + "," + mults + "," +
               r["weyl_order"].dump() + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// polytope

struct ContainmentSummary {
    std::size_t samples = 0;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

inline ordered_json polytope_document(const SymmetricSpaceModel& m,
                                      const RestrictedRootSystem& roots, const RVec& q,
                                      const Polytope& P, const ContainmentSummary& summary) {
    ordered_json doc = report_header("polytope");
    doc["model"] = model_block(m, roots);
    doc["q"] = detail::json_vec(q);
    ordered_json pj;
    pj["ambient_dim"] = P.ambient_dim();
    pj["intrinsic_dim"] = P.intrinsic_dim();
    pj["vertex_count"] = P.vertices().cols();
    pj["vertices"] = detail::json_mat_cols(P.vertices());
    pj["barycenter"] = detail::json_vec(P.barycenter());
    if (P.has_facets()) {
        ordered_json facets = ordered_json::array();
        for (const auto& h : P.facets()) {
            // facets are stored against the chart; publish them in the
            // ambient a-coordinates: n.x <= c
            const RVec n = P.chart_basis() * h.normal;
            const double c = h.offset + n.dot(P.chart_origin());
            ordered_json f;
            f["normal"] = detail::json_vec(n);
            f["offset"] = c;
            f["vertex_ids"] = h.vertex_ids;
            facets.push_back(f);
        }
        pj["facets"] = facets;
    }
    doc["polytope"] = pj;
    ordered_json cj;
    cj["samples"] = summary.samples;
    cj["worst_violation"] = summary.worst_violation;
    cj["tolerance"] = summary.tolerance;
    cj["pass"] = summary.pass;
    doc["containment"] = cj;
    return doc;
}

inline std::string polytope_csv(const Polytope& P) {
    std::string out = "vertex_id";
    for (Eigen::Index d = 0; d < P.ambient_dim(); ++d) out += ",x" + std::to_string(d);
    out += "\n";
    for (Eigen::Index j = 0; j < P.vertices().cols(); ++j) {
        out += std::to_string(j);
        for (Eigen::Index d = 0; d < P.ambient_dim(); ++d) {
            out += "," + detail::fmt(P.vertices()(d, j));
        }
        out += "\n";
    }
    return out;
}

/// Vector rendering of a rank-1 or rank-2 moment polytope with its
/// vertices; fixed canvas, deterministic output.
inline std::string polytope_svg(const Polytope& P) {
    if (P.intrinsic_dim() > 2) {
        throw input_error("svg output requires intrinsic dimension <= 2");
    }
    // project vertices to chart coordinates (1D or 2D)
    const Eigen::Index k = P.intrinsic_dim();
    const Eigen::Index n = P.vertices().cols();
    RMat pts(2, n);
    pts.setZero();
    for (Eigen::Index j = 0; j < n; ++j) {
        const RVec y = P.chart_basis().transpose() * (P.vertices().col(j) - P.chart_origin());
        for (Eigen::Index d = 0; d < k; ++d) pts(d, j) = y[d];
    }
    double lo_x = pts.row(0).minCoeff(), hi_x = pts.row(0).maxCoeff();
    double lo_y = pts.row(1).minCoeff(), hi_y = pts.row(1).maxCoeff();
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const double margin = 40.0, size = 400.0;
    auto sx = [&](double x) { return margin + (x - lo_x) / span * size; };
    auto sy = [&](double y) { return margin + size - (y - lo_y) / span * size; };

    // order polygon vertices by angle around the centroid
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
    const double cx = pts.row(0).mean(), cy = pts.row(1).mean();
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return std::atan2(pts(1, i) - cy, pts(0, i) - cx) <
               std::atan2(pts(1, j) - cy, pts(0, j) - cx);
    });

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
        "viewBox=\"0 0 480 480\">\n";
    svg += "<rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    if (n >= 2) {
        std::string path;
        for (std::size_t t = 0; t < order.size(); ++t) {
            path += (t == 0 ? "M" : "L") + num(sx(pts(0, order[t]))) + " " +
                    num(sy(pts(1, order[t])));
        }
        path += "Z";
        svg += "<path d=\"" + path +
               "\" fill=\"#dbeafe\" stroke=\"#1d4ed8\" stroke-width=\"2\"/>\n";
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        svg += "<circle cx=\"" + num(sx(pts(0, j))) + "\" cy=\"" + num(sy(pts(1, j))) +
               "\" r=\"4\" fill=\"#1d4ed8\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

// ---------------------------------------------------------------------------
// critical

inline ordered_json critical_document(const SymmetricSpaceModel& m,
                                      const RestrictedRootSystem& roots, const RVec& q,
                                      const RVec& a,
                                      const std::vector<CriticalComponent>& components,
                                      const DegeneracyReport& audit) {
    ordered_json doc = report_header("critical");
    doc["model"] = model_block(m, roots);
    doc["q"] = detail::json_vec(q);
    doc["a"] = detail::json_vec(a);
    ordered_json rows = ordered_json::array();
    for (const auto& c : components) {
        ordered_json r;
        r["level"] = c.level;
        r["index"] = c.index;
        r["weyl_index"] = c.weyl_index;
        r["b"] = detail::json_vec(c.b);
        r["active_roots"] = c.active_roots;
        r["f_at_representative"] = c.f_at_representative;
        r["grad_norm"] = c.grad_norm;
        r["slice_height_residual"] = c.slice_height_residual;
        r["slice_grad_norm"] = c.slice_grad_norm;
        r["resolved"] = c.resolved;
        rows.push_back(r);
    }
    doc["components"] = rows;
    ordered_json aj;
    aj["index_zero_only_at_minimum"] = audit.index_zero_only_at_minimum;
    aj["codim2_ok"] = audit.codim2_ok;
    aj["violations"] = audit.violations;
    ordered_json arows = ordered_json::array();
    for (const auto& row : audit.rows) {
        ordered_json r;
        r["level"] = row.level;
        r["index"] = row.index;
        r["negative_count"] = row.negative_count;
        r["level_error"] = row.level_error;
        r["hessian_rel_error"] = row.hessian_rel_error;
        r["resolved"] = row.resolved;
        r["ok"] = row.ok;
        arows.push_back(r);
    }
    aj["rows"] = arows;
    doc["audit"] = aj;
    return doc;
}

inline std::string critical_csv(const std::vector<CriticalComponent>& components) {
    std::string out =
        "level,index,weyl_index,b,active_roots,grad_norm,slice_height_residual,slice_grad_norm,"
        "resolved\n";
    for (const auto& c : components) {
        std::string b, act;
        for (Eigen::Index i = 0; i < c.b.size(); ++i) {
            b += (i ? " " : "") + detail::fmt(c.b[i]);
        }
        for (std::size_t i = 0; i < c.active_roots.size(); ++i) {
            act += (i ? " " : "") + std::to_string(c.active_roots[i]);
        }
        out += detail::fmt(c.level) + "," + std::to_string(c.index) + "," +
               std::to_string(c.weyl_index) + "," + b + "," + act + "," +
               detail::fmt(c.grad_norm) + "," + detail::fmt(c.slice_height_residual) + "," +
               detail::fmt(c.slice_grad_norm) + "," + (c.resolved ? "true" : "false") + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// fiber

inline ordered_json fiber_document(const SymmetricSpaceModel& m,
                                   const RestrictedRootSystem& roots, const RVec& q,
                                   const FiberReport& fr, std::uint64_t seed, double tol) {
    ordered_json doc = report_header("fiber");
    doc["model"] = model_block(m, roots);
    doc["q"] = detail::json_vec(q);
    doc["a"] = detail::json_vec(fr.a);
    doc["seed"] = seed;
    doc["tolerance"] = tol;
    doc["regime"] = fr.regime;
    doc["requested"] = fr.requested;
    doc["kept"] = fr.samples.size();
    ordered_json sweep = ordered_json::array();
    for (const auto& row : fr.sweep) {
        ordered_json r;
        r["epsilon"] = row.epsilon;
        r["components"] = row.components;
        sweep.push_back(r);
    }
    doc["sweep"] = sweep;
    doc["component_count"] = fr.component_count;
    doc["verdict"] = fr.verdict;
    doc["warning"] = fr.warning;
    return doc;
}

inline std::string fiber_csv(const FiberReport& fr) {
    std::string out = "epsilon,components\n";
    for (const auto& row : fr.sweep) {
        out += detail::fmt(row.epsilon) + "," + std::to_string(row.components) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// kirwan

inline ordered_json criterion_document(const SymmetricSpaceModel& m,
                                       const RestrictedRootSystem& roots,
                                       const CriterionReport& cr) {
    ordered_json doc = report_header("kirwan");
    doc["model"] = model_block(m, roots);
    doc["multiplicity_gate"] = cr.multiplicity_gate;
    ordered_json walls = ordered_json::array();
    for (const auto& wv : cr.walls) {
        ordered_json w;
        w["vanishing_mask"] = wv.wall.vanishing_mask;
        w["weyl_class"] = wv.wall.weyl_class;
        w["b"] = detail::json_vec(wv.wall.b);
        w["verdict"] = wv.verdict;
        w["fixed_set_dim"] = wv.witness ? wv.witness->fixed_set_p.dim() : -1;
        w["obstruction_dim"] = wv.obstruction.dim();
        w["obstruction_side"] = wv.obstruction_side;
        w["note"] = wv.note;
        walls.push_back(w);
    }
    doc["walls"] = walls;
    doc["model_verdict"] = cr.model_verdict;
    doc["reason"] = cr.reason;
    return doc;
}

inline std::string criterion_csv(const CriterionReport& cr) {
    std::string out = "vanishing_mask,weyl_class,verdict,fixed_set_dim,obstruction_dim,obstruction_side\n";
    for (const auto& wv : cr.walls) {
        out += std::to_string(wv.wall.vanishing_mask) + "," + std::to_string(wv.wall.weyl_class) +
               "," + wv.verdict + "," +
               std::to_string(wv.witness ? wv.witness->fixed_set_p.dim() : -1) + "," +
               std::to_string(wv.obstruction.dim()) + "," + wv.obstruction_side + "\n";
    }
    return out;
}

}  // namespace flagmoment
