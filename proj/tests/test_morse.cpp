// Critical structure of f(x) = |mu(x) - a|^2: gradients against central
// differences, closed-form circle oracles (levels (1 -+ a)^2, indices
// {0, 1, 1}, scalar Hessians), the rank-one multiplicity-3 model, full
// enumeration/resolution/audit properties on a rank-2 model, fiber
// sampling with connectivity verdicts, and the multistart completeness
// oracle.
//
// Circle oracle (orbit = unit circle, x(t) = (cos t, sin t), mu = cos t,
// target a in (-1, 1)): f = (cos t - a)^2 has critical points at the
// fiber cos t = a (level 0) and at the vertices t = 0, pi with levels
// (1 - a)^2 and (1 + a)^2; second derivatives there are 2(1 - a^2),
// 2(a - 1), and -2(a + 1). For a = 0.31: levels {0, 0.4761, 1.7161},
// Hessians {1.8078, -1.38, -2.62}, indices {0, 1, 1}.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "flagmoment/morse.hpp"

using namespace flagmoment;

namespace {

struct Ctx {
    SymmetricSpaceModel m;
    RestrictedRootSystem roots;
    WeylGroup W;
    RVec q;
};

Ctx make(const char* name, std::vector<int> params = {}) {
    Ctx c{build_catalog_model(name, params), {}, {}, {}};
    c.roots = restricted_roots(c.m);
    c.W = generate_weyl(c.roots);
    c.q = default_regular_direction(c.m, c.roots);
    return c;
}

double fd_directional(const SymmetricSpaceModel& m, const Mat& x, const Mat& z, const RVec& a) {
    const double h = 1e-5 / std::max(1.0, z.norm());
    const Mat up = adjoint_action(expm_skew_hermitian(h * z), x);
    const Mat dn = adjoint_action(expm_skew_hermitian(-h * z), x);
    return (fiber_objective(m, up, a) - fiber_objective(m, dn, a)) / (2.0 * h);
}

} // namespace

TEST_CASE("gradient of the fiber objective matches central differences", "[morse]") {
    struct Row {
        const char* name;
        std::vector<int> params;
    };
    const std::vector<Row> rows = {
        {"su2-over-so2", {}}, {"su3-over-u2", {}}, {"adjoint-su", {3}}, {"su2n-over-spn", {2}}};
    for (const auto& r : rows) {
        INFO(r.name);
        const Ctx c = make(r.name, r.params);
        RandomStream rng(411);
        const RVec a = 0.37 * c.q;
        for (int trial = 0; trial < 10; ++trial) {
            const Mat u = expm_skew_hermitian(c.m.k_matrix(rng.gaussian_vector(c.m.dim_k)));
            const Mat x = adjoint_action(u, c.m.a_matrix(c.q));
            const Mat z = c.m.k_matrix(rng.gaussian_vector(c.m.dim_k));
            const RVec g = grad_f(c.m, x, a);
            const double predicted = g.dot(c.m.p_coords(commutator(z, x)));
            const double observed = fd_directional(c.m, x, z, a);
            REQUIRE(std::abs(predicted - observed) <= 1e-5 * std::max(1.0, std::abs(predicted)));
        }
        // Weyl points are critical for every target in a.
        for (const RMat& w : c.W.elements) {
            REQUIRE(grad_f(c.m, c.m.a_matrix(w * c.q), a).norm() <= 1e-9);
            REQUIRE(grad_f(c.m, c.m.a_matrix(w * c.q), RVec::Zero(c.m.rank)).norm() <= 1e-9);
        }
    }
}

TEST_CASE("height functions pair with the moment map and vanish at Weyl points", "[morse]") {
    const Ctx c = make("adjoint-su", {3});
    RandomStream rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        const HeightFunction h{rng.gaussian_vector(c.m.rank)};
        const Mat u = expm_skew_hermitian(c.m.k_matrix(rng.gaussian_vector(c.m.dim_k)));
        const Mat x = adjoint_action(u, c.m.a_matrix(c.q));
        REQUIRE(std::abs(h.value(c.m, x) - h.b.dot(moment_map(c.m, x))) <= 1e-10);
    }
    const HeightFunction h{RVec::Ones(c.m.rank)};
    for (const RMat& w : c.W.elements) {
        REQUIRE(h.gradient(c.m, c.m.a_matrix(w * c.q)).norm() <= 1e-9);
    }
}

TEST_CASE("circle model: levels, indices, and Hessians match the closed form", "[morse]") {
    const Ctx c = make("su2-over-so2");
    const double a0 = 0.31;
    RVec a(1);
    a << a0;

    const auto candidates = enumerate_critical_levels(c.m, c.roots, c.W, c.q, a);
    REQUIRE(candidates.size() == 3);
    CHECK(std::abs(candidates[0].level - 0.0) <= 1e-12);
    CHECK(std::abs(candidates[1].level - 0.4761) <= 1e-9);
    CHECK(std::abs(candidates[2].level - 1.7161) <= 1e-9);

    const auto comps = resolve_critical_components(c.m, c.roots, c.W, c.q, a, candidates);
    REQUIRE(comps.size() == 3);
    for (const auto& comp : comps) {
        INFO("level " << comp.level);
        REQUIRE(comp.resolved);
        REQUIRE(std::abs(comp.f_at_representative - comp.level) <= 1e-8);
        REQUIRE(comp.grad_norm <= 1e-7);
    }
    CHECK(comps[0].index == 0);
    CHECK(comps[1].index == 1);
    CHECK(comps[2].index == 1);
    CHECK(comps[1].weyl_index == 0);  // the identity Weyl point q
    CHECK(comps[2].weyl_index == 1);  // the antipodal point -q

    // Scalar Hessians: 2(1 - a^2) on the fiber, 2(a - 1) at q, -2(a + 1)
    // at -q; each form is 1x1 in the arclength frame.
    const double expected[3] = {1.8078, -1.38, -2.62};
    for (int i = 0; i < 3; ++i) {
        const HessianData hd = hessian_f(c.m, comps[i].representative, comps[i].b);
        REQUIRE(hd.form.rows() == 1);
        CHECK(std::abs(hd.form(0, 0) - expected[i]) <= 1e-6);
        const RMat fd = fd_hessian_f(c.m, comps[i].representative, a, hd);
        CHECK(std::abs(hd.form(0, 0) - fd(0, 0)) <= 1e-4 * std::max(1.0, std::abs(fd(0, 0))));
    }

    const DegeneracyReport audit = audit_minimal_degeneracy(c.m, a, comps);
    CHECK(audit.index_zero_only_at_minimum);
    CHECK_FALSE(audit.codim2_ok);  // multiplicity-1 root: nonminimal index 1
    for (const auto& row : audit.rows) {
        CHECK(row.negative_count == row.index);
        CHECK(row.level_error <= 1e-8);
        CHECK(row.hessian_rel_error <= 1e-4);
    }
}

TEST_CASE("rank-one multiplicity-3 model: indices triple and audit passes", "[morse]") {
    const Ctx c = make("su3-over-u2");
    RVec a(1);
    a << 0.31;
    const auto candidates = enumerate_critical_levels(c.m, c.roots, c.W, c.q, a);
    REQUIRE(candidates.size() == 3);
    const auto comps = resolve_critical_components(c.m, c.roots, c.W, c.q, a, candidates);
    REQUIRE(comps.size() == 3);
    CHECK(std::abs(comps[1].level - 0.4761) <= 1e-9);
    CHECK(std::abs(comps[2].level - 1.7161) <= 1e-9);
    CHECK(comps[0].index == 0);
    CHECK(comps[1].index == 3);
    CHECK(comps[2].index == 3);

    // At a vertex the tangent space is a single curvature block, so the
    // Hessian is 2<b, eta> times the identity.
    const HessianData hd = hessian_f(c.m, comps[1].representative, comps[1].b);
    REQUIRE(hd.form.rows() == 3);
    Eigen::SelfAdjointEigenSolver<RMat> es(hd.form);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(std::abs(es.eigenvalues()[i] - (-1.38)) <= 1e-6);
    }

    const DegeneracyReport audit = audit_minimal_degeneracy(c.m, a, comps);
    CHECK(audit.violations.empty());
    CHECK(audit.index_zero_only_at_minimum);
    CHECK(audit.codim2_ok);
}

TEST_CASE("rank-two model: enumeration covers vertices, audit is clean", "[morse]") {
    const Ctx c = make("adjoint-su", {3});
    const RVec a = 0.3 * c.q;
    const Polytope P = moment_polytope(c.W, c.q);
    REQUIRE(P.violation(a) < -1e-7);  // strictly interior target

    const auto candidates = enumerate_critical_levels(c.m, c.roots, c.W, c.q, a);
    // The zero offset and every vertex offset w q - a must be present.
    const auto has_b = [&](const RVec& b) {
        return std::any_of(candidates.begin(), candidates.end(),
                           [&](const CriticalCandidate& cand) { return (cand.b - b).norm() <= 1e-8; });
    };
    CHECK(has_b(RVec::Zero(c.m.rank)));
    for (const RMat& w : c.W.elements) {
        CHECK(has_b(w * c.q - a));
    }

    const auto comps = resolve_critical_components(c.m, c.roots, c.W, c.q, a, candidates);
    REQUIRE(comps.size() >= 7);  // minimum + six vertex components
    for (const auto& comp : comps) {
        INFO("level " << comp.level << " weyl " << comp.weyl_index);
        REQUIRE(comp.resolved);
        REQUIRE(std::abs(comp.f_at_representative - comp.level) <= 1e-8);
        REQUIRE(comp.grad_norm <= 1e-7);
        REQUIRE(comp.slice_height_residual <= 1e-8);
        REQUIRE(comp.slice_grad_norm <= 1e-7);
        if (comp.level > 1e-12) CHECK(comp.index >= 2);
    }

    const DegeneracyReport audit = audit_minimal_degeneracy(c.m, a, comps);
    INFO("violations: " << (audit.violations.empty() ? "-" : audit.violations.front()));
    CHECK(audit.violations.empty());
    CHECK(audit.index_zero_only_at_minimum);
    CHECK(audit.codim2_ok);
}

TEST_CASE("hessian_f rejects points that are not critical", "[morse]") {
    const Ctx c = make("su3-over-u2");
    RandomStream rng(5);
    const Mat u = expm_skew_hermitian(c.m.k_matrix(rng.gaussian_vector(c.m.dim_k)));
    const Mat x = adjoint_action(u, c.m.a_matrix(c.q));
    RVec b(1);
    b << 0.4;  // mu(x) - b is generic, so x is not critical for it
    REQUIRE_THROWS_AS(hessian_f(c.m, x, b), validation_error);
}

TEST_CASE("fiber sampling: q start, retention, and empty targets", "[morse]") {
    const Ctx c = make("su3-over-u2");

    // Target the moment image of q itself: the zero start is already on
    // the fiber and is retained untouched.
    const auto at_q = sample_fiber(c.m, c.W, c.q, c.q, 5, 99);
    REQUIRE(!at_q.empty());
    CHECK((at_q.front().x - c.m.a_matrix(c.q)).norm() <= 1e-12);

    RVec inside(1), outside(1);
    inside << 0.31;
    outside << 2.0;
    const auto kept = sample_fiber(c.m, c.W, c.q, inside, 100, 7);
    CHECK(kept.size() >= 90);
    for (const auto& s : kept) {
        REQUIRE(std::sqrt(s.f) <= 1e-6);
    }

    const FiberReport empty_report = fiber_report(c.m, c.W, c.q, outside, 50, 7);
    CHECK(empty_report.regime == "outside");
    CHECK(empty_report.verdict == "empty");
    CHECK(empty_report.samples.empty());
}

TEST_CASE("fiber connectivity: circle splits in two, higher multiplicity connects", "[morse]") {
    const Ctx circle = make("su2-over-so2");
    RVec a(1);
    a << 0.31;
    const FiberReport split = fiber_report(circle.m, circle.W, circle.q, a, 160, 2026);
    CHECK(split.regime == "interior");
    CHECK(split.component_count == 2);
    CHECK(split.verdict == "disconnected(2)");

    // At a vertex the fiber degenerates to one point.
    const FiberReport vertex = fiber_report(circle.m, circle.W, circle.q, circle.q, 60, 2026);
    CHECK(vertex.regime == "boundary");
    CHECK(vertex.component_count == 1);

    const Ctx wide = make("su3-over-u2");
    const FiberReport joined = fiber_report(wide.m, wide.W, wide.q, a, 240, 2026);
    CHECK(joined.regime == "interior");
    CHECK(joined.verdict == "connected");

    const Ctx rank2 = make("adjoint-su", {3});
    const FiberReport rank2_report =
        fiber_report(rank2.m, rank2.W, rank2.q, RVec(0.3 * rank2.q), 200, 2026);
    CHECK(rank2_report.regime == "interior");
    CHECK(rank2_report.verdict == "connected");
}

TEST_CASE("multistart search finds no level outside the enumeration", "[morse]") {
    struct Row {
        const char* name;
        std::vector<int> params;
        double scale;
    };
    const std::vector<Row> rows = {
        {"su2-over-so2", {}, 0.31}, {"su3-over-u2", {}, 0.31}, {"adjoint-su", {3}, 0.3}};
    for (const auto& r : rows) {
        INFO(r.name);
        const Ctx c = make(r.name, r.params);
        const RVec a = r.scale * c.q;
        const MultistartReport report =
            multistart_critical_search(c.m, c.roots, c.W, c.q, a, 60, 314159);
        CHECK(report.unmatched.empty());
        CHECK(report.converged >= 54);  // at least 90 percent of the starts
        CHECK(report.max_match_distance <= 1e-6);
    }
}

TEST_CASE("descent is monotone and reaches interior fibers", "[morse]") {
    const Ctx c = make("adjoint-su", {3});
    const RVec a = 0.3 * c.q;
    RandomStream rng(13);
    for (int trial = 0; trial < 4; ++trial) {
        const Mat u = expm_skew_hermitian(c.m.k_matrix(rng.gaussian_vector(c.m.dim_k)));
        const Mat x0 = adjoint_action(u, c.m.a_matrix(c.q));
        const double f0 = fiber_objective(c.m, x0, a);
        DescentOptions opt;
        opt.target = 1e-12;
        const DescentResult r = descend_to_moment_target(c.m, x0, a, c.m.k_space(), opt);
        REQUIRE(r.converged);
        REQUIRE(r.f <= 1e-12);
        REQUIRE(r.f <= f0);
    }
}
