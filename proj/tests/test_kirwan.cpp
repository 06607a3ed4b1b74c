#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "flagmoment/kirwan.hpp"

using namespace flagmoment;

namespace {

struct Ctx {
    SymmetricSpaceModel m;
    RestrictedRootSystem roots;
    WeylGroup W;
};

Ctx make(const char* name, std::vector<int> params = {}) {
    Ctx c{build_catalog_model(name, params), {}, {}};
    c.roots = restricted_roots(c.m);
    c.W = generate_weyl(c.roots);
    return c;
}

}  // namespace

TEST_CASE("wall types: strata, masks, and conjugacy classes", "[kirwan]") {
    SECTION("rank one has exactly the regular stratum and zero") {
        for (const char* name : {"su2-over-so2", "su3-over-u2"}) {
            auto c = make(name);
            auto types = wall_types(c.m, c.roots, c.W);
            REQUIRE(types.size() == 2);
            CHECK(types[0].vanishing_mask == 0);
            CHECK_THAT(types[0].b.norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
            CHECK(types[1].vanishing_mask == 1);
            CHECK(types[1].b.norm() == 0.0);
            CHECK(types[0].weyl_class != types[1].weyl_class);
        }
    }
    SECTION("rank two, three conjugate wall lines") {
        auto c = make("adjoint-su", {3});
        auto types = wall_types(c.m, c.roots, c.W);
        REQUIRE(types.size() == 5);
        std::vector<std::uint32_t> masks;
        for (const auto& t : types) masks.push_back(t.vanishing_mask);
        CHECK(masks == std::vector<std::uint32_t>{0, 1, 2, 4, 7});
        // the three single-root walls are Weyl conjugate; regular and zero are not
        CHECK(types[1].weyl_class == types[2].weyl_class);
        CHECK(types[2].weyl_class == types[3].weyl_class);
        CHECK(types[0].weyl_class != types[1].weyl_class);
        CHECK(types[4].weyl_class != types[1].weyl_class);
        // representatives are generic: exactly the masked roots vanish
        for (const auto& t : types) {
            for (std::size_t i = 0; i < c.roots.indivisible.size(); ++i) {
                const double pairing = std::abs(c.roots.indivisible_root(i).alpha.dot(t.b));
                if (t.vanishing_mask & (1u << i)) {
                    CHECK(pairing <= 1e-9);
                } else {
                    CHECK(pairing > 1e-6);
                }
            }
        }
    }
    SECTION("rank two with two root lengths: two wall classes") {
        auto c = make("su-over-s-uxu", {2, 2});
        auto types = wall_types(c.m, c.roots, c.W);
        REQUIRE(types.size() == 6);
        std::vector<int> classes;
        for (const auto& t : types) classes.push_back(t.weyl_class);
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        CHECK(classes.size() == 4);  // regular, short walls, long walls, zero
    }
}

TEST_CASE("centralizers grow with the vanishing set", "[kirwan]") {
    for (const char* name : {"adjoint-su", "su-over-s-uxu"}) {
        auto c = std::string(name) == "adjoint-su" ? make(name, {3}) : make(name, {2, 2});
        auto types = wall_types(c.m, c.roots, c.W);
        for (const auto& ti : types) {
            for (const auto& tj : types) {
                if ((ti.vanishing_mask & tj.vanishing_mask) != ti.vanishing_mask) continue;
                const Subspace zi = centralizer_in_k(c.m, c.roots, ti.b);
                const Subspace zj = centralizer_in_k(c.m, c.roots, tj.b);
                CHECK(zj.contains(zi, 1e-7));
            }
        }
    }
}

TEST_CASE("multiplicity-four model: every wall carries a torus witness", "[kirwan]") {
    auto c = make("su2n-over-spn", {2});
    auto report = criterion_verdict(c.m, c.roots, c.W);
    CHECK(report.multiplicity_gate);
    REQUIRE(report.walls.size() == 2);
    for (const auto& wv : report.walls) {
        CHECK(wv.verdict == "witness found");
        REQUIRE(wv.witness.has_value());
        const TorusWitness& w = *wv.witness;
        // soundness: the generator commutes with the whole target, and
        // the fixed set matches it exactly
        CHECK(w.fixed_set_p.dim() == w.target_p.dim());
        CHECK(w.fixed_set_p.equals(w.target_p, 1e-7));
        for (Eigen::Index j = 0; j < w.target_p.dim(); ++j) {
            const Mat x = c.m.from_coords(w.target_p.basis().col(j));
            CHECK(commutator(w.generator, x).norm() <= 1e-9);
        }
    }
    // the regular wall pins the fixed set to a itself
    const auto& regular = report.walls.front();
    REQUIRE(regular.wall.vanishing_mask == 0);
    CHECK(regular.witness->target_p.equals(c.m.a_space(), 1e-9));
    CHECK(regular.witness->generator.norm() > 0.0);
    CHECK(report.model_verdict == "criterion satisfied");
}

TEST_CASE("multiplicity-three model: obstructed at the regular wall", "[kirwan]") {
    auto c = make("su3-over-u2");
    auto report = criterion_verdict(c.m, c.roots, c.W);
    CHECK(report.multiplicity_gate);  // m = 3 passes; the torus hypothesis is what fails
    REQUIRE(report.walls.size() == 2);

    const auto& regular = report.walls.front();
    REQUIRE(regular.wall.vanishing_mask == 0);
    CHECK(regular.verdict == "impossible");
    CHECK_FALSE(regular.witness.has_value());
    CHECK(regular.obstruction_side == "k");

    // the certificate is exactly the k-root space of the divisible root
    const RestrictedRoot* divisible = nullptr;
    for (const auto& r : c.roots.positive) {
        if (!r.indivisible) divisible = &r;
    }
    REQUIRE(divisible != nullptr);
    REQUIRE(regular.obstruction.dim() == divisible->k_space.dim());
    CHECK(regular.obstruction.equals(divisible->k_space, 1e-7));

    // obstruction soundness: annihilated by the whole admissible space,
    // here all of the centralizer subalgebra k0
    for (Eigen::Index i = 0; i < c.roots.k0.dim(); ++i) {
        const Mat z = c.m.from_coords(c.roots.k0.basis().col(i));
        for (Eigen::Index j = 0; j < regular.obstruction.dim(); ++j) {
            const Mat v = c.m.from_coords(regular.obstruction.basis().col(j));
            CHECK(commutator(z, v).norm() <= 1e-9);
        }
    }

    const auto& zero = report.walls.back();
    CHECK(zero.verdict == "witness found");
    CHECK(zero.witness->generator.norm() == 0.0);

    CHECK(report.model_verdict == "criterion not satisfied");
    CHECK(report.reason.find("wall") != std::string::npos);
}

TEST_CASE("multiplicity-one model: rejected by the gate", "[kirwan]") {
    auto c = make("su2-over-so2");
    auto report = criterion_verdict(c.m, c.roots, c.W);
    CHECK_FALSE(report.multiplicity_gate);
    CHECK(report.model_verdict == "criterion not satisfied");
    CHECK(report.reason.find("multiplicity") != std::string::npos);
    // with k0 = 0 the regular wall is also unwitnessable, and the
    // certificate is the whole root space
    const auto& regular = report.walls.front();
    CHECK(regular.verdict == "impossible");
    CHECK(regular.obstruction.dim() == 1);
    // b = 0 is always witnessed by the trivial torus
    CHECK(report.walls.back().verdict == "witness found");
}

TEST_CASE("full flag model: witnesses on every stratum, conjugate walls agree", "[kirwan]") {
    auto c = make("adjoint-su", {3});
    auto report = criterion_verdict(c.m, c.roots, c.W);
    CHECK(report.multiplicity_gate);
    REQUIRE(report.walls.size() == 5);
    for (const auto& wv : report.walls) CHECK(wv.verdict == "witness found");
    CHECK(report.model_verdict == "criterion satisfied");
    // Weyl-conjugate walls received identical verdicts and witness shapes
    const auto& w1 = report.walls[1];
    const auto& w2 = report.walls[2];
    const auto& w3 = report.walls[3];
    CHECK(w1.verdict == w2.verdict);
    CHECK(w2.verdict == w3.verdict);
    CHECK(w1.witness->fixed_set_p.dim() == w2.witness->fixed_set_p.dim());
    CHECK(w2.witness->fixed_set_p.dim() == w3.witness->fixed_set_p.dim());
    // a single-root wall fixes a + that root's p-space
    const Subspace expected =
        subspace_sum(c.m.a_space(), c.roots.indivisible_root(0).p_space);
    CHECK(w1.witness->target_p.equals(expected, 1e-9));
}

TEST_CASE("witness tori fix exactly the centralizer slice of the orbit", "[kirwan]") {
    SECTION("multiplicity-four model, regular wall") {
        auto c = make("su2n-over-spn", {2});
        auto types = wall_types(c.m, c.roots, c.W);
        auto wv = find_torus_witness(c.m, c.roots, types[0].b);
        REQUIRE(wv.verdict == "witness found");
        RVec q(1);
        q << 1.0;
        auto fp = check_fixed_points_on_M(c.m, c.roots, c.W, *wv.witness, types[0].b, q, 60);
        CHECK(fp.checked >= 60);
        CHECK(fp.mismatches == 0);
        CHECK(fp.fixed >= c.W.order());  // at least the Weyl points
        CHECK(fp.fixed < fp.checked);    // generic samples move
        CHECK(fp.max_fixed_height_grad <= 1e-6);
        CHECK(fp.min_moved_displacement > 1e-6);
    }
    SECTION("full flag model, single-root wall") {
        auto c = make("adjoint-su", {3});
        auto types = wall_types(c.m, c.roots, c.W);
        auto wv = find_torus_witness(c.m, c.roots, types[1].b);
        REQUIRE(wv.verdict == "witness found");
        RVec q(2);
        q << 0.9, 0.3;
        auto fp = check_fixed_points_on_M(c.m, c.roots, c.W, *wv.witness, types[1].b, q, 60);
        CHECK(fp.mismatches == 0);
        CHECK(fp.fixed >= c.W.order() / 2);  // K_b-orbit points join the Weyl points
        CHECK(fp.max_fixed_height_grad <= 1e-6);
        CHECK(fp.min_moved_displacement > 1e-6);
    }
}

TEST_CASE("criterion reports are deterministic", "[kirwan]") {
    auto c = make("su3-over-u2");
    auto r1 = criterion_verdict(c.m, c.roots, c.W);
    auto r2 = criterion_verdict(c.m, c.roots, c.W);
    CHECK(r1.model_verdict == r2.model_verdict);
    CHECK(r1.reason == r2.reason);
    REQUIRE(r1.walls.size() == r2.walls.size());
    for (std::size_t i = 0; i < r1.walls.size(); ++i) {
        CHECK(r1.walls[i].verdict == r2.walls[i].verdict);
        CHECK((r1.walls[i].wall.b - r2.walls[i].wall.b).norm() == 0.0);
    }
}
