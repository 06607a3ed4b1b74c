// Subspace arithmetic, NNLS, and union-find checked against independent
// oracles: SVD ranks for Gram-Schmidt, the dimension formula for
// intersections, and a hand-rolled BFS for component labeling.

#include <catch2/catch_amalgamated.hpp>

#include <queue>
#include <vector>

#include "flagmoment/numerics.hpp"
#include "flagmoment/rng.hpp"

using namespace flagmoment;

namespace {

RVec vec3(double a, double b, double c) {
    RVec v(3);
    v << a, b, c;
    return v;
}

std::vector<int> bfs_components(std::size_t n,
                                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> label(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto v : adj[u]) {
                if (label[v] < 0) {
                    label[v] = next;
                    q.push(v);
                }
            }
        }
        ++next;
    }
    return label;
}

} // namespace

TEST_CASE("orthonormalize drops dependent vectors", "[numerics]") {
    RVec a(2), b(2);
    a << 1, 0;
    b << 2, 0;
    const Subspace s = orthonormalize(2, {a, b});
    REQUIRE(s.dim() == 1);

    const Subspace plane = orthonormalize(3, {vec3(1, 0, 0), vec3(0, 1, 0), vec3(1, 1, 0)});
    REQUIRE(plane.dim() == 2);
}

TEST_CASE("projection onto a coordinate plane", "[numerics]") {
    const Subspace plane = orthonormalize(3, {vec3(1, 0, 0), vec3(0, 1, 0)});
    const RVec p = plane.project(vec3(1, 2, 3));
    REQUIRE((p - vec3(1, 2, 0)).norm() < 1e-14);
    REQUIRE(plane.contains_vector(vec3(0.3, -0.7, 0)));
    REQUIRE_FALSE(plane.contains_vector(vec3(0, 0, 1)));
}

TEST_CASE("gram-schmidt rank agrees with an SVD oracle", "[numerics]") {
    RandomStream rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RVec> vs;
        RMat A(3, 5);
        for (int j = 0; j < 5; ++j) {
            RVec v = rng.gaussian_vector(3);
            if (trial % 3 == 0 && j >= 3) v = 0.5 * A.col(0) - 2.0 * A.col(1);  // force dependence
            A.col(j) = v;
            vs.push_back(v);
        }
        const Subspace s = orthonormalize(3, vs, 1e-9);
        Eigen::JacobiSVD<RMat> svd(A);
        Eigen::Index rank = 0;
        while (rank < 3 && svd.singularValues()[rank] > 1e-9 * svd.singularValues()[0]) ++rank;
        REQUIRE(s.dim() == rank);
        // basis really is orthonormal
        const RMat gram = s.basis().transpose() * s.basis();
        REQUIRE((gram - RMat::Identity(s.dim(), s.dim())).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("intersection dimension follows the rank formula", "[numerics]") {
    RandomStream rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        RMat A(4, 3), B(4, 3);
        for (int j = 0; j < 3; ++j) {
            A.col(j) = rng.gaussian_vector(4);
            B.col(j) = rng.gaussian_vector(4);
        }
        const Subspace sa = Subspace::span(4, A);
        const Subspace sb = Subspace::span(4, B);
        RMat stacked(4, 6);
        stacked << A, B;
        const Eigen::Index joint = numerical_rank(stacked, 1e-9);
        const Subspace cap = intersection(sa, sb);
        REQUIRE(cap.dim() == sa.dim() + sb.dim() - joint);  // generically 2
        for (Eigen::Index j = 0; j < cap.dim(); ++j) {
            REQUIRE(sa.contains_vector(cap.basis().col(j), 1e-8));
            REQUIRE(sb.contains_vector(cap.basis().col(j), 1e-8));
        }
    }
}

TEST_CASE("coordinate-plane intersection is the shared axis", "[numerics]") {
    const Subspace xy = orthonormalize(3, {vec3(1, 0, 0), vec3(0, 1, 0)});
    const Subspace yz = orthonormalize(3, {vec3(0, 1, 0), vec3(0, 0, 1)});
    const Subspace cap = intersection(xy, yz);
    REQUIRE(cap.dim() == 1);
    REQUIRE(std::abs(std::abs(cap.basis()(1, 0)) - 1.0) < 1e-12);
}

TEST_CASE("kernel and image of explicit maps", "[numerics]") {
    RMat A(2, 3);
    A << 1, 0, 0,
         0, 1, 0;
    const Subspace ker = kernel_of_map(A);
    REQUIRE(ker.dim() == 1);
    REQUIRE(std::abs(std::abs(ker.basis()(2, 0)) - 1.0) < 1e-12);

    RandomStream rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int r = 1 + static_cast<int>(rng.below(3));
        RMat B(5, r), C(r, 6);
        for (int j = 0; j < r; ++j) {
            B.col(j) = rng.gaussian_vector(5);
            C.row(j) = rng.gaussian_vector(6).transpose();
        }
        const RMat M = B * C;  // rank r by construction
        REQUIRE(kernel_of_map(M).dim() == 6 - r);
        REQUIRE(image_of_map(M).dim() == r);
        // kernel vectors really map to zero
        const Subspace k = kernel_of_map(M);
        for (Eigen::Index j = 0; j < k.dim(); ++j) {
            REQUIRE((M * k.basis().col(j)).norm() < 1e-7 * M.norm());
        }
    }
}

TEST_CASE("complement and sum recompose the ambient space", "[numerics]") {
    RandomStream rng(5);
    RMat A(6, 2);
    A.col(0) = rng.gaussian_vector(6);
    A.col(1) = rng.gaussian_vector(6);
    const Subspace s = Subspace::span(6, A);
    const Subspace c = orthogonal_complement(s);
    REQUIRE(c.dim() == 4);
    const Subspace whole = subspace_sum(s, c);
    REQUIRE(whole.dim() == 6);
    // complement is orthogonal to s
    REQUIRE((s.basis().transpose() * c.basis()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nnls solves feasible and clamped problems", "[numerics]") {
    RMat I2 = RMat::Identity(2, 2);
    RVec b(2);
    b << 1, -1;
    const RVec x = nnls(I2, b);
    REQUIRE(std::abs(x[0] - 1.0) < 1e-10);
    REQUIRE(std::abs(x[1]) < 1e-10);

    RandomStream rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        RMat A(6, 4);
        for (int j = 0; j < 4; ++j) A.col(j) = rng.gaussian_vector(6);
        RVec xt(4);
        for (int j = 0; j < 4; ++j) xt[j] = std::abs(rng.gaussian());
        const RVec rhs = A * xt;
        const RVec sol = nnls(A, rhs);
        REQUIRE((A * sol - rhs).norm() < 1e-8 * std::max(1.0, rhs.norm()));
        REQUIRE(sol.minCoeff() >= 0.0);
    }
}

TEST_CASE("union-find matches a BFS oracle on random graphs", "[numerics]") {
    RandomStream rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(58);
        const std::size_t m = rng.below(2 * n);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t e = 0; e < m; ++e) {
            edges.emplace_back(rng.below(n), rng.below(n));
        }
        const auto mine = union_find_components(n, edges);
        const auto oracle = bfs_components(n, edges);
        REQUIRE(component_count(mine) == component_count(oracle));
        // same partition: labels agree iff oracle labels agree
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                REQUIRE((mine[i] == mine[j]) == (oracle[i] == oracle[j]));
            }
        }
    }
}

TEST_CASE("component labels are numbered by first appearance", "[numerics]") {
    // vertices 0,1 join; 2 isolated; 3,4 join
    const auto labels = union_find_components(5, {{3, 4}, {0, 1}});
    REQUIRE(labels == std::vector<int>{0, 0, 1, 2, 2});
}

TEST_CASE("dimension mismatches are rejected", "[numerics]") {
    const Subspace s = orthonormalize(3, {vec3(1, 0, 0)});
    RVec v4(4);
    v4.setZero();
    REQUIRE_THROWS_AS(s.project(v4), dimension_error);
    REQUIRE_THROWS_AS(union_find_components(3, {{0, 5}}), input_error);
}
