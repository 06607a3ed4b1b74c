// Builds the hull of all permutations of a diagonal weight vector -- the
// simplest moment-polytope shape -- and prints its vertex and facet
// counts. A warm-up for the full symmetric-space pipeline.

#include <algorithm>
#include <cstdio>
#include <vector>

#include "flagmoment/polytope.hpp"

int main() {
    using namespace flagmoment;
    RVec base(4);
    base << 1, 2, 3, 4;
    std::vector<int> perm = {0, 1, 2, 3};
    std::vector<RVec> pts;
    do {
        RVec p(4);
        for (int i = 0; i < 4; ++i) p[i] = base[perm[static_cast<std::size_t>(i)]];
        pts.push_back(p);
    } while (std::next_permutation(perm.begin(), perm.end()));

    const Polytope P = convex_hull(pts);
    std::printf("permutohedron of (1,2,3,4): intrinsic dim %d, %d vertices, %d facets\n",
                static_cast<int>(P.intrinsic_dim()), static_cast<int>(P.vertices().cols()),
                static_cast<int>(P.facets().size()));
    return 0;
}
