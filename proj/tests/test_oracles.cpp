#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bbsim/errors.hpp"
#include "bbsim/oracles.hpp"
#include "bbsim/rng.hpp"

using namespace bbsim;

namespace {

// Reference implementation: scan all 2^n subsets.
std::vector<std::vector<int>> all_mis_bruteforce(const Graph& g) {
    std::vector<std::vector<int>> out;
    for (int mask = 0; mask < (1 << g.n); ++mask) {
        std::vector<int> s;
        for (int v = 0; v < g.n; ++v)
            if (mask >> v & 1) s.push_back(v);
        bool indep = true;
        for (size_t a = 0; a < s.size() && indep; ++a)
            for (size_t b = a + 1; b < s.size() && indep; ++b)
                if (g.has_edge(s[a], s[b])) indep = false;
        if (!indep) continue;
        bool maximal = true;
        for (int v = 0; v < g.n && maximal; ++v) {
            if (mask >> v & 1) continue;
            bool can_add = true;
            for (int u : s)
                if (g.has_edge(u, v)) can_add = false;
            if (can_add) maximal = false;
        }
        if (maximal) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Reference matching: try all edge subsets (fine below ~14 edges), else greedy
// exhaustive recursion over edges.
int matching_bruteforce(const Graph& g, size_t from = 0, std::vector<bool> used = {}) {
    if (used.empty()) used.assign(g.n, false);
    int best = 0;
    for (size_t e = from; e < g.edges.size(); ++e) {
        auto [u, v] = g.edges[e];
        if (used[u] || used[v]) continue;
        used[u] = used[v] = true;
        best = std::max(best, 1 + matching_bruteforce(g, e + 1, used));
        used[u] = used[v] = false;
    }
    return best;
}

}  // namespace

TEST_CASE("independent-set validity on hand graphs") {
    Graph tri = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(is_mis(tri, {0}));
    CHECK(is_mis(tri, {2}));
    Graph p4 = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(is_mis(p4, {0, 2}));
    CHECK(is_mis(p4, {1, 3}));
    CHECK(is_mis(p4, {0, 3}));
    CHECK(!is_mis(p4, {0}));       // independent but not maximal
    CHECK(!is_mis(p4, {0, 1}));    // not independent
    CHECK(!is_mis(p4, {}));        // empty is never maximal on a nonempty graph
    Graph empty = Graph::from_edges(3, {});
    CHECK(is_mis(empty, {0, 1, 2}));
    CHECK(!is_mis(empty, {0, 1}));
}

TEST_CASE("maximal independent set enumeration matches the subset scan") {
    CHECK(enumerate_all_mis(Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}})).size() == 3);
    Graph c5 = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
    CHECK(enumerate_all_mis(c5).size() == 5);

    Rng rng(404);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 2 + rng.below(9);
        Graph g = gnp_random_graph(n, 0.2 + 0.06 * rng.below(10), rng.word());
        auto fast = enumerate_all_mis(g);
        std::sort(fast.begin(), fast.end());
        CHECK(fast == all_mis_bruteforce(g));
        for (const auto& s : fast) CHECK(is_mis(g, s));
    }
}

TEST_CASE("matching sizes: exhaustive DP, blossom, and brute force agree") {
    Graph k4 = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(max_matching_size_exhaustive(k4) == 2);
    CHECK(max_matching_size_blossom(k4) == 2);
    Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(max_matching_size(star) == 1);
    // Odd cycles need the blossom contraction to be exact.
    Graph c9 = Graph::from_edges(
        9, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {0, 8}});
    CHECK(max_matching_size_blossom(c9) == 4);

    Rng rng(505);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + rng.below(13);
        Graph g = gnp_random_graph(n, 0.15 + 0.07 * rng.below(10), rng.word());
        const int dp = max_matching_size_exhaustive(g);
        CHECK(dp == max_matching_size_blossom(g));
        CHECK(dp == max_matching_size(g));
        if (g.edges.size() <= 16) CHECK(dp == matching_bruteforce(g));
    }
}

TEST_CASE("matching outputs are scored and validated") {
    Graph p4 = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    MatchingScore sc = matching_score(p4, MatchingOutput{{{0, 1}, {2, 3}}});
    CHECK(sc.valid_edges == 2);
    CHECK(sc.total_pairs == 2);
    sc = matching_score(p4, MatchingOutput{{{0, 3}, {1, 2}}});
    CHECK(sc.valid_edges == 1);  // (0,3) is not an edge
    CHECK(sc.total_pairs == 2);
    CHECK_THROWS_AS(matching_score(p4, MatchingOutput{{{0, 1}, {1, 2}}}), NotDisjoint);
}

TEST_CASE("dropped pair edges decode from an independent set") {
    // Pairing (0,1), (2,3): if both ends of a pair sit in s the pair edge was
    // dropped from the instance.
    auto dropped = decode_dropped_edges(2, {0, 1, 2});
    CHECK(dropped == std::vector<Edge>{{0, 1}});
    CHECK(decode_dropped_edges(2, {0, 2}).empty());
}
