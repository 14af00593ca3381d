#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "bbsim/distributions.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/oracles.hpp"
#include "bbsim/rng.hpp"

using namespace bbsim;

namespace {

Params toy_mis() { return make_params(1, 1, Variant::mis, ToyCounts{{1}, {2}}); }
Params toy_apx() { return make_params(2, 1, Variant::apx, ToyCounts{{1}, {2}}); }

// Level-0 edges of principal block i pushed through sigma.  Positions inside
// a block follow the canonical (pre-permutation) label order, so the faithful
// comparison maps canonical position a to public label sigma[canon block[a]].
std::vector<Edge> embedded_block_edges(const Instance& inst, const BlockLayout& canon, int i,
                                       const Graph& g0) {
    std::vector<Edge> es;
    for (const Edge& e0 : g0.edges) {
        Edge e{inst.layout.sigma[canon.principal[i][e0.first]],
               inst.layout.sigma[canon.principal[i][e0.second]]};
        if (e.first > e.second) std::swap(e.first, e.second);
        es.push_back(e);
    }
    std::sort(es.begin(), es.end());
    return es;
}

std::vector<Edge> sorted_edges(std::vector<Edge> es) {
    std::sort(es.begin(), es.end());
    return es;
}

}  // namespace

TEST_CASE("count recursion pins") {
    Params p0 = make_params(2, 0, Variant::mis);
    CHECK(p0.n0() == 4);
    CHECK(p0.n_at(0) == 4);

    // Derived counts at level 1, k=2: fhat = k^6 n0^3 = 4096, phat = fhat^2.
    Params p1 = make_params(2, 1, Variant::mis);
    CHECK(p1.fhat_at(1) == 4096);
    CHECK(p1.phat_at(1) == 16777216);
    CHECK(p1.nhat_at(1) == 3LL * 4096 + 4LL * 16777216);
    CHECK(p1.n_at(1) == 2 * p1.nhat_at(1));
    CHECK(p1.f_at(1) == 2 * 4096);
    CHECK_THROWS_AS(ensure_materializable(p1), Overflow);
    try {
        ensure_materializable(p1);
    } catch (const Overflow& e) {
        CHECK(std::string(e.what()).find("16777216") != std::string::npos);
    }

    Params tm = toy_mis();
    CHECK(tm.nhat_at(1) == 5);
    CHECK(tm.n_at(1) == 10);
    CHECK(tm.p_at(1) == 4);
    CHECK(tm.f_at(1) == 2);
    CHECK_NOTHROW(ensure_materializable(tm));

    Params ta = toy_apx();
    CHECK(ta.n_at(1) == 11);
    CHECK(ta.p_at(1) == 2);
    CHECK(ta.f_at(1) == 1);
    CHECK(matching_size_bound(ta) == Rational(11, 8));

    CHECK_THROWS_AS(make_params(1, 1, Variant::mis, ToyCounts{{1}, {2, 3}}), Error);
}

TEST_CASE("level-0 graphs decode their codes") {
    // Independent-set flavor: bit i of the code is the pair edge (2i, 2i+1).
    CHECK(mis_hard0_graph(2, 0).edges.empty());
    CHECK(mis_hard0_graph(2, 0b01).edges == std::vector<Edge>{{0, 1}});
    CHECK(mis_hard0_graph(2, 0b10).edges == std::vector<Edge>{{2, 3}});
    CHECK(mis_hard0_graph(2, 0b11).edges == std::vector<Edge>{{0, 1}, {2, 3}});
    // Matching flavor: code a*k+b is the single cross edge (a, k+b).
    CHECK(apx_hard0_graph(2, 0).edges == std::vector<Edge>{{0, 2}});
    CHECK(apx_hard0_graph(2, 3).edges == std::vector<Edge>{{1, 3}});
    CHECK(apx_hard0_graph(3, 5).edges == std::vector<Edge>{{1, 5}});
}

TEST_CASE("level-0 samplers hit every code at the right rate") {
    const int T = 4096;
    std::vector<int> count(4, 0);
    long long edges = 0;
    for (int i = 0; i < T; ++i) {
        Instance inst = sample_mis_hard0(2, derive(1, i));
        CHECK(inst.graph == mis_hard0_graph(2, inst.principal_code[0]));
        ++count[inst.principal_code[0]];
        edges += static_cast<long long>(inst.graph.edge_count());
    }
    // Each pair edge is a fair coin: mean edge count 1 +- 4 sigma.
    const double mean = static_cast<double>(edges) / T;
    CHECK(mean > 1.0 - 4.0 * 0.5 / 64.0);
    CHECK(mean < 1.0 + 4.0 * 0.5 / 64.0);
    for (int c = 0; c < 4; ++c) CHECK(count[c] > T / 4 - 4 * 32);

    std::set<long long> seen;
    for (int i = 0; i < 256; ++i) seen.insert(sample_apx_hard0(2, derive(2, i)).principal_code[0]);
    CHECK(seen == std::set<long long>{0, 1, 2, 3});
}

TEST_CASE("fooling coordinate visible law") {
    // One embedded level-0 instance keeps only the principal vertex's edges;
    // outcome 0 = no edge, 1+c = edge to fooling co-vertex c.
    FoolingLaw mis1 = fooling_visible_law(1, Variant::mis);
    CHECK(mis1.num == std::vector<long long>{2, 2});
    CHECK(mis1.den == 4);
    FoolingLaw apx2 = fooling_visible_law(2, Variant::apx);
    CHECK(apx2.num == std::vector<long long>{8, 2, 4, 2});
    CHECK(apx2.den == 16);
    long long tot = 0;
    for (long long x : apx2.num) tot += x;
    CHECK(tot == apx2.den);
}

TEST_CASE("level-1 independent-set instances have the advertised structure") {
    Params pr = toy_mis();
    const BlockLayout canon = canonical_layout(pr, 1);
    for (uint64_t seed = 0; seed < 60; ++seed) {
        Instance inst = sample_mis_hard(pr, derive(10, seed));
        CHECK(inst.kind == InstanceKind::mis_hard);
        CHECK(inst.graph.n == 10);
        const BlockLayout& lay = inst.layout;
        REQUIRE(lay.principal.size() == 4);
        REQUIRE(lay.fooling.size() == 2);

        // Blocks partition the labels; sides split 2+1 blocks each.
        std::set<int> all;
        for (const auto& b : lay.principal) {
            CHECK(b.size() == 2);
            all.insert(b.begin(), b.end());
        }
        for (const auto& f : lay.fooling) {
            CHECK(f.size() == 1);
            all.insert(f.begin(), f.end());
        }
        CHECK(all.size() == 10);
        CHECK(std::count(lay.principal_side.begin(), lay.principal_side.end(), Side::U) == 2);
        CHECK(std::count(lay.fooling_side.begin(), lay.fooling_side.end(), Side::U) == 1);

        // Sigma maps pre-permutation labels to public labels bijectively.
        std::set<int> img(lay.sigma.begin(), lay.sigma.end());
        CHECK(img.size() == 10);

        int fool_u = -1, fool_v = -1;
        for (size_t j = 0; j < lay.fooling.size(); ++j)
            (lay.fooling_side[j] == Side::U ? fool_u : fool_v) = lay.fooling[j][0];

        // Complete bipartite glue between the two fooling sides.
        CHECK(inst.graph.has_edge(fool_u, fool_v));

        for (int i = 0; i < 4; ++i) {
            // Block content equals the level-0 graph of its recorded code.
            CHECK(sorted_edges(inst.principal_edges[i]) ==
                  embedded_block_edges(inst, canon, i,
                                       mis_hard0_graph(pr.k, inst.principal_code[i])));
            // Every principal vertex keeps at most one edge into the one
            // same-side fooling block, and none across sides.
            const int same = lay.principal_side[i] == Side::U ? fool_u : fool_v;
            const int other = lay.principal_side[i] == Side::U ? fool_v : fool_u;
            for (int u : lay.principal[i]) {
                CHECK(!inst.graph.has_edge(u, other));
                CHECK(static_cast<int>(inst.graph.has_edge(u, same)) <= 1);
            }
            // At most one kept edge per (principal vertex, fooling block).
            std::set<int> touched;
            for (const Edge& e : inst.fooling_edges[i]) {
                int u = lay.is_principal(e.first) ? e.first : e.second;
                CHECK(touched.insert(u).second);
            }
            // Recorded provenance matches the graph.
            for (const Edge& e : inst.principal_edges[i]) CHECK(inst.graph.has_edge(e.first, e.second));
            for (const Edge& e : inst.fooling_edges[i]) CHECK(inst.graph.has_edge(e.first, e.second));
        }

        // Any full one-side principal pick that is a valid independent set
        // solves that half, and the checker agrees.
        auto mis_sets = enumerate_all_mis(inst.graph);
        for (const auto& s : mis_sets) CHECK(verify_solve_half(inst, s) != HalfResult::neither);
    }
}

TEST_CASE("level-1 matching instances have the advertised structure") {
    Params pr = toy_apx();
    const BlockLayout canon = canonical_layout(pr, 1);
    for (uint64_t seed = 0; seed < 60; ++seed) {
        Instance inst = sample_apx_hard(pr, derive(11, seed));
        CHECK(inst.kind == InstanceKind::apx_hard);
        CHECK(inst.graph.n == 11);
        REQUIRE(inst.layout.principal.size() == 2);
        REQUIRE(inst.layout.fooling.size() == 1);
        for (int i = 0; i < 2; ++i) {
            CHECK(sorted_edges(inst.principal_edges[i]) ==
                  embedded_block_edges(inst, canon, i,
                                       apx_hard0_graph(pr.k, inst.principal_code[i])));
        }
        // The matching bound certifies at least one within-block pair per
        // block minus the fooling allowance.
        CHECK(Rational(max_matching_size(inst.graph)) >= matching_size_bound(pr));
    }
}

TEST_CASE("sigma modes") {
    Params pr = toy_mis();
    Instance id = sample_mis_hard(pr, 77, SigmaMode::identity);
    for (int v = 0; v < id.graph.n; ++v) CHECK(id.layout.sigma[v] == v);

    // Block mode: block images are the canonical slots as sets.
    Instance bl = sample_mis_hard(pr, 77, SigmaMode::blocks);
    BlockLayout canon = canonical_layout(pr, 1);
    std::set<std::vector<int>> canon_slots, got_slots;
    for (const auto& b : canon.principal) canon_slots.insert(b);
    for (const auto& b : bl.layout.principal) got_slots.insert(b);
    CHECK(canon_slots == got_slots);

    Instance fu = sample_mis_hard(pr, 77, SigmaMode::full);
    std::set<int> img(fu.layout.sigma.begin(), fu.layout.sigma.end());
    CHECK(img.size() == static_cast<size_t>(fu.graph.n));
}

TEST_CASE("instances round-trip through JSON") {
    Instance inst = sample_mis_hard(toy_mis(), 123);
    Instance back = instance_from_json(instance_to_json(inst));
    CHECK(back.kind == inst.kind);
    CHECK(back.graph == inst.graph);
    CHECK(back.layout.sigma == inst.layout.sigma);
    CHECK(back.layout.principal == inst.layout.principal);
    CHECK(back.layout.fooling == inst.layout.fooling);
    CHECK(back.principal_code == inst.principal_code);
    CHECK(back.principal_edges == inst.principal_edges);
    CHECK(back.fooling_edges == inst.fooling_edges);
    CHECK(back.params.k == inst.params.k);
    CHECK(back.params.r == inst.params.r);

    Instance a0 = sample_apx_hard0(3, 9);
    Instance a0b = instance_from_json(instance_to_json(a0));
    CHECK(a0b.graph == a0.graph);
    CHECK(a0b.principal_code == a0.principal_code);
}

TEST_CASE("half-solving checker on hand-built answers") {
    Params pr = toy_mis();
    Instance inst = sample_mis_hard(pr, 5, SigmaMode::identity);
    // Taking every principal vertex of one side and dropping one endpoint of
    // each present pair edge gives an independent set on that side's blocks.
    for (int side = 0; side < 2; ++side) {
        std::vector<int> s;
        for (size_t i = 0; i < inst.layout.principal.size(); ++i) {
            if ((inst.layout.principal_side[i] == Side::U) != (side == 0)) continue;
            const auto& labels = inst.layout.principal[i];
            if (inst.principal_code[i] & 1)
                s.push_back(labels[0]);  // pair edge present: keep one end
            else {
                s.push_back(labels[0]);
                s.push_back(labels[1]);
            }
        }
        std::sort(s.begin(), s.end());
        HalfResult hr = verify_solve_half(inst, s);
        CHECK(hr != HalfResult::neither);
    }
}
