#include "bbsim/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <queue>

#include "bbsim/errors.hpp"

namespace bbsim {

static void check_vertex_set(const Graph& g, const std::vector<int>& s) {
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 0 || s[i] >= g.n) throw OutOfRange("vertex set element out of range");
        if (i > 0 && s[i] <= s[i - 1]) throw OutOfRange("vertex set must be sorted unique");
    }
}

bool is_mis(const Graph& g, const std::vector<int>& s) {
    check_vertex_set(g, s);
    std::vector<char> in(g.n, 0);
    for (int v : s) in[v] = 1;
    // independence
    for (int v : s)
        for (int u : g.neighbors(v))
            if (in[u]) return false;
    // maximality: every outside vertex has a neighbor inside
    for (int v = 0; v < g.n; ++v) {
        if (in[v]) continue;
        bool covered = false;
        for (int u : g.neighbors(v))
            if (in[u]) { covered = true; break; }
        if (!covered) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Maximal independent sets = maximal cliques of the complement.
// ---------------------------------------------------------------------------

namespace {
struct Bk {
    int n;
    std::vector<uint32_t> cn;  // complement neighborhoods (no self bit)
    std::vector<std::vector<int>>* out;

    void run(uint32_t r, uint32_t p, uint32_t x) {
        if (p == 0 && x == 0) {
            std::vector<int> s;
            for (int v = 0; v < n; ++v)
                if (r & (1u << v)) s.push_back(v);
            out->push_back(std::move(s));
            return;
        }
        // pivot: maximize |P & cn[pivot]| over P|X
        uint32_t px = p | x;
        int pivot = -1, best = -1;
        for (int v = 0; v < n; ++v)
            if (px & (1u << v)) {
                int c = std::popcount(p & cn[v]);
                if (c > best) { best = c; pivot = v; }
            }
        uint32_t cand = p & ~cn[pivot];
        for (int v = 0; v < n; ++v) {
            uint32_t bit = 1u << v;
            if (!(cand & bit)) continue;
            run(r | bit, p & cn[v], x & cn[v]);
            p &= ~bit;
            x |= bit;
        }
    }
};
} // namespace

std::vector<std::vector<int>> enumerate_all_mis(const Graph& g) {
    if (g.n > 24) throw TooLarge("enumerate_all_mis: n > 24");
    Bk bk;
    bk.n = g.n;
    bk.cn.assign(g.n, 0);
    uint32_t all = g.n == 0 ? 0u : ((g.n == 32 ? 0u : (1u << g.n)) - 1u);
    for (int v = 0; v < g.n; ++v) {
        uint32_t adj = 0;
        for (int u : g.neighbors(v)) adj |= 1u << u;
        bk.cn[v] = all & ~adj & ~(1u << v);
    }
    std::vector<std::vector<int>> res;
    bk.out = &res;
    if (g.n == 0) return res;
    bk.run(0, all, 0);
    std::sort(res.begin(), res.end());
    return res;
}

// ---------------------------------------------------------------------------
// Maximum matching: bitmask DP (small n) and blossom (any n).
// ---------------------------------------------------------------------------

static int dp_match(uint32_t mask, const std::vector<uint32_t>& adj,
                    std::vector<int8_t>& memo) {
    if (mask == 0) return 0;
    int8_t& m = memo[mask];
    if (m >= 0) return m;
    int v = std::countr_zero(mask);
    uint32_t rest = mask & ~(1u << v);
    int best = dp_match(rest, adj, memo);  // leave v single
    uint32_t nbrs = adj[v] & rest;
    while (nbrs) {
        int u = std::countr_zero(nbrs);
        nbrs &= nbrs - 1;
        best = std::max(best, 1 + dp_match(rest & ~(1u << u), adj, memo));
    }
    m = static_cast<int8_t>(best);
    return best;
}

int max_matching_size_exhaustive(const Graph& g) {
    if (g.n > 24) throw TooLarge("max_matching_size_exhaustive: n > 24");
    if (g.n == 0) return 0;
    std::vector<uint32_t> adj(g.n, 0);
    for (const auto& [u, v] : g.edges) {
        adj[u] |= 1u << v;
        adj[v] |= 1u << u;
    }
    std::vector<int8_t> memo(size_t(1) << g.n, -1);
    return dp_match((1u << g.n) - 1u, adj, memo);
}

namespace {
// Classic blossom-contraction augmenting search.
struct Blossom {
    int n;
    const Graph& g;
    std::vector<int> match, parent, base;
    std::vector<char> used, in_blossom;

    explicit Blossom(const Graph& gr)
        : n(gr.n), g(gr), match(n, -1), parent(n), base(n), used(n), in_blossom(n) {}

    int lca(int a, int b) {
        std::vector<char> seen(n, 0);
        for (;;) {
            a = base[a];
            seen[a] = 1;
            if (match[a] == -1) break;
            a = parent[match[a]];
        }
        for (;;) {
            b = base[b];
            if (seen[b]) return b;
            b = parent[match[b]];
        }
    }

    void mark_path(int v, int b, int child) {
        while (base[v] != b) {
            in_blossom[base[v]] = 1;
            in_blossom[base[match[v]]] = 1;
            parent[v] = child;
            child = match[v];
            v = parent[match[v]];
        }
    }

    int find_path(int root) {
        std::fill(used.begin(), used.end(), 0);
        std::fill(parent.begin(), parent.end(), -1);
        std::iota(base.begin(), base.end(), 0);
        used[root] = 1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int to : g.neighbors(v)) {
                if (base[v] == base[to] || match[v] == to) continue;
                if (to == root || (match[to] != -1 && parent[match[to]] != -1)) {
                    int cur = lca(v, to);
                    std::fill(in_blossom.begin(), in_blossom.end(), 0);
                    mark_path(v, cur, to);
                    mark_path(to, cur, v);
                    for (int i = 0; i < n; ++i)
                        if (in_blossom[base[i]]) {
                            base[i] = cur;
                            if (!used[i]) { used[i] = 1; q.push(i); }
                        }
                } else if (parent[to] == -1) {
                    parent[to] = v;
                    if (match[to] == -1) {
                        // augment along the alternating path ending at `to`
                        int u = to;
                        while (u != -1) {
                            int pv = parent[u], ppv = match[pv];
                            match[u] = pv;
                            match[pv] = u;
                            u = ppv;
                        }
                        return to;
                    }
                    used[match[to]] = 1;
                    q.push(match[to]);
                }
            }
        }
        return -1;
    }

    int solve() {
        int res = 0;
        for (int v = 0; v < n; ++v)
            if (match[v] == -1 && find_path(v) != -1) ++res;
        return res;
    }
};
} // namespace

int max_matching_size_blossom(const Graph& g) {
    if (g.n == 0) return 0;
    Blossom b(g);
    return b.solve();
}

int max_matching_size(const Graph& g) {
    return g.n <= 20 ? max_matching_size_exhaustive(g) : max_matching_size_blossom(g);
}

MatchingScore matching_score(const Graph& g, const MatchingOutput& out) {
    validate_output(Output{out}, g.n);  // throws NotDisjoint / OutOfRange
    MatchingScore sc;
    sc.total_pairs = static_cast<int>(out.pairs.size());
    for (const auto& [u, v] : out.pairs)
        if (g.has_edge(u, v)) ++sc.valid_edges;
    return sc;
}

std::vector<Edge> decode_dropped_edges(int k, const std::vector<int>& s) {
    if (k < 0) throw OutOfRange("decode_dropped_edges: k < 0");
    std::vector<char> in(2 * k, 0);
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 0 || s[i] >= 2 * k) throw OutOfRange("decode_dropped_edges: vertex out of range");
        if (i > 0 && s[i] <= s[i - 1]) throw OutOfRange("decode_dropped_edges: set must be sorted unique");
        in[s[i]] = 1;
    }
    std::vector<Edge> dropped;
    for (int i = 0; i < k; ++i)
        if (in[2 * i] && in[2 * i + 1]) dropped.emplace_back(2 * i, 2 * i + 1);
    return dropped;
}

} // namespace bbsim
