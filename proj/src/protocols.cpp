#include "bbsim/protocols.hpp"

#include <algorithm>
#include <vector>

#include "bbsim/distributions.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/oracles.hpp"

namespace bbsim {

namespace {

enum : uint64_t {
    TAG_PRIORITY = 0x7072696f,  // per-phase priority permutations
    TAG_EDGE_DIR = 0x64697265,  // public edge orientations
    TAG_CUT = 0x7a637574,       // bipartite wrapper cut sides
};

const BlockLayout& need_layout(const BlockLayout* lay) {
    if (!lay) throw LayoutRequired("protocol needs the public block layout");
    return *lay;
}

// Fixed output read off the public layout: all principal vertices (independent
// set), or within every principal block the pairing of position q with
// position q + size/2 (matching).
Output fixed_output(Variant v, const BlockLayout& lay) {
    if (v == Variant::mis) {
        MisOutput out;
        for (const auto& blk : lay.principal)
            out.vertices.insert(out.vertices.end(), blk.begin(), blk.end());
        std::sort(out.vertices.begin(), out.vertices.end());
        return out;
    }
    MatchingOutput out;
    for (const auto& blk : lay.principal) {
        const int half = static_cast<int>(blk.size()) / 2;
        for (int q = 0; q < half; ++q) {
            Edge e{blk[q], blk[q + half]};
            if (e.first > e.second) std::swap(e.first, e.second);
            out.pairs.push_back(e);
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

} // namespace

//======================================================================
// Baselines
//======================================================================

Protocol make_silent(Variant v, int rounds) {
    Protocol p;
    p.name = "silent";
    p.rounds = rounds;
    p.bandwidth = 0;
    p.message = [](const VertexView&, const MsgCtx&) { return Bits{}; };
    p.referee = [v](const Transcript&, const RefCtx& ctx) {
        return fixed_output(v, need_layout(ctx.layout));
    };
    return p;
}

Protocol make_zero_round(Variant v) {
    Protocol p = make_silent(v, 0);
    p.name = "zero_round";
    return p;
}

Protocol make_full_broadcast(Variant v, int n) {
    Protocol p;
    p.name = "broadcast";
    p.rounds = 1;
    p.bandwidth = n;
    p.message = [](const VertexView& view, const MsgCtx&) {
        Bits row(view.n, '0');
        for (int u : view.neighbors) row[u] = '1';
        return row;
    };
    p.referee = [v](const Transcript& t, const RefCtx&) -> Output {
        const int n = t.n_players();
        const auto& row = t.rounds.at(0);
        auto edge = [&](int a, int b) { return row[a][b] == '1' && row[b][a] == '1'; };
        if (v == Variant::mis) {
            MisOutput out;
            for (int u = 0; u < n; ++u) {
                bool blocked = false;
                for (int w : out.vertices)
                    if (edge(u, w)) { blocked = true; break; }
                if (!blocked) out.vertices.push_back(u);
            }
            return out;
        }
        MatchingOutput out;
        std::vector<bool> used(n, false);
        for (int u = 0; u < n; ++u) {
            if (used[u]) continue;
            for (int w = u + 1; w < n; ++w) {
                if (!used[w] && edge(u, w)) {
                    out.pairs.push_back({u, w});
                    used[u] = used[w] = true;
                    break;
                }
            }
        }
        return out;
    };
    return p;
}

//======================================================================
// Greedy independent set on the blackboard
//======================================================================

Protocol luby_blackboard(int max_phases) {
    if (max_phases < 1) throw ConfigError("luby needs at least one phase");
    Protocol p;
    p.name = "luby:" + std::to_string(max_phases);
    p.rounds = max_phases;
    p.bandwidth = 2;
    p.message = [](const VertexView& view, const MsgCtx& ctx) -> Bits {
        const int n = view.n;
        // Replay the blackboard: who has joined, who has marked inactive.
        std::vector<bool> joined(n, false), marked(n, false);
        for (int s = 0; s < ctx.round; ++s)
            for (int u = 0; u < n; ++u) {
                const Bits& m = ctx.prior.rounds[s][u];
                if (m.size() == 2) {
                    if (m[0] == '1') joined[u] = true;
                    if (m[1] == '1') marked[u] = true;
                }
            }
        if (joined[view.self_id] || marked[view.self_id]) return "";
        for (int u : view.neighbors)
            if (joined[u]) return "01";  // retrospective inactivity marker
        // Still active: join iff we beat every neighbor not known inactive.
        std::vector<int> perm = ctx.pub.permutation(n, TAG_PRIORITY + ctx.round);
        std::vector<int> rank(n);
        for (int pos = 0; pos < n; ++pos) rank[perm[pos]] = pos;
        for (int u : view.neighbors)
            if (!joined[u] && !marked[u] && rank[u] < rank[view.self_id]) return "00";
        return "10";
    };
    p.referee = [](const Transcript& t, const RefCtx&) {
        MisOutput out;
        for (int u = 0; u < t.n_players(); ++u)
            for (const auto& round : t.rounds)
                if (round[u].size() == 2 && round[u][0] == '1') {
                    out.vertices.push_back(u);
                    break;
                }
        return out;
    };
    return p;
}

//======================================================================
// Parity stress protocols
//======================================================================

namespace {

// Public orientation of edge (a, b): returns the head vertex.
int edge_head(const PublicCoins& pub, int a, int b) {
    if (a > b) std::swap(a, b);
    return pub.bit(TAG_EDGE_DIR, a, b) ? b : a;
}

Bits directed_round1_msg(const VertexView& view, const MsgCtx& ctx, int target) {
    const BlockLayout& lay = need_layout(ctx.layout);
    const int self = view.self_id;
    int parity = 0;
    if (lay.is_principal(self)) {
        for (int u : view.neighbors)
            if (edge_head(ctx.pub, self, u) != self) parity ^= 1;  // outgoing
    } else {
        for (int u : view.neighbors)
            if (lay.is_principal(u) && lay.principal_index(u) == target &&
                edge_head(ctx.pub, self, u) == self)
                parity ^= 1;  // incoming, other endpoint in the target block
    }
    return parity ? "1" : "0";
}

Bits cross_parity_msg(const VertexView& view, const MsgCtx& ctx) {
    const BlockLayout& lay = need_layout(ctx.layout);
    const bool self_principal = lay.is_principal(view.self_id);
    int parity = 0;
    for (int u : view.neighbors)
        if (lay.is_principal(u) != self_principal) parity ^= 1;
    return parity ? "1" : "0";
}

} // namespace

Protocol xor_protocol(XorVariant xv, Variant v, int target_block) {
    Protocol p;
    p.bandwidth = 1;
    p.rounds = xv == XorVariant::two_round ? 2 : 1;
    switch (xv) {
        case XorVariant::directed_round1:
            p.name = "xor:directed_round1";
            p.message = [target_block](const VertexView& view, const MsgCtx& ctx) {
                return directed_round1_msg(view, ctx, target_block);
            };
            break;
        case XorVariant::fooling_xor:
            p.name = "xor:fooling_xor";
            p.message = [](const VertexView& view, const MsgCtx& ctx) -> Bits {
                if (need_layout(ctx.layout).is_principal(view.self_id)) return "";
                return cross_parity_msg(view, ctx);
            };
            break;
        case XorVariant::symmetric_xor:
            p.name = "xor:symmetric_xor";
            p.message = [](const VertexView& view, const MsgCtx& ctx) {
                return cross_parity_msg(view, ctx);
            };
            break;
        case XorVariant::two_round:
            p.name = "xor:two_round";
            p.message = [target_block](const VertexView& view, const MsgCtx& ctx) {
                if (ctx.round == 0) return directed_round1_msg(view, ctx, target_block);
                return cross_parity_msg(view, ctx);
            };
            break;
    }
    p.referee = [v](const Transcript&, const RefCtx& ctx) {
        return fixed_output(v, need_layout(ctx.layout));
    };
    return p;
}

//======================================================================
// Zero-round optima by exhaustive search
//======================================================================

std::pair<Output, Rational> best_zero_round_referee_mis(int k) {
    if (k < 1 || k > 4) throw TooLarge("exhaustive referee search supports k in [1,4]");
    const int n = 2 * k;
    const long long codes = 1LL << k;
    std::vector<Graph> graphs;
    for (long long c = 0; c < codes; ++c) graphs.push_back(mis_hard0_graph(k, c));

    long long best_hits = -1;
    std::vector<int> best_set;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> s;
        for (int v = 0; v < n; ++v)
            if ((mask >> v) & 1) s.push_back(v);
        long long hits = 0;
        for (const Graph& g : graphs)
            if (is_mis(g, s)) ++hits;
        if (hits > best_hits) {
            best_hits = hits;
            best_set = s;
        }
    }
    return {MisOutput{best_set}, Rational(best_hits, codes)};
}

namespace {

void best_pairing_rec(int n, std::vector<int>& partner, int v, int cross,
                      std::vector<Edge>& stack, long long& best_cross,
                      std::vector<Edge>& best) {
    while (v < n && partner[v] != -1) ++v;
    if (v == n) {
        if (cross > best_cross) {
            best_cross = cross;
            best = stack;
        }
        return;
    }
    partner[v] = v;  // leave v unpaired
    best_pairing_rec(n, partner, v + 1, cross, stack, best_cross, best);
    partner[v] = -1;
    for (int w = v + 1; w < n; ++w) {
        if (partner[w] != -1) continue;
        const bool is_cross = (v < n / 2) != (w < n / 2);
        partner[v] = w;
        partner[w] = v;
        stack.push_back({v, w});
        best_pairing_rec(n, partner, v + 1, cross + (is_cross ? 1 : 0), stack, best_cross, best);
        stack.pop_back();
        partner[v] = partner[w] = -1;
    }
}

} // namespace

std::pair<Output, Rational> best_zero_round_referee_apx(int k) {
    if (k < 1 || k > 6) throw TooLarge("exhaustive pairing search supports k in [1,6]");
    const int n = 2 * k;
    std::vector<int> partner(n, -1);
    std::vector<Edge> stack, best;
    long long best_cross = -1;
    best_pairing_rec(n, partner, 0, 0, stack, best_cross, best);
    std::sort(best.begin(), best.end());
    // A pair (a, k+b) is the single true edge with probability 1/k^2; same-side
    // pairs are never edges.
    return {MatchingOutput{best}, Rational(best_cross, 1LL * k * k)};
}

//======================================================================
// Random-cut wrapper
//======================================================================

Protocol bipartite_wrapper(const Protocol& inner) {
    Protocol p;
    p.name = "bipartite:" + inner.name;
    p.rounds = inner.rounds;
    p.bandwidth = inner.bandwidth;
    p.message = [inner](const VertexView& view, const MsgCtx& ctx) {
        const int side = ctx.pub.bit(TAG_CUT, view.self_id);
        VertexView cut = view;
        cut.neighbors.clear();
        for (int u : view.neighbors)
            if (ctx.pub.bit(TAG_CUT, u) != side) cut.neighbors.push_back(u);
        return inner.message(cut, ctx);
    };
    p.referee = inner.referee;
    return p;
}

std::vector<int> bipartite_cut(const PublicCoins& pub, int n) {
    std::vector<int> side(n);
    for (int v = 0; v < n; ++v) side[v] = pub.bit(TAG_CUT, v);
    return side;
}

//======================================================================
// Registry
//======================================================================

Protocol make_protocol(const std::string& spec, Variant v, int n) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

    auto int_arg = [&](int fallback) {
        if (rest.empty()) return fallback;
        try {
            return std::stoi(rest);
        } catch (const std::exception&) {
            throw ConfigError("bad protocol argument: " + spec);
        }
    };

    if (head == "silent") return make_silent(v, int_arg(1));
    if (head == "zero_round") return make_zero_round(v);
    if (head == "broadcast") return make_full_broadcast(v, n);
    if (head == "luby") {
        if (v != Variant::mis) throw ConfigError("luby computes an independent set");
        return luby_blackboard(int_arg(1));
    }
    if (head == "bipartite") {
        if (rest.empty()) throw ConfigError("bipartite wrapper needs an inner protocol");
        return bipartite_wrapper(make_protocol(rest, v, n));
    }
    if (head == "xor") {
        const auto colon2 = rest.find(':');
        const std::string which = rest.substr(0, colon2);
        int target = 0;
        if (colon2 != std::string::npos) {
            try {
                target = std::stoi(rest.substr(colon2 + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad protocol argument: " + spec);
            }
        }
        if (which == "directed_round1") return xor_protocol(XorVariant::directed_round1, v, target);
        if (which == "fooling_xor") return xor_protocol(XorVariant::fooling_xor, v, target);
        if (which == "symmetric_xor") return xor_protocol(XorVariant::symmetric_xor, v, target);
        if (which == "two_round") return xor_protocol(XorVariant::two_round, v, target);
        throw ConfigError("unknown xor variant: " + which);
    }
    throw ConfigError("unknown protocol: " + spec);
}

} // namespace bbsim
