#include "bbsim/distributions.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "bbsim/errors.hpp"
#include "bbsim/oracles.hpp"
#include "bbsim/rng.hpp"

namespace bbsim {

//======================================================================
// Level-0 instances by canonical code
//======================================================================

Graph mis_hard0_graph(int k, long long code) {
    if (k < 1 || k > 62) throw OutOfRange("mis_hard0_graph: k out of range");
    if (code < 0 || code >= (1LL << k)) throw OutOfRange("mis_hard0_graph: bad code");
    std::vector<Edge> es;
    for (int i = 0; i < k; ++i)
        if ((code >> i) & 1) es.push_back({2 * i, 2 * i + 1});
    return Graph::from_edges(2 * k, es);
}

Graph apx_hard0_graph(int k, long long code) {
    if (k < 1) throw OutOfRange("apx_hard0_graph: k out of range");
    if (code < 0 || code >= 1LL * k * k) throw OutOfRange("apx_hard0_graph: bad code");
    int a = static_cast<int>(code / k), b = static_cast<int>(code % k);
    return Graph::from_edges(2 * k, {{a, k + b}});
}

FoolingLaw fooling_visible_law(int k, Variant variant) {
    if (k < 1 || k > 16) throw TooLarge("fooling_visible_law: k too large to enumerate");
    const int n0 = 2 * k;
    const long long codes = variant == Variant::mis ? (1LL << k) : 1LL * k * k;
    FoolingLaw law;
    law.num.assign(n0, 0);  // index 0 = none, 1 + c = edge to co-vertex c
    law.den = n0 * codes;
    for (int w = 0; w < n0; ++w) {
        for (long long code = 0; code < codes; ++code) {
            Graph g = variant == Variant::mis ? mis_hard0_graph(k, code)
                                              : apx_hard0_graph(k, code);
            const auto& nb = g.neighbors(w);
            if (nb.empty()) {
                ++law.num[0];
            } else {
                int q = nb[0];  // level-0 vertices have at most one neighbor
                ++law.num[1 + (q > w ? q - 1 : q)];
            }
        }
    }
    return law;
}

//======================================================================
// Block layouts
//======================================================================

namespace {

struct SlotPlan {
    // Canonical (pre-permutation) slot start labels; all principal slots have
    // size n_{level-1}, all fooling slots size n_{level-1}-1.
    std::vector<int> p_start, f_start;
    std::vector<Side> p_side, f_side;
    int p_size = 0, f_size = 0, n = 0;
};

SlotPlan slot_plan(const Params& pr, int level) {
    if (level < 1 || level > pr.r) throw OutOfRange("layout level out of range");
    SlotPlan sp;
    sp.p_size = static_cast<int>(pr.n_at(level - 1));
    sp.f_size = sp.p_size - 1;
    sp.n = static_cast<int>(pr.n_at(level));
    const int halves = pr.doubled() ? 2 : 1;
    const int ph = static_cast<int>(pr.phat_at(level));
    const int fh = static_cast<int>(pr.fhat_at(level));
    int cur = 0;
    for (int h = 0; h < halves; ++h) {
        Side side = h == 0 ? Side::U : Side::V;
        for (int i = 0; i < ph; ++i, cur += sp.p_size) {
            sp.p_start.push_back(cur);
            sp.p_side.push_back(side);
        }
        for (int j = 0; j < fh; ++j, cur += sp.f_size) {
            sp.f_start.push_back(cur);
            sp.f_side.push_back(side);
        }
    }
    if (cur != sp.n) throw OutOfRange("layout sizes disagree with counts");
    return sp;
}

std::vector<int> range_labels(int start, int size) {
    std::vector<int> v(size);
    for (int i = 0; i < size; ++i) v[i] = start + i;
    return v;
}

} // namespace

BlockLayout canonical_layout(const Params& pr, int level) {
    SlotPlan sp = slot_plan(pr, level);
    BlockLayout lay;
    lay.level = level;
    lay.n = sp.n;
    for (int s : sp.p_start) lay.principal.push_back(range_labels(s, sp.p_size));
    for (int s : sp.f_start) lay.fooling.push_back(range_labels(s, sp.f_size));
    lay.principal_side = sp.p_side;
    lay.fooling_side = sp.f_side;
    lay.sigma.resize(sp.n);
    for (int i = 0; i < sp.n; ++i) lay.sigma[i] = i;
    lay.finalize();
    return lay;
}

BlockLayout blocks_layout(const Params& pr, int level, const std::vector<int>& perm_p,
                          const std::vector<int>& perm_f) {
    SlotPlan sp = slot_plan(pr, level);
    if (perm_p.size() != sp.p_start.size() || perm_f.size() != sp.f_start.size())
        throw OutOfRange("role-to-slot permutation has wrong length");

    BlockLayout lay;
    lay.level = level;
    lay.n = sp.n;
    lay.principal_side = sp.p_side;  // sides travel with roles, not slots
    lay.fooling_side = sp.f_side;
    lay.sigma.assign(sp.n, -1);
    // Role i occupies slot perm_p[i]: its canonical labels map in order onto
    // the slot's label range.
    for (size_t i = 0; i < perm_p.size(); ++i) {
        int from = sp.p_start[i], to = sp.p_start[perm_p[i]];
        for (int o = 0; o < sp.p_size; ++o) lay.sigma[from + o] = to + o;
        lay.principal.push_back(range_labels(to, sp.p_size));
    }
    for (size_t j = 0; j < perm_f.size(); ++j) {
        int from = sp.f_start[j], to = sp.f_start[perm_f[j]];
        for (int o = 0; o < sp.f_size; ++o) lay.sigma[from + o] = to + o;
        lay.fooling.push_back(range_labels(to, sp.f_size));
    }
    for (int x : lay.sigma)
        if (x < 0) throw OutOfRange("role-to-slot permutation is not a bijection");
    lay.finalize();
    return lay;
}

//======================================================================
// Samplers
//======================================================================

namespace {

long long sample_level0_code(const Params& pr, Rng& rng) {
    if (pr.variant == Variant::mis) {
        if (pr.k > 62) throw TooLarge("level-0 instance too large to sample");
        long long code = 0;
        for (int i = 0; i < pr.k; ++i)
            if (rng.coin()) code |= 1LL << i;
        return code;
    }
    if (1LL * pr.k * pr.k > std::numeric_limits<int>::max())
        throw TooLarge("level-0 instance too large to sample");
    return rng.below(pr.k * pr.k);
}

Instance sample_full_instance(const Params& pr, int level, Rng& rng, SigmaMode mode);

// One half on canonical labels 0..nhat-1, appended into `inst` with labels
// shifted by `base`.  Provenance rows are appended per principal block.
void build_half(const Params& pr, int level, Rng& rng, SigmaMode mode, int base,
                std::vector<Edge>& edges, Instance& inst) {
    const int n_sub = static_cast<int>(pr.n_at(level - 1));
    const int ph = static_cast<int>(pr.phat_at(level));
    const int fh = static_cast<int>(pr.fhat_at(level));
    const int f_size = n_sub - 1;
    const int fool_base = base + ph * n_sub;
    const size_t first_block = inst.principal_edges.size();

    // Principal blocks: independent full level-(l-1) instances.
    for (int i = 0; i < ph; ++i) {
        Instance sub = sample_full_instance(pr, level - 1, rng, mode);
        std::vector<Edge> rows;
        for (auto [a, b] : sub.graph.edges) {
            Edge e{base + i * n_sub + a, base + i * n_sub + b};
            edges.push_back(e);
            rows.push_back(e);
        }
        inst.principal_edges.push_back(std::move(rows));
        inst.fooling_edges.emplace_back();
        inst.principal_code.push_back(level - 1 == 0 ? sub.principal_code[0] : -1);
    }

    // Fooling columns: for every principal vertex u and fooling block j, an
    // independent level-(l-1) instance lands on F_j + {u} with u at a uniform
    // position; only u's incident edges survive.
    for (int i = 0; i < ph; ++i) {
        for (int o = 0; o < n_sub; ++o) {
            const int u = base + i * n_sub + o;
            for (int j = 0; j < fh; ++j) {
                Instance sub = sample_full_instance(pr, level - 1, rng, mode);
                const int w = rng.below(n_sub);
                for (int x : sub.graph.neighbors(w)) {
                    const int co = x > w ? x - 1 : x;  // position among F_j
                    Edge e{u, fool_base + j * f_size + co};
                    if (e.first > e.second) std::swap(e.first, e.second);
                    edges.push_back(e);
                    inst.fooling_edges[first_block + i].push_back(e);
                }
            }
        }
    }
}

void apply_sigma(const std::vector<int>& sigma, std::vector<Edge>& edges) {
    for (auto& e : edges) {
        e = {sigma[e.first], sigma[e.second]};
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
}

BlockLayout sample_layout(const Params& pr, int level, Rng& rng, SigmaMode mode) {
    switch (mode) {
        case SigmaMode::identity:
            return canonical_layout(pr, level);
        case SigmaMode::blocks: {
            SlotPlan sp = slot_plan(pr, level);
            return blocks_layout(pr, level, rng.permutation((int)sp.p_start.size()),
                                 rng.permutation((int)sp.f_start.size()));
        }
        case SigmaMode::full: {
            BlockLayout lay = canonical_layout(pr, level);
            lay.sigma = rng.permutation(lay.n);
            for (auto& blk : lay.principal) {
                for (int& v : blk) v = lay.sigma[v];
                std::sort(blk.begin(), blk.end());
            }
            for (auto& blk : lay.fooling) {
                for (int& v : blk) v = lay.sigma[v];
                std::sort(blk.begin(), blk.end());
            }
            lay.finalize();
            return lay;
        }
    }
    throw ConfigError("unknown sigma mode");
}

Instance level0_instance(const Params& pr, long long code) {
    Instance inst;
    inst.kind = pr.variant == Variant::mis ? InstanceKind::mis_hard0 : InstanceKind::apx_hard0;
    inst.params = pr;
    inst.graph = pr.variant == Variant::mis ? mis_hard0_graph(pr.k, code)
                                            : apx_hard0_graph(pr.k, code);
    inst.layout.level = 0;
    inst.layout.n = inst.graph.n;
    inst.layout.principal.push_back(range_labels(0, inst.graph.n));
    inst.layout.principal_side.push_back(Side::U);
    inst.layout.sigma.resize(inst.graph.n);
    for (int i = 0; i < inst.graph.n; ++i) inst.layout.sigma[i] = i;
    inst.layout.finalize();
    inst.principal_edges.push_back(inst.graph.edges);
    inst.fooling_edges.emplace_back();
    inst.principal_code.push_back(code);
    return inst;
}

Instance sample_full_instance(const Params& pr, int level, Rng& rng, SigmaMode mode) {
    if (level == 0) return level0_instance(pr, sample_level0_code(pr, rng));

    Instance inst;
    inst.kind = pr.variant == Variant::mis ? InstanceKind::mis_hard : InstanceKind::apx_hard;
    inst.params = pr;

    std::vector<Edge> edges;
    const long long nhat = pr.nhat_at(level);
    build_half(pr, level, rng, mode, 0, edges, inst);
    if (pr.doubled()) {
        build_half(pr, level, rng, mode, static_cast<int>(nhat), edges, inst);
        // Complete bipartite glue between the two fooling sides.
        SlotPlan sp = slot_plan(pr, level);
        const int fh = static_cast<int>(pr.fhat_at(level));
        for (int j = 0; j < fh; ++j)
            for (int o = 0; o < sp.f_size; ++o)
                for (int j2 = 0; j2 < fh; ++j2)
                    for (int o2 = 0; o2 < sp.f_size; ++o2)
                        edges.push_back({sp.f_start[j] + o, sp.f_start[fh + j2] + o2});
    }

    inst.layout = sample_layout(pr, level, rng, mode);
    apply_sigma(inst.layout.sigma, edges);
    for (auto& rows : inst.principal_edges) apply_sigma(inst.layout.sigma, rows);
    for (auto& rows : inst.fooling_edges) apply_sigma(inst.layout.sigma, rows);
    inst.graph = Graph::from_edges(inst.layout.n, edges);
    return inst;
}

} // namespace

Instance sample_mis_hard0(int k, uint64_t seed) {
    Params pr = make_params(k, 0, Variant::mis);
    Rng rng(seed);
    return level0_instance(pr, sample_level0_code(pr, rng));
}

Instance sample_apx_hard0(int k, uint64_t seed) {
    Params pr = make_params(k, 0, Variant::apx);
    Rng rng(seed);
    return level0_instance(pr, sample_level0_code(pr, rng));
}

Instance sample_mis_half(const Params& pr, int level, uint64_t seed, SigmaMode mode) {
    if (pr.variant != Variant::mis) throw ConfigError("sample_mis_half needs the mis variant");
    ensure_materializable(pr);
    if (level < 1 || level > pr.r) throw OutOfRange("half level out of range");
    Rng rng(seed);

    Instance inst;
    inst.kind = InstanceKind::mis_half;
    inst.params = pr;
    std::vector<Edge> edges;
    build_half(pr, level, rng, mode, 0, edges, inst);

    const int n_sub = static_cast<int>(pr.n_at(level - 1));
    const int ph = static_cast<int>(pr.phat_at(level));
    const int fh = static_cast<int>(pr.fhat_at(level));
    inst.layout.level = level;
    inst.layout.n = static_cast<int>(pr.nhat_at(level));
    for (int i = 0; i < ph; ++i)
        inst.layout.principal.push_back(range_labels(i * n_sub, n_sub));
    for (int j = 0; j < fh; ++j)
        inst.layout.fooling.push_back(range_labels(ph * n_sub + j * (n_sub - 1), n_sub - 1));
    inst.layout.principal_side.assign(ph, Side::U);
    inst.layout.fooling_side.assign(fh, Side::U);
    inst.layout.sigma.resize(inst.layout.n);
    for (int i = 0; i < inst.layout.n; ++i) inst.layout.sigma[i] = i;
    inst.layout.finalize();
    inst.graph = Graph::from_edges(inst.layout.n, edges);
    return inst;
}

Instance sample_mis_hard(const Params& pr, uint64_t seed, SigmaMode mode) {
    if (pr.variant != Variant::mis) throw ConfigError("sample_mis_hard needs the mis variant");
    ensure_materializable(pr);
    Rng rng(seed);
    return sample_full_instance(pr, pr.r, rng, mode);
}

Instance sample_apx_hard(const Params& pr, uint64_t seed, SigmaMode mode) {
    if (pr.variant != Variant::apx) throw ConfigError("sample_apx_hard needs the apx variant");
    ensure_materializable(pr);
    Rng rng(seed);
    return sample_full_instance(pr, pr.r, rng, mode);
}

//======================================================================
// Half verification
//======================================================================

HalfResult verify_solve_half(const Instance& inst, const std::vector<int>& s) {
    if (inst.kind != InstanceKind::mis_hard || inst.layout.level < 1)
        throw ConfigError("verify_solve_half needs a glued independent-set instance");

    auto holds = [&](Side side) {
        std::vector<int> verts;
        for (size_t i = 0; i < inst.layout.principal.size(); ++i)
            if (inst.layout.principal_side[i] == side)
                verts.insert(verts.end(), inst.layout.principal[i].begin(),
                             inst.layout.principal[i].end());
        std::sort(verts.begin(), verts.end());
        Graph sub = induced_subgraph(inst.graph, verts);
        std::vector<int> restricted;
        for (int v : s) {
            auto it = std::lower_bound(verts.begin(), verts.end(), v);
            if (it != verts.end() && *it == v)
                restricted.push_back(static_cast<int>(it - verts.begin()));
        }
        std::sort(restricted.begin(), restricted.end());
        restricted.erase(std::unique(restricted.begin(), restricted.end()), restricted.end());
        return is_mis(sub, restricted);
    };

    const bool u_ok = holds(Side::U), v_ok = holds(Side::V);
    if (u_ok && v_ok) return HalfResult::both;
    if (u_ok) return HalfResult::U_holds;
    if (v_ok) return HalfResult::V_holds;
    return HalfResult::neither;
}

//======================================================================
// JSON
//======================================================================

namespace {

using json = nlohmann::ordered_json;

json edges_to_json(const std::vector<Edge>& es) {
    json a = json::array();
    for (auto [u, v] : es) a.push_back(json::array({u, v}));
    return a;
}

std::vector<Edge> edges_from_json(const json& a) {
    std::vector<Edge> es;
    for (const auto& e : a) es.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    return es;
}

json sides_to_json(const std::vector<Side>& sides) {
    json a = json::array();
    for (Side s : sides) a.push_back(s == Side::U ? "U" : "V");
    return a;
}

std::vector<Side> sides_from_json(const json& a) {
    std::vector<Side> sides;
    for (const auto& s : a) {
        std::string t = s.get<std::string>();
        if (t != "U" && t != "V") throw ConfigError("side must be U or V");
        sides.push_back(t == "U" ? Side::U : Side::V);
    }
    return sides;
}

} // namespace

const char* kind_name(InstanceKind k) {
    switch (k) {
        case InstanceKind::mis_hard0: return "mis_hard0";
        case InstanceKind::mis_half: return "mis_half";
        case InstanceKind::mis_hard: return "mis_hard";
        case InstanceKind::apx_hard0: return "apx_hard0";
        case InstanceKind::apx_hard: return "apx_hard";
    }
    return "?";
}

const char* sigma_mode_name(SigmaMode m) {
    switch (m) {
        case SigmaMode::full: return "full";
        case SigmaMode::blocks: return "blocks";
        case SigmaMode::identity: return "identity";
    }
    return "?";
}

std::string instance_to_json(const Instance& inst) {
    json j;
    j["kind"] = kind_name(inst.kind);
    j["params"] = {{"k", inst.params.k},
                   {"r", inst.params.r},
                   {"variant", inst.params.variant == Variant::mis ? "mis" : "apx"},
                   {"derived_counts", inst.params.derived_counts},
                   {"fhat", inst.params.fhat},
                   {"phat", inst.params.phat}};
    j["n"] = inst.graph.n;
    j["edges"] = edges_to_json(inst.graph.edges);
    json lay;
    lay["level"] = inst.layout.level;
    lay["principal"] = inst.layout.principal;
    lay["fooling"] = inst.layout.fooling;
    lay["principal_side"] = sides_to_json(inst.layout.principal_side);
    lay["fooling_side"] = sides_to_json(inst.layout.fooling_side);
    lay["sigma"] = inst.layout.sigma;
    j["layout"] = std::move(lay);
    json pe = json::array(), fe = json::array();
    for (const auto& rows : inst.principal_edges) pe.push_back(edges_to_json(rows));
    for (const auto& rows : inst.fooling_edges) fe.push_back(edges_to_json(rows));
    j["principal_edges"] = std::move(pe);
    j["fooling_edges"] = std::move(fe);
    j["principal_code"] = inst.principal_code;
    return j.dump(2);
}

Instance instance_from_json(const std::string& text) {
    json j = json::parse(text);
    Instance inst;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "mis_hard0") inst.kind = InstanceKind::mis_hard0;
    else if (kind == "mis_half") inst.kind = InstanceKind::mis_half;
    else if (kind == "mis_hard") inst.kind = InstanceKind::mis_hard;
    else if (kind == "apx_hard0") inst.kind = InstanceKind::apx_hard0;
    else if (kind == "apx_hard") inst.kind = InstanceKind::apx_hard;
    else throw ConfigError("unknown instance kind: " + kind);

    const json& p = j.at("params");
    std::string variant = p.at("variant").get<std::string>();
    if (variant != "mis" && variant != "apx") throw ConfigError("unknown variant: " + variant);
    Variant var = variant == "mis" ? Variant::mis : Variant::apx;
    int k = p.at("k").get<int>(), r = p.at("r").get<int>();
    if (p.at("derived_counts").get<bool>()) {
        inst.params = make_params(k, r, var);
    } else {
        ToyCounts toy;
        toy.fhat = p.at("fhat").get<std::vector<long long>>();
        toy.phat = p.at("phat").get<std::vector<long long>>();
        inst.params = make_params(k, r, var, toy);
    }

    inst.graph = Graph::from_edges(j.at("n").get<int>(), edges_from_json(j.at("edges")));
    const json& lay = j.at("layout");
    inst.layout.level = lay.at("level").get<int>();
    inst.layout.n = inst.graph.n;
    inst.layout.principal = lay.at("principal").get<std::vector<std::vector<int>>>();
    inst.layout.fooling = lay.at("fooling").get<std::vector<std::vector<int>>>();
    inst.layout.principal_side = sides_from_json(lay.at("principal_side"));
    inst.layout.fooling_side = sides_from_json(lay.at("fooling_side"));
    inst.layout.sigma = lay.at("sigma").get<std::vector<int>>();
    inst.layout.finalize();
    for (const auto& rows : j.at("principal_edges")) inst.principal_edges.push_back(edges_from_json(rows));
    for (const auto& rows : j.at("fooling_edges")) inst.fooling_edges.push_back(edges_from_json(rows));
    inst.principal_code = j.at("principal_code").get<std::vector<long long>>();
    return inst;
}

} // namespace bbsim
