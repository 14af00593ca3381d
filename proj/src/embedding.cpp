#include "bbsim/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "bbsim/errors.hpp"
#include "bbsim/oracles.hpp"
#include "bbsim/rng.hpp"

namespace bbsim {

namespace {

//======================================================================
// Projection variable grammar
//======================================================================

enum class VKind { sigma, b, bu, t, tu, g, gu, mp, mpu, mf, grade, grade_b };

struct VSpec {
    VKind kind = VKind::sigma;
    int i = -1, o = -1, t0 = -1;  // block, vertex offset, 0-based round
};

VSpec parse_var(const std::string& name) {
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
        size_t c = name.find(':', pos);
        parts.push_back(name.substr(pos, c == std::string::npos ? c : c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    auto num = [&](size_t idx) {
        try {
            return std::stoi(parts.at(idx));
        } catch (const std::exception&) {
            throw UnknownVariable("bad variable: " + name);
        }
    };
    const std::string& head = parts[0];
    VSpec v;
    auto want = [&](size_t n) {
        if (parts.size() != n) throw UnknownVariable("bad variable: " + name);
    };
    if (head == "Sigma") { want(1); v.kind = VKind::sigma; }
    else if (head == "B") { want(2); v.kind = VKind::b; v.i = num(1); }
    else if (head == "Bu") { want(3); v.kind = VKind::bu; v.i = num(1); v.o = num(2); }
    else if (head == "T") { want(2); v.kind = VKind::t; v.i = num(1); }
    else if (head == "Tu") { want(3); v.kind = VKind::tu; v.i = num(1); v.o = num(2); }
    else if (head == "G") { want(2); v.kind = VKind::g; v.i = num(1); }
    else if (head == "Gu") { want(3); v.kind = VKind::gu; v.i = num(1); v.o = num(2); }
    else if (head == "MP") { want(3); v.kind = VKind::mp; v.t0 = num(1) - 1; v.i = num(2); }
    else if (head == "MPu") { want(4); v.kind = VKind::mpu; v.t0 = num(1) - 1; v.i = num(2); v.o = num(3); }
    else if (head == "MF") { want(2); v.kind = VKind::mf; v.t0 = num(1) - 1; }
    else if (head == "Grade") { want(1); v.kind = VKind::grade; }
    else if (head == "GradeB") { want(2); v.kind = VKind::grade_b; v.i = num(1); }
    else throw UnknownVariable("unknown variable: " + name);
    return v;
}

void check_spec(const JointLaw& law, const VSpec& v, const std::string& name) {
    auto need = [&](bool ok) {
        if (!ok) throw UnknownVariable("variable out of range for this law: " + name);
    };
    switch (v.kind) {
        case VKind::sigma: case VKind::grade: break;
        case VKind::b: case VKind::t: case VKind::g: case VKind::grade_b:
            need(v.i >= 0 && v.i < law.p); break;
        case VKind::bu: case VKind::tu: case VKind::gu:
            need(v.i >= 0 && v.i < law.p && v.o >= 0 && v.o < law.block_size); break;
        case VKind::mp:
            need(v.t0 >= 0 && v.t0 < law.rounds && v.i >= 0 && v.i < law.p); break;
        case VKind::mpu:
            need(v.t0 >= 0 && v.t0 < law.rounds && v.i >= 0 && v.i < law.p &&
                 v.o >= 0 && v.o < law.block_size); break;
        case VKind::mf:
            need(v.t0 >= 0 && v.t0 < law.rounds); break;
    }
}

// The within-block edge set one vertex sees: for the independent-set variant
// the presence bit of its pair edge; for the matching variant 0 or 1+partner.
long long bu_raw(const JointLaw& law, long long code, int o) {
    if (law.pr.variant == Variant::mis) return (code >> (o / 2)) & 1;
    const int k = law.pr.k;
    const int a = static_cast<int>(code) / k, b = static_cast<int>(code) % k;
    if (o == a) return 1 + k + b;
    if (o == k + b) return 1 + a;
    return 0;
}

long long tu_pack(const JointLaw& law, long long a, int i, int o) {
    const int base = (i * law.block_size + o) * law.tc_per_vertex;
    long long v = 0;
    for (int j = 0; j < law.tc_per_vertex; ++j)
        v = v * law.block_size + law.tval_of(a, base + j);
    return v;
}

long long eval_var(const JointLaw& law, const VSpec& v, long long a) {
    switch (v.kind) {
        case VKind::sigma: return law.sigma_of(a);
        case VKind::b: return law.bcode_of(a, v.i);
        case VKind::bu: return bu_raw(law, law.bcode_of(a, v.i), v.o);
        case VKind::tu: return tu_pack(law, a, v.i, v.o);
        case VKind::t: {
            long long t = 0;
            for (int o = 0; o < law.block_size; ++o)
                for (int j = 0; j < law.tc_per_vertex; ++j)
                    t = t * law.block_size +
                        law.tval_of(a, (v.i * law.block_size + o) * law.tc_per_vertex + j);
            return t;
        }
        case VKind::g: {
            long long span = 1;
            for (int c = 0; c < law.block_size * law.tc_per_vertex; ++c) span *= law.block_size;
            return law.bcode_of(a, v.i) * span + eval_var(law, VSpec{VKind::t, v.i, -1, -1}, a);
        }
        case VKind::gu: {
            long long span = 1;
            for (int j = 0; j < law.tc_per_vertex; ++j) span *= law.block_size;
            return bu_raw(law, law.bcode_of(a, v.i), v.o) * span + tu_pack(law, a, v.i, v.o);
        }
        case VKind::mp: return law.mcode_of(a, v.t0, v.i);
        case VKind::mpu: {
            const int code = law.mcode_of(a, v.t0, v.i);
            return law.vmsg_lookup.at(law.slot_tuples[law.slot(v.t0, v.i)][code][v.o]);
        }
        case VKind::mf: return law.mcode_of(a, v.t0, law.p);
        case VKind::grade: return law.grade_global[a];
        case VKind::grade_b: return law.grade_block[a * law.p + v.i];
    }
    throw UnknownVariable("unreachable variable kind");
}

std::vector<VSpec> parse_all(const JointLaw& law, const std::vector<std::string>& names) {
    std::vector<VSpec> specs;
    specs.reserve(names.size());
    for (const auto& n : names) {
        VSpec v = parse_var(n);
        check_spec(law, v, n);
        specs.push_back(v);
    }
    return specs;
}

// Union of variable name lists, preserving first-occurrence order.
std::vector<std::string> var_union(std::initializer_list<std::vector<std::string>> lists) {
    std::vector<std::string> out;
    for (const auto& l : lists)
        for (const auto& n : l)
            if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    return out;
}

std::string mp_name(int t, int i) { return "MP:" + std::to_string(t) + ":" + std::to_string(i); }
std::string mf_name(int t) { return "MF:" + std::to_string(t); }

int plabel(const JointLaw& law, const BlockLayout& lay, int i, int o) {
    return lay.sigma[law.canon.principal[i][o]];
}
int flabel(const JointLaw& law, const BlockLayout& lay, int j, int c) {
    return lay.sigma[law.canon.fooling[j][c]];
}

} // namespace

//======================================================================
// Atom coordinate decoding
//======================================================================

int JointLaw::sigma_of(long long a) const { return static_cast<int>(a / (bpow * tpow)); }

long long JointLaw::bcode_of(long long a, int block) const {
    long long bmix = (a / tpow) % bpow;
    long long div = 1;
    for (int j = p - 1; j > block; --j) div *= codes;
    return (bmix / div) % codes;
}

int JointLaw::tval_of(long long a, int coord) const {
    long long tmix = a % tpow;
    long long div = 1;
    const int C = static_cast<int>(tcoords.size());
    for (int j = C - 1; j > coord; --j) div *= block_size;
    return static_cast<int>((tmix / div) % block_size);
}

long long JointLaw::index_of(int sigma, const std::vector<long long>& b,
                             const std::vector<int>& t) const {
    if (static_cast<int>(b.size()) != p || t.size() != tcoords.size())
        throw OutOfRange("coordinate vectors have wrong length");
    long long bmix = 0;
    for (int i = 0; i < p; ++i) {
        if (b[i] < 0 || b[i] >= codes) throw OutOfRange("block code out of range");
        bmix = bmix * codes + b[i];
    }
    long long tmix = 0;
    for (size_t c = 0; c < t.size(); ++c) {
        if (t[c] < 0 || t[c] >= block_size) throw OutOfRange("fooling coordinate out of range");
        tmix = tmix * block_size + t[c];
    }
    if (sigma < 0 || sigma >= sigma_count) throw OutOfRange("sigma index out of range");
    return (sigma * bpow + bmix) * tpow + tmix;
}

Graph JointLaw::assemble(int sigma, const std::vector<long long>& b,
                         const std::vector<int>& t) const {
    const BlockLayout& lay = layouts.at(sigma);
    std::vector<Edge> edges;
    for (int i = 0; i < p; ++i) {
        const Graph& g0 = level0_graphs.at(b.at(i));
        for (auto [x, y] : g0.edges)
            edges.push_back({plabel(*this, lay, i, x), plabel(*this, lay, i, y)});
    }
    for (size_t c = 0; c < tcoords.size(); ++c) {
        if (t.at(c) == 0) continue;
        const TCoord& tc = tcoords[c];
        edges.push_back({plabel(*this, lay, tc.block, tc.offset),
                         flabel(*this, lay, tc.fool, t[c] - 1)});
    }
    if (pr.doubled()) {
        for (int j = 0; j < fblocks; ++j) {
            if (canon.fooling_side[j] != Side::U) continue;
            for (int j2 = 0; j2 < fblocks; ++j2) {
                if (canon.fooling_side[j2] != Side::V) continue;
                for (int c = 0; c < fool_size; ++c)
                    for (int c2 = 0; c2 < fool_size; ++c2)
                        edges.push_back({flabel(*this, lay, j, c), flabel(*this, lay, j2, c2)});
            }
        }
    }
    return Graph::from_edges(n, edges);
}

int JointLaw::find_sigma(const BlockLayout& lay) const {
    for (int s = 0; s < sigma_count; ++s)
        if (layouts[s].sigma == lay.sigma) return s;
    throw OutOfRange("layout is not in the enumerated sigma space");
}

Transcript JointLaw::transcript_of(int sigma, const std::vector<int>& mcodes) const {
    if (static_cast<int>(mcodes.size()) != slots)
        throw OutOfRange("message code vector has wrong length");
    const BlockLayout& lay = layouts.at(sigma);
    Transcript tr;
    tr.rounds.assign(rounds, std::vector<Bits>(n));
    for (int t0 = 0; t0 < rounds; ++t0) {
        for (int i = 0; i < p; ++i) {
            const auto& tup = slot_tuples[slot(t0, i)].at(mcodes[slot(t0, i)]);
            for (int o = 0; o < block_size; ++o) tr.rounds[t0][plabel(*this, lay, i, o)] = tup[o];
        }
        const auto& ftup = slot_tuples[slot(t0, p)].at(mcodes[slot(t0, p)]);
        int idx = 0;
        for (int j = 0; j < fblocks; ++j)
            for (int c = 0; c < fool_size; ++c)
                tr.rounds[t0][flabel(*this, lay, j, c)] = ftup[idx++];
    }
    return tr;
}

Output JointLaw::replay_output(int sigma, const std::vector<int>& mcodes) const {
    Transcript tr = transcript_of(sigma, mcodes);
    PublicCoins pub{opts.pub_seed};
    RefCtx ctx{pub, &layouts.at(sigma)};
    Output out = proto.referee(tr, ctx);
    validate_output(out, n);
    return out;
}

int JointLaw::grade_of_block(int sigma, int block, long long code, const Output& out) const {
    const BlockLayout& lay = layouts.at(sigma);
    const Graph& g0 = level0_graphs.at(code);
    if (pr.variant == Variant::mis) {
        const auto& s = std::get<MisOutput>(out).vertices;
        std::vector<int> local;
        for (int o = 0; o < block_size; ++o)
            if (std::binary_search(s.begin(), s.end(), plabel(*this, lay, block, o)))
                local.push_back(o);
        return is_mis(g0, local) ? 1 : 0;
    }
    std::vector<int> offset_of(n, -1);
    for (int o = 0; o < block_size; ++o) offset_of[plabel(*this, lay, block, o)] = o;
    int score = 0;
    for (auto [u, v] : std::get<MatchingOutput>(out).pairs) {
        const int ou = offset_of[u], ov = offset_of[v];
        if (ou >= 0 && ov >= 0 && g0.has_edge(ou, ov)) ++score;
    }
    return score;
}

int JointLaw::grade_of_output(long long a, const Output& out) const {
    std::vector<long long> b(p);
    for (int i = 0; i < p; ++i) b[i] = bcode_of(a, i);
    std::vector<int> t(tcoords.size());
    for (size_t c = 0; c < t.size(); ++c) t[c] = tval_of(a, static_cast<int>(c));
    Graph g = assemble(sigma_of(a), b, t);
    if (pr.variant == Variant::mis)
        return is_mis(g, std::get<MisOutput>(out).vertices) ? 1 : 0;
    return matching_score(g, std::get<MatchingOutput>(out)).valid_edges;
}

long long JointLaw::raw_value(const std::string& var, long long a) const {
    VSpec v = parse_var(var);
    check_spec(*this, v, var);
    return eval_var(*this, v, a);
}

DiscreteDist JointLaw::project(const std::vector<std::string>& vars) const {
    std::vector<VSpec> specs = parse_all(*this, vars);
    const size_t V = specs.size();

    std::vector<std::map<long long, int>> values(V);
    for (long long a = 0; a < n_atoms; ++a) {
        if (weight[a] == 0) continue;
        for (size_t v = 0; v < V; ++v) values[v].emplace(eval_var(*this, specs[v], a), 0);
    }
    for (auto& m : values) {
        int id = 0;
        for (auto& [raw, dense] : m) dense = id++;
    }

    std::map<std::vector<int>, uint64_t> acc;
    std::vector<int> key(V);
    for (long long a = 0; a < n_atoms; ++a) {
        if (weight[a] == 0) continue;
        for (size_t v = 0; v < V; ++v) key[v] = values[v].at(eval_var(*this, specs[v], a));
        acc[key] += weight[a];
    }

    DiscreteDist d;
    d.vars = vars;
    for (auto& m : values) d.card.push_back(static_cast<int>(m.size()));
    for (auto& [k, w] : acc) d.atoms.emplace(k, Rational(w) / denom);
    d.validate();
    return d;
}

std::vector<std::string> JointLaw::blackboard_vars(int upto) const {
    std::vector<std::string> out;
    for (int t = 1; t <= upto; ++t) {
        for (int i = 0; i < p; ++i) out.push_back(mp_name(t, i));
        out.push_back(mf_name(t));
    }
    return out;
}

//======================================================================
// Enumeration
//======================================================================

namespace {

long long mul_capped(long long a, long long b, long long cap, const char* what) {
    if (a <= 0 || b <= 0 || a > cap / b)
        throw TooLarge(std::string(what) + " exceeds the enumeration cap");
    return a * b;
}

} // namespace

JointLaw enumerate_joint(const Params& pr, const Protocol& proto, EnumOptions opts) {
    if (pr.r != 1) throw TooLarge("joint enumeration supports exactly one recursion level");
    ensure_materializable(pr);
    if (pr.k > 20) throw TooLarge("level-0 code space exceeds the enumeration cap");

    JointLaw law;
    law.pr = pr;
    law.proto = proto;
    law.opts = opts;
    law.p = static_cast<int>(pr.p_at(1));
    law.fblocks = static_cast<int>(pr.f_at(1));
    law.block_size = static_cast<int>(pr.n0());
    law.fool_size = law.block_size - 1;
    law.n = static_cast<int>(pr.n_at(1));
    law.rounds = proto.rounds;
    law.slots = law.rounds * (law.p + 1);
    law.codes = pr.variant == Variant::mis ? (1LL << pr.k) : 1LL * pr.k * pr.k;
    law.tlaw = fooling_visible_law(pr.k, pr.variant);
    law.tc_per_vertex = static_cast<int>(pr.fhat_at(1));
    law.canon = canonical_layout(pr, 1);

    const long long cap = opts.atom_cap;
    auto fact = [&](int m) {
        long long f = 1;
        for (int x = 2; x <= m; ++x) f = mul_capped(f, x, cap, "sigma space");
        return f;
    };
    long long sc = 1;
    switch (opts.sigma_mode) {
        case SigmaMode::identity: sc = 1; break;
        case SigmaMode::blocks: sc = mul_capped(fact(law.p), fact(law.fblocks), cap, "sigma space"); break;
        case SigmaMode::full: sc = fact(law.n); break;
    }
    law.sigma_count = static_cast<int>(sc);

    long long total = sc;
    law.bpow = 1;
    for (int i = 0; i < law.p; ++i) {
        law.bpow = mul_capped(law.bpow, law.codes, cap, "block code space");
        total = mul_capped(total, law.codes, cap, "joint law");
    }
    for (int i = 0; i < law.p; ++i)
        for (int o = 0; o < law.block_size; ++o)
            for (int j = 0; j < law.fblocks; ++j)
                if (law.canon.principal_side[i] == law.canon.fooling_side[j])
                    law.tcoords.push_back({i, o, j});
    law.tpow = 1;
    for (size_t c = 0; c < law.tcoords.size(); ++c) {
        law.tpow = mul_capped(law.tpow, law.block_size, cap, "fooling coordinate space");
        total = mul_capped(total, law.block_size, cap, "joint law");
    }
    law.n_atoms = total;
    law.block_tstart.resize(law.p + 1, 0);
    for (size_t c = 0; c < law.tcoords.size(); ++c) law.block_tstart[law.tcoords[c].block + 1]++;
    for (int i = 0; i < law.p; ++i) law.block_tstart[i + 1] += law.block_tstart[i];

    // 64-bit width guards for atom weights and packed projection keys.
    long long max_num = 1;
    for (long long x : law.tlaw.num) max_num = std::max(max_num, x);
    const double wbits = law.tcoords.size() * std::log2(static_cast<double>(std::max(2LL, max_num)));
    if (wbits > 62) throw TooLarge("atom weights exceed 64-bit");
    const double gbits = std::log2(static_cast<double>(law.codes)) +
                         1.0 * law.block_size * law.tc_per_vertex *
                             std::log2(static_cast<double>(law.block_size));
    if (gbits > 62) throw TooLarge("packed block variables exceed 64-bit");
    const double colbytes = static_cast<double>(total) * (4.0 * law.slots + law.p + 9.0);
    if (colbytes > 3e9) throw TooLarge("joint law columns exceed the memory budget");

    using boost::multiprecision::cpp_int;
    cpp_int D = sc;
    for (int i = 0; i < law.p; ++i) D *= law.codes;
    for (size_t c = 0; c < law.tcoords.size(); ++c) D *= law.tlaw.den;
    law.denom = Rational(D);

    // Sigma atoms in lexicographic permutation order (deterministic indexing).
    switch (opts.sigma_mode) {
        case SigmaMode::identity:
            law.layouts.push_back(law.canon);
            break;
        case SigmaMode::blocks: {
            std::vector<int> pp(law.p);
            std::iota(pp.begin(), pp.end(), 0);
            do {
                std::vector<int> pf(law.fblocks);
                std::iota(pf.begin(), pf.end(), 0);
                do {
                    law.layouts.push_back(blocks_layout(pr, 1, pp, pf));
                } while (std::next_permutation(pf.begin(), pf.end()));
            } while (std::next_permutation(pp.begin(), pp.end()));
            break;
        }
        case SigmaMode::full: {
            std::vector<int> perm(law.n);
            std::iota(perm.begin(), perm.end(), 0);
            do {
                BlockLayout lay = law.canon;
                lay.sigma = perm;
                for (auto& blk : lay.principal) {
                    for (int& v : blk) v = perm[v];
                    std::sort(blk.begin(), blk.end());
                }
                for (auto& blk : lay.fooling) {
                    for (int& v : blk) v = perm[v];
                    std::sort(blk.begin(), blk.end());
                }
                lay.finalize();
                law.layouts.push_back(std::move(lay));
            } while (std::next_permutation(perm.begin(), perm.end()));
            break;
        }
    }
    if (static_cast<long long>(law.layouts.size()) != sc)
        throw Error("internal: sigma space size mismatch");

    for (long long code = 0; code < law.codes; ++code)
        law.level0_graphs.push_back(pr.variant == Variant::mis ? mis_hard0_graph(pr.k, code)
                                                               : apx_hard0_graph(pr.k, code));

    // Columns.
    const long long N = total;
    law.weight.assign(N, 0);
    law.mcol.assign(N * law.slots, 0);
    law.grade_global.assign(N, 0);
    law.grade_block.assign(N * law.p, 0);

    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 4;
    int nt = opts.threads > 0 ? opts.threads : std::min(hw, 8);
    nt = static_cast<int>(std::min<long long>(nt, N));
    nt = std::max(nt, 1);
    const long long chunk = (N + nt - 1) / nt;

    struct ThreadIntern {
        std::vector<std::map<std::vector<Bits>, int>> lookup;
        std::vector<std::vector<const std::vector<Bits>*>> tuples;
    };
    std::vector<ThreadIntern> local(nt);
    std::vector<std::exception_ptr> errors(nt);
    const int fool_total = law.fblocks * law.fool_size;

    auto work = [&](int tid) {
        try {
            ThreadIntern& li = local[tid];
            li.lookup.resize(law.slots);
            li.tuples.resize(law.slots);
            PublicCoins pub{opts.pub_seed};
            const long long lo = tid * chunk, hi = std::min<long long>(N, lo + chunk);
            std::vector<long long> b(law.p);
            std::vector<int> t(law.tcoords.size());
            std::vector<Bits> tup;
            for (long long a = lo; a < hi; ++a) {
                const int sigma = law.sigma_of(a);
                uint64_t w = 1;
                for (int i = 0; i < law.p; ++i) b[i] = law.bcode_of(a, i);
                for (size_t c = 0; c < t.size(); ++c) {
                    t[c] = law.tval_of(a, static_cast<int>(c));
                    w *= static_cast<uint64_t>(law.tlaw.num[t[c]]);
                }
                law.weight[a] = w;
                Graph g = law.assemble(sigma, b, t);
                RunResult rr = run_with_coins(g, &law.layouts[sigma], proto, pub);
                const BlockLayout& lay = law.layouts[sigma];
                for (int t0 = 0; t0 < law.rounds; ++t0) {
                    for (int gidx = 0; gidx <= law.p; ++gidx) {
                        tup.clear();
                        if (gidx < law.p) {
                            for (int o = 0; o < law.block_size; ++o)
                                tup.push_back(rr.transcript.rounds[t0][plabel(law, lay, gidx, o)]);
                        } else {
                            tup.reserve(fool_total);
                            for (int j = 0; j < law.fblocks; ++j)
                                for (int c = 0; c < law.fool_size; ++c)
                                    tup.push_back(rr.transcript.rounds[t0][flabel(law, lay, j, c)]);
                        }
                        const int s = law.slot(t0, gidx);
                        auto [it, inserted] = li.lookup[s].emplace(tup, (int)li.tuples[s].size());
                        if (inserted) li.tuples[s].push_back(&it->first);
                        law.mcol[a * law.slots + s] = static_cast<uint32_t>(it->second);
                    }
                }
                // Grades plus the per-atom structural facts the audit leans on.
                if (pr.variant == Variant::mis) {
                    law.grade_global[a] = static_cast<uint8_t>(
                        is_mis(g, std::get<MisOutput>(rr.output).vertices) ? 1 : 0);
                    int solved = 0;
                    for (int i = 0; i < law.p; ++i) {
                        const int gb = law.grade_of_block(sigma, i, b[i], rr.output);
                        law.grade_block[a * law.p + i] = static_cast<uint8_t>(gb);
                        solved += gb;
                    }
                    if (law.grade_global[a] && 2 * solved < law.p)
                        throw Error("internal: a valid output solved fewer than half the blocks");
                } else {
                    const int all = matching_score(g, std::get<MatchingOutput>(rr.output)).valid_edges;
                    law.grade_global[a] = static_cast<uint8_t>(all);
                    int inside = 0;
                    for (int i = 0; i < law.p; ++i) {
                        const int gb = law.grade_of_block(sigma, i, b[i], rr.output);
                        law.grade_block[a * law.p + i] = static_cast<uint8_t>(gb);
                        inside += gb;
                    }
                    if (inside < all - fool_total)
                        throw Error("internal: correct pairs outside blocks exceed the fooling count");
                }
            }
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    };

    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < nt; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Deterministic global interning: first occurrence in atom order, which is
    // independent of the thread partition.
    law.slot_lookup.resize(law.slots);
    law.slot_tuples.resize(law.slots);
    for (long long a = 0; a < N; ++a) {
        const int tid = static_cast<int>(a / chunk);
        for (int s = 0; s < law.slots; ++s) {
            const std::vector<Bits>& tup = *local[tid].tuples[s][law.mcol[a * law.slots + s]];
            auto [it, inserted] = law.slot_lookup[s].emplace(tup, (int)law.slot_tuples[s].size());
            if (inserted) law.slot_tuples[s].push_back(tup);
            law.mcol[a * law.slots + s] = static_cast<uint32_t>(it->second);
        }
    }
    for (int s = 0; s < law.slots; ++s)
        for (const auto& tup : law.slot_tuples[s])
            for (const Bits& m : tup)
                if (law.vmsg_lookup.emplace(m, (int)law.vmsg.size()).second) law.vmsg.push_back(m);

    // The weights must tile the denominator exactly.
    cpp_int wsum = 0;
    for (long long a = 0; a < N; ++a) wsum += law.weight[a];
    if (wsum != D) throw Error("internal: atom weights do not sum to the denominator");

    // Replay a sample of atoms; transcripts must come back identical.
    {
        Rng rng(derive(opts.pub_seed, 0x7265706cULL));
        PublicCoins pub{opts.pub_seed};
        std::vector<long long> b(law.p);
        std::vector<int> t(law.tcoords.size());
        const long long samples = std::min<long long>(N, 100);
        for (long long s = 0; s < samples; ++s) {
            const long long a = N <= 100 ? s : rng.below(static_cast<int>(N));
            const int sigma = law.sigma_of(a);
            for (int i = 0; i < law.p; ++i) b[i] = law.bcode_of(a, i);
            for (size_t c = 0; c < t.size(); ++c) t[c] = law.tval_of(a, static_cast<int>(c));
            RunResult rr = run_with_coins(law.assemble(sigma, b, t), &law.layouts[sigma], proto, pub);
            std::vector<int> mc(law.slots);
            for (int s2 = 0; s2 < law.slots; ++s2) mc[s2] = law.mcode_of(a, s2 / (law.p + 1), s2 % (law.p + 1));
            if (law.transcript_of(sigma, mc) != rr.transcript)
                throw NondeterministicProtocol("transcript changed on replay of atom " +
                                               std::to_string(a));
        }
    }
    return law;
}

//======================================================================
// Information quantities
//======================================================================

double mi_first_round(const JointLaw& law, int block) {
    if (law.rounds < 1) return 0.0;
    const std::string m = mp_name(1, block), b = "B:" + std::to_string(block);
    DiscreteDist d = law.project({"Sigma", m, b});
    return mutual_info(d, {m}, {b}, {"Sigma"});
}

double mi_round_P(const JointLaw& law, int block, int t) {
    if (t < 1 || t > law.rounds) throw OutOfRange("round out of range");
    if (law.p == 1) return 0.0;  // no other blocks
    std::vector<std::string> a;
    for (int j = 0; j < law.p; ++j)
        if (j != block) a.push_back(mp_name(t, j));
    const std::vector<std::string> b = {"G:" + std::to_string(block)};
    std::vector<std::string> c = law.blackboard_vars(t - 1);
    c.push_back(mp_name(t, block));
    c.push_back("Sigma");
    DiscreteDist d = law.project(var_union({a, b, c}));
    return mutual_info(d, a, b, c);
}

double mi_round_F(const JointLaw& law, int block, int t) {
    if (t < 1 || t > law.rounds) throw OutOfRange("round out of range");
    const std::vector<std::string> a = {mf_name(t)};
    const std::vector<std::string> b = {"G:" + std::to_string(block)};
    std::vector<std::string> c = law.blackboard_vars(t - 1);
    for (int j = 0; j < law.p; ++j) c.push_back(mp_name(t, j));
    c.push_back("Sigma");
    DiscreteDist d = law.project(var_union({a, b, c}));
    return mutual_info(d, a, b, c);
}

double first_round_budget(const Params& pr, int k_eff) {
    return static_cast<double>(pr.n0()) * k_eff / static_cast<double>(pr.fhat_at(1));
}
double round_budget_P(const Params& pr, int k_eff, int rounds) {
    return static_cast<double>(k_eff) * pr.n0() * pr.f_at(1) * rounds / static_cast<double>(pr.p_at(1));
}
double round_budget_F(const Params& pr, int k_eff, int t) {
    return static_cast<double>(k_eff) * (pr.n0() - 1) * pr.f_at(1) * t / static_cast<double>(pr.p_at(1));
}

namespace {

// True iff every positive-weight atom shows the same code in every principal
// message slot of rounds 1..t (then the blackboard carries no block signal).
bool principal_slots_constant(const JointLaw& law, int t) {
    for (int t0 = 0; t0 < t; ++t0)
        for (int i = 0; i < law.p; ++i) {
            int seen = -1;
            for (long long a = 0; a < law.n_atoms; ++a) {
                if (law.weight[a] == 0) continue;
                const int c = law.mcode_of(a, t0, i);
                if (seen == -1) seen = c;
                else if (seen != c) return false;
            }
        }
    return true;
}

} // namespace

SumInfoCheck check_sum_info(const JointLaw& law, int t, double tol) {
    if (t < 1 || t > law.rounds) throw OutOfRange("round out of range");
    SumInfoCheck r;
    r.t = t;
    r.per_block.assign(law.p, 0.0);
    if (principal_slots_constant(law, t)) {  // constant messages carry nothing
        r.holds = true;
        return r;
    }
    std::vector<std::string> mp_upto, mp_before, mf_before, gall;
    for (int s = 1; s <= t; ++s)
        for (int j = 0; j < law.p; ++j) {
            mp_upto.push_back(mp_name(s, j));
            if (s < t) mp_before.push_back(mp_name(s, j));
        }
    for (int s = 1; s < t; ++s) mf_before.push_back(mf_name(s));
    for (int j = 0; j < law.p; ++j) gall.push_back("G:" + std::to_string(j));
    std::vector<std::string> cond = mf_before;
    cond.push_back("Sigma");

    {
        DiscreteDist d = law.project(var_union({mp_upto, gall, cond}));
        r.lhs = mutual_info(d, mp_upto, gall, cond);
    }
    r.rhs = 0;
    for (int i = 0; i < law.p; ++i) {
        std::vector<std::string> a = mp_before;
        a.push_back(mp_name(t, i));
        const std::vector<std::string> b = {"G:" + std::to_string(i)};
        DiscreteDist d = law.project(var_union({a, b, cond}));
        r.per_block[i] = mutual_info(d, a, b, cond);
        r.rhs += r.per_block[i];
    }
    r.holds = r.lhs <= r.rhs + tol;
    return r;
}

//======================================================================
// Product-form checks
//======================================================================

Rational expected_product_gap(
    const DiscreteDist& d, const std::vector<std::string>& group,
    const std::vector<std::string>& shared,
    const std::vector<std::pair<std::vector<std::string>, std::string>>& coords) {
    std::vector<int> gidx, sidx;
    for (const auto& v : group) gidx.push_back(d.var_index(v));
    for (const auto& v : shared) sidx.push_back(d.var_index(v));
    struct Coord {
        std::vector<int> keys;
        int val;
    };
    std::vector<Coord> cs;
    for (const auto& [keys, val] : coords) {
        Coord c;
        for (const auto& v : keys) c.keys.push_back(d.var_index(v));
        c.val = d.var_index(val);
        cs.push_back(c);
    }

    // Per-coordinate conditional tables keyed by (shared, keys_o).
    using Key = std::vector<int>;
    std::vector<std::map<Key, std::pair<Rational, std::map<int, Rational>>>> tables(cs.size());
    for (const auto& [assign, pr] : d.atoms) {
        for (size_t o = 0; o < cs.size(); ++o) {
            Key k;
            for (int x : sidx) k.push_back(assign[x]);
            for (int x : cs[o].keys) k.push_back(assign[x]);
            auto& row = tables[o][k];
            row.first += pr;
            row.second[assign[cs[o].val]] += pr;
        }
    }

    // Group the joint law and compare against the product form.
    std::map<Key, std::pair<Rational, std::map<std::vector<int>, Rational>>> groups;
    std::map<Key, Key> group_atom;  // a representative full assignment
    for (const auto& [assign, pr] : d.atoms) {
        Key gk;
        for (int x : gidx) gk.push_back(assign[x]);
        auto& g = groups[gk];
        g.first += pr;
        std::vector<int> vals;
        for (const auto& c : cs) vals.push_back(assign[c.val]);
        g.second[vals] += pr;
        group_atom.emplace(gk, assign);
    }

    Rational total = 0;
    for (const auto& [gk, g] : groups) {
        const Key& rep = group_atom.at(gk);
        // product probability of a value tuple under the per-coordinate tables
        Rational l1 = 0, prod_mass_on_joint = 0;
        for (const auto& [vals, mass] : g.second) {
            Rational joint = mass / g.first;
            Rational prod = 1;
            for (size_t o = 0; o < cs.size(); ++o) {
                Key k;
                for (int x : sidx) k.push_back(rep[x]);
                for (int x : cs[o].keys) k.push_back(rep[x]);
                const auto& row = tables[o].at(k);
                auto it = row.second.find(vals[o]);
                if (it == row.second.end()) {
                    prod = 0;
                    break;
                }
                prod *= it->second / row.first;
            }
            l1 += abs(joint - prod);
            prod_mass_on_joint += prod;
        }
        // Off-support product mass counts once: TV = (sum|p-q| + (1 - sum q)) / 2.
        Rational tv = (l1 + 1 - prod_mass_on_joint) / 2;
        total += g.first * tv;
    }
    return total;
}

Rational fooling_product_gap(const JointLaw& law, int block) {
    if (law.rounds < 1) return Rational(0);
    const std::string bi = "B:" + std::to_string(block), m = mp_name(1, block);
    std::vector<std::string> group = {"Sigma", m, bi};
    std::vector<std::pair<std::vector<std::string>, std::string>> coords;
    std::vector<std::string> all = group;
    for (int o = 0; o < law.block_size; ++o) {
        const std::string bu = "Bu:" + std::to_string(block) + ":" + std::to_string(o);
        const std::string tu = "Tu:" + std::to_string(block) + ":" + std::to_string(o);
        group.push_back(bu);
        all.push_back(bu);
        all.push_back(tu);
        coords.push_back({{bu}, tu});
    }
    DiscreteDist d = law.project(all);
    return expected_product_gap(d, group, {"Sigma", m}, coords);
}

Rational rectangle_gap(const JointLaw& law, int t) {
    if (t < 0 || t > law.rounds) throw OutOfRange("round out of range");
    std::vector<std::string> cond = law.blackboard_vars(t);
    cond.push_back("Sigma");
    std::vector<std::pair<std::vector<std::string>, std::string>> coords;
    std::vector<std::string> all = cond;
    for (int i = 0; i < law.p; ++i) {
        all.push_back("G:" + std::to_string(i));
        coords.push_back({{}, "G:" + std::to_string(i)});
    }
    DiscreteDist d = law.project(all);
    return expected_product_gap(d, cond, cond, coords);
}

//======================================================================
// The per-block resampling law
//======================================================================

namespace {

using Key = std::vector<long long>;

struct CondRow {
    uint64_t total = 0;
    std::vector<std::pair<Key, uint64_t>> vals;
};
struct CondTable {
    std::map<Key, CondRow> rows;
    const CondRow* find(const Key& k) const {
        auto it = rows.find(k);
        return it == rows.end() ? nullptr : &it->second;
    }
};

CondTable build_cond_table(const JointLaw& law, const std::vector<std::string>& key_vars,
                           const std::vector<std::string>& val_vars) {
    std::vector<VSpec> ks = parse_all(law, key_vars), vs = parse_all(law, val_vars);
    std::map<Key, std::map<Key, uint64_t>> acc;
    Key k(ks.size()), v(vs.size());
    for (long long a = 0; a < law.n_atoms; ++a) {
        if (law.weight[a] == 0) continue;
        for (size_t x = 0; x < ks.size(); ++x) k[x] = eval_var(law, ks[x], a);
        for (size_t x = 0; x < vs.size(); ++x) v[x] = eval_var(law, vs[x], a);
        acc[k][v] += law.weight[a];
    }
    CondTable t;
    for (auto& [key, vals] : acc) {
        CondRow row;
        for (auto& [val, w] : vals) {
            row.total += w;
            row.vals.emplace_back(val, w);
        }
        t.rows.emplace(key, std::move(row));
    }
    return t;
}

// Everything the chain sampler needs, shared by build_nu and simulate_tau.
// The target block's later-round messages come from the protocol itself
// (real_vertex_message); only resampling stages need tables.
struct NuTables {
    int block = 0;
    CondTable first;                      // Sigma -> M^1_{P,i}
    std::vector<CondTable> tcoord;        // per offset: (Bu, M^1_{P,i}, Sigma) -> Tu
    CondTable first_rest;                 // (M^1_{P,i}, Sigma) -> M^1_{P,-i}
    CondTable first_fool;                 // (M^1_P, Sigma) -> M^1_F
    std::vector<CondTable> rest, fool;    // [t]: later-round group tables
};

NuTables build_nu_tables(const JointLaw& law, int block) {
    NuTables nt;
    nt.block = block;
    const std::string bs = std::to_string(block);
    if (law.rounds >= 1) {
        nt.first = build_cond_table(law, {"Sigma"}, {mp_name(1, block)});
        for (int o = 0; o < law.block_size; ++o)
            nt.tcoord.push_back(build_cond_table(
                law, {"Bu:" + bs + ":" + std::to_string(o), mp_name(1, block), "Sigma"},
                {"Tu:" + bs + ":" + std::to_string(o)}));
        std::vector<std::string> others;
        for (int j = 0; j < law.p; ++j)
            if (j != block) others.push_back(mp_name(1, j));
        nt.first_rest = build_cond_table(law, {mp_name(1, block), "Sigma"}, others);
        std::vector<std::string> allp;
        for (int j = 0; j < law.p; ++j) allp.push_back(mp_name(1, j));
        allp.push_back("Sigma");
        nt.first_fool = build_cond_table(law, allp, {mf_name(1)});
    }
    nt.rest.resize(law.rounds + 1);
    nt.fool.resize(law.rounds + 1);
    for (int t = 2; t <= law.rounds; ++t) {
        std::vector<std::string> before = law.blackboard_vars(t - 1);
        {
            std::vector<std::string> key = before;
            key.push_back(mp_name(t, block));
            key.push_back("Sigma");
            std::vector<std::string> others;
            for (int j = 0; j < law.p; ++j)
                if (j != block) others.push_back(mp_name(t, j));
            nt.rest[t] = build_cond_table(law, key, others);
        }
        {
            std::vector<std::string> key = before;
            for (int j = 0; j < law.p; ++j) key.push_back(mp_name(t, j));
            key.push_back("Sigma");
            nt.fool[t] = build_cond_table(law, key, {mf_name(t)});
        }
    }
    return nt;
}

// Blackboard key fragment: all message codes of rounds 1..upto in
// blackboard_vars order.
void append_bb(const JointLaw& law, const std::vector<int>& mcodes, int upto, Key& k) {
    for (int t0 = 0; t0 < upto; ++t0) {
        for (int i = 0; i < law.p; ++i) k.push_back(mcodes[law.slot(t0, i)]);
        k.push_back(mcodes[law.slot(t0, law.p)]);
    }
}

// The real round-t (t >= 2) message of block-i vertex offset o given its true
// local input and the blackboard of rounds < t.  The simulation runs the
// protocol itself for the target block, so this factor is defined for every
// sampled blackboard; only the resampling stages can hit mu-zero events.
Bits real_vertex_message(const JointLaw& law, int sigma, int block, int o, long long bcode,
                         long long tu, const Transcript& prior, int t) {
    const BlockLayout& lay = law.layouts[sigma];
    const int label = plabel(law, lay, block, o);
    VertexView view;
    view.self_id = label;
    view.n = law.n;
    for (int x : law.level0_graphs[bcode].neighbors(o))
        view.neighbors.push_back(plabel(law, lay, block, x));
    std::vector<int> coords(law.tc_per_vertex);
    for (int j = law.tc_per_vertex - 1; j >= 0; --j) {
        coords[j] = static_cast<int>(tu % law.block_size);
        tu /= law.block_size;
    }
    int jrole = 0;
    for (int j = 0; j < law.fblocks; ++j) {
        if (law.canon.fooling_side[j] != law.canon.principal_side[block]) continue;
        if (coords[jrole] > 0) view.neighbors.push_back(flabel(law, lay, j, coords[jrole] - 1));
        ++jrole;
    }
    std::sort(view.neighbors.begin(), view.neighbors.end());
    PublicCoins pub{law.opts.pub_seed};
    MsgCtx ctx{t - 1, prior, pub, PrivateCoins{pub.seed, label}, &lay};
    return law.proto.message(view, ctx);
}

} // namespace

NuLaw build_nu(const JointLaw& law, int block) {
    if (block < 0 || block >= law.p) throw OutOfRange("block out of range");
    NuTables nt = build_nu_tables(law, block);
    NuLaw nu;
    nu.block = block;
    nu.mass = 0;

    std::map<std::pair<std::pair<int, long long>, std::vector<int>>, Rational> acc;
    std::vector<int> mcodes(law.slots, -1);
    std::vector<long long> tus(law.block_size, 0);

    // Explicit recursion over the chain stages.
    int cur_sigma = 0;
    long long cur_b = 0;

    std::function<void(int, Rational)> round_t;  // t >= 2
    auto emit = [&](const Rational& prob) {
        acc[{{cur_sigma, cur_b}, mcodes}] += prob;
        nu.mass += prob;
    };

    round_t = [&](int t, Rational prob) {
        if (t > law.rounds) {
            emit(prob);
            return;
        }
        // The target block answers for itself: run the protocol on its true
        // input against the sampled blackboard (probability factor 1).
        std::vector<int> mc(law.slots, 0);
        for (int s = 0; s < law.slots; ++s) mc[s] = std::max(0, mcodes[s]);
        Transcript prior = law.transcript_of(cur_sigma, mc);
        prior.rounds.resize(t - 1);
        std::vector<Bits> tup;
        for (int o = 0; o < law.block_size; ++o)
            tup.push_back(real_vertex_message(law, cur_sigma, block, o, cur_b, tus[o], prior, t));
        auto it = law.slot_lookup[law.slot(t - 1, block)].find(tup);
        // An un-interned tuple makes the next conditioning event mu-zero.
        if (it == law.slot_lookup[law.slot(t - 1, block)].end()) return;  // abort
        mcodes[law.slot(t - 1, block)] = it->second;
        Key kr;
        append_bb(law, mcodes, t - 1, kr);
        kr.push_back(it->second);
        kr.push_back(cur_sigma);
        const CondRow* rrest = nt.rest[t].find(kr);
        if (!rrest) return;  // abort
        for (const auto& [vals, w1] : rrest->vals) {
            int vi = 0;
            for (int j = 0; j < law.p; ++j)
                if (j != block) mcodes[law.slot(t - 1, j)] = static_cast<int>(vals[vi++]);
            Key kf;
            append_bb(law, mcodes, t - 1, kf);
            for (int j = 0; j < law.p; ++j) kf.push_back(mcodes[law.slot(t - 1, j)]);
            kf.push_back(cur_sigma);
            const CondRow* rfool = nt.fool[t].find(kf);
            if (!rfool) continue;  // abort this branch
            for (const auto& [fval, w2] : rfool->vals) {
                mcodes[law.slot(t - 1, law.p)] = static_cast<int>(fval[0]);
                round_t(t + 1, prob * Rational(w1) / Rational(rrest->total) * Rational(w2) /
                                   Rational(rfool->total));
            }
        }
    };

    const Rational base = Rational(1) / Rational(1LL * law.sigma_count * law.codes);
    for (cur_sigma = 0; cur_sigma < law.sigma_count; ++cur_sigma) {
        for (cur_b = 0; cur_b < law.codes; ++cur_b) {
            if (law.rounds == 0) {
                std::fill(mcodes.begin(), mcodes.end(), -1);
                emit(base);
                continue;
            }
            const CondRow* rfirst = nt.first.find({cur_sigma});
            if (!rfirst) continue;
            for (const auto& [m1val, w0] : rfirst->vals) {
                std::fill(mcodes.begin(), mcodes.end(), -1);
                mcodes[law.slot(0, block)] = static_cast<int>(m1val[0]);
                Rational pr0 = base * Rational(w0) / Rational(rfirst->total);
                // T coordinates, one vertex at a time.
                std::vector<std::pair<std::vector<long long>, Rational>> tpart = {{{}, pr0}};
                for (int o = 0; o < law.block_size; ++o) {
                    std::vector<std::pair<std::vector<long long>, Rational>> next;
                    for (auto& [tv, pr1] : tpart) {
                        const CondRow* row = nt.tcoord[o].find(
                            {bu_raw(law, cur_b, o), m1val[0], cur_sigma});
                        if (!row) continue;  // abort branch
                        for (const auto& [val, w] : row->vals) {
                            auto tv2 = tv;
                            tv2.push_back(val[0]);
                            next.emplace_back(std::move(tv2),
                                              pr1 * Rational(w) / Rational(row->total));
                        }
                    }
                    tpart = std::move(next);
                }
                for (auto& [tv, pr1] : tpart) {
                    for (int o = 0; o < law.block_size; ++o) tus[o] = tv[o];
                    const CondRow* rrest = nt.first_rest.find({m1val[0], cur_sigma});
                    if (!rrest) continue;
                    for (const auto& [vals, w1] : rrest->vals) {
                        int vi = 0;
                        for (int j = 0; j < law.p; ++j)
                            if (j != block) mcodes[law.slot(0, j)] = static_cast<int>(vals[vi++]);
                        Key kf;
                        for (int j = 0; j < law.p; ++j) kf.push_back(mcodes[law.slot(0, j)]);
                        kf.push_back(cur_sigma);
                        const CondRow* rfool = nt.first_fool.find(kf);
                        if (!rfool) continue;
                        for (const auto& [fval, w2] : rfool->vals) {
                            mcodes[law.slot(0, law.p)] = static_cast<int>(fval[0]);
                            round_t(2, pr1 * Rational(w1) / Rational(rrest->total) * Rational(w2) /
                                           Rational(rfool->total));
                        }
                    }
                }
            }
        }
    }

    for (auto& [key, prob] : acc) {
        if (prob == 0) continue;
        NuAtom atom;
        atom.sigma = key.first.first;
        atom.b = key.first.second;
        atom.m = key.second;
        atom.prob = prob;
        nu.atoms.push_back(std::move(atom));
    }
    return nu;
}

Rational expected_tvd_mu_nu(const JointLaw& law, const NuLaw& nu) {
    const int i = nu.block;
    // mu grouped by (B_i) then (Sigma, message codes).
    std::map<long long, std::map<Key, uint64_t>> mu;
    Key sub;
    for (long long a = 0; a < law.n_atoms; ++a) {
        if (law.weight[a] == 0) continue;
        sub.clear();
        sub.push_back(law.sigma_of(a));
        for (int s = 0; s < law.slots; ++s) sub.push_back(law.mcol[a * law.slots + s]);
        mu[law.bcode_of(a, i)][sub] += law.weight[a];
    }
    const Rational mu_b = Rational(1) / Rational(law.codes);  // exact block marginal
    Rational result = 0;
    for (long long b = 0; b < law.codes; ++b) {
        const auto& mrows = mu.at(b);
        std::map<Key, Rational> nrows;
        for (const auto& atom : nu.atoms) {
            if (atom.b != b) continue;
            sub.clear();
            sub.push_back(atom.sigma);
            for (int c : atom.m) sub.push_back(c);
            nrows[sub] += atom.prob / mu_b;  // conditional on B_i = b
        }
        Rational l1 = 0, nu_mass = 0;
        for (const auto& [k, w] : mrows) {
            Rational mp = Rational(w) / law.denom / mu_b;
            auto it = nrows.find(k);
            Rational np = it == nrows.end() ? Rational(0) : it->second;
            l1 += abs(mp - np);
            if (it != nrows.end()) nu_mass += np;
        }
        for (const auto& [k, np] : nrows)
            if (mrows.find(k) == mrows.end()) {
                l1 += np;
                nu_mass += np;
            }
        result += mu_b * (l1 + 1 - nu_mass) / 2;
    }
    return result;
}

//======================================================================
// Monte Carlo simulation of the no-communication first round
//======================================================================

TauResult simulate_tau(const JointLaw& law, int block, long long trials, uint64_t seed) {
    if (block < 0 || block >= law.p) throw OutOfRange("block out of range");
    NuTables nt = build_nu_tables(law, block);
    TauResult res;
    res.trials = trials;
    Rng rng(seed);

    auto draw = [&](const CondRow& row) -> const Key& {
        std::uniform_int_distribution<uint64_t> d(0, row.total - 1);
        uint64_t x = d(rng.gen);
        for (const auto& [val, w] : row.vals) {
            if (x < w) return val;
            x -= w;
        }
        return row.vals.back().first;
    };

    std::vector<int> mcodes(law.slots, -1);
    std::vector<long long> tus(law.block_size, 0);
    for (long long trial = 0; trial < trials; ++trial) {
        const int sigma = rng.below(law.sigma_count);
        const long long b = rng.below(static_cast<int>(law.codes));
        bool aborted = false;
        std::fill(mcodes.begin(), mcodes.end(), -1);

        if (law.rounds >= 1) {
            const CondRow* rfirst = nt.first.find({sigma});
            const Key& m1 = draw(*rfirst);  // every sigma has mass
            mcodes[law.slot(0, block)] = static_cast<int>(m1[0]);
            for (int o = 0; o < law.block_size && !aborted; ++o) {
                const CondRow* row = nt.tcoord[o].find({bu_raw(law, b, o), m1[0], (long long)sigma});
                if (!row) { aborted = true; break; }
                tus[o] = draw(*row)[0];
            }
            if (!aborted) {
                const CondRow* rrest = nt.first_rest.find({m1[0], (long long)sigma});
                if (!rrest) aborted = true;
                else {
                    const Key& vals = draw(*rrest);
                    int vi = 0;
                    for (int j = 0; j < law.p; ++j)
                        if (j != block) mcodes[law.slot(0, j)] = static_cast<int>(vals[vi++]);
                    Key kf;
                    for (int j = 0; j < law.p; ++j) kf.push_back(mcodes[law.slot(0, j)]);
                    kf.push_back(sigma);
                    const CondRow* rfool = nt.first_fool.find(kf);
                    if (!rfool) aborted = true;
                    else mcodes[law.slot(0, law.p)] = static_cast<int>(draw(*rfool)[0]);
                }
            }
        }

        // Later rounds: this block runs the real protocol on its real inputs,
        // everyone else is resampled from the mu-conditionals.
        for (int t = 2; t <= law.rounds && !aborted; ++t) {
            std::vector<int> mc(law.slots, 0);
            for (int s = 0; s < law.slots; ++s) mc[s] = std::max(0, mcodes[s]);
            Transcript prior = law.transcript_of(sigma, mc);
            prior.rounds.resize(t - 1);  // only completed rounds are visible
            std::vector<Bits> tup;
            for (int o = 0; o < law.block_size; ++o)
                tup.push_back(real_vertex_message(law, sigma, block, o, b, tus[o], prior, t));
            auto it = law.slot_lookup[law.slot(t - 1, block)].find(tup);
            if (it == law.slot_lookup[law.slot(t - 1, block)].end()) { aborted = true; break; }
            mcodes[law.slot(t - 1, block)] = it->second;
            Key kr;
            append_bb(law, mcodes, t - 1, kr);
            kr.push_back(it->second);
            kr.push_back(sigma);
            const CondRow* rrest = nt.rest[t].find(kr);
            if (!rrest) { aborted = true; break; }
            const Key& vals = draw(*rrest);
            int vi = 0;
            for (int j = 0; j < law.p; ++j)
                if (j != block) mcodes[law.slot(t - 1, j)] = static_cast<int>(vals[vi++]);
            Key kf;
            append_bb(law, mcodes, t - 1, kf);
            for (int j = 0; j < law.p; ++j) kf.push_back(mcodes[law.slot(t - 1, j)]);
            kf.push_back(sigma);
            const CondRow* rfool = nt.fool[t].find(kf);
            if (!rfool) { aborted = true; break; }
            mcodes[law.slot(t - 1, law.p)] = static_cast<int>(draw(*rfool)[0]);
        }

        if (aborted) {
            ++res.aborts;
            continue;
        }
        Output out = law.replay_output(sigma, mcodes);
        const int grade = law.grade_of_block(sigma, block, b, out);
        if (law.pr.variant == Variant::mis) res.hits += grade;
        res.score += grade;
    }
    return res;
}

//======================================================================
// Round-elimination audit
//======================================================================

AuditReport round_elim_audit(const JointLaw& law, AuditOptions opts) {
    AuditReport r;
    r.protocol = law.proto.name;
    r.variant = law.pr.variant;
    r.atoms = law.n_atoms;
    r.sigma_count = law.sigma_count;
    r.rounds = law.rounds;
    const int keff = law.proto.bandwidth;
    r.first_budget = first_round_budget(law.pr, keff);
    const bool mis = law.pr.variant == Variant::mis;
    const int max_grade = mis ? 1 : law.block_size / 2;
    const double tol = 1e-9;

    using boost::multiprecision::cpp_int;
    cpp_int delta_num = 0, half_num = 0;
    std::vector<cpp_int> ideal_num(law.p, 0);
    for (long long a = 0; a < law.n_atoms; ++a) {
        if (law.weight[a] == 0) continue;
        delta_num += cpp_int(law.weight[a]) * law.grade_global[a];
        for (int i = 0; i < law.p; ++i) {
            ideal_num[i] += cpp_int(law.weight[a]) * law.grade_block[a * law.p + i];
            if (mis && law.grade_global[a] && law.grade_block[a * law.p + i])
                half_num += law.weight[a];
        }
    }
    r.delta = Rational(delta_num) / law.denom;
    r.half_rate = mis ? Rational(half_num) / law.denom / law.p : Rational(0);
    r.slack = mis ? Rational(0) : Rational(1LL * law.pr.n0() * law.pr.f_at(1));

    r.leak_ok = true;
    r.product_ok = true;
    r.per_block_ok = true;
    r.product_gap_max = 0;
    Rational ideal_sum = 0, real_sum = 0, tv_sum = 0;

    for (int i = 0; i < law.p; ++i) {
        BlockAudit ba;
        ba.block = i;
        ba.mi_first = law.rounds >= 1 ? mi_first_round(law, i) : 0.0;
        double budget_sum = std::sqrt(std::max(0.0, ba.mi_first));
        bool leak = ba.mi_first <= r.first_budget + tol;
        double cum_F = 0.0;  // fooling leakage accumulates across rounds
        for (int t = 1; t <= law.rounds; ++t) {
            const double tp = mi_round_P(law, i, t), tf = mi_round_F(law, i, t);
            ba.term_P.push_back(tp);
            ba.term_F.push_back(tf);
            budget_sum += std::sqrt(std::max(0.0, tp)) + std::sqrt(std::max(0.0, tf));
            cum_F += tf;
            leak = leak && tp <= round_budget_P(law.pr, keff, law.rounds) + tol &&
                   cum_F <= round_budget_F(law.pr, keff, t) + tol;
        }
        ba.tv_budget = budget_sum;

        const Rational gap = fooling_product_gap(law, i);
        if (gap > r.product_gap_max) r.product_gap_max = gap;
        if (gap != 0) r.product_ok = false;

        NuLaw nu = build_nu(law, i);
        ba.nu_mass = nu.mass;
        ba.e_tvd = expected_tvd_mu_nu(law, nu);
        leak = leak && to_double(ba.e_tvd) <= ba.tv_budget + tol;
        ba.leak_ok = leak;
        if (!leak) r.leak_ok = false;

        ba.ideal = Rational(ideal_num[i]) / law.denom;
        ba.real = 0;
        for (const auto& atom : nu.atoms) {
            Output out = law.replay_output(atom.sigma, atom.m);
            ba.real += atom.prob * law.grade_of_block(atom.sigma, i, atom.b, out);
        }
        ba.embed_ok = ba.real >= ba.ideal - ba.e_tvd * max_grade;
        if (!ba.embed_ok) r.per_block_ok = false;

        if (opts.tau_trials > 0) {
            TauResult tr = simulate_tau(law, i, opts.tau_trials, opts.tau_seed + i);
            const double mean = static_cast<double>(mis ? tr.hits : tr.score) / tr.trials;
            ba.tau_mean = mean;
            const double expect = to_double(ba.real);
            const double sd = max_grade / (2.0 * std::sqrt(static_cast<double>(tr.trials)));
            ba.tau_ok = std::abs(mean - expect) <= opts.tau_sigmas * sd + 1e-12;
        }

        ideal_sum += ba.ideal;
        real_sum += ba.real;
        tv_sum += ba.e_tvd;
        r.blocks.push_back(std::move(ba));
    }

    r.ideal_avg = ideal_sum / law.p;
    r.real_avg = real_sum / law.p;
    r.tv_avg = tv_sum / law.p;
    if (mis) {
        r.guarantee = r.delta / 2 - r.tv_avg * max_grade;
        r.half_ok = r.half_rate >= r.delta / 2;
    } else {
        r.guarantee = (r.delta - r.slack) / law.p - r.tv_avg * max_grade;
        r.half_ok = r.ideal_avg >= (r.delta - r.slack) / law.p;
    }
    r.assembled_ok = r.real_avg >= r.guarantee;

    r.sum_info_ok = true;
    if (opts.sum_info) {
        for (int t = 1; t <= law.rounds; ++t) {
            SumInfoCheck c = check_sum_info(law, t);
            if (!c.holds) r.sum_info_ok = false;
            r.sum_info.push_back(std::move(c));
        }
    }

    r.best_block = 0;
    for (int i = 1; i < law.p; ++i)
        if (r.blocks[i].real > r.blocks[r.best_block].real) r.best_block = i;

    bool tau_all = true;
    for (const auto& b : r.blocks) tau_all = tau_all && b.tau_ok;
    r.passed = r.half_ok && r.per_block_ok && r.assembled_ok && r.leak_ok && r.product_ok &&
               r.sum_info_ok && tau_all;
    return r;
}

std::string audit_to_json(const AuditReport& r) {
    nlohmann::ordered_json j;
    j["protocol"] = r.protocol;
    j["variant"] = r.variant == Variant::mis ? "mis" : "apx";
    j["atoms"] = r.atoms;
    j["sigma_count"] = r.sigma_count;
    j["rounds"] = r.rounds;
    j["delta"] = rational_to_string(r.delta);
    if (r.variant == Variant::mis) j["half_rate"] = rational_to_string(r.half_rate);
    else j["slack"] = rational_to_string(r.slack);
    j["ideal_avg"] = rational_to_string(r.ideal_avg);
    j["real_avg"] = rational_to_string(r.real_avg);
    j["tv_avg"] = rational_to_string(r.tv_avg);
    j["guarantee"] = rational_to_string(r.guarantee);
    j["first_budget"] = r.first_budget;
    j["best_block"] = r.best_block;
    auto blocks = nlohmann::ordered_json::array();
    for (const auto& b : r.blocks) {
        nlohmann::ordered_json jb;
        jb["block"] = b.block;
        jb["mi_first"] = b.mi_first;
        jb["term_P"] = b.term_P;
        jb["term_F"] = b.term_F;
        jb["e_tvd"] = rational_to_string(b.e_tvd);
        jb["tv_budget"] = b.tv_budget;
        jb["nu_mass"] = rational_to_string(b.nu_mass);
        jb["ideal"] = rational_to_string(b.ideal);
        jb["real"] = rational_to_string(b.real);
        if (b.tau_mean >= 0) {
            jb["tau_mean"] = b.tau_mean;
            jb["tau_ok"] = b.tau_ok;
        }
        jb["leak_ok"] = b.leak_ok;
        jb["embed_ok"] = b.embed_ok;
        blocks.push_back(std::move(jb));
    }
    j["blocks"] = std::move(blocks);
    auto si = nlohmann::ordered_json::array();
    for (const auto& c : r.sum_info) {
        nlohmann::ordered_json jc;
        jc["t"] = c.t;
        jc["lhs"] = c.lhs;
        jc["rhs"] = c.rhs;
        jc["per_block"] = c.per_block;
        jc["holds"] = c.holds;
        si.push_back(std::move(jc));
    }
    j["sum_info"] = std::move(si);
    j["product_gap_max"] = rational_to_string(r.product_gap_max);
    j["checks"] = {{"half_ok", r.half_ok},
                   {"per_block_ok", r.per_block_ok},
                   {"assembled_ok", r.assembled_ok},
                   {"leak_ok", r.leak_ok},
                   {"product_ok", r.product_ok},
                   {"sum_info_ok", r.sum_info_ok},
                   {"passed", r.passed}};
    return j.dump(2);
}

} // namespace bbsim
