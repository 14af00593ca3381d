#include "bbsim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bbsim/distributions.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/oracles.hpp"
#include "bbsim/protocols.hpp"

namespace bbsim {

namespace {

std::string rstr(const Rational& r) { return rational_to_string(r); }

std::string dstr(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string istr(long long v) { return std::to_string(v); }

constexpr double kTol = 1e-9;

}  // namespace

//======================================================================
// Report plumbing
//======================================================================

void SuiteReport::add(const std::string& name, bool ok, const std::string& value,
                      const std::string& budget) {
    checks.push_back({name, ok, value, budget});
}

bool SuiteReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

int SuiteReport::failed() const {
    int n = 0;
    for (const auto& c : checks) n += c.passed ? 0 : 1;
    return n;
}

Params toy_mis_params() { return make_params(1, 1, Variant::mis, ToyCounts{{1}, {2}}); }
Params toy_apx_params() { return make_params(2, 1, Variant::apx, ToyCounts{{1}, {2}}); }

std::vector<std::string> stress_specs(Variant v) {
    if (v == Variant::mis)
        return {"silent",          "zero_round",        "broadcast",
                "xor:fooling_xor", "xor:directed_round1", "xor:symmetric_xor",
                "luby:1",          "luby:2",            "xor:two_round"};
    return {"silent", "xor:fooling_xor", "xor:directed_round1"};
}

std::vector<StressAudit> run_stress_audits(const VerifyOptions& opts) {
    struct Item {
        Variant v;
        Params pr;
        std::string spec;
    };
    std::vector<Item> items;
    const Params mp = opts.mis_params ? *opts.mis_params : toy_mis_params();
    const Params ap = opts.apx_params ? *opts.apx_params : toy_apx_params();
    if (!opts.protocol.empty()) {
        items.push_back({opts.protocol_variant,
                         opts.protocol_variant == Variant::mis ? mp : ap, opts.protocol});
    } else {
        for (const auto& s : stress_specs(Variant::mis)) items.push_back({Variant::mis, mp, s});
        for (const auto& s : stress_specs(Variant::apx)) items.push_back({Variant::apx, ap, s});
    }

    std::vector<StressAudit> out;
    for (size_t idx = 0; idx < items.size(); ++idx) {
        const Item& it = items[idx];
        Protocol proto = make_protocol(it.spec, it.v, static_cast<int>(it.pr.n_at(it.pr.r)));
        EnumOptions eo;
        eo.sigma_mode = opts.sigma_mode;
        eo.threads = opts.threads;
        eo.pub_seed = derive(opts.seed, 0xC0135EEDULL + idx);
        JointLaw law = enumerate_joint(it.pr, proto, eo);

        AuditOptions ao;
        ao.sum_info = true;
        ao.tau_trials = opts.tau_trials;
        ao.tau_seed = derive(opts.seed, 0x7461750ULL + idx);
        StressAudit sa;
        sa.spec = it.spec;
        sa.variant = it.v;
        sa.params = it.pr;
        sa.k_eff = proto.bandwidth;
        sa.report = round_elim_audit(law, ao);
        sa.rect_gap0 = rectangle_gap(law, 0);
        sa.rect_gap1 = law.rounds >= 1 ? rectangle_gap(law, 1) : sa.rect_gap0;
        out.push_back(std::move(sa));
    }
    return out;
}

//======================================================================
// Base cases: exhaustive level-0 optima
//======================================================================

SuiteReport suite_base_cases(const VerifyOptions&) {
    SuiteReport rep{"base-cases", {}};

    for (int k = 1; k <= 4; ++k) {
        auto [out, p] = best_zero_round_referee_mis(k);
        const Rational want(1, 1LL << k);
        rep.add("independent-set level-0 optimum k=" + istr(k), p == want, rstr(p), rstr(want));

        // Replay the reported output against every code independently.
        const auto& s = std::get<MisOutput>(out).vertices;
        Rational replay = 0;
        for (long long code = 0; code < (1LL << k); ++code)
            if (is_mis(mis_hard0_graph(k, code), s)) replay += Rational(1, 1LL << k);
        rep.add("independent-set level-0 optimum replay k=" + istr(k), replay == p, rstr(replay),
                rstr(p));
    }

    for (int k = 1; k <= 3; ++k) {
        auto [out, p] = best_zero_round_referee_apx(k);
        const Rational want(1, k);
        rep.add("matching level-0 optimum k=" + istr(k), p == want, rstr(p), rstr(want));
        // Any optimum above 1/k would contradict the distribution analysis.
        rep.add("matching level-0 optimum not above 1/k, k=" + istr(k), p <= want, rstr(p),
                "<= " + rstr(want));
        // mu(G) = 1 for every single-edge instance, so the hardness ratio
        // mu / E[correct pairs] must be at least k exactly.
        const Rational ratio = p == 0 ? Rational(0) : Rational(1) / p;
        rep.add("matching level-0 ratio k=" + istr(k), p != 0 && ratio >= k, rstr(ratio),
                ">= " + istr(k));

        const auto& mo = std::get<MatchingOutput>(out);
        Rational replay = 0;
        for (long long code = 0; code < 1LL * k * k; ++code) {
            MatchingScore sc = matching_score(apx_hard0_graph(k, code), mo);
            replay += Rational(sc.valid_edges, 1LL * k * k);
        }
        rep.add("matching level-0 optimum replay k=" + istr(k), replay == p, rstr(replay), rstr(p));
    }
    return rep;
}

//======================================================================
// Structure: sampled instances against the combinatorial oracles
//======================================================================

SuiteReport suite_structure(const VerifyOptions& opts) {
    SuiteReport rep{"structure", {}};
    const Params mp = opts.mis_params ? *opts.mis_params : toy_mis_params();
    const Params ap = opts.apx_params ? *opts.apx_params : toy_apx_params();

    long long neither = 0, sets = 0;
    for (int i = 0; i < opts.structure_trials; ++i) {
        Instance inst = sample_mis_hard(mp, derive(opts.seed, 0x53545200ULL + i));
        for (const auto& s : enumerate_all_mis(inst.graph)) {
            ++sets;
            if (verify_solve_half(inst, s) == HalfResult::neither) ++neither;
        }
    }
    rep.add("every maximal independent set solves a half (" + istr(opts.structure_trials) +
                " instances, " + istr(sets) + " sets)",
            neither == 0, istr(neither) + " misses", "0 misses");

    const Rational bound = matching_size_bound(ap);
    int min_mm = -1;
    bool all_ok = true;
    for (int i = 0; i < opts.structure_trials; ++i) {
        Instance inst = sample_apx_hard(ap, derive(opts.seed, 0x41505800ULL + i));
        const int mm = max_matching_size(inst.graph);
        if (min_mm < 0 || mm < min_mm) min_mm = mm;
        if (Rational(mm) < bound) all_ok = false;
    }
    rep.add("matching number meets the distribution bound (" + istr(opts.structure_trials) +
                " instances)",
            all_ok, "min " + istr(min_mm), ">= " + rstr(bound));
    return rep;
}

//======================================================================
// Marginals of the enumerated joint law
//======================================================================

namespace {

// All atoms of a one-variable projection equal 1/want_count, and there are
// exactly want_count of them.
bool uniform_marginal(const JointLaw& law, const std::string& var, long long want_count,
                      Rational* worst) {
    DiscreteDist d = law.project({var});
    if (static_cast<long long>(d.atoms.size()) != want_count) {
        *worst = -1;
        return false;
    }
    const Rational want(1, want_count);
    bool ok = true;
    for (const auto& [_, pr] : d.atoms) {
        if (pr != want) ok = false;
        if (abs(pr - want) > abs(*worst)) *worst = pr - want;
    }
    return ok;
}

void marginal_checks(SuiteReport& rep, const VerifyOptions& opts, const Params& pr,
                     const char* tag, uint64_t salt) {
    Protocol proto = make_protocol("silent", pr.variant, static_cast<int>(pr.n_at(pr.r)));
    EnumOptions eo;
    eo.sigma_mode = opts.sigma_mode;
    eo.threads = opts.threads;
    eo.pub_seed = derive(opts.seed, salt);
    JointLaw law = enumerate_joint(pr, proto, eo);

    Rational worst = 0;
    bool ok = uniform_marginal(law, "Sigma", law.sigma_count, &worst);
    rep.add(std::string(tag) + ": public assignment marginal uniform", ok,
            "max deviation " + rstr(worst), "0");

    worst = 0;
    ok = true;
    for (int i = 0; i < law.p; ++i)
        ok = uniform_marginal(law, "B:" + istr(i), law.codes, &worst) && ok;
    rep.add(std::string(tag) + ": block code marginals match the level-0 law (" + istr(law.p) +
                " blocks x " + istr(law.codes) + " codes)",
            ok, "max deviation " + rstr(worst), "0");

    // Per-coordinate fooling marginal against the independently derived
    // visible law (one same-side fooling block per vertex at these counts).
    const FoolingLaw fl = fooling_visible_law(pr.k, pr.variant);
    worst = 0;
    ok = law.tc_per_vertex == 1;
    long long coords = 0;
    for (int i = 0; ok && i < law.p; ++i) {
        for (int o = 0; o < law.block_size; ++o) {
            DiscreteDist d = law.project({"Tu:" + istr(i) + ":" + istr(o)});
            if (static_cast<long long>(d.card[0]) > law.block_size) ok = false;
            for (long long val = 0; val < law.block_size; ++val) {
                const Rational want(fl.num[val], fl.den);
                const Rational got = d.prob_of({static_cast<int>(val)});
                // Dense ids are sorted raw values; full support keeps them equal.
                if (got != want) ok = false;
                if (abs(got - want) > abs(worst)) worst = got - want;
            }
            ++coords;
        }
    }
    rep.add(std::string(tag) + ": fooling coordinate marginals match the visible law (" +
                istr(coords) + " coordinates)",
            ok, "max deviation " + rstr(worst), "0");

    // Assignment independent of each block content, blocks independent of
    // each other given the assignment, and the atom count is the full product.
    Rational gap = 0;
    for (int i = 0; i < law.p; ++i) {
        DiscreteDist d = law.project({"Sigma", "G:" + istr(i)});
        const Rational g = expected_product_gap(d, {}, {}, {{{}, "Sigma"}, {{}, "G:" + istr(i)}});
        if (g > gap) gap = g;
    }
    rep.add(std::string(tag) + ": assignment independent of every block", gap == 0, rstr(gap), "0");

    const Rational rect = rectangle_gap(law, 0);
    rep.add(std::string(tag) + ": blocks independent given the assignment", rect == 0, rstr(rect),
            "0");

    long long want_atoms = law.sigma_count;
    for (int i = 0; i < law.p; ++i) want_atoms *= law.codes;
    for (int i = 0; i < law.p * law.block_size * law.tc_per_vertex; ++i)
        want_atoms *= law.block_size;
    rep.add(std::string(tag) + ": atom count is the full outcome product",
            law.n_atoms == want_atoms, istr(law.n_atoms), istr(want_atoms));
}

}  // namespace

SuiteReport suite_marginals(const VerifyOptions& opts) {
    SuiteReport rep{"marginals", {}};
    const Params mp = opts.mis_params ? *opts.mis_params : toy_mis_params();
    const Params ap = opts.apx_params ? *opts.apx_params : toy_apx_params();
    marginal_checks(rep, opts, mp, "independent-set", 0x6d617267ULL);
    marginal_checks(rep, opts, ap, "matching", 0x6d617267ULL + 1);
    return rep;
}

//======================================================================
// Product-form checks across the stress protocols
//======================================================================

SuiteReport suite_product(const std::vector<StressAudit>& audits) {
    SuiteReport rep{"product", {}};
    for (const auto& sa : audits) {
        const std::string tag =
            std::string(sa.variant == Variant::mis ? "independent-set " : "matching ") + sa.spec;
        rep.add(tag + ": round-1 conditioning factorizes over fooling coordinates",
                sa.report.product_ok && sa.report.product_gap_max == 0,
                rstr(sa.report.product_gap_max), "0");
        rep.add(tag + ": blocks independent given the assignment", sa.rect_gap0 == 0,
                rstr(sa.rect_gap0), "0");

        // Round-1 rectangle structure where it is derivable: per-block
        // messages keep blocks independent; cross-block parities must not.
        // Exception: with size-1 fooling blocks every principal parity already
        // pins its one cross edge, so the fooling parities are redundant and
        // the symmetric variant leaves the blocks independent.
        const bool sym_redundant = sa.spec == "xor:symmetric_xor" && sa.params.n0() == 2;
        bool expect_zero = sa.spec == "silent" || sa.spec == "zero_round" ||
                           sa.spec == "broadcast" || sa.spec == "xor:directed_round1" ||
                           sym_redundant;
        bool expect_pos = sa.spec == "xor:fooling_xor" ||
                          (sa.spec == "xor:symmetric_xor" && !sym_redundant);
        if (expect_zero)
            rep.add(tag + ": blocks still independent given the round-1 blackboard",
                    sa.rect_gap1 == 0, rstr(sa.rect_gap1), "0");
        if (expect_pos)
            rep.add(tag + ": cross-block parity couples the blocks", sa.rect_gap1 > 0,
                    rstr(sa.rect_gap1), "> 0");
    }
    return rep;
}

//======================================================================
// Leakage: exact mutual information against the toy budgets
//======================================================================

SuiteReport suite_leakage(const std::vector<StressAudit>& audits) {
    SuiteReport rep{"leakage", {}};
    for (const auto& sa : audits) {
        const std::string tag =
            std::string(sa.variant == Variant::mis ? "independent-set " : "matching ") + sa.spec;
        const AuditReport& r = sa.report;

        double worst_first = 0;
        for (const auto& b : r.blocks) worst_first = std::max(worst_first, b.mi_first);
        rep.add(tag + ": first-round leakage per block", worst_first <= r.first_budget + kTol,
                dstr(worst_first), "<= " + dstr(r.first_budget));

        double worst_p = 0, worst_f = -1e18, budget_f_at_worst = 0;
        for (const auto& b : r.blocks) {
            double cum = 0;
            for (size_t t = 0; t < b.term_F.size(); ++t) {
                cum += b.term_F[t];
                const double budget = round_budget_F(sa.params, sa.k_eff, static_cast<int>(t) + 1);
                if (cum - budget > worst_f) {
                    worst_f = cum - budget;
                    budget_f_at_worst = budget;
                }
            }
            for (double tp : b.term_P) worst_p = std::max(worst_p, tp);
        }
        if (r.rounds >= 1) {
            rep.add(tag + ": cumulative fooling-message leakage per block", worst_f <= kTol,
                    dstr(worst_f + budget_f_at_worst), "<= " + dstr(budget_f_at_worst));
            const double bp = round_budget_P(sa.params, sa.k_eff, r.rounds);
            rep.add(tag + ": per-round block-message leakage", worst_p <= bp + kTol, dstr(worst_p),
                    "<= " + dstr(bp));
        }

        double worst_gap = -1e18;
        bool sum_ok = true;
        for (const auto& si : r.sum_info) {
            sum_ok = sum_ok && si.holds;
            worst_gap = std::max(worst_gap, si.lhs - si.rhs);
        }
        if (!r.sum_info.empty())
            rep.add(tag + ": blackboard information subadditive over blocks", sum_ok,
                    "max lhs-rhs " + dstr(worst_gap), "<= 0");
    }
    return rep;
}

//======================================================================
// Embedding faithfulness: resampled law vs the true law, plus Monte Carlo
//======================================================================

SuiteReport suite_embedding_faithfulness(const std::vector<StressAudit>& audits) {
    SuiteReport rep{"embedding-faithfulness", {}};
    for (const auto& sa : audits) {
        const std::string tag =
            std::string(sa.variant == Variant::mis ? "independent-set " : "matching ") + sa.spec;
        const AuditReport& r = sa.report;

        Rational worst_tv = 0;
        double min_budget = 1e18;
        bool tv_ok = true, tau_ok = true;
        for (const auto& b : r.blocks) {
            if (b.e_tvd > worst_tv) worst_tv = b.e_tvd;
            min_budget = std::min(min_budget, b.tv_budget);
            if (to_double(b.e_tvd) > b.tv_budget + kTol) tv_ok = false;
            tau_ok = tau_ok && b.tau_ok;
        }
        rep.add(tag + ": resampling distance within the leakage budget", tv_ok,
                "max " + rstr(worst_tv), "<= min budget " + dstr(min_budget));

        if (sa.spec == "silent" || sa.spec == "zero_round") {
            bool exact = true;
            for (const auto& b : r.blocks) exact = exact && b.e_tvd == 0 && b.nu_mass == 1;
            rep.add(tag + ": no communication means zero resampling distance", exact,
                    rstr(worst_tv), "0 exactly");
        }

        rep.add(tag + ": Monte Carlo simulation agrees with the exact resampled law", tau_ok,
                tau_ok ? "all blocks within 3 sigma" : "some block outside 3 sigma",
                "3 sigma");
        rep.add(tag + ": per-block success transfers (real >= ideal - distance)", r.per_block_ok,
                "block " + istr(r.best_block) + " real " + rstr(r.blocks[r.best_block].real),
                "ideal " + rstr(r.blocks[r.best_block].ideal));
        rep.add(tag + ": solve-one-block guarantee assembled", r.assembled_ok, rstr(r.real_avg),
                ">= " + rstr(r.guarantee));
        rep.add(tag + ": half-solving rate supports the guarantee", r.half_ok, rstr(r.half_rate),
                sa.variant == Variant::mis ? ">= delta/2 = " + rstr(r.delta / 2)
                                           : ">= (delta - slack)/p");
        rep.add(tag + ": audit verdict", r.passed, r.passed ? "pass" : "fail", "pass");
    }
    return rep;
}

//======================================================================
// Greedy independent set battery
//======================================================================

SuiteReport suite_greedy_mis(const VerifyOptions& opts) {
    SuiteReport rep{"greedy-mis", {}};
    for (int n : {8, 16, 32, 64}) {
        int phases = 0;
        while ((1 << phases) < n) ++phases;  // log2(n) for powers of two
        phases *= 8;
        Protocol proto = luby_blackboard(phases);

        int valid = 0, quiesced = 0, max_bits = 0;
        for (int i = 0; i < 100; ++i) {
            Graph g = gnp_random_graph(n, 0.5, derive(opts.seed, 0x4C424700ULL + n * 1000 + i));
            RunResult rr = run_protocol(g, nullptr, proto, derive(opts.seed, n * 100 + i));
            if (is_mis(g, std::get<MisOutput>(rr.output).vertices)) ++valid;
            max_bits = std::max(max_bits, rr.max_bits);
            bool tail_silent = true;
            for (const auto& m : rr.transcript.rounds.back())
                if (!m.empty()) tail_silent = false;
            if (tail_silent) ++quiesced;
        }
        rep.add("greedy output is a maximal independent set, n=" + istr(n), valid == 100,
                istr(valid) + "/100", "100/100");
        rep.add("greedy stays within 2 bits per round, n=" + istr(n), max_bits <= 2,
                istr(max_bits) + " bits", "<= 2 bits");
        rep.add("greedy quiesces within 8*log2(n) phases, n=" + istr(n), quiesced >= 99,
                istr(quiesced) + "/100", ">= 99/100");
    }
    return rep;
}

//======================================================================
// Random-cut wrapper battery
//======================================================================

SuiteReport suite_bipartite(const VerifyOptions& opts) {
    SuiteReport rep{"bipartite", {}};
    const int kCoins = 2000;

    Rng pick(derive(opts.seed, 0xB1B1ULL));
    int graphs_ok = 0;
    double worst_margin = 1e18;
    for (int gi = 0; gi < 20; ++gi) {
        const int n = 4 + pick.below(9);  // 4..12
        Graph g = gnp_random_graph(n, 0.45, derive(opts.seed, 0xB17000ULL + gi));
        const int mu = max_matching_size(g);

        long long sum = 0, sumsq = 0;
        for (int s = 0; s < kCoins; ++s) {
            PublicCoins pub{derive(opts.seed, 0xC01B5ULL + gi * 10007ULL + s)};
            const std::vector<int> side = bipartite_cut(pub, g.n);
            std::vector<Edge> cross;
            for (const Edge& e : g.edges)
                if (side[e.first] != side[e.second]) cross.push_back(e);
            const int m2 = max_matching_size(Graph::from_edges(g.n, std::move(cross)));
            sum += m2;
            sumsq += 1LL * m2 * m2;
        }
        const double mean = static_cast<double>(sum) / kCoins;
        const double var =
            std::max(0.0, (static_cast<double>(sumsq) / kCoins - mean * mean)) * kCoins /
            (kCoins - 1);
        const double sem = std::sqrt(var / kCoins);
        const double floor = mu / 2.0 - 3.0 * sem;
        if (mean >= floor - 1e-12) ++graphs_ok;
        worst_margin = std::min(worst_margin, mean - floor);
    }
    rep.add("random cut keeps half the matching in expectation (20 graphs x " + istr(kCoins) +
                " cuts)",
            graphs_ok == 20, istr(graphs_ok) + "/20, worst margin " + dstr(worst_margin),
            "mean >= mu/2 - 3 sigma");

    // The wrapper must change nothing but the views: same declared shape, and
    // on any run the transcript equals the inner protocol's on the cut graph.
    Protocol inner = luby_blackboard(8);
    Protocol wrapped = bipartite_wrapper(inner);
    rep.add("wrapper keeps the declared round count and bandwidth",
            wrapped.rounds == inner.rounds && wrapped.bandwidth == inner.bandwidth,
            istr(wrapped.rounds) + " rounds, " + istr(wrapped.bandwidth) + " bits",
            istr(inner.rounds) + " rounds, " + istr(inner.bandwidth) + " bits");

    bool same = true;
    int wrapped_bits = 0, inner_bits = 0;
    for (int i = 0; i < 3 && same; ++i) {
        Graph g = gnp_random_graph(10, 0.5, derive(opts.seed, 0xB17B17ULL + i));
        PublicCoins pub{derive(opts.seed, 0x5EEDB17ULL + i)};
        const std::vector<int> side = bipartite_cut(pub, g.n);
        std::vector<Edge> cross;
        for (const Edge& e : g.edges)
            if (side[e.first] != side[e.second]) cross.push_back(e);
        Graph cut = Graph::from_edges(g.n, std::move(cross));

        RunResult a = run_with_coins(g, nullptr, wrapped, pub);
        RunResult b = run_with_coins(cut, nullptr, inner, pub);
        wrapped_bits = a.max_bits;
        inner_bits = b.max_bits;
        same = a.transcript == b.transcript && a.max_bits == b.max_bits;
    }
    rep.add("wrapped run equals the inner run on the cut graph (3 samples)", same,
            "wrapped " + istr(wrapped_bits) + " bits", "inner " + istr(inner_bits) + " bits");
    return rep;
}

//======================================================================
// Information-measure property suite
//======================================================================

namespace {

// Random joint over the given variables, integer atom weights 0..8.
DiscreteDist random_joint(Rng& rng, const std::vector<std::string>& vars,
                          const std::vector<int>& card, int min_weight = 0) {
    DiscreteDist d;
    d.vars = vars;
    d.card = card;
    long long total = 1;
    for (int c : card) total *= c;
    std::vector<long long> w(total);
    long long sum = 0;
    while (sum == 0) {
        sum = 0;
        for (auto& x : w) {
            x = min_weight + rng.below(9 - min_weight);
            sum += x;
        }
    }
    for (long long idx = 0; idx < total; ++idx) {
        if (w[idx] == 0) continue;
        std::vector<int> asgn(vars.size());
        long long rem = idx;
        for (int v = static_cast<int>(vars.size()) - 1; v >= 0; --v) {
            asgn[v] = static_cast<int>(rem % card[v]);
            rem /= card[v];
        }
        d.atoms[asgn] = Rational(w[idx], sum);
    }
    d.validate();
    return d;
}

Rational pr_of(const DiscreteDist& d, const std::vector<std::pair<std::string, int>>& asgn) {
    std::vector<int> key(d.vars.size(), 0);
    for (const auto& [name, val] : asgn) key[d.var_index(name)] = val;
    return d.prob_of(key);
}

// Exact conditional independence A independent of D given C.
bool indep_given(const DiscreteDist& dist, const std::string& A, const std::string& D,
                 const std::string& C) {
    DiscreteDist d = dist.marginal({A, D, C});
    const int ca = d.card[d.var_index(A)], cd = d.card[d.var_index(D)],
              cc = d.card[d.var_index(C)];
    DiscreteDist mc = dist.marginal({C});
    DiscreteDist mac = dist.marginal({A, C});
    DiscreteDist mdc = dist.marginal({D, C});
    for (int c = 0; c < cc; ++c) {
        const Rational pc = pr_of(mc, {{C, c}});
        for (int a = 0; a < ca; ++a)
            for (int dd = 0; dd < cd; ++dd)
                if (pr_of(d, {{A, a}, {D, dd}, {C, c}}) * pc !=
                    pr_of(mac, {{A, a}, {C, c}}) * pr_of(mdc, {{D, dd}, {C, c}}))
                    return false;
    }
    return true;
}

// Layered construction with A, D conditionally independent given the anchor
// variables; B arbitrary given everything.  anchor_is_b controls whether the
// anchor includes B (premise of the information-decrease fact) or just C.
DiscreteDist premise_dist(Rng& rng, bool anchor_is_b) {
    auto weight4 = [&rng]() { return 1 + rng.below(4); };
    // Cards: everything binary keeps the atom table at 16 rows.
    long long wc[2], wa[2][2][2], wd[2][2][2], wb[2][2][2][2];
    for (auto& x : wc) x = weight4();
    for (auto& plane : wa)
        for (auto& row : plane)
            for (auto& x : row) x = weight4();
    for (auto& plane : wd)
        for (auto& row : plane)
            for (auto& x : row) x = weight4();
    for (auto& cube : wb)
        for (auto& plane : cube)
            for (auto& row : plane)
                for (auto& x : row) x = weight4();

    DiscreteDist d;
    d.vars = {"A", "B", "C", "D"};
    d.card = {2, 2, 2, 2};
    if (!anchor_is_b) {
        // P(C) P(A|C) P(D|C) P(B|A,C,D): A and D independent given C.
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int dd = 0; dd < 2; ++dd)
                    for (int b = 0; b < 2; ++b) {
                        Rational p(wc[c], wc[0] + wc[1]);
                        p *= Rational(wa[0][c][a], wa[0][c][0] + wa[0][c][1]);
                        p *= Rational(wd[0][c][dd], wd[0][c][0] + wd[0][c][1]);
                        p *= Rational(wb[a][c][dd][b], wb[a][c][dd][0] + wb[a][c][dd][1]);
                        d.atoms[{a, b, c, dd}] = p;
                    }
    } else {
        // P(B,C) P(A|B,C) P(D|B,C): A and D independent given (B,C).
        long long wbc_sum = 0;
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) wbc_sum += wb[0][0][b][c];
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int a = 0; a < 2; ++a)
                    for (int dd = 0; dd < 2; ++dd) {
                        Rational p(wb[0][0][b][c], wbc_sum);
                        p *= Rational(wa[b][c][a], wa[b][c][0] + wa[b][c][1]);
                        p *= Rational(wd[b][c][dd], wd[b][c][0] + wd[b][c][1]);
                        d.atoms[{a, b, c, dd}] += p;
                    }
    }
    d.validate();
    return d;
}

struct FactTracker {
    bool ok = true;
    double worst = -1e18;  // most positive violation of (measured - allowed)
    void feed(double violation) {
        worst = std::max(worst, violation);
        ok = ok && violation <= kTol;
    }
};

}  // namespace

SuiteReport suite_infotheory(const VerifyOptions& opts) {
    SuiteReport rep{"infotheory", {}};
    Rng rng(derive(opts.seed, 0x494E464FULL));
    const int T = opts.info_trials;

    FactTracker ent_bounds, cond_reduces, chain, subadd, mi_nonneg, mi_chain, dpi;
    FactTracker incr, decr;
    bool incr_premise = true, decr_premise = true;
    FactTracker kl_nonneg, pinsker;
    bool tv_range = true, tv_triangle = true, tv_marginal = true, tv_transfer = true;
    Rational worst_tv = 0;

    for (int trial = 0; trial < T; ++trial) {
        const int ca = 2 + rng.below(2), cb = 2 + rng.below(2), cc = 2 + rng.below(2);
        DiscreteDist d = random_joint(rng, {"A", "B", "C"}, {ca, cb, cc});

        const double ha = entropy(d, {"A"});
        ent_bounds.feed(-ha);
        ent_bounds.feed(ha - std::log2(static_cast<double>(ca)));
        cond_reduces.feed(entropy(d, {"A"}, {"B"}) - ha);
        chain.feed(std::abs(entropy(d, {"A", "B"}) - ha - entropy(d, {"B"}, {"A"})));
        subadd.feed(entropy(d, {"A", "B"}) - ha - entropy(d, {"B"}));
        mi_nonneg.feed(-mutual_info(d, {"A"}, {"B"}, {"C"}));
        mi_chain.feed(std::abs(mutual_info(d, {"A", "B"}, {"C"}) - mutual_info(d, {"A"}, {"C"}) -
                               mutual_info(d, {"B"}, {"C"}, {"A"})));

        // Deterministic post-processing of B cannot raise information about A.
        std::vector<int> f(cb);
        for (auto& x : f) x = rng.below(2);
        DiscreteDist dp;
        dp.vars = {"A", "B", "F"};
        dp.card = {ca, cb, 2};
        for (const auto& [asgn, p] : d.marginal({"A", "B"}).atoms)
            dp.atoms[{asgn[0], asgn[1], f[asgn[1]]}] += p;
        dp.validate();
        dpi.feed(mutual_info(dp, {"A"}, {"F"}) - mutual_info(dp, {"A"}, {"B"}));

        // Extra conditioning on a variable independent of A can only reveal
        // more about A; conditioning on one explained by (B,C) only less.
        DiscreteDist di = premise_dist(rng, false);
        incr_premise = incr_premise && indep_given(di, "A", "D", "C");
        incr.feed(mutual_info(di, {"A"}, {"B"}, {"C"}) -
                  mutual_info(di, {"A"}, {"B"}, {"C", "D"}));
        DiscreteDist dd = premise_dist(rng, true);
        decr.feed(mutual_info(dd, {"A"}, {"B"}, {"C", "D"}) -
                  mutual_info(dd, {"A"}, {"B"}, {"C"}));
        for (int b = 0; b < 2 && decr_premise; ++b) {
            DiscreteDist cond = dd.condition({{"B", b}});
            decr_premise = indep_given(cond, "A", "D", "C");
        }

        // Divergence and total variation facts on a shared support.
        DiscreteDist p = random_joint(rng, {"X", "Y"}, {3, 3}, 1);
        DiscreteDist q = random_joint(rng, {"X", "Y"}, {3, 3}, 1);
        DiscreteDist r2 = random_joint(rng, {"X", "Y"}, {3, 3}, 1);
        const double kl = kl_divergence(p, q);
        kl_nonneg.feed(-kl);
        const Rational tv = tvd(p, q);
        if (tv > worst_tv) worst_tv = tv;
        tv_range = tv_range && tv >= 0 && tv <= 1;
        tv_triangle = tv_triangle && tvd(p, r2) <= tv + tvd(q, r2);
        tv_marginal = tv_marginal && tvd(p.marginal({"X"}), q.marginal({"X"})) <= tv;
        pinsker.feed(to_double(tv) * to_double(tv) - 0.5 * std::log(2.0) * kl);

        // |E_p[X] - E_q[X]| <= 2 * tvd * max|X| for a random payoff table.
        std::map<std::vector<int>, long long> payoff;
        long long payoff_max = 0;
        Rational ep = 0, eq = 0;
        for (const auto& [asgn, mass] : p.atoms) {
            const long long x = rng.below(7);
            payoff[asgn] = x;
            payoff_max = std::max(payoff_max, x);
            ep += mass * x;
        }
        for (const auto& [asgn, mass] : q.atoms) eq += mass * payoff[asgn];
        tv_transfer = tv_transfer && abs(ep - eq) <= 2 * tv * payoff_max;
    }

    const std::string trials = " (" + istr(T) + " random distributions)";
    rep.add("entropy within [0, log2 of the domain]" + trials, ent_bounds.ok,
            "max violation " + dstr(ent_bounds.worst), "<= 0");
    rep.add("conditioning never raises entropy" + trials, cond_reduces.ok,
            "max violation " + dstr(cond_reduces.worst), "<= 0");
    rep.add("entropy chain rule" + trials, chain.ok, "max |gap| " + dstr(chain.worst),
            "<= " + dstr(kTol));
    rep.add("entropy subadditive" + trials, subadd.ok, "max violation " + dstr(subadd.worst),
            "<= 0");
    rep.add("conditional information nonnegative" + trials, mi_nonneg.ok,
            "max violation " + dstr(mi_nonneg.worst), "<= 0");
    rep.add("information chain rule" + trials, mi_chain.ok, "max |gap| " + dstr(mi_chain.worst),
            "<= " + dstr(kTol));
    rep.add("post-processing never raises information" + trials, dpi.ok,
            "max violation " + dstr(dpi.worst), "<= 0");
    rep.add("independent extra conditioning only reveals more" + trials, incr.ok && incr_premise,
            "max violation " + dstr(incr.worst), "<= 0, premise verified exactly");
    rep.add("explained extra conditioning only reveals less" + trials, decr.ok && decr_premise,
            "max violation " + dstr(decr.worst), "<= 0, premise verified exactly");
    rep.add("divergence nonnegative" + trials, kl_nonneg.ok,
            "max violation " + dstr(kl_nonneg.worst), "<= 0");
    rep.add("total variation within [0, 1], exact" + trials, tv_range, "max " + rstr(worst_tv),
            "[0, 1]");
    rep.add("total variation triangle inequality, exact" + trials, tv_triangle, "all hold",
            "exact");
    rep.add("marginals contract total variation, exact" + trials, tv_marginal, "all hold",
            "exact");
    rep.add("quadratic divergence bound on total variation" + trials, pinsker.ok,
            "max violation " + dstr(pinsker.worst), "<= 0");
    rep.add("expectation transfer bound, exact" + trials, tv_transfer, "all hold", "exact");

    // Fixtures that violate the premises must break the conclusions: the
    // propositions are not vacuously monotone in the conditioning set.
    {
        DiscreteDist d;
        d.vars = {"A", "B", "C", "D"};
        d.card = {2, 2, 2, 2};
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) d.atoms[{x, x, y, x}] = Rational(1, 4);
        d.validate();
        const bool premise = indep_given(d, "A", "D", "C");
        const double with_d = mutual_info(d, {"A"}, {"B"}, {"C", "D"});
        const double without_d = mutual_info(d, {"A"}, {"B"}, {"C"});
        rep.add("fixture: dependent conditioning can destroy information",
                !premise && with_d < without_d - 0.5, dstr(without_d) + " -> " + dstr(with_d),
                "premise fails and information drops");
    }
    {
        DiscreteDist d;
        d.vars = {"A", "B", "C", "D"};
        d.card = {2, 2, 2, 2};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) d.atoms[{a, b, c, a ^ b}] = Rational(1, 8);
        d.validate();
        bool premise = true;
        for (int b = 0; b < 2; ++b) premise = premise && indep_given(d.condition({{"B", b}}), "A", "D", "C");
        const double with_d = mutual_info(d, {"A"}, {"B"}, {"C", "D"});
        const double without_d = mutual_info(d, {"A"}, {"B"}, {"C"});
        rep.add("fixture: explained-away conditioning can create information",
                !premise && with_d > without_d + 0.5, dstr(without_d) + " -> " + dstr(with_d),
                "premise fails and information jumps");
    }
    return rep;
}

//======================================================================
// Serialization
//======================================================================

std::string reports_to_json(const std::vector<SuiteReport>& reports) {
    nlohmann::ordered_json root;
    auto suites = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& r : reports) {
        nlohmann::ordered_json js;
        js["suite"] = r.suite;
        js["passed"] = r.passed();
        auto checks = nlohmann::ordered_json::array();
        for (const auto& c : r.checks) {
            nlohmann::ordered_json jc;
            jc["name"] = c.name;
            jc["passed"] = c.passed;
            jc["value"] = c.value;
            jc["budget"] = c.budget;
            checks.push_back(std::move(jc));
        }
        js["checks"] = std::move(checks);
        all = all && r.passed();
        suites.push_back(std::move(js));
    }
    root["suites"] = std::move(suites);
    root["passed"] = all;
    return root.dump(2) + "\n";
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace

std::string reports_to_csv(const std::vector<SuiteReport>& reports) {
    std::string out = "schema=1\nsuite,check,passed,value,budget\n";
    for (const auto& r : reports)
        for (const auto& c : r.checks)
            out += csv_field(r.suite) + "," + csv_field(c.name) + "," +
                   (c.passed ? "true" : "false") + "," + csv_field(c.value) + "," +
                   csv_field(c.budget) + "\n";
    return out;
}

}  // namespace bbsim
