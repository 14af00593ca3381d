// Acceptance gate: nine go/no-go criteria covering the exhaustive level-0
// optima, the sampled hard instances, the enumerated joint law, the leakage
// audit, the resampling simulation, the protocol baselines, and the
// information-measure library.  Prints one PASS/FAIL line per criterion with
// its wall-clock time; failing checks are listed underneath.  The exit status
// is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "bbsim/embedding.hpp"
#include "bbsim/protocols.hpp"
#include "bbsim/rng.hpp"
#include "bbsim/verify.hpp"

using namespace bbsim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// limit <= 0 means the criterion has no time cap of its own.
bool report(int num, const std::string& title, double limit, double elapsed,
            const std::vector<SuiteReport>& reps) {
    bool checks_ok = true;
    for (const auto& r : reps) checks_ok = checks_ok && r.passed();
    const bool in_time = limit <= 0 || elapsed <= limit;
    const bool ok = checks_ok && in_time;
    if (limit > 0)
        std::printf("[%d/9] %s %s [%.1fs <= %.0fs]\n", num, ok ? "PASS" : "FAIL", title.c_str(),
                    elapsed, limit);
    else
        std::printf("[%d/9] %s %s [%.1fs]\n", num, ok ? "PASS" : "FAIL", title.c_str(), elapsed);
    if (!in_time) std::printf("      time limit exceeded\n");
    for (const auto& r : reps)
        for (const auto& c : r.checks)
            if (!c.passed)
                std::printf("      FAIL %s: %s (want %s)\n", c.name.c_str(), c.value.c_str(),
                            c.budget.c_str());
    std::fflush(stdout);
    return ok;
}

SuiteReport filter_prefix(const SuiteReport& rep, const std::string& prefix) {
    SuiteReport out{rep.suite + " (" + prefix + ")", {}};
    for (const auto& c : rep.checks)
        if (c.name.rfind(prefix, 0) == 0) out.checks.push_back(c);
    return out;
}

// Direct product-form pass over the named stress protocols: the fooling
// coordinates of every block factor per vertex, and the blocks are mutually
// independent before any message is sent.
SuiteReport named_product_checks() {
    SuiteReport rep{"product-form (named protocols)", {}};
    const std::vector<std::string> specs = {"silent",          "broadcast",
                                            "xor:fooling_xor", "xor:directed_round1",
                                            "xor:symmetric_xor", "luby:1"};
    const Params pr = toy_mis_params();
    for (size_t idx = 0; idx < specs.size(); ++idx) {
        Protocol proto = make_protocol(specs[idx], Variant::mis, static_cast<int>(pr.n_at(1)));
        EnumOptions eo;
        eo.pub_seed = derive(1, 0xACC40000ULL + idx);
        JointLaw law = enumerate_joint(pr, proto, eo);
        Rational worst = 0;
        for (int i = 0; i < law.p; ++i) {
            const Rational g = fooling_product_gap(law, i);
            if (g > worst) worst = g;
        }
        rep.add(specs[idx] + ": per-vertex fooling factorization", worst == 0,
                rational_to_string(worst), "0");
        const Rational rg = rectangle_gap(law, 0);
        rep.add(specs[idx] + ": blocks independent before messages", rg == 0,
                rational_to_string(rg), "0");
    }
    return rep;
}

}  // namespace

int main() {
    const VerifyOptions vo;  // seed 1, 10000 simulation trials, toy counts
    int failed = 0;
    auto gate = [&](bool ok) { failed += ok ? 0 : 1; };

    {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport base = suite_base_cases(vo);
        double el = seconds_since(t0);
        gate(report(1, "level-0 independent-set optima are exactly 2^-k (k=1..4)", 5, el,
                    {filter_prefix(base, "independent-set")}));
        gate(report(2, "level-0 matching optima are exactly 1/k with hardness ratio >= k (k=1..3)",
                    30, el, {filter_prefix(base, "matching")}));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport rep = suite_structure(vo);
        gate(report(3, "sampled instances: every maximal independent set solves a half; "
                       "matching number meets the bound", 60, seconds_since(t0), {rep}));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport marg = suite_marginals(vo);
        SuiteReport prod = named_product_checks();
        gate(report(4, "block marginals equal the level-0 law and the joint law keeps "
                       "product form", 180, seconds_since(t0), {marg, prod}));
    }
    {
        // Criteria 5 and 6 audit the same enumerated laws; the shared cost is
        // charged to both so each limit stands on its own.
        auto t0 = std::chrono::steady_clock::now();
        std::vector<StressAudit> audits = run_stress_audits(vo);
        const double shared = seconds_since(t0);

        auto t5 = std::chrono::steady_clock::now();
        SuiteReport leak = suite_leakage(audits);
        gate(report(5, "per-round information leakage stays within the toy budgets", 300,
                    shared + seconds_since(t5), {leak}));

        auto t6 = std::chrono::steady_clock::now();
        SuiteReport embed = suite_embedding_faithfulness(audits);
        gate(report(6, "resampled transcripts meet the assembled distance budget and the "
                       "solve guarantee", 300, shared + seconds_since(t6), {embed}));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport rep = suite_greedy_mis(vo);
        gate(report(7, "greedy blackboard independent set: valid on every run, 2 bits, "
                       "quiesces within 8 log2 n phases", 0, seconds_since(t0), {rep}));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport rep = suite_bipartite(vo);
        gate(report(8, "random-cut wrapper keeps half the matching and the exact inner shape", 0,
                    seconds_since(t0), {rep}));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport rep = suite_infotheory(vo);
        gate(report(9, "information-measure property suite with counterexample fixtures", 0,
                    seconds_since(t0), {rep}));
    }

    if (failed == 0)
        std::printf("acceptance: all 9 criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", failed);
    return failed;
}
