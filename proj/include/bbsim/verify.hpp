#pragma once
// Named verification suites over the whole stack: exhaustive base-case optima,
// structural checks on sampled instances, exact marginal/product-law checks of
// the enumerated joint distribution, leakage budgets, embedding faithfulness,
// protocol batteries (greedy independent set, random-cut wrapper), and the
// information-measure property suite.  Every check reports the measured value
// next to the budget it was compared against, so reports are auditable.

#include <cstdint>
#include <string>
#include <vector>

#include "bbsim/embedding.hpp"

namespace bbsim {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string value;   // what was measured
    std::string budget;  // what it was compared against
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;

    void add(const std::string& name, bool ok, const std::string& value,
             const std::string& budget);
    bool passed() const;
    int failed() const;
};

// One stress protocol, enumerated and audited once; the rectangle gaps are
// computed alongside so the product-law suite can reuse the enumeration.
struct StressAudit {
    std::string spec;
    Variant variant = Variant::mis;
    Params params;
    int k_eff = 0;  // the protocol's bandwidth (budgets scale with it)
    AuditReport report;
    Rational rect_gap0;  // blocks given sigma alone (0 by construction)
    Rational rect_gap1;  // blocks given sigma + round-1 blackboard
};

struct VerifyOptions {
    uint64_t seed = 1;
    long long tau_trials = 10000;  // Monte Carlo cross-check per block
    int structure_trials = 200;    // sampled instances per structural check
    int info_trials = 100;         // random distributions per information fact
    int threads = 0;               // enumeration threads (0 = hardware)
    SigmaMode sigma_mode = SigmaMode::blocks;
    // Narrowing for the enumeration suites: a single protocol spec instead of
    // the full stress list (run on protocol_variant), and/or explicit
    // parameter points instead of the toy defaults.
    std::string protocol;
    Variant protocol_variant = Variant::mis;
    std::optional<Params> mis_params, apx_params;
};

// The toy parameter points the enumeration suites run at by default.
Params toy_mis_params();  // k=1, r=1, fhat={1}, phat={2}: 10 vertices
Params toy_apx_params();  // k=2, r=1, fhat={1}, phat={2}: 11 vertices

// Stress protocol specs per variant.  The independent-set list covers silent,
// zero-round, full broadcast, the three parity adversaries, the two-round
// parity adversary, and truncated greedy at one and two phases; the matching
// list covers silent and the two distinct parity shapes.
std::vector<std::string> stress_specs(Variant v);

// Enumerates and audits every stress protocol once (or just opts.protocol).
std::vector<StressAudit> run_stress_audits(const VerifyOptions& opts);

// Individual suites.  The first three and the last three are self-contained;
// the middle three consume a shared run_stress_audits result.
SuiteReport suite_base_cases(const VerifyOptions& opts);
SuiteReport suite_structure(const VerifyOptions& opts);
SuiteReport suite_marginals(const VerifyOptions& opts);
SuiteReport suite_product(const std::vector<StressAudit>& audits);
SuiteReport suite_leakage(const std::vector<StressAudit>& audits);
SuiteReport suite_embedding_faithfulness(const std::vector<StressAudit>& audits);
SuiteReport suite_greedy_mis(const VerifyOptions& opts);
SuiteReport suite_bipartite(const VerifyOptions& opts);
SuiteReport suite_infotheory(const VerifyOptions& opts);

// Report serialization.  JSON is an object {"suites": [...], "passed": bool};
// CSV starts with the literal line "schema=1" followed by a header row.  Both
// are deterministic in the inputs (no timings, no environment data).
std::string reports_to_json(const std::vector<SuiteReport>& reports);
std::string reports_to_csv(const std::vector<SuiteReport>& reports);

} // namespace bbsim
