#pragma once
// Exact joint law of a level-1 recursive instance together with a protocol's
// transcript, enumerated outcome by outcome under fixed public coins.
// Projections of the law feed the information measures; the per-block
// resampling law nu (assembled from marginal conditionals of the true law mu,
// exactly the factors a no-communication first round can realize) is compared
// against mu in exact arithmetic; the round-elimination audit turns the
// comparison into a solve-one-block guarantee.
//
// Coordinates of one outcome (an "atom"):
//   Sigma     role-to-slot assignment of the blocks (sigma_mode blocks), or
//             the identity layout
//   B_i       level-0 code of principal block i, uniform, independent
//   T_(i,o,j) fooling coordinate of block-i vertex offset o against same-side
//             fooling block j: 0 = no edge, 1+c = edge to co-vertex c, with
//             the exact visible law of one embedded level-0 instance
// The complete bipartite glue between the two fooling sides (independent-set
// variant) is a function of Sigma and carries no coordinate.  Messages are a
// function of the coordinates because the public coins are pinned; transcripts
// are stored as interned per-round per-block tuples.
//
// Projection variable grammar (i = block, o = vertex offset, t = 1-based round):
//   Sigma | B:i | Bu:i:o | T:i | Tu:i:o | G:i | Gu:i:o |
//   MP:t:i (round-t tuple of block i) | MPu:t:i:o | MF:t (round-t fooling
//   tuple) | Grade (referee result: independent-set validity 0/1, or number
//   of correct pairs) | GradeB:i (the same restricted to block i vs code B_i)

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bbsim/distributions.hpp"
#include "bbsim/infotheory.hpp"
#include "bbsim/model.hpp"
#include "bbsim/params.hpp"

namespace bbsim {

struct EnumOptions {
    SigmaMode sigma_mode = SigmaMode::blocks;
    uint64_t pub_seed = 0;     // public coins pinned for every atom
    int threads = 0;           // 0 = hardware concurrency
    long long atom_cap = 1LL << 26;  // TooLarge beyond this many atoms
};

struct JointLaw {
    Params pr;
    Protocol proto;
    EnumOptions opts;

    // Structure constants (level-1 instance).
    int p = 0;           // principal blocks
    int fblocks = 0;     // fooling blocks
    int block_size = 0;  // n_0 = 2k
    int fool_size = 0;   // n_0 - 1
    int n = 0;           // vertices
    int rounds = 0;      // protocol rounds
    int slots = 0;       // rounds * (p + 1): message groups (blocks, then F)
    long long codes = 0; // level-0 codes per block
    FoolingLaw tlaw;     // per-coordinate fooling law
    int tc_per_vertex = 0;  // same-side fooling blocks per principal vertex
    int sigma_count = 0;
    long long n_atoms = 0;
    long long bpow = 1, tpow = 1;  // mixed-radix strides: codes^p and n_0^|T|
    Rational denom;      // global denominator D; atom probability = weight/D

    BlockLayout canon;                 // canonical pre-permutation layout
    std::vector<BlockLayout> layouts;  // sigma index -> public layout
    std::vector<Graph> level0_graphs;  // level-0 instance per code

    struct TCoord { int block, offset, fool; };
    std::vector<TCoord> tcoords;       // sorted by (block, offset, fool)
    std::vector<int> block_tstart;     // per block, first index into tcoords (+sentinel)

    // Columns, one entry per atom (message codes: slots entries per atom).
    std::vector<uint64_t> weight;
    std::vector<uint32_t> mcol;
    std::vector<uint8_t> grade_global, grade_block;  // grade_block: p per atom

    // Interned message tuples: slot s = t*(p+1)+g, g in [0,p) a block, g = p
    // the fooling group; tuples list vertex messages in role-offset order.
    std::vector<std::vector<std::vector<Bits>>> slot_tuples;
    std::vector<std::map<std::vector<Bits>, int>> slot_lookup;
    std::vector<Bits> vmsg;            // single-message intern pool
    std::map<Bits, int> vmsg_lookup;

    // ---- atom coordinate decoding (mixed radix over the atom index) ----
    int sigma_of(long long a) const;
    long long bcode_of(long long a, int block) const;
    int tval_of(long long a, int coord) const;
    // Inverse: the atom index holding these coordinates.
    long long index_of(int sigma, const std::vector<long long>& b,
                       const std::vector<int>& t) const;

    int slot(int t0, int group) const { return t0 * (p + 1) + group; }
    int mcode_of(long long a, int t0, int group) const {
        return static_cast<int>(mcol[a * slots + slot(t0, group)]);
    }
    Rational atom_prob(long long a) const { return Rational(weight[a]) / denom; }

    // Graph on public labels for given coordinates (the biclique glue is added
    // automatically for the independent-set variant).
    Graph assemble(int sigma, const std::vector<long long>& b,
                   const std::vector<int>& t) const;
    int find_sigma(const BlockLayout& lay) const;  // OutOfRange if absent

    // Referee replay from interned tuples (used for resampled transcripts).
    Transcript transcript_of(int sigma, const std::vector<int>& mcodes) const;
    Output replay_output(int sigma, const std::vector<int>& mcodes) const;

    // Block grades shared by enumeration and the resampling audit.
    int grade_of_block(int sigma, int block, long long code, const Output& out) const;
    int grade_of_output(long long a, const Output& out) const;  // needs full atom

    long long raw_value(const std::string& var, long long a) const;
    DiscreteDist project(const std::vector<std::string>& vars) const;

    // All blackboard variable names of rounds 1..upto (inclusive, 1-based).
    std::vector<std::string> blackboard_vars(int upto) const;
};

// Enumerates every outcome of the level-1 joint experiment (pr.r must be 1)
// and runs the protocol on each.  Throws TooLarge past opts.atom_cap,
// NondeterministicProtocol if a replayed atom changes its transcript.
JointLaw enumerate_joint(const Params& pr, const Protocol& proto, EnumOptions opts = {});

//======================================================================
// Information quantities and their toy budgets
//======================================================================

// I(M^1_{P,i} ; B_i | Sigma) in bits.
double mi_first_round(const JointLaw& law, int block);
// I(M^t_{P,-i} ; G_i | M^{<t}, M^t_{P,i}, Sigma); exactly 0 at t = 1.
double mi_round_P(const JointLaw& law, int block, int t);
// I(M^t_F ; G_i | M^{<t}, M^t_P, Sigma).
double mi_round_F(const JointLaw& law, int block, int t);

// Toy-scale budgets (the full-scale analogues shrink with the counts; at toy
// counts they are sanity ceilings, documented in the README):
//   first round:      n_0 * k_eff / fhat_1
//   round t, blocks:  k_eff * n_0 * f_1 * rounds / p_1       (loose stand-in)
//   round t, fooling: k_eff * (n_0 - 1) * f_1 * t / p_1      (cumulative: the
//     audit checks sum_{s<=t} term_F(s) <= round_budget_F(t) per block)
double first_round_budget(const Params& pr, int k_eff);
double round_budget_P(const Params& pr, int k_eff, int rounds);
double round_budget_F(const Params& pr, int k_eff, int t);

// Subadditivity of the blackboard information about the blocks:
//   I(M^{<=t}_P ; G | M^{<t}_F, Sigma) <= sum_i I(M^{<t}_P, M^t_{P,i} ; G_i | M^{<t}_F, Sigma)
struct SumInfoCheck {
    int t = 0;
    double lhs = 0, rhs = 0;
    std::vector<double> per_block;
    bool holds = false;  // lhs <= rhs + tolerance
};
SumInfoCheck check_sum_info(const JointLaw& law, int t, double tol = 1e-9);

//======================================================================
// Product-form checks (exact)
//======================================================================

// E over assignments of `group` of TV( joint(vals | group) ,
//   prod_o marginal(val_o | shared + keys_o) ); d must contain every named
// variable.  Zero iff the coordinates are conditionally independent AND each
// depends on the group only through its own keys.
Rational expected_product_gap(
    const DiscreteDist& d, const std::vector<std::string>& group,
    const std::vector<std::string>& shared,
    const std::vector<std::pair<std::vector<std::string>, std::string>>& coords);

// The fooling coordinates of one block given (Sigma, M^1_{P,i}, B_i) factor
// into per-vertex terms keyed by Bu only; exactly 0 for every protocol.
Rational fooling_product_gap(const JointLaw& law, int block);

// TV between the joint conditional of (G_1..G_p | blackboard rounds <= t,
// Sigma) and the product of per-block conditionals; 0 iff the blackboard
// keeps the blocks independent (it does unless messages mix blocks).
Rational rectangle_gap(const JointLaw& law, int t);

//======================================================================
// Per-block resampling law nu and the Monte Carlo simulation
//======================================================================

struct NuAtom {
    int sigma = 0;
    long long b = 0;          // this block's code
    std::vector<int> m;       // message code per slot
    Rational prob;
};
struct NuLaw {
    int block = 0;
    std::vector<NuAtom> atoms;  // grouped by (sigma, b, m); T summed out
    Rational mass;              // <= 1; the deficit is the abort probability
};
// Chain product of mu-conditionals per the simulation's factorization;
// conditioning tuples that mu never realizes abort (prune to the deficit).
NuLaw build_nu(const JointLaw& law, int block);

// E_{B_i}[ TV( mu(M, Sigma | B_i) , nu(M, Sigma | B_i) ) ], exact; nu's
// missing conditional mass counts as disagreement.
Rational expected_tvd_mu_nu(const JointLaw& law, const NuLaw& nu);

// Monte Carlo run of the simulation itself: public layout and block code are
// drawn, round 1 is sampled from the mu-conditional tables with no
// communication, later rounds run the real protocol for this block's vertices
// and resample everyone else.  Aborts count as failures.
struct TauResult {
    long long trials = 0, aborts = 0;
    long long hits = 0;   // independent-set variant: block solved
    long long score = 0;  // matching variant: correct within-block pairs
};
TauResult simulate_tau(const JointLaw& law, int block, long long trials, uint64_t seed);

//======================================================================
// Round-elimination audit
//======================================================================

struct BlockAudit {
    int block = 0;
    double mi_first = 0;
    std::vector<double> term_P, term_F;     // per round
    Rational e_tvd;                          // exact
    double tv_budget = 0;                    // sqrt assembly of the MI terms
    Rational nu_mass;
    Rational ideal;  // mu: Pr[block solved] / E[correct pairs in block]
    Rational real;   // nu: the same under the resampled law
    double tau_mean = -1;   // Monte Carlo estimate of `real` (when requested)
    bool tau_ok = true;
    bool leak_ok = false;   // MI terms within budgets, e_tvd within tv_budget
    bool embed_ok = false;  // real >= ideal - e_tvd * max_grade
};

struct AuditReport {
    std::string protocol;
    Variant variant = Variant::mis;
    long long atoms = 0;
    int sigma_count = 0, rounds = 0;
    double first_budget = 0;

    Rational delta;      // Pr[output valid] / E[correct pairs]
    Rational half_rate;  // E_i Pr[valid AND block i solved] (independent set)
    Rational slack;      // matching: fooling-incident pair allowance
    Rational ideal_avg, real_avg, tv_avg;
    Rational guarantee;  // delta/2 - tv_avg, or (delta - slack)/p - tv_avg*k

    std::vector<BlockAudit> blocks;
    std::vector<SumInfoCheck> sum_info;
    Rational product_gap_max;

    int best_block = 0;        // argmax real
    bool half_ok = false;      // E_i[ideal joint] >= delta/2 (mis) / slack bound (apx)
    bool per_block_ok = false; // real_i >= ideal_i - e_tvd_i * max_grade for all i
    bool assembled_ok = false; // real_avg >= guarantee
    bool leak_ok = false, product_ok = false, sum_info_ok = false;
    bool passed = false;
};

struct AuditOptions {
    bool sum_info = true;
    long long tau_trials = 0;  // 0 = skip the Monte Carlo cross-check
    uint64_t tau_seed = 1;
    double tau_sigmas = 3.0;   // allowed deviation in binomial sigmas
};
AuditReport round_elim_audit(const JointLaw& law, AuditOptions opts = {});

std::string audit_to_json(const AuditReport& r);

} // namespace bbsim
