#pragma once
// Concrete protocol library: baselines (silent, zero-round, full broadcast),
// a blackboard variant of the classic randomized greedy independent-set
// algorithm, adversarial 1-bit parity protocols used as stress inputs for the
// leakage analysis, exhaustive zero-round optimal referees for the level-0
// distributions, and the random-cut wrapper that turns any bipartite matching
// protocol into a general-graph one.

#include <cstdint>
#include <string>
#include <utility>

#include "bbsim/infotheory.hpp"
#include "bbsim/model.hpp"
#include "bbsim/params.hpp"

namespace bbsim {

// Nobody ever speaks; the referee emits a fixed layout-derived output: every
// principal vertex (independent-set flavor), or the within-block pairing of
// position q with position q + size/2 (matching flavor).
Protocol make_silent(Variant v, int rounds);
Protocol make_zero_round(Variant v);

// Every vertex broadcasts its adjacency row (n bits); the referee rebuilds
// the graph and answers greedily by label order, so it always succeeds.
Protocol make_full_broadcast(Variant v, int n);

// Blackboard variant of the randomized greedy independent-set algorithm: one
// phase per round, a fresh public priority permutation per phase; an active
// vertex broadcasts (joined?, became inactive?) and joins when it beats every
// neighbor not yet known inactive.  Inactivity is learned from the previous
// round's blackboard, so the marker lags one round; overcounting active
// neighbors only delays joins and never breaks independence.  The referee
// outputs everyone who ever sent a join bit; if vertices are still active
// after max_phases the output is simply not maximal, which the validity
// oracle reports.
Protocol luby_blackboard(int max_phases);

enum class XorVariant { directed_round1, fooling_xor, symmetric_xor, two_round };

// 1-bit parity stress protocols.  Block roles are read from the public layout
// (LayoutRequired if absent).
//   directed_round1: public coins orient every edge; principal vertices send
//     the parity of their outgoing edges, fooling vertices the parity of
//     their incoming edges whose other endpoint lies in the target block.
//     XOR of the target block's bits and all fooling bits equals the parity
//     of the edges inside the target block.
//   fooling_xor: principal vertices stay silent; each fooling vertex sends
//     the parity of its principal-incident edges.
//   symmetric_xor: every vertex sends the parity of its principal<->fooling
//     incident edges.
//   two_round: round 1 = directed_round1, round 2 = symmetric_xor.
// The referee is the fixed output of make_silent (messages are adversarial
// noise, not useful signal).
Protocol xor_protocol(XorVariant xv, Variant v, int target_block = 0);

// Exhaustive zero-round optima for the level-0 distributions: the best fixed
// output and its exact success probability (independent set; maximum over all
// 2^(2k) vertex sets) or expected number of correct pairs (matching; maximum
// over all disjoint-pair families on 2k vertices).
std::pair<Output, Rational> best_zero_round_referee_mis(int k);  // k <= 4
std::pair<Output, Rational> best_zero_round_referee_apx(int k);  // k <= 6

// Runs p on the random cut subgraph: public coins assign every vertex a side
// z(v); each view is filtered to cross-cut neighbors before p sees it.  Same
// round count and bandwidth; referee passes through.
Protocol bipartite_wrapper(const Protocol& p);

// The side assignment the wrapper derives from the public coins (entry v is
// vertex v's side, 0 or 1); exported so the cut subgraph can be reproduced.
std::vector<int> bipartite_cut(const PublicCoins& pub, int n);

// Registry used by the command-line driver and the test suites.  Specs:
//   silent[:ROUNDS] | zero_round | broadcast | luby:PHASES |
//   xor:directed_round1[:TARGET] | xor:fooling_xor | xor:symmetric_xor |
//   xor:two_round[:TARGET] | bipartite:INNERSPEC
// `n` is the instance size (full broadcast needs it for its bandwidth).
Protocol make_protocol(const std::string& spec, Variant v, int n);

} // namespace bbsim
