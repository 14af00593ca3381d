#pragma once
// Samplers for the recursive hard distributions and their structural checks.
//
// Level 0 (independent set): 2k vertices, fixed pairing (2i, 2i+1), each pair
// edge dropped with probability 1/2.  Level 0 (matching): k+k vertices with a
// single uniformly chosen cross edge (U = 0..k-1, V = k..2k-1).
//
// A level-l half: phat_l principal blocks each holding an independent full
// level-(l-1) instance, fhat_l fooling blocks of n_{l-1}-1 vertices; for every
// principal vertex u and fooling block F_j an independent level-(l-1) instance
// is sampled on F_j + {u} with u at a uniformly random position (remaining
// positions filled by sorted F_j in order) and only u's incident edges kept.
//
// Full level-l instance: the independent-set variant glues two halves and adds
// the complete bipartite graph between the two fooling sides, then applies a
// public permutation sigma; the matching variant is a single half plus sigma.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbsim/graph.hpp"
#include "bbsim/layout.hpp"
#include "bbsim/params.hpp"

namespace bbsim {

enum class SigmaMode { full, blocks, identity };

enum class InstanceKind { mis_hard0, mis_half, mis_hard, apx_hard0, apx_hard };

struct Instance {
    InstanceKind kind = InstanceKind::mis_hard0;
    Params params;
    Graph graph;         // on public labels
    BlockLayout layout;  // public block structure + sigma

    // Provenance, in public labels, per principal block of the top level:
    std::vector<std::vector<Edge>> principal_edges;  // edges inside block i
    std::vector<std::vector<Edge>> fooling_edges;    // block-i vertex <-> fooling edges
    // Canonical content of block i when its sub-instance is level 0, else -1:
    // independent-set variant: bitmask of present pair edges; matching variant:
    // a*k+b for the cross edge (a, k+b).
    std::vector<long long> principal_code;
};

// Level-0 instance graphs by canonical code.
Graph mis_hard0_graph(int k, long long code);  // code: bit i => edge (2i,2i+1) present
Graph apx_hard0_graph(int k, long long code);  // code a*k+b => edge (a, k+b)

// Visible law of one fooling coordinate of a level-1 instance: the edge set a
// principal vertex u keeps from its instance on F_j + {u} is empty or a single
// edge to co-vertex c.  Returns numerators over `den` for outcomes
// [none, c=0, ..., c=n0-2].
struct FoolingLaw {
    std::vector<long long> num;  // size n0 (index 0 = none, 1+c = edge to c)
    long long den = 1;
};
FoolingLaw fooling_visible_law(int k, Variant variant);

// Canonical (pre-permutation) layout of a full level instance, and the layout
// under a role-to-slot assignment (sigma_mode = blocks): principal roles are
// permuted among the equal-size principal slots, fooling roles among fooling
// slots.  perm_p/perm_f map role index -> slot index.
BlockLayout canonical_layout(const Params& pr, int level);
BlockLayout blocks_layout(const Params& pr, int level, const std::vector<int>& perm_p,
                          const std::vector<int>& perm_f);

// Samplers.  All are deterministic in (params, seed); sigma_mode applies to
// the top-level sigma and recursively to embedded full instances.
Instance sample_mis_hard0(int k, uint64_t seed);
Instance sample_apx_hard0(int k, uint64_t seed);
Instance sample_mis_half(const Params& pr, int level, uint64_t seed,
                         SigmaMode mode = SigmaMode::full);
Instance sample_mis_hard(const Params& pr, uint64_t seed, SigmaMode mode = SigmaMode::full);
Instance sample_apx_hard(const Params& pr, uint64_t seed, SigmaMode mode = SigmaMode::full);

// Did s solve the left half, the right half, both, or neither?  s is checked
// as an independent-set answer against the induced subgraph on each side's
// principal labels.  Requires kind == mis_hard with level >= 1.
enum class HalfResult { U_holds, V_holds, both, neither };
HalfResult verify_solve_half(const Instance& inst, const std::vector<int>& s);

// JSON wire format (graph fields + layout + provenance).
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

const char* kind_name(InstanceKind k);
const char* sigma_mode_name(SigmaMode m);

} // namespace bbsim
