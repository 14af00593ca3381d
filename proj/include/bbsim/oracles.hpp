#pragma once
// Ground-truth combinatorics, used to grade protocol outputs.  Everything here
// is exact; the exhaustive paths are deliberately independent of the protocol
// machinery so they can serve as oracles in tests.

#include <vector>

#include "bbsim/graph.hpp"
#include "bbsim/model.hpp"

namespace bbsim {

// s must be sorted/unique/in-range.  True iff s is independent and maximal.
bool is_mis(const Graph& g, const std::vector<int>& s);

// All maximal independent sets (Bron-Kerbosch with pivoting on the complement).
// Requires g.n <= 24; result is sorted canonically.
std::vector<std::vector<int>> enumerate_all_mis(const Graph& g);

// Maximum matching size.  The exhaustive path is a bitmask DP (g.n <= 24);
// the blossom path is an exact O(V^3) augmenting algorithm for any n.
// max_matching_size picks the DP for small n and blossom beyond.
int max_matching_size_exhaustive(const Graph& g);
int max_matching_size_blossom(const Graph& g);
int max_matching_size(const Graph& g);

struct MatchingScore {
    int valid_edges = 0;  // output pairs that are actual edges
    int total_pairs = 0;
};
// Validates disjointness (NotDisjoint) and counts pairs present in g.
MatchingScore matching_score(const Graph& g, const MatchingOutput& out);

// For the level-0 hard distribution on 2k vertices with fixed pairing
// (2i, 2i+1): the pairs entirely inside s.  For a valid MIS these are exactly
// the dropped pair-edges.
std::vector<Edge> decode_dropped_edges(int k, const std::vector<int>& s);

} // namespace bbsim
