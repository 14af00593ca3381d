#pragma once
// Shared-blackboard communication model.  n players sit on the vertices of a
// graph; in each synchronous round every player writes a bit string (length 0
// to bandwidth k) computed from its own view, everything already on the
// blackboard, public coins, and its private coins.  Messages within a round
// are simultaneous.  After the last round a referee maps the transcript to an
// output (an independent-set or a pairing claim); the referee never sees the
// graph.

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "bbsim/graph.hpp"
#include "bbsim/layout.hpp"
#include "bbsim/rng.hpp"

namespace bbsim {

using Bits = std::string;  // '0'/'1' characters, possibly empty

struct MisOutput {
    std::vector<int> vertices;  // sorted, unique
    bool operator==(const MisOutput&) const = default;
};
struct MatchingOutput {
    std::vector<Edge> pairs;  // each pair u<v, pairwise vertex-disjoint
    bool operator==(const MatchingOutput&) const = default;
};
using Output = std::variant<MisOutput, MatchingOutput>;

// Throws OutOfRange / NotDisjoint if the output is malformed for n vertices.
void validate_output(const Output& out, int n);

struct Transcript {
    // rounds[t][v] = message of vertex v in round t (0-based rounds)
    std::vector<std::vector<Bits>> rounds;

    int n_rounds() const { return static_cast<int>(rounds.size()); }
    int n_players() const { return rounds.empty() ? 0 : static_cast<int>(rounds[0].size()); }
    int max_bits() const;

    bool operator==(const Transcript&) const = default;
};

// JSON wire format: {"rounds": [{"messages": ["0110", ...]}, ...]}
std::string transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const std::string& text);

struct MsgCtx {
    int round = 0;             // 0-based
    const Transcript& prior;   // rounds [0, round) are complete
    const PublicCoins& pub;
    PrivateCoins priv;         // this vertex's private stream
    const BlockLayout* layout; // public layout handle, may be null
};

struct RefCtx {
    const PublicCoins& pub;
    const BlockLayout* layout;  // may be null
};

struct Protocol {
    std::string name;
    int rounds = 0;
    int bandwidth = 0;  // max bits a player may write per round
    std::function<Bits(const VertexView&, const MsgCtx&)> message;  // unused when rounds == 0
    std::function<Output(const Transcript&, const RefCtx&)> referee;
};

struct RunOptions {
    // When false (default), a too-long message throws BandwidthExceeded.
    // When true, the run records the violation and still reaches the referee.
    bool diagnostic = false;
};

struct RunResult {
    Transcript transcript;
    Output output;
    int max_bits = 0;
    std::vector<BandwidthExceeded> violations;  // nonempty only in diagnostic mode
};

// Seeded entry point: public and private coins are split from `seed` per the
// scheme in rng.hpp.  Two runs with equal (graph, layout, protocol, seed)
// produce identical transcripts and outputs.
RunResult run_protocol(const Graph& g, const BlockLayout* layout, const Protocol& p,
                       uint64_t seed, RunOptions opts = {});

// Same, but with the coin source pinned explicitly (enumeration fixes the
// public coins once per law; private streams replay from the same seed).
RunResult run_with_coins(const Graph& g, const BlockLayout* layout, const Protocol& p,
                         const PublicCoins& pub, RunOptions opts = {});

} // namespace bbsim
