#pragma once
// Error taxonomy shared by all modules.  Everything derives from bbsim::Error
// so callers (and the CLI exit-code mapping) can catch one base type.

#include <stdexcept>
#include <string>

namespace bbsim {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A message exceeded the declared per-player per-round bit budget.
struct BandwidthExceeded : Error {
    int vertex = -1, round = -1, length = 0, budget = 0;
    BandwidthExceeded(int v, int t, int len, int k)
        : Error("bandwidth exceeded: vertex " + std::to_string(v) + " round " +
                std::to_string(t) + " sent " + std::to_string(len) +
                " bits, budget " + std::to_string(k)),
          vertex(v), round(t), length(len), budget(k) {}
};

// Requested work is beyond an enumeration/materialization cap.
struct TooLarge : Error { using Error::Error; };

// Integer count arithmetic left the 64-bit range, or counts are too large to
// ever materialize an instance (derived-counts recursion); callers switch to toy mode.
struct Overflow : Error { using Error::Error; };

// Bad argument (vertex id out of range, level out of range, ...).
struct OutOfRange : Error { using Error::Error; };

// Matching output re-used a vertex.
struct NotDisjoint : Error { using Error::Error; };

// Distribution ops: unknown variable name / incompatible supports.
struct UnknownVariable : Error { using Error::Error; };
struct SupportMismatch : Error { using Error::Error; };

// Conditioning on an event of probability zero.
struct ZeroProbabilityEvent : Error { using Error::Error; };

// A protocol needed the public block layout but none was attached to the run.
struct LayoutRequired : Error { using Error::Error; };

// Re-running a protocol on the same atom produced a different transcript.
struct NondeterministicProtocol : Error { using Error::Error; };

// CLI / suite configuration problems.
struct ConfigError : Error { using Error::Error; };

} // namespace bbsim
