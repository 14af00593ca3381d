#pragma once
// Single-seed randomness with documented stream splitting.
//
// Every random quantity in a run is derived from one 64-bit seed.  A stream is
// keyed by a (role, index, round) triple hashed through splitmix64:
//   role PUBLIC (0)     -- coins every player and the referee can see
//   role VERTEX (1)     -- private coins of vertex v (index = v)
//   role HARNESS (2)    -- sampling decisions of the harness itself
// Distinct keys give independent-looking streams; the same (seed, key) always
// replays identically, which is what makes transcripts reproducible.

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace bbsim {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Fold a key word into a seed; chaining derive() calls walks the key tuple.
inline uint64_t derive(uint64_t seed, uint64_t word) {
    return splitmix64(seed ^ splitmix64(word + 0x632be59bd9b4e019ULL));
}

enum : uint64_t { ROLE_PUBLIC = 0, ROLE_VERTEX = 1, ROLE_HARNESS = 2 };

// Public coins: a pure function of (seed, tag words), so every player can
// evaluate the same draws without any communication.
struct PublicCoins {
    uint64_t seed = 0;

    uint64_t word(uint64_t a, uint64_t b = 0, uint64_t c = 0) const {
        uint64_t s = derive(seed, ROLE_PUBLIC);
        s = derive(s, a);
        s = derive(s, b);
        return derive(s, c);
    }
    int bit(uint64_t a, uint64_t b = 0, uint64_t c = 0) const {
        return static_cast<int>(word(a, b, c) & 1u);
    }
    // Deterministic uniform permutation of [n] for tag a (Fisher-Yates).
    std::vector<int> permutation(int n, uint64_t a) const {
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        std::mt19937_64 g(word(a, 0x7065726dULL));
        for (int i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<int> d(0, i);
            std::swap(p[i], p[d(g)]);
        }
        return p;
    }
};

// Private coins of one vertex; draws are additionally keyed by round.
struct PrivateCoins {
    uint64_t seed = 0;
    int vertex = -1;
    uint64_t word(int round, uint64_t a = 0) const {
        uint64_t s = derive(seed, ROLE_VERTEX);
        s = derive(s, static_cast<uint64_t>(vertex));
        s = derive(s, static_cast<uint64_t>(round));
        return derive(s, a);
    }
};

// Harness-side RNG (instance sampling, Monte Carlo loops).
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(uint64_t seed) : gen(derive(seed, ROLE_HARNESS)) {}
    uint64_t word() { return gen(); }
    int below(int n) {  // uniform in [0, n)
        std::uniform_int_distribution<int> d(0, n - 1);
        return d(gen);
    }
    bool coin() { return (gen() & 1u) != 0; }
    double unit() {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        return d(gen);
    }
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(p[i], p[below(i + 1)]);
        return p;
    }
};

} // namespace bbsim
