#pragma once
// Recursive instance counts.  A level-t half instance has phat_t principal
// blocks (each a full level-(t-1) instance on n_{t-1} vertices) and fhat_t
// fooling blocks (each n_{t-1}-1 vertices); its size is
//   nhat_t = (n_{t-1}-1)*fhat_t + n_{t-1}*phat_t.
// The independent-set variant glues two halves (full counts are doubled); the
// matching variant uses a single half (full counts = half counts).
// Derived mode computes fhat_t = k^6*n_{t-1}^3 and phat_t = k^6*n_{t-1}^3*fhat_t;
// toy mode takes fhat/phat per level as explicit overrides.

#include <optional>
#include <vector>

#include "bbsim/infotheory.hpp"

namespace bbsim {

enum class Variant { mis, apx };

struct ToyCounts {
    std::vector<long long> fhat;  // one entry per level 1..r
    std::vector<long long> phat;
};

struct Params {
    int k = 1;
    int r = 0;
    Variant variant = Variant::mis;
    bool derived_counts = true;

    // Half-instance counts per level (index t-1 holds level t).
    std::vector<long long> fhat, phat, nhat;

    long long n0() const { return 2LL * k; }
    bool doubled() const { return variant == Variant::mis; }

    long long fhat_at(int level) const;  // level in [1, r]
    long long phat_at(int level) const;
    long long nhat_at(int level) const;
    long long f_at(int level) const;     // full counts (doubled for mis)
    long long p_at(int level) const;
    long long n_at(int level) const;     // level in [0, r]; n_at(0) = 2k
};

// Computes all counts with checked 64-bit arithmetic (throws Overflow on
// wraparound).  Derived mode additionally asserts n_r <= k^(20^(r+1)) for k >= 2
// (at k=1 the bound degenerates to n_r <= 1, so the check is skipped there).
Params make_params(int k, int r, Variant variant,
                   const std::optional<ToyCounts>& toy = std::nullopt);

// Guard used by samplers: counts small enough to materialize an instance.
// Throws Overflow naming the offending count otherwise.
void ensure_materializable(const Params& pr);

// Matching-number lower bound for the matching-variant distribution:
//   n_r/(2k) * (1 - sum_{t<=r} f_t/p_t)
// (exact rational).  Derived mode asserts the sum is <= 1/2, so the bound is at
// least n_r/(4k); toy counts may drive it to zero or below (still returned).
Rational matching_size_bound(const Params& pr);

} // namespace bbsim
