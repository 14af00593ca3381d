#include "bbsim/params.hpp"

#include <cmath>
#include <string>

#include "bbsim/errors.hpp"

namespace bbsim {

static long long mul_ck(long long a, long long b, const char* what) {
    long long out;
    if (__builtin_mul_overflow(a, b, &out))
        throw Overflow(std::string("count overflow computing ") + what);
    return out;
}
static long long add_ck(long long a, long long b, const char* what) {
    long long out;
    if (__builtin_add_overflow(a, b, &out))
        throw Overflow(std::string("count overflow computing ") + what);
    return out;
}

static void check_level(const Params& pr, int level, int lo) {
    if (level < lo || level > pr.r) throw OutOfRange("level out of range");
}

long long Params::fhat_at(int level) const { check_level(*this, level, 1); return fhat[level - 1]; }
long long Params::phat_at(int level) const { check_level(*this, level, 1); return phat[level - 1]; }
long long Params::nhat_at(int level) const { check_level(*this, level, 1); return nhat[level - 1]; }
long long Params::f_at(int level) const { return doubled() ? 2 * fhat_at(level) : fhat_at(level); }
long long Params::p_at(int level) const { return doubled() ? 2 * phat_at(level) : phat_at(level); }
long long Params::n_at(int level) const {
    check_level(*this, level, 0);
    if (level == 0) return n0();
    return doubled() ? 2 * nhat[level - 1] : nhat[level - 1];
}

Params make_params(int k, int r, Variant variant, const std::optional<ToyCounts>& toy) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (r < 0) throw ConfigError("r must be >= 0");
    Params pr;
    pr.k = k;
    pr.r = r;
    pr.variant = variant;
    pr.derived_counts = !toy.has_value();
    if (toy && (static_cast<int>(toy->fhat.size()) != r ||
                static_cast<int>(toy->phat.size()) != r))
        throw ConfigError("toy counts need exactly one fhat and phat entry per level");

    long long k6 = 1;
    for (int i = 0; i < 6; ++i) k6 = mul_ck(k6, k, "k^6");

    long long n_prev = pr.n0();
    for (int t = 1; t <= r; ++t) {
        long long fh, ph;
        if (toy) {
            fh = toy->fhat[t - 1];
            ph = toy->phat[t - 1];
            if (fh < 1 || ph < 1) throw ConfigError("toy counts must be >= 1");
        } else {
            long long cube = mul_ck(mul_ck(n_prev, n_prev, "n^3"), n_prev, "n^3");
            fh = mul_ck(k6, cube, "fhat");
            ph = mul_ck(fh, fh, "phat");  // k^6 n^3 * fhat = fhat^2
        }
        long long nh = add_ck(mul_ck(n_prev - 1, fh, "nhat"),
                              mul_ck(n_prev, ph, "nhat"), "nhat");
        pr.fhat.push_back(fh);
        pr.phat.push_back(ph);
        pr.nhat.push_back(nh);
        n_prev = pr.doubled() ? mul_ck(2, nh, "n_t") : nh;
    }

    // Derived-counts size guarantee: n_r <= k^(20^(r+1)), meaningful for k >= 2.
    if (pr.derived_counts && k >= 2 && r >= 0) {
        double exponent = std::pow(20.0, r + 1);
        double bound_log2 = exponent * std::log2(static_cast<double>(k));
        double n_log2 = std::log2(static_cast<double>(pr.n_at(r)));
        if (n_log2 > bound_log2)
            throw Overflow("derived-counts size bound violated: n_r exceeds k^(20^(r+1))");
    }
    return pr;
}

void ensure_materializable(const Params& pr) {
    constexpr long long VERTEX_CAP = 1LL << 20;
    if (pr.n_at(pr.r) > VERTEX_CAP)
        throw Overflow("counts too large to materialize an instance: n_" +
                       std::to_string(pr.r) + " = " + std::to_string(pr.n_at(pr.r)) +
                       (pr.r >= 1 ? " (phat_" + std::to_string(pr.r) + " = " +
                                        std::to_string(pr.phat_at(pr.r)) + ")"
                                  : "") +
                       "; use toy counts");
    // total (principal vertex, fooling block) sampling work at the top level
    if (pr.r >= 1) {
        long long pairs = 0, tmp = 0;
        bool over = __builtin_mul_overflow(pr.p_at(pr.r), pr.n_at(pr.r - 1), &tmp) ||
                    __builtin_mul_overflow(tmp, pr.fhat_at(pr.r), &pairs);
        if (over || pairs > (1LL << 22))
            throw Overflow("fooling-instance count too large to materialize: " +
                           (over ? std::string("beyond 64-bit") : std::to_string(pairs)) +
                           "; use toy counts");
    }
}

Rational matching_size_bound(const Params& pr) {
    Rational sum = 0;
    for (int t = 1; t <= pr.r; ++t)
        sum += Rational(pr.f_at(t), pr.p_at(t));
    if (pr.derived_counts && sum > Rational(1, 2))
        throw Overflow("derived-counts ratio sum f_t/p_t exceeds 1/2");
    return Rational(pr.n_at(pr.r), 2LL * pr.k) * (1 - sum);
}

} // namespace bbsim
