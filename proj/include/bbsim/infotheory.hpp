#pragma once
// Exact finite joint distributions with rational probabilities, plus the
// information measures used by the leakage analysis.  Entropic quantities are
// returned as doubles (log2 of exact rationals); total variation and plain
// probabilities stay exact.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bbsim {

using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);
std::string rational_to_string(const Rational& r);        // canonical "p/q"
Rational rational_from_string(const std::string& text);   // accepts "p" or "p/q"

struct DiscreteDist {
    std::vector<std::string> vars;   // variable names, order fixes atom layout
    std::vector<int> card;           // domain size per variable
    // atoms: full assignment -> probability.  Only positive atoms are stored.
    std::map<std::vector<int>, Rational> atoms;

    int var_index(const std::string& name) const;  // UnknownVariable
    void validate() const;  // values in range, probs > 0, total mass exactly 1

    DiscreteDist marginal(const std::vector<std::string>& keep) const;
    // Condition on Var=value assignments; renormalizes exactly.
    // ZeroProbabilityEvent if the event has mass 0.
    DiscreteDist condition(const std::vector<std::pair<std::string, int>>& fix) const;

    Rational prob_of(const std::vector<int>& assignment) const;  // 0 if absent
};

// H(of | given) in bits.  `of` and `given` are variable-name subsets.
double entropy(const DiscreteDist& d, const std::vector<std::string>& of,
               const std::vector<std::string>& given = {});

// I(a ; b | given) in bits, via the four-entropy expansion.
double mutual_info(const DiscreteDist& d, const std::vector<std::string>& a,
                   const std::vector<std::string>& b,
                   const std::vector<std::string>& given = {});

// KL(p || q) in bits over identically-named variables.  A p-atom outside q's
// support is an error (SupportMismatch), never +infinity.
double kl_divergence(const DiscreteDist& p, const DiscreteDist& q);

// Exact total variation distance (1/2 L1) over identically-named variables.
Rational tvd(const DiscreteDist& p, const DiscreteDist& q);

// JSON wire format: variables, domains, atom list with "p/q" fraction strings.
std::string dist_to_json(const DiscreteDist& d);
DiscreteDist dist_from_json(const std::string& text);

} // namespace bbsim
