#include "bbsim/infotheory.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "bbsim/errors.hpp"

namespace bbsim {

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string rational_to_string(const Rational& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

Rational rational_from_string(const std::string& text) {
    auto slash = text.find('/');
    using Int = boost::multiprecision::cpp_int;
    if (slash == std::string::npos) return Rational(Int(text));
    Int num(text.substr(0, slash)), den(text.substr(slash + 1));
    if (den == 0) throw ConfigError("rational with zero denominator: " + text);
    return Rational(num, den);
}

int DiscreteDist::var_index(const std::string& name) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    throw UnknownVariable("no variable named " + name);
}

void DiscreteDist::validate() const {
    if (vars.size() != card.size()) throw SupportMismatch("vars/card size mismatch");
    Rational total = 0;
    for (const auto& [key, p] : atoms) {
        if (key.size() != vars.size()) throw SupportMismatch("atom arity mismatch");
        for (size_t i = 0; i < key.size(); ++i)
            if (key[i] < 0 || key[i] >= card[i])
                throw OutOfRange("atom value outside domain of " + vars[i]);
        if (p <= 0) throw OutOfRange("atom probability must be positive");
        total += p;
    }
    if (total != 1) throw SupportMismatch("probabilities sum to " + rational_to_string(total));
}

DiscreteDist DiscreteDist::marginal(const std::vector<std::string>& keep) const {
    std::vector<int> idx;
    idx.reserve(keep.size());
    for (const auto& name : keep) idx.push_back(var_index(name));
    DiscreteDist m;
    m.vars = keep;
    for (int i : idx) m.card.push_back(card[i]);
    for (const auto& [key, p] : atoms) {
        std::vector<int> sub;
        sub.reserve(idx.size());
        for (int i : idx) sub.push_back(key[i]);
        m.atoms[sub] += p;
    }
    return m;
}

DiscreteDist DiscreteDist::condition(const std::vector<std::pair<std::string, int>>& fix) const {
    std::vector<std::pair<int, int>> fi;
    for (const auto& [name, val] : fix) {
        int i = var_index(name);
        if (val < 0 || val >= card[i]) throw OutOfRange("conditioning value outside domain");
        fi.emplace_back(i, val);
    }
    DiscreteDist c;
    c.vars = vars;
    c.card = card;
    Rational mass = 0;
    for (const auto& [key, p] : atoms) {
        bool match = true;
        for (const auto& [i, val] : fi)
            if (key[i] != val) { match = false; break; }
        if (match) {
            c.atoms[key] = p;
            mass += p;
        }
    }
    if (mass == 0) throw ZeroProbabilityEvent("conditioning event has probability zero");
    for (auto& [key, p] : c.atoms) p /= mass;
    return c;
}

Rational DiscreteDist::prob_of(const std::vector<int>& assignment) const {
    auto it = atoms.find(assignment);
    return it == atoms.end() ? Rational(0) : it->second;
}

// H(S) for a name subset, as -sum p log2 p over the projected groups.
static double entropy_of_subset(const DiscreteDist& d, const std::vector<std::string>& of) {
    std::vector<int> idx;
    for (const auto& name : of) idx.push_back(d.var_index(name));
    std::map<std::vector<int>, Rational> groups;
    for (const auto& [key, p] : d.atoms) {
        std::vector<int> sub;
        sub.reserve(idx.size());
        for (int i : idx) sub.push_back(key[i]);
        groups[sub] += p;
    }
    double h = 0.0;
    for (const auto& [sub, p] : groups) {
        double pd = to_double(p);
        if (pd > 0.0) h -= pd * std::log2(pd);
    }
    return h;
}

static std::vector<std::string> concat(std::vector<std::string> a,
                                       const std::vector<std::string>& b) {
    for (const auto& s : b)
        if (std::find(a.begin(), a.end(), s) == a.end()) a.push_back(s);
    return a;
}

double entropy(const DiscreteDist& d, const std::vector<std::string>& of,
               const std::vector<std::string>& given) {
    if (given.empty()) return entropy_of_subset(d, of);
    return entropy_of_subset(d, concat(of, given)) - entropy_of_subset(d, given);
}

double mutual_info(const DiscreteDist& d, const std::vector<std::string>& a,
                   const std::vector<std::string>& b,
                   const std::vector<std::string>& given) {
    // I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)
    double hac = entropy_of_subset(d, concat(a, given));
    double hbc = entropy_of_subset(d, concat(b, given));
    double habc = entropy_of_subset(d, concat(concat(a, b), given));
    double hc = given.empty() ? 0.0 : entropy_of_subset(d, given);
    return hac + hbc - habc - hc;
}

// Align q's variable order to p's; throws if names differ as sets.
static std::vector<int> alignment(const DiscreteDist& p, const DiscreteDist& q) {
    if (p.vars.size() != q.vars.size())
        throw SupportMismatch("distributions have different variable sets");
    std::vector<int> map_q(p.vars.size());
    for (size_t i = 0; i < p.vars.size(); ++i) {
        map_q[i] = q.var_index(p.vars[i]);  // throws UnknownVariable
        if (q.card[map_q[i]] != p.card[i])
            throw SupportMismatch("domain size mismatch on " + p.vars[i]);
    }
    return map_q;
}

double kl_divergence(const DiscreteDist& p, const DiscreteDist& q) {
    auto map_q = alignment(p, q);
    // re-key q into p's order
    std::map<std::vector<int>, Rational> qq;
    for (const auto& [key, pr] : q.atoms) {
        std::vector<int> k(key.size());
        for (size_t i = 0; i < key.size(); ++i) k[i] = key[map_q[i]];
        qq[k] += pr;
    }
    double kl = 0.0;
    for (const auto& [key, pr] : p.atoms) {
        auto it = qq.find(key);
        if (it == qq.end() || it->second == 0)
            throw SupportMismatch("KL: p has mass outside q's support");
        kl += to_double(pr) * (std::log2(to_double(pr)) - std::log2(to_double(it->second)));
    }
    return kl;
}

Rational tvd(const DiscreteDist& p, const DiscreteDist& q) {
    auto map_q = alignment(p, q);
    std::map<std::vector<int>, Rational> diff;
    for (const auto& [key, pr] : p.atoms) diff[key] += pr;
    for (const auto& [key, pr] : q.atoms) {
        std::vector<int> k(key.size());
        for (size_t i = 0; i < key.size(); ++i) k[i] = key[map_q[i]];
        diff[k] -= pr;
    }
    Rational total = 0;
    for (const auto& [key, d] : diff) total += d < 0 ? Rational(-d) : d;
    return total / 2;
}

std::string dist_to_json(const DiscreteDist& d) {
    nlohmann::ordered_json j;
    j["variables"] = d.vars;
    j["domains"] = d.card;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [key, p] : d.atoms) {
        nlohmann::ordered_json atom;
        atom["values"] = key;
        atom["p"] = rational_to_string(p);
        arr.push_back(atom);
    }
    j["atoms"] = arr;
    return j.dump();
}

DiscreteDist dist_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    DiscreteDist d;
    d.vars = j.at("variables").get<std::vector<std::string>>();
    d.card = j.at("domains").get<std::vector<int>>();
    for (const auto& atom : j.at("atoms")) {
        auto key = atom.at("values").get<std::vector<int>>();
        d.atoms[key] = rational_from_string(atom.at("p").get<std::string>());
    }
    d.validate();
    return d;
}

} // namespace bbsim
