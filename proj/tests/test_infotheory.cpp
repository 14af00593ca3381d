#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbsim/errors.hpp"
#include "bbsim/infotheory.hpp"
#include "bbsim/verify.hpp"

using namespace bbsim;

namespace {

constexpr double TOL = 1e-9;

// Joint over two bits with the given atom probabilities (row-major).
DiscreteDist two_bits(const Rational& p00, const Rational& p01, const Rational& p10,
                      const Rational& p11) {
    DiscreteDist d;
    d.vars = {"X", "Y"};
    d.card = {2, 2};
    if (p00 != 0) d.atoms[{0, 0}] = p00;
    if (p01 != 0) d.atoms[{0, 1}] = p01;
    if (p10 != 0) d.atoms[{1, 0}] = p10;
    if (p11 != 0) d.atoms[{1, 1}] = p11;
    d.validate();
    return d;
}

}  // namespace

TEST_CASE("rational strings round-trip and canonicalize") {
    CHECK(rational_to_string(Rational(1, 2)) == "1/2");
    CHECK(rational_to_string(Rational(4)) == "4/1");
    CHECK(rational_from_string("2/4") == Rational(1, 2));
    CHECK(rational_from_string("7") == Rational(7));
    CHECK(rational_from_string(rational_to_string(Rational(-3, 7))) == Rational(-3, 7));
}

TEST_CASE("distribution validation catches malformed tables") {
    DiscreteDist d;
    d.vars = {"X"};
    d.card = {2};
    d.atoms[{0}] = Rational(1, 2);
    CHECK_THROWS(d.validate());  // mass 1/2 only
    d.atoms[{1}] = Rational(1, 2);
    CHECK_NOTHROW(d.validate());
    CHECK_THROWS_AS(d.var_index("Z"), UnknownVariable);
}

TEST_CASE("marginals and conditioning are exact") {
    DiscreteDist d = two_bits({1, 8}, {3, 8}, {2, 8}, {2, 8});
    DiscreteDist mx = d.marginal({"X"});
    CHECK(mx.prob_of({0}) == Rational(1, 2));
    CHECK(mx.prob_of({1}) == Rational(1, 2));

    DiscreteDist c = d.condition({{"X", 0}});
    CHECK(c.prob_of({0, 0}) + c.prob_of({0, 1}) == 1);
    CHECK(c.prob_of({0, 1}) == Rational(3, 4));

    DiscreteDist zero = two_bits({1, 2}, 0, 0, {1, 2});
    CHECK_THROWS_AS(zero.condition({{"X", 0}}).condition({{"Y", 1}}), ZeroProbabilityEvent);
}

TEST_CASE("entropy on hand distributions") {
    DiscreteDist fair = two_bits({1, 4}, {1, 4}, {1, 4}, {1, 4});
    CHECK(entropy(fair, {"X"}) == doctest::Approx(1.0).epsilon(TOL));
    CHECK(entropy(fair, {"X", "Y"}) == doctest::Approx(2.0).epsilon(TOL));
    CHECK(entropy(fair, {"X"}, {"Y"}) == doctest::Approx(1.0).epsilon(TOL));

    DiscreteDist corr = two_bits({1, 2}, 0, 0, {1, 2});
    CHECK(entropy(corr, {"X", "Y"}) == doctest::Approx(1.0).epsilon(TOL));
    CHECK(entropy(corr, {"X"}, {"Y"}) == doctest::Approx(0.0).epsilon(TOL));

    // H(Ber(1/4)) = 2 - (3/4) log2 3.
    DiscreteDist ber = two_bits({1, 4}, 0, {3, 4}, 0);
    CHECK(entropy(ber, {"X"}) ==
          doctest::Approx(2.0 - 0.75 * std::log2(3.0)).epsilon(TOL));
}

TEST_CASE("mutual information on hand distributions") {
    DiscreteDist corr = two_bits({1, 2}, 0, 0, {1, 2});
    CHECK(mutual_info(corr, {"X"}, {"Y"}) == doctest::Approx(1.0).epsilon(TOL));
    DiscreteDist fair = two_bits({1, 4}, {1, 4}, {1, 4}, {1, 4});
    CHECK(mutual_info(fair, {"X"}, {"Y"}) == doctest::Approx(0.0).epsilon(TOL));
}

TEST_CASE("divergence on hand distributions") {
    DiscreteDist p = two_bits({1, 2}, 0, {1, 2}, 0);
    DiscreteDist q = two_bits({1, 4}, 0, {3, 4}, 0);
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(TOL));
    // KL(Ber(1/2) || Ber(1/4)) = 0.5 log2(2) + 0.5 log2(2/3).
    CHECK(kl_divergence(p, q) ==
          doctest::Approx(0.5 + 0.5 * std::log2(2.0 / 3.0)).epsilon(TOL));

    DiscreteDist narrow = two_bits(1, 0, 0, 0);
    CHECK_THROWS_AS(kl_divergence(p, narrow), SupportMismatch);
    CHECK_NOTHROW(kl_divergence(narrow, p));
}

TEST_CASE("total variation is exact") {
    DiscreteDist p = two_bits({1, 2}, 0, {1, 2}, 0);
    DiscreteDist q = two_bits({1, 4}, 0, {3, 4}, 0);
    CHECK(tvd(p, q) == Rational(1, 4));
    CHECK(tvd(p, p) == 0);
    DiscreteDist far = two_bits(0, {1, 2}, 0, {1, 2});
    CHECK(tvd(p, far) == 1);
}

TEST_CASE("distribution JSON round trip") {
    DiscreteDist d = two_bits({1, 8}, {3, 8}, {2, 8}, {2, 8});
    DiscreteDist back = dist_from_json(dist_to_json(d));
    CHECK(back.vars == d.vars);
    CHECK(back.card == d.card);
    CHECK(back.atoms == d.atoms);
}

TEST_CASE("randomized property suite over the information facts") {
    VerifyOptions vo;
    SuiteReport rep = suite_infotheory(vo);
    for (const auto& c : rep.checks) {
        INFO(c.name << ": " << c.value << " vs " << c.budget);
        CHECK(c.passed);
    }
    // The premise-violation fixtures must be present and passing.
    int fixtures = 0;
    for (const auto& c : rep.checks)
        if (c.name.rfind("fixture:", 0) == 0) ++fixtures;
    CHECK(fixtures == 2);
}
