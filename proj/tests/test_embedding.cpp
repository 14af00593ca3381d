#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "bbsim/distributions.hpp"
#include "bbsim/embedding.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/protocols.hpp"
#include "bbsim/rng.hpp"

using namespace bbsim;

// All expected constants below were computed by independent scripts (direct
// probability calculations over the toy distributions) and frozen here; the
// enumeration must reproduce them exactly under the default pinned coins.

namespace {

Params toy_mis() { return make_params(1, 1, Variant::mis, ToyCounts{{1}, {2}}); }
Params toy_apx() { return make_params(2, 1, Variant::apx, ToyCounts{{1}, {2}}); }
Params micro_mis() { return make_params(1, 1, Variant::mis, ToyCounts{{1}, {1}}); }

JointLaw enum_toy(const std::string& spec, Variant v, const Params& pr,
                  SigmaMode mode = SigmaMode::blocks, int threads = 0) {
    Protocol proto = make_protocol(spec, v, static_cast<int>(pr.n_at(1)));
    EnumOptions eo;
    eo.sigma_mode = mode;
    eo.threads = threads;
    return enumerate_joint(pr, proto, eo);
}

}  // namespace

TEST_CASE("joint law bookkeeping") {
    JointLaw law = enum_toy("silent", Variant::mis, toy_mis());
    CHECK(law.n_atoms == 196608);
    CHECK(law.sigma_count == 48);
    CHECK(law.p == 4);
    CHECK(law.fblocks == 2);
    CHECK(law.block_size == 2);
    CHECK(law.fool_size == 1);
    CHECK(law.codes == 2);
    CHECK(law.tc_per_vertex == 1);
    CHECK(law.tcoords.size() == 8);
    CHECK(law.slots == law.rounds * (law.p + 1));

    // Probabilities sum to exactly 1.
    Rational total = 0;
    Rational good = 0;
    for (long long a = 0; a < law.n_atoms; ++a) {
        total += law.atom_prob(a);
        if (law.grade_global[a]) good += law.atom_prob(a);
    }
    CHECK(total == Rational(1));
    CHECK(good == Rational(225, 4096));

    // The Grade projection agrees with the per-atom column.
    DiscreteDist gd = law.project({"Grade"});
    CHECK(gd.prob_of({1}) == Rational(225, 4096));

    // Coordinate decode/encode round trip.
    for (long long a : {0LL, 1LL, 4095LL, 100000LL, law.n_atoms - 1}) {
        std::vector<long long> b;
        std::vector<int> t;
        for (int i = 0; i < law.p; ++i) b.push_back(law.bcode_of(a, i));
        for (size_t c = 0; c < law.tcoords.size(); ++c) t.push_back(law.tval_of(a, (int)c));
        CHECK(law.index_of(law.sigma_of(a), b, t) == a);
    }
}

TEST_CASE("silent protocols leak nothing and lose nothing") {
    JointLaw law = enum_toy("silent", Variant::mis, toy_mis());
    AuditReport rep = round_elim_audit(law, {});
    CHECK(rep.delta == Rational(225, 4096));
    CHECK(rep.half_rate == Rational(225, 4096));
    CHECK(rep.ideal_avg == Rational(1, 2));
    CHECK(rep.real_avg == Rational(1, 2));
    CHECK(rep.tv_avg == Rational(0));
    CHECK(rep.guarantee == Rational(225, 8192));
    CHECK(rep.first_budget == 0.0);
    for (const BlockAudit& b : rep.blocks) {
        CHECK(b.e_tvd == Rational(0));
        CHECK(b.nu_mass == Rational(1));
        CHECK(b.mi_first == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(b.leak_ok);
        CHECK(b.embed_ok);
    }
    CHECK(rep.product_gap_max == Rational(0));
    CHECK(rectangle_gap(law, 0) == Rational(0));
    CHECK(rectangle_gap(law, 1) == Rational(0));
    CHECK(rep.passed);

    // Zero rounds: no message coordinates at all.
    JointLaw lz = enum_toy("zero_round", Variant::mis, toy_mis());
    AuditReport rz = round_elim_audit(lz, {});
    CHECK(rz.rounds == 0);
    CHECK(rz.delta == Rational(225, 4096));
    CHECK(rz.real_avg == Rational(1, 2));
    CHECK(rz.tv_avg == Rational(0));
    CHECK(rz.blocks[0].term_P.empty());
    CHECK(rz.passed);

    // Multi-round silent exercises the later-round simulation path.
    JointLaw l3 = enum_toy("silent:3", Variant::mis, toy_mis());
    AuditReport r3 = round_elim_audit(l3, {});
    CHECK(r3.rounds == 3);
    CHECK(r3.blocks[0].term_P.size() == 3);
    CHECK(r3.tv_avg == Rational(0));
    CHECK(r3.blocks[0].nu_mass == Rational(1));
    CHECK(r3.passed);
}

TEST_CASE("directed parity audit, exact pins") {
    JointLaw law = enum_toy("xor:directed_round1", Variant::mis, toy_mis(), SigmaMode::blocks, 4);
    AuditReport rep = round_elim_audit(law, {});
    CHECK(rep.delta == Rational(225, 4096));
    CHECK(rep.ideal_avg == Rational(1, 2));
    CHECK(rep.real_avg == Rational(11, 32));
    CHECK(rep.tv_avg == Rational(23, 64));
    CHECK(rep.guarantee == Rational(-2719, 8192));
    CHECK(rep.first_budget == 2.0);
    // The target block hears about itself through the fooling parities; the
    // other blocks pay less.
    CHECK(rep.blocks[0].e_tvd == Rational(1, 2));
    for (int i = 1; i < 4; ++i) CHECK(rep.blocks[i].e_tvd == Rational(5, 16));
    for (const BlockAudit& b : rep.blocks) {
        CHECK(b.nu_mass == Rational(11, 16));
        CHECK(b.mi_first == doctest::Approx(0.625).epsilon(1e-6));
        CHECK(b.real == Rational(11, 32));
        CHECK(b.leak_ok);
        CHECK(b.embed_ok);
    }
    CHECK(rep.blocks[0].term_F[0] == doctest::Approx(0.375).epsilon(1e-6));
    REQUIRE(rep.sum_info.size() == 1);
    CHECK(rep.sum_info[0].holds);
    CHECK(rep.sum_info[0].lhs == doctest::Approx(6.0).epsilon(1e-6));
    // One-bit messages can't couple the blocks at round 1 here: the fooling
    // bits aggregate whole sides, and conditioning keeps a product form.
    CHECK(rectangle_gap(law, 0) == Rational(0));
    CHECK(rectangle_gap(law, 1) == Rational(0));
    for (int i = 0; i < 4; ++i) CHECK(fooling_product_gap(law, i) == Rational(0));
    CHECK(rep.passed);

    // Thread count must not change a single output byte.
    JointLaw law1 = enum_toy("xor:directed_round1", Variant::mis, toy_mis(), SigmaMode::blocks, 1);
    AuditReport rep1 = round_elim_audit(law1, {});
    CHECK(audit_to_json(rep1) == audit_to_json(rep));
}

TEST_CASE("fooling parities couple the target block") {
    JointLaw law = enum_toy("xor:fooling_xor", Variant::mis, toy_mis());
    CHECK(rectangle_gap(law, 0) == Rational(0));
    CHECK(rectangle_gap(law, 1) == Rational(3, 4));
    for (int i = 0; i < 4; ++i) CHECK(fooling_product_gap(law, i) == Rational(0));
    CHECK(round_elim_audit(law, {}).passed);
}

TEST_CASE("greedy independent-set audits, exact pins") {
    JointLaw l1 = enum_toy("luby:1", Variant::mis, toy_mis());
    AuditReport r1 = round_elim_audit(l1, {});
    CHECK(r1.delta == Rational(2407, 8192));
    CHECK(r1.half_rate == Rational(3859, 16384));
    CHECK(r1.ideal_avg == Rational(41, 64));
    CHECK(r1.real_avg == Rational(13, 32));
    CHECK(r1.tv_avg == Rational(9, 32));
    CHECK(r1.first_budget == 4.0);
    for (const BlockAudit& b : r1.blocks) {
        CHECK(b.e_tvd == Rational(9, 32));
        CHECK(b.nu_mass == Rational(53, 64));
        CHECK(b.mi_first == doctest::Approx(0.3973683589).epsilon(1e-6));
    }
    CHECK(r1.passed);

    JointLaw l2 = enum_toy("luby:2", Variant::mis, toy_mis());
    AuditReport r2 = round_elim_audit(l2, {});
    CHECK(r2.rounds == 2);
    CHECK(r2.delta == Rational(2827, 6144));
    CHECK(r2.half_rate == Rational(9349, 24576));
    CHECK(r2.ideal_avg == Rational(11, 16));
    CHECK(r2.real_avg == Rational(113, 256));
    CHECK(r2.tv_avg == Rational(9, 32));
    REQUIRE(r2.sum_info.size() == 2);
    CHECK(r2.sum_info[1].holds);
    CHECK(r2.passed);
}

TEST_CASE("identity sigma: small law, faithful assembly") {
    JointLaw law = enum_toy("luby:1", Variant::mis, toy_mis(), SigmaMode::identity);
    CHECK(law.n_atoms == 4096);
    CHECK(law.sigma_count == 1);
    AuditReport rep = round_elim_audit(law, {});
    CHECK(rep.delta == Rational(807, 4096));
    CHECK(rep.real_avg == Rational(3, 8));
    CHECK(rep.tv_avg == Rational(5, 16));
    CHECK(rep.passed);

    // A sampled identity instance is one atom of the law: decoding its
    // coordinates and reassembling must reproduce the very same graph.
    const BlockLayout& lay = law.layouts[0];
    for (uint64_t seed = 0; seed < 30; ++seed) {
        Instance inst = sample_mis_hard(toy_mis(), derive(99, seed), SigmaMode::identity);
        std::vector<int> tvals;
        for (const auto& tc : law.tcoords) {
            int u = lay.principal[tc.block][tc.offset];
            int val = 0;
            for (size_t c = 0; c < lay.fooling[tc.fool].size(); ++c)
                if (inst.graph.has_edge(u, lay.fooling[tc.fool][c])) val = 1 + (int)c;
            tvals.push_back(val);
        }
        CHECK(law.assemble(0, inst.principal_code, tvals) == inst.graph);
        long long a = law.index_of(0, inst.principal_code, tvals);
        CHECK(law.sigma_of(a) == 0);
        for (int i = 0; i < law.p; ++i) CHECK(law.bcode_of(a, i) == inst.principal_code[i]);
    }
}

TEST_CASE("full sigma on the micro instance") {
    JointLaw law = enum_toy("xor:directed_round1", Variant::mis, micro_mis(), SigmaMode::full);
    CHECK(law.n_atoms == 46080);
    CHECK(law.sigma_count == 720);
    AuditReport rep = round_elim_audit(law, {});
    CHECK(rep.delta == Rational(9, 64));
    CHECK(rep.ideal_avg == Rational(1, 2));
    CHECK(rep.real_avg == Rational(2, 5));
    CHECK(rep.tv_avg == Rational(7, 20));
    CHECK(rep.passed);
}

TEST_CASE("matching variant audits, exact pins") {
    JointLaw ls = enum_toy("silent", Variant::apx, toy_apx());
    CHECK(ls.n_atoms == 2097152);
    CHECK(ls.sigma_count == 2);
    AuditReport rs = round_elim_audit(ls, {});
    CHECK(rs.delta == Rational(1));
    CHECK(rs.slack == Rational(4));
    CHECK(rs.ideal_avg == Rational(1, 2));
    CHECK(rs.real_avg == Rational(1, 2));
    CHECK(rs.tv_avg == Rational(0));
    CHECK(rs.guarantee == Rational(-3, 2));
    CHECK(rs.passed);

    JointLaw ld = enum_toy("xor:directed_round1", Variant::apx, toy_apx());
    AuditReport rd = round_elim_audit(ld, {});
    CHECK(rd.real_avg == Rational(3, 8));
    CHECK(rd.tv_avg == Rational(131, 256));
    CHECK(rd.guarantee == Rational(-323, 128));
    CHECK(rd.first_budget == 4.0);
    CHECK(rd.blocks[0].e_tvd == Rational(9, 16));
    CHECK(rd.blocks[1].e_tvd == Rational(59, 128));
    CHECK(rd.blocks[0].nu_mass == Rational(3, 4));
    CHECK(rd.blocks[0].mi_first == doctest::Approx(0.91834422657).epsilon(1e-6));
    CHECK(rd.passed);
}

TEST_CASE("resampling simulation: deterministic and consistent") {
    JointLaw law = enum_toy("xor:directed_round1", Variant::mis, toy_mis());
    TauResult a = simulate_tau(law, 0, 2000, 7);
    TauResult b = simulate_tau(law, 0, 2000, 7);
    CHECK(a.trials == 2000);
    CHECK(a.hits == b.hits);
    CHECK(a.aborts == b.aborts);

    // Monte Carlo agrees with the exact resampled success rate within 3 sigma.
    AuditOptions ao;
    ao.tau_trials = 10000;
    ao.tau_seed = 5;
    AuditReport rep = round_elim_audit(law, ao);
    for (const BlockAudit& blk : rep.blocks) {
        CHECK(blk.tau_ok);
        CHECK(blk.tau_mean >= 0.0);
    }
}

TEST_CASE("product-gap detector catches correlation") {
    // Two perfectly correlated fair bits: the product of marginals is off by
    // exactly 1/2 in total variation.
    DiscreteDist d;
    d.vars = {"X0", "X1"};
    d.card = {2, 2};
    d.atoms[{0, 0}] = Rational(1, 2);
    d.atoms[{1, 1}] = Rational(1, 2);
    d.validate();
    Rational gap = expected_product_gap(d, {}, {}, {{{}, "X0"}, {{}, "X1"}});
    CHECK(gap == Rational(1, 2));

    // Conditioned on their common cause the same bits factor exactly.
    DiscreteDist dg;
    dg.vars = {"G", "X0", "X1"};
    dg.card = {2, 2, 2};
    dg.atoms[{0, 0, 0}] = Rational(1, 2);
    dg.atoms[{1, 1, 1}] = Rational(1, 2);
    dg.validate();
    Rational gap2 = expected_product_gap(dg, {"G"}, {"G"}, {{{}, "X0"}, {{}, "X1"}});
    CHECK(gap2 == Rational(0));
}

TEST_CASE("enumeration guards") {
    EnumOptions tiny;
    tiny.atom_cap = 1000;
    CHECK_THROWS_AS(
        enumerate_joint(toy_mis(), make_protocol("silent", Variant::mis, 10), tiny), TooLarge);
    Params derived = make_params(2, 1, Variant::mis);
    CHECK_THROWS_AS(
        enumerate_joint(derived, make_protocol("silent", Variant::mis, 10), {}), Overflow);
}
