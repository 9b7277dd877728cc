#include "doctest.h"

#include <cmath>
#include <optional>
#include <vector>

#include "helpers.hpp"
#include "wmonlab/truthfulness.hpp"

using namespace wmonlab;
using testutil::anti_monotone_oracle;

namespace {

std::vector<double> grid(double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * i / (points - 1));
    return out;
}

}  // namespace

TEST_CASE("wmon_check finds no violation for truthful oracles") {
    const auto vcg = two_player_oracle(AffineMinSpec{});
    for (int player : {0, 1})
        CHECK_FALSE(wmon_check(vcg, player, exhaustive_grid_probes(player, grid(0, 2, 5))));
    const auto constant = two_player_oracle(ConstantSpec{Alloc::Task2});
    CHECK_FALSE(wmon_check(constant, 0, exhaustive_grid_probes(0, grid(0, 2, 5))));
}

TEST_CASE("wmon_check reports the first violating probe of an anti-monotone rule") {
    const auto oracle = anti_monotone_oracle();
    const auto probes = exhaustive_grid_probes(0, grid(0, 2, 3));
    const auto witness = wmon_check(oracle, 0, probes);
    REQUIRE(witness.has_value());
    CHECK(witness->lhs > witness->rhs + EPS_CMP);

    // independent brute force over the same probes pins the first violation
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < probes.size() && !first; ++i) {
        const Probe& p = probes[i];
        const Alloc aa = oracle(p.a.t, p.a.s), ab = oracle(p.b.t, p.b.s);
        const double lhs = alloc_cost(p.a.t, aa) - alloc_cost(p.a.t, ab);
        const double rhs = alloc_cost(p.b.t, aa) - alloc_cost(p.b.t, ab);
        if (lhs > rhs + EPS_CMP) first = i;
    }
    REQUIRE(first.has_value());
    const Probe& expect = probes[*first];
    CHECK(witness->a.t.t1 == expect.a.t.t1);
    CHECK(witness->a.t.t2 == expect.a.t.t2);
    CHECK(witness->b.t.t1 == expect.b.t.t1);
    CHECK(witness->a.s.s1 == expect.a.s.s1);
}

TEST_CASE("wmon_check validates probes") {
    const auto vcg = two_player_oracle(AffineMinSpec{});
    Probe bad;
    bad.player = 0;
    bad.a = {TwoTaskValuation::additive(1, 1), {1, 1}};
    bad.b = {TwoTaskValuation::additive(2, 1), {2, 1}};  // both players vary
    CHECK_THROWS_AS(wmon_check(vcg, 0, {bad}), BadProbe);
    Probe wrong_player = bad;
    wrong_player.b.s = wrong_player.a.s;
    CHECK_THROWS_AS(wmon_check(vcg, 1, {wrong_player}), BadProbe);
}

TEST_CASE("parallel and sequential scans agree on the first violation") {
    const auto oracle = anti_monotone_oracle();
    const auto probes = random_probes(0, 99, 5000, 2.0, 2.0);
    const auto parallel = wmon_check(oracle, 0, probes);
    std::optional<ViolationWitness> sequential;
    for (const Probe& p : probes)
        if ((sequential = check_one_probe(oracle, p))) break;
    REQUIRE(parallel.has_value() == sequential.has_value());
    if (parallel) {
        CHECK(parallel->a.t.t1 == sequential->a.t.t1);
        CHECK(parallel->b.t.t1 == sequential->b.t.t1);
        CHECK(parallel->lhs == sequential->lhs);
    }
}

TEST_CASE("virtual payment recovery matches known thresholds") {
    const auto vcg = two_player_oracle(AffineMinSpec{});
    auto p = virtual_payments(fix_s(vcg, {2.0, 3.0}), 100.0);
    CHECK(p.p_empty == 0.0);
    CHECK(p.p1 == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(p.p2 == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(p.p12 == doctest::Approx(5.0).epsilon(1e-5));

    const auto bundling = two_player_oracle(BundlingSpec{MonotoneCurve::identity(1000.0)});
    p = virtual_payments(fix_s(bundling, {1.0, 1.0}), 100.0);
    CHECK(p.p1 == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(p.p2 == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(p.p12 == doctest::Approx(2.0).epsilon(1e-5));  // xi(s1+s2)

    const auto never = two_player_oracle(ConstantSpec{Alloc::Empty});
    p = virtual_payments(fix_s(never, {1.0, 1.0}), 100.0);
    CHECK(p.p1 == 0.0);
    CHECK(p.p2 == 0.0);
    CHECK(p.p12 == 0.0);
}

TEST_CASE("virtual payments require a reachable empty region") {
    const auto always = two_player_oracle(ConstantSpec{Alloc::Both});
    CHECK_THROWS_AS(virtual_payments(fix_s(always, {1.0, 1.0}), 100.0), AssumptionViolated);
}

TEST_CASE("recovered payments are normalized and monotone across oracles") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const AffineParams params = testutil::random_affine_params(rng);
        const auto oracle = two_player_oracle(AffineMinSpec{params});
        const AdditiveBid s{rng.uniform(0, 3), rng.uniform(0, 3)};
        const auto p = virtual_payments(fix_s(oracle, s), default_probe_ceiling({3, 3, 6}, s));
        CHECK(p.p_empty == 0.0);
        CHECK(p.p12 >= p.p1 - 1e-6);
        CHECK(p.p12 >= p.p2 - 1e-6);
    }
}

TEST_CASE("payment uniqueness: recovery at two tolerances agrees") {
    const auto m = testutil::fig2_family();
    const auto oracle = two_player_oracle(m);
    for (const AdditiveBid s : {AdditiveBid{0.2, 0.3}, AdditiveBid{1.0, 2.0}}) {
        const auto coarse = virtual_payments(fix_s(oracle, s), 100.0, 1e-5);
        const auto fine = virtual_payments(fix_s(oracle, s), 100.0, 1e-8);
        CHECK(std::fabs(coarse.p1 - fine.p1) <= 2e-5);
        CHECK(std::fabs(coarse.p2 - fine.p2) <= 2e-5);
        CHECK(std::fabs(coarse.p12 - fine.p12) <= 2e-5);
    }
}

TEST_CASE("threshold payments make the affine minimizer truthful on a grid") {
    AffineParams params;
    params.gamma1 = 0.5;
    PaidMechanism mech{two_player_oracle(AffineMinSpec{params}),
                      [params](const AdditiveBid& s) { return payments_affine(params, s); }};
    std::vector<TwoTaskValuation> t_grid;
    for (double a : grid(0, 2.5, 6))
        for (double b : grid(0, 2.5, 6)) t_grid.push_back(TwoTaskValuation::additive(a, b));
    std::vector<AdditiveBid> s_grid;
    for (double a : grid(0, 2.5, 6)) s_grid.push_back({a, 2.5 - a});
    CHECK(verify_payment_truthfulness(mech, t_grid, s_grid).max_gain <= 1e-9);

    PaidMechanism zero{mech.alloc, [](const AdditiveBid&) { return PaymentProfile{}; }};
    CHECK(verify_payment_truthfulness(zero, t_grid, s_grid).max_gain > EPS_CMP);

    PaidMechanism idle{two_player_oracle(ConstantSpec{Alloc::Empty}),
                       [](const AdditiveBid&) { return PaymentProfile{}; }};
    CHECK(verify_payment_truthfulness(idle, t_grid, s_grid).max_gain == 0.0);
}

TEST_CASE("cut restriction splices the pair and matches the full allocation") {
    PerTaskLinearSpec spec{{{1.0}, {0.0}}};
    const auto mech = instance_oracle(spec);
    const auto fixed = RestrictedInstance::make(3, {0.4, 0.9}, {1.0, 0.5}).to_instance();
    const auto cut = cut_restriction(mech, 0, fixed);

    // the restriction behaves like a task-independent rule on the pair:
    // primed twin always with the t-player, task 0 by its threshold
    CHECK(cut({0.4, 0.0, 0.4}, {1.0, 3.0}) == Alloc::Both);
    CHECK(cut({1.4, 0.0, 1.4}, {1.0, 3.0}) == Alloc::Task2);

    // splicing identity: evaluating at the fixed values reproduces mech
    const auto full = mech(fixed);
    const Alloc at_fixed = cut(fixed.t.pairs[0], {fixed.s[0].first, fixed.s[0].second});
    CHECK(has_task1(at_fixed) == full.t_player_has({0, false}));
    CHECK(has_task2(at_fixed) == full.t_player_has({0, true}));

    // restriction of a truthful mechanism passes wmon_check
    for (int player : {0, 1})
        CHECK_FALSE(wmon_check(cut, player, exhaustive_grid_probes(player, grid(0, 2, 4))));
}

TEST_CASE("lemma tool: strict perturbations preserve truthful assignments") {
    // general paired instance so every coordinate can move strictly
    Instance inst;
    inst.n = 3;
    inst.theta = 900.0;
    inst.t.pairs = {{0.4, 0.5, 0.9}, {1.4, 0.5, 1.9}};
    inst.s = {{1.0, 3.0}, {1.0, 3.0}};
    const auto vcg = instance_oracle(vcg_spec());  // task i to t iff t_i < s_i
    const auto before = vcg(inst);

    Instance pert = inst;
    auto move = [&](int pair, bool primed, double d) {
        TwoTaskValuation& p = pert.t.pairs[pair];
        (primed ? p.t2 : p.t1) += d;
        p.t12 = p.t1 + p.t2;
    };
    // lower won bids, raise lost ones
    for (int i = 0; i < 2; ++i)
        for (int primed = 0; primed < 2; ++primed)
            move(i, primed != 0, before.t_player_has({i, primed != 0}) ? -0.1 : 0.1);
    CHECK(lemma_tool_check(vcg, inst, pert));

    // anti-monotone control: lowering a won bid makes the rule drop the task
    const auto anti = testutil::anti_monotone_instance_oracle(0.35);
    CHECK_FALSE(lemma_tool_check(anti, inst, pert));
}

TEST_CASE("lemma tool rejects malformed perturbations") {
    Instance inst;
    inst.n = 2;
    inst.theta = 400.0;
    inst.t.pairs = {{0.5, 0.5, 1.0}};
    inst.s = {{1.0, 2.0}};
    const auto vcg = instance_oracle(vcg_spec());
    CHECK_THROWS_AS(lemma_tool_check(vcg, inst, inst), BadPerturbation);  // nothing changed

    Instance two = inst;
    two.t.pairs[0] = {0.4, 0.4, 0.8};
    two.s[0] = {0.9, 2.0};  // two machines changed
    CHECK_THROWS_AS(lemma_tool_check(vcg, inst, two), BadPerturbation);

    Instance wrong = inst;
    wrong.t.pairs[0] = {0.6, 0.6, 1.2};  // won bids raised instead of lowered
    CHECK_THROWS_AS(lemma_tool_check(vcg, inst, wrong), BadPerturbation);
}
