#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "wmonlab/common.hpp"
#include "wmonlab/mechanisms.hpp"
#include "wmonlab/valuations.hpp"

namespace wmonlab {

struct BidProfile {
    TwoTaskValuation t;
    AdditiveBid s;
};

// A single-player deviation: profiles a and b differ only in `player`'s
// coordinates (0 = t-player, 1 = s-player).
struct Probe {
    int player = 0;
    BidProfile a;
    BidProfile b;
};

struct ViolationWitness {
    int player = 0;
    BidProfile a;
    BidProfile b;
    Alloc alloc_a = Alloc::Empty;
    Alloc alloc_b = Alloc::Empty;
    double lhs = 0.0;
    double rhs = 0.0;
};

inline double player_cost(const BidProfile& bids, int player, Alloc a) {
    return player == 0 ? alloc_cost(bids.t, a) : complement_cost(bids.s, a);
}

namespace detail {

inline bool same_t(const TwoTaskValuation& a, const TwoTaskValuation& b) {
    return a.t1 == b.t1 && a.t2 == b.t2 && a.t12 == b.t12;
}

inline void check_probe(const Probe& p) {
    const bool t_same = same_t(p.a.t, p.b.t);
    const bool s_same = p.a.s.s1 == p.b.s.s1 && p.a.s.s2 == p.b.s.s2;
    if (p.player == 0 ? !s_same : !t_same)
        throw BadProbe("probe varies a player other than the named one");
}

inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("WMONLAB_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

}  // namespace detail

inline std::optional<ViolationWitness> check_one_probe(const TwoPlayerOracle& oracle,
                                                       const Probe& p) {
    detail::check_probe(p);
    const Alloc aa = oracle(p.a.t, p.a.s);
    const Alloc ab = oracle(p.b.t, p.b.s);
    const double lhs = player_cost(p.a, p.player, aa) - player_cost(p.a, p.player, ab);
    const double rhs = player_cost(p.b, p.player, aa) - player_cost(p.b, p.player, ab);
    if (lhs > rhs + EPS_CMP)
        return ViolationWitness{p.player, p.a, p.b, aa, ab, lhs, rhs};
    return std::nullopt;
}

// Scans the probes in order and reports the first WMON violation. Evaluation
// is chunked across workers (capped by WMONLAB_THREADS); the result is the
// lowest-index violation regardless of scheduling.
inline std::optional<ViolationWitness> wmon_check(const TwoPlayerOracle& oracle, int player,
                                                  const std::vector<Probe>& probes) {
    for (const Probe& p : probes) {
        if (p.player != player) throw BadProbe("probe player does not match the named player");
        detail::check_probe(p);
    }
    const unsigned workers = std::min<std::size_t>(detail::worker_count(), probes.size() / 64 + 1);
    if (workers <= 1) {
        for (const Probe& p : probes)
            if (auto w = check_one_probe(oracle, p)) return w;
        return std::nullopt;
    }
    std::atomic<std::size_t> best_index{probes.size()};
    std::vector<std::optional<ViolationWitness>> found(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (probes.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(probes.size(), lo + chunk);
            for (std::size_t i = lo; i < hi && i < best_index.load(); ++i) {
                if (auto wit = check_one_probe(oracle, probes[i])) {
                    std::size_t cur = best_index.load();
                    while (i < cur && !best_index.compare_exchange_weak(cur, i)) {}
                    if (i <= best_index.load()) found[w] = wit;
                    break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    const std::size_t idx = best_index.load();
    if (idx >= probes.size()) return std::nullopt;
    return check_one_probe(oracle, probes[idx]);
}

// Exhaustive grid: for the named player, all ordered bid pairs drawn from the
// axis cross-product, against every opponent grid bid. t bids are additive.
inline std::vector<Probe> exhaustive_grid_probes(int player, const std::vector<double>& axis) {
    std::vector<TwoTaskValuation> t_bids;
    std::vector<AdditiveBid> s_bids;
    for (double x : axis)
        for (double y : axis) {
            t_bids.push_back(TwoTaskValuation::additive(x, y));
            s_bids.push_back({x, y});
        }
    std::vector<Probe> probes;
    if (player == 0) {
        for (const auto& s : s_bids)
            for (const auto& ta : t_bids)
                for (const auto& tb : t_bids)
                    probes.push_back({0, {ta, s}, {tb, s}});
    } else {
        for (const auto& t : t_bids)
            for (const auto& sa : s_bids)
                for (const auto& sb : s_bids)
                    probes.push_back({1, {t, sa}, {t, sb}});
    }
    return probes;
}

// Seeded random probes. With eps_band > 0, t bids get a t12 offset drawn near
// the edges of the band (|t12 - t1 - t2| close to eps_band), clamped to stay
// monotone.
inline std::vector<Probe> random_probes(int player, std::uint64_t seed, int count,
                                        double t_max, double s_max, double eps_band = 0.0) {
    Rng rng(seed);
    auto draw_t = [&] {
        double t1 = rng.uniform(0.0, t_max);
        double t2 = rng.uniform(0.0, t_max);
        double t12 = t1 + t2;
        if (eps_band > 0.0) {
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            t12 += sign * eps_band * (1.0 - 0.1 * rng.uniform());
            t12 = std::max(t12, std::max(t1, t2));
        }
        return TwoTaskValuation{t1, t2, t12};
    };
    auto draw_s = [&] { return AdditiveBid{rng.uniform(0.0, s_max), rng.uniform(0.0, s_max)}; };
    std::vector<Probe> probes;
    probes.reserve(count);
    for (int i = 0; i < count; ++i) {
        if (player == 0) {
            AdditiveBid s = draw_s();
            probes.push_back({0, {draw_t(), s}, {draw_t(), s}});
        } else {
            TwoTaskValuation t = draw_t();
            probes.push_back({1, {t, draw_s()}, {t, draw_s()}});
        }
    }
    return probes;
}

struct VirtualPayments {
    double p_empty = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double p12 = 0.0;

    PaymentProfile as_profile() const { return {p_empty, p1, p2, p12}; }
};

// Extra facts observed while recovering payments, used by the region-figure
// analysis.
struct RecoveryDetail {
    VirtualPayments payments;
    bool r12_nonempty = false;
    Alloc diagonal_exit = Alloc::Empty;  // region entered when leaving R12 on the diagonal
};

inline double default_probe_ceiling(const TwoTaskValuation& t, const AdditiveBid& s) {
    return 10.0 * (t.t1 + t.t2 + t.t12 + s.s1 + s.s2) + 10.0;
}

inline RecoveryDetail virtual_payments_detailed(const AllocAtS& alloc, double probe_ceiling,
                                                double tol = 1e-7) {
    const double C = probe_ceiling;
    if (alloc({C, C, C}) != Alloc::Empty)
        throw AssumptionViolated("virtual_payments: no empty allocation below the probe ceiling");

    // P_1 = sup{ t_1 : (t_1, L, t_1+L) in R_1 }, found by bisection.
    auto bisect = [&](const std::function<bool(double)>& pred) {
        if (!pred(0.0)) return 0.0;
        double lo = 0.0, hi = C;
        if (pred(hi)) throw AssumptionViolated("virtual_payments: threshold above probe ceiling");
        while (hi - lo > tol) {
            double mid = 0.5 * (lo + hi);
            (pred(mid) ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    RecoveryDetail out;
    out.payments.p1 = bisect([&](double x) { return has_task1(alloc({x, C, x + C})); });
    out.payments.p2 = bisect([&](double x) { return has_task2(alloc({C, x, x + C})); });

    // P_12 along the diagonal ray (x/2, x/2, x), combined with the boundary
    // identities for whichever region the ray exits into.
    auto diag = [&](double x) { return alloc({x / 2.0, x / 2.0, x}); };
    if (diag(boundary_nudge()) == Alloc::Both) {
        out.r12_nonempty = true;
        double lo = boundary_nudge(), hi = C;
        if (diag(hi) == Alloc::Both)
            throw AssumptionViolated("virtual_payments: R_12 reaches the probe ceiling");
        while (hi - lo > tol) {
            double mid = 0.5 * (lo + hi);
            (diag(mid) == Alloc::Both ? lo : hi) = mid;
        }
        const double cross = 0.5 * (lo + hi);
        out.diagonal_exit = diag(hi + boundary_nudge());
        switch (out.diagonal_exit) {
            case Alloc::Task1: out.payments.p12 = out.payments.p1 + cross / 2.0; break;
            case Alloc::Task2: out.payments.p12 = out.payments.p2 + cross / 2.0; break;
            default: out.payments.p12 = cross; break;
        }
    }
    out.payments.p12 = std::max({out.payments.p12, out.payments.p1, out.payments.p2});
    return out;
}

inline VirtualPayments virtual_payments(const AllocAtS& alloc, double probe_ceiling,
                                        double tol = 1e-7) {
    return virtual_payments_detailed(alloc, probe_ceiling, tol).payments;
}

inline AllocAtS fix_s(const TwoPlayerOracle& oracle, const AdditiveBid& s) {
    return [oracle, s](const TwoTaskValuation& t) { return oracle(t, s); };
}

struct PaidMechanism {
    TwoPlayerOracle alloc;
    std::function<PaymentProfile(const AdditiveBid&)> pay;
};

struct DeviationReport {
    double max_gain = -INF;
    BidProfile truth;
    TwoTaskValuation deviation;
};

// Max utility gain of the t-player from any grid deviation; nonpositive gain
// (within EPS_CMP) certifies truthfulness on the grid.
inline DeviationReport verify_payment_truthfulness(const PaidMechanism& mech,
                                                   const std::vector<TwoTaskValuation>& t_grid,
                                                   const std::vector<AdditiveBid>& s_grid) {
    DeviationReport report;
    report.max_gain = 0.0;
    for (const AdditiveBid& s : s_grid) {
        const PaymentProfile pay = mech.pay(s);
        for (const TwoTaskValuation& t : t_grid) {
            const Alloc truthful = mech.alloc(t, s);
            const double u_truth = pay.of(truthful) - alloc_cost(t, truthful);
            for (const TwoTaskValuation& dev : t_grid) {
                const Alloc a = mech.alloc(dev, s);
                const double gain = (pay.of(a) - alloc_cost(t, a)) - u_truth;
                if (gain > report.max_gain) {
                    report.max_gain = gain;
                    report.truth = {t, s};
                    report.deviation = dev;
                }
            }
        }
    }
    return report;
}

// Restriction of an n-machine mechanism to one twin pair, with all other
// coordinates fixed: a two-player oracle over (t_i, t_i', t_ii') x (s_i, s_i').
inline TwoPlayerOracle cut_restriction(const InstanceOracle& mech, int pair,
                                       const Instance& fixed_others) {
    return [mech, pair, fixed_others](const TwoTaskValuation& t, const AdditiveBid& s) {
        Instance inst = fixed_others;
        inst.t.pairs[pair] = t;
        inst.s[pair] = {s.s1, s.s2};
        const FullAllocation a = mech(inst);
        const bool one = a.t_player_has({pair, false});
        const bool two = a.t_player_has({pair, true});
        if (one && two) return Alloc::Both;
        if (one) return Alloc::Task1;
        if (two) return Alloc::Task2;
        return Alloc::Empty;
    };
}

namespace detail {

inline std::vector<double> machine_bid_vector(const Instance& inst, int machine) {
    std::vector<double> bids;
    for (int i = 0; i < inst.pair_count(); ++i)
        for (int primed = 0; primed < 2; ++primed)
            bids.push_back(inst.machine_task_cost(machine, {i, primed != 0}));
    return bids;
}

}  // namespace detail

// Checks the classic perturbation tool: strictly lowering a machine's bid on
// every task it won and strictly raising it on every other (changeable) task
// must not change that machine's assignment. Returns true iff the assignment
// is identical before and after.
inline bool lemma_tool_check(const InstanceOracle& mech, const Instance& inst,
                             const Instance& perturbed) {
    if (inst.n != perturbed.n || inst.pair_count() != perturbed.pair_count())
        throw BadPerturbation("instances differ in shape");
    for (int i = 0; i < inst.pair_count(); ++i) {
        if (!approx_eq(inst.t.pairs[i].t12, inst.t.pairs[i].t1 + inst.t.pairs[i].t2) ||
            !approx_eq(perturbed.t.pairs[i].t12,
                       perturbed.t.pairs[i].t1 + perturbed.t.pairs[i].t2))
            throw BadPerturbation("bids must be additive");
    }
    int changed = -1;
    for (int m = 0; m < inst.n; ++m) {
        if (detail::machine_bid_vector(inst, m) != detail::machine_bid_vector(perturbed, m)) {
            if (changed >= 0) throw BadPerturbation("more than one machine's bid changed");
            changed = m;
        }
    }
    if (changed < 0) throw BadPerturbation("no machine's bid changed");

    const FullAllocation before = mech(inst);
    for (int i = 0; i < inst.pair_count(); ++i) {
        for (int primed = 0; primed < 2; ++primed) {
            const TaskId id{i, primed != 0};
            const double old_bid = inst.machine_task_cost(changed, id);
            const double new_bid = perturbed.machine_task_cost(changed, id);
            if (changed >= 1 && i != changed - 1) continue;  // theta slots cannot move
            if (before.of(id) == changed) {
                if (!(new_bid < old_bid))
                    throw BadPerturbation("won task bid did not strictly decrease");
            } else if (!(new_bid > old_bid)) {
                throw BadPerturbation("lost task bid did not strictly increase");
            }
        }
    }
    const FullAllocation after = mech(perturbed);
    for (int task = 0; task < inst.task_count(); ++task) {
        const bool was = before.machine[task] == changed;
        const bool is = after.machine[task] == changed;
        if (was != is) return false;
    }
    return true;
}

}  // namespace wmonlab
