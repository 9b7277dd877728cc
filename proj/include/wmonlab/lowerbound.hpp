#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "wmonlab/common.hpp"
#include "wmonlab/geometry.hpp"
#include "wmonlab/mechanisms.hpp"
#include "wmonlab/valuations.hpp"

namespace wmonlab {

// Restricted instance family: n-1 twin pairs where the primed twin is free
// for the t-player (t_i' = 0, t_ii' = t_i) and prohibitively expensive for
// its s-player (s_i' = n).
struct RestrictedInstance {
    int n = 2;
    std::vector<double> t;  // n-1 values, nonnegative
    std::vector<double> s;  // n-1 values in [0,1]
    double theta = 0.0;

    static RestrictedInstance make(int n, std::vector<double> t, std::vector<double> s,
                                   double theta = 0.0) {
        RestrictedInstance r{n, std::move(t), std::move(s),
                             theta > 0.0 ? theta : Instance::default_theta(n)};
        if (n < 2 || static_cast<int>(r.t.size()) != n - 1 ||
            static_cast<int>(r.s.size()) != n - 1)
            throw BadParameters("RestrictedInstance: need n-1 t and s values");
        for (double v : r.t)
            if (v < 0.0) throw BadParameters("RestrictedInstance: t values must be nonnegative");
        for (double v : r.s)
            if (v < 0.0 || v > 1.0)
                throw BadParameters("RestrictedInstance: s values must lie in [0,1]");
        return r;
    }

    Instance to_instance() const {
        Instance inst;
        inst.n = n;
        inst.theta = theta;
        for (int i = 0; i < n - 1; ++i) {
            inst.t.pairs.push_back({t[i], 0.0, t[i]});
            inst.s.emplace_back(s[i], static_cast<double>(n));
        }
        return inst;
    }
};

inline bool trivial_task(const RestrictedInstance& inst, int i, double delta0) {
    return inst.s[i] == 0.0 || inst.t[i] <= delta0;
}

inline std::vector<int> nontrivial_tasks(const RestrictedInstance& inst, double delta0) {
    std::vector<int> out;
    for (int i = 0; i < inst.n - 1; ++i)
        if (!trivial_task(inst, i, delta0)) out.push_back(i);
    return out;
}

// s-inefficiency: at least one non-trivial task, every non-trivial task has
// s_i/t_i > sqrt(n-1), and the mechanism gives them all to the s-players.
inline bool s_inefficient(const RestrictedInstance& inst, const FullAllocation& alloc,
                          double delta0) {
    const auto nt = nontrivial_tasks(inst, delta0);
    if (nt.empty()) return false;
    const double root = std::sqrt(static_cast<double>(inst.n - 1));
    for (int i : nt) {
        if (!(inst.s[i] / inst.t[i] > root)) return false;
        if (alloc.t_player_has({i, false})) return false;
    }
    return true;
}

// Closed-form optimum of a restricted instance: cap the s-machines at some
// candidate c and send every task with s_i > c to the t-player.
inline double optimal_makespan(const RestrictedInstance& inst) {
    std::vector<double> candidates = inst.s;
    candidates.push_back(0.0);
    double best = INF;
    for (double c : candidates) {
        double t_total = 0.0;
        for (int i = 0; i < inst.n - 1; ++i)
            if (inst.s[i] > c) t_total += inst.t[i];
        best = std::min(best, std::max(c, t_total));
    }
    return best;
}

namespace detail {

// Exact optimum when every task goes to the t-player or its own s-player:
// sweep the max s-machine cost over the achievable values and let each pair
// pick its cheapest t-contribution under that cap.
inline double optimal_makespan_paired(const Instance& inst) {
    const int m = inst.pair_count();
    std::vector<std::array<double, 4>> t_add(m), s_cost(m);
    std::vector<double> candidates = {0.0};
    for (int i = 0; i < m; ++i) {
        const TwoTaskValuation& p = inst.t.pairs[i];
        const auto [s1, s2] = inst.s[i];
        t_add[i] = {0.0, p.t1, p.t2, p.t12};          // t-player keeps mask
        s_cost[i] = {s1 + s2, s2, s1, 0.0};           // complement on s-machine
        for (double c : s_cost[i]) candidates.push_back(c);
    }
    double best = INF;
    for (double c : candidates) {
        double t_total = 0.0;
        for (int i = 0; i < m; ++i) {
            double cheapest = INF;
            for (int mask = 0; mask < 4; ++mask)
                if (s_cost[i][mask] <= c + EPS_CMP) cheapest = std::min(cheapest, t_add[i][mask]);
            t_total += cheapest;
        }
        best = std::min(best, std::max(c, t_total));
    }
    return best;
}

// Full n^m partition enumeration; only reachable when foreign (theta-priced)
// assignments could beat the paired optimum.
inline double optimal_makespan_full(const Instance& inst) {
    const int m = inst.task_count();
    double bits = m * std::log2(static_cast<double>(inst.n));
    if (bits > 25.0) throw TooLarge("optimal_makespan: full enumeration infeasible");
    std::vector<int> assign(m, 0);
    double best = INF;
    while (true) {
        FullAllocation a{assign};
        best = std::min(best, makespan(inst, a));
        int k = 0;
        while (k < m && ++assign[k] == inst.n) assign[k++] = 0;
        if (k == m) break;
    }
    return best;
}

}  // namespace detail

inline double optimal_makespan(const Instance& inst, int limit = 24) {
    if (inst.task_count() > limit) throw TooLarge("optimal_makespan: too many tasks");
    const double paired = detail::optimal_makespan_paired(inst);
    if (paired <= inst.theta + EPS_CMP) return paired;
    return detail::optimal_makespan_full(inst);
}

inline double approximation_ratio(const InstanceOracle& mech, const Instance& inst) {
    const double opt = optimal_makespan(inst);
    const double ms = makespan(inst, mech(inst));
    if (opt <= 0.0) {
        // Zero optimum: the ratio is 1 when the mechanism also achieves it
        // and undefined otherwise.
        if (ms <= EPS_CMP) return 1.0;
        throw DegenerateOptimum("approximation_ratio: optimum is zero");
    }
    return ms / opt;
}

// The uniform probe instance: t_i = 1/sqrt(n-1) - delta/n, s_i = 1.
inline RestrictedInstance uniform_probe_instance(int n, double delta) {
    if (n < 2) throw BadParameters("uniform_probe_instance: n must be at least 2");
    const double root = std::sqrt(static_cast<double>(n - 1));
    if (delta < 0.0 || delta >= n / root)
        throw BadParameters("uniform_probe_instance: delta out of range");
    const double alpha = 1.0 / root - delta / n;
    return RestrictedInstance::make(n, std::vector<double>(n - 1, alpha),
                                    std::vector<double>(n - 1, 1.0));
}

struct DirectWitness {
    RestrictedInstance inst;
    FullAllocation alloc;
    double mech_makespan = 0.0;
    double opt_makespan = 0.0;
    double ratio = 0.0;
};

struct SInefficientInstance {
    RestrictedInstance inst;
    FullAllocation alloc;
    double delta0 = 1e-6;
};

using SearchResult = std::variant<SInefficientInstance, DirectWitness>;

// Evaluates the mechanism on the uniform probe instance. All tasks to the
// t-player gives a direct ratio witness; otherwise the winners drop to a
// trivial value and the rest rise slightly, which must preserve the t-player's
// assignment (weak monotonicity) and yields an s-inefficient instance.
inline SearchResult find_s_inefficient(const InstanceOracle& mech, int n, double delta,
                                       double delta0 = 1e-6) {
    RestrictedInstance inst = uniform_probe_instance(n, delta);
    const FullAllocation alloc = mech(inst.to_instance());
    bool all_to_t = true;
    for (int i = 0; i < n - 1; ++i)
        if (!alloc.t_player_has({i, false})) all_to_t = false;
    if (all_to_t) {
        DirectWitness w{inst, alloc};
        w.mech_makespan = makespan(inst.to_instance(), alloc);
        w.opt_makespan = optimal_makespan(inst);
        w.ratio = w.mech_makespan / w.opt_makespan;
        return w;
    }
    if (delta <= 0.0)
        throw BadParameters("find_s_inefficient: delta must be positive for the perturbation");
    const double alpha = inst.t[0];
    RestrictedInstance perturbed = inst;
    for (int i = 0; i < n - 1; ++i)
        perturbed.t[i] = alloc.t_player_has({i, false}) ? delta0 / 2.0
                                                        : alpha + delta / (2.0 * n);
    const FullAllocation after = mech(perturbed.to_instance());
    for (int i = 0; i < n - 1; ++i)
        if (alloc.t_player_has({i, false}) != after.t_player_has({i, false}))
            throw WMONViolation("find_s_inefficient: perturbation changed task " +
                                std::to_string(i));
    if (!s_inefficient(perturbed, after, delta0))
        throw AssumptionViolated("find_s_inefficient: perturbed instance not s-inefficient");
    return SInefficientInstance{perturbed, after, delta0};
}

namespace detail {

// Critical value of task j's t-bid on the full instance, everything else
// fixed.
inline double task_boundary(const InstanceOracle& mech, RestrictedInstance inst, int j) {
    auto wins = [&](double t_j) {
        RestrictedInstance probe = inst;
        probe.t[j] = t_j;
        return mech(probe.to_instance()).t_player_has({j, false});
    };
    return win_threshold(wins, inst.theta);
}

// Boundary of task i as a function of its own s value; sweep beyond [0,1] to
// identify the slope even when s_i sits at the edge.
inline std::vector<BoundarySample> own_s_scan(const InstanceOracle& mech,
                                              RestrictedInstance inst, int i) {
    std::vector<double> sweep;
    for (int k = 0; k <= 10; ++k) sweep.push_back(k / 10.0);
    sweep.push_back(1.25);
    sweep.push_back(1.5);
    std::vector<BoundarySample> out;
    for (double s_i : sweep) {
        RestrictedInstance probe = inst;
        probe.s[i] = s_i;
        out.push_back({s_i, task_boundary(mech, probe, i)});
    }
    return out;
}

}  // namespace detail

struct TraceStep {
    std::string tag;     // nondecreasing | case_a | case_b | case_c | retrivialize | nudge
    int task = -1;
    double t_before = 0.0, t_after = 0.0;
    double s_before = 0.0, s_after = 0.0;
};

struct ReductionResult {
    SInefficientInstance inst;
    std::vector<TraceStep> steps;
};

// One reduction round: makes the first non-trivial task trivial while the
// second stays with its s-player, then re-trivializes any collateral flips.
inline ReductionResult reduce_nontrivial(const InstanceOracle& mech,
                                         const SInefficientInstance& current,
                                         double fit_tol = 1e-6) {
    const double delta0 = current.delta0;
    RestrictedInstance inst = current.inst;
    const auto nt = nontrivial_tasks(inst, delta0);
    if (nt.size() < 2)
        throw BadParameters("reduce_nontrivial: need at least two non-trivial tasks");
    const int i = nt[0], j = nt[1];
    const double root = std::sqrt(static_cast<double>(inst.n - 1));
    ReductionResult result;

    // Direction of task j's boundary in t_i decides the branch.
    std::vector<double> psi_j;
    for (double t_i : {delta0 / 2.0, inst.t[i] / 2.0, inst.t[i]}) {
        RestrictedInstance probe = inst;
        probe.t[i] = t_i;
        psi_j.push_back(detail::task_boundary(mech, probe, j));
    }
    TraceStep step;
    step.task = i;
    step.t_before = inst.t[i];
    step.s_before = inst.s[i];
    if (nondecreasing_samples(psi_j, 1e-6)) {
        step.tag = "nondecreasing";
        inst.t[i] = delta0 / 2.0;
    } else {
        // Quasi-bundling branch: fit the truncated-affine boundary of task i
        // in its own s value.
        const double psi_i = detail::task_boundary(mech, inst, i);
        if (psi_i <= 1e-6) {
            step.tag = "case_c";
            inst.t[i] = delta0 / 2.0;
        } else {
            BoundaryFit fit;
            try {
                fit = fit_truncated_affine(detail::own_s_scan(mech, inst, i), fit_tol);
            } catch (const InsufficientSamples& e) {
                throw NonLinearBoundary(std::string("reduce_nontrivial: ") + e.what());
            }
            if (!fit.linear)
                throw NonLinearBoundary("reduce_nontrivial: boundary fit residual " +
                                        std::to_string(fit.max_residual));
            if (fit.gamma >= 0.0) {
                step.tag = "case_a";
                inst.s[i] = 0.0;
            } else {
                step.tag = "case_b";
                inst.s[i] = std::clamp(-fit.gamma / fit.lambda, 0.0, inst.s[i]);
                inst.t[i] = delta0 / 2.0;
            }
        }
    }
    step.t_after = inst.t[i];
    step.s_after = inst.s[i];
    result.steps.push_back(step);

    // Re-trivialize collateral flips until the remaining non-trivial tasks
    // all sit with their s-players again.
    FullAllocation alloc = mech(inst.to_instance());
    for (int guard = 0; guard < inst.n; ++guard) {
        if (alloc.t_player_has({j, false}))
            throw WMONViolation("reduce_nontrivial: task " + std::to_string(j) +
                                " flipped to the t-player");
        int flipped = -1;
        for (int k : nontrivial_tasks(inst, delta0))
            if (alloc.t_player_has({k, false})) { flipped = k; break; }
        if (flipped < 0) break;
        TraceStep fix;
        fix.tag = "retrivialize";
        fix.task = flipped;
        fix.t_before = inst.t[flipped];
        fix.s_before = fix.s_after = inst.s[flipped];
        inst.t[flipped] = delta0 / 2.0;
        fix.t_after = inst.t[flipped];
        result.steps.push_back(fix);
        for (int k : nontrivial_tasks(inst, delta0)) {
            const double bump = std::min(delta0, (inst.s[k] / root - inst.t[k]) / 2.0);
            if (bump <= 0.0) continue;
            TraceStep nudge;
            nudge.tag = "nudge";
            nudge.task = k;
            nudge.t_before = inst.t[k];
            nudge.s_before = nudge.s_after = inst.s[k];
            inst.t[k] += bump;
            nudge.t_after = inst.t[k];
            result.steps.push_back(nudge);
        }
        alloc = mech(inst.to_instance());
    }
    if (!s_inefficient(inst, alloc, delta0))
        throw WMONViolation("reduce_nontrivial: result is not s-inefficient");
    if (nontrivial_tasks(inst, delta0).size() >= nt.size())
        throw WMONViolation("reduce_nontrivial: non-trivial task count did not decrease");
    result.inst = SInefficientInstance{inst, alloc, delta0};
    return result;
}

struct AdversaryConfig {
    double delta = 0.3;
    double delta0 = 1e-6;
    double fit_tol = 1e-6;
};

struct AdversaryReport {
    RestrictedInstance witness;
    FullAllocation alloc;
    double mech_makespan = 0.0;
    double opt_makespan = 0.0;
    double ratio = 0.0;
    bool direct = false;
    std::vector<TraceStep> trace;
    std::string certificate;  // nonempty when a pipeline step failed

    bool failed() const { return !certificate.empty(); }
};

// Full pipeline: uniform probe, perturbation, then reductions down to one
// non-trivial task. Failures become certificates in the report rather than
// exceptions.
inline AdversaryReport adversary(const InstanceOracle& mech, int n,
                                 const AdversaryConfig& config = {}) {
    AdversaryReport report;
    try {
        SearchResult found = find_s_inefficient(mech, n, config.delta, config.delta0);
        if (const auto* direct = std::get_if<DirectWitness>(&found)) {
            report.witness = direct->inst;
            report.alloc = direct->alloc;
            report.mech_makespan = direct->mech_makespan;
            report.opt_makespan = direct->opt_makespan;
            report.ratio = direct->ratio;
            report.direct = true;
            report.trace.push_back({"direct", -1, 0, 0, 0, 0});
            return report;
        }
        SInefficientInstance cur = std::get<SInefficientInstance>(found);
        report.trace.push_back({"perturb", -1, 0, 0, 0, 0});
        while (nontrivial_tasks(cur.inst, cur.delta0).size() > 1) {
            ReductionResult red = reduce_nontrivial(mech, cur, config.fit_tol);
            for (auto& s : red.steps) report.trace.push_back(std::move(s));
            cur = red.inst;
        }
        report.witness = cur.inst;
        report.alloc = cur.alloc;
        report.mech_makespan = makespan(cur.inst.to_instance(), cur.alloc);
        report.opt_makespan = optimal_makespan(cur.inst);
        report.ratio = report.mech_makespan / report.opt_makespan;
    } catch (const WMONViolation& e) {
        report.certificate = std::string("WMONViolation: ") + e.what();
    } catch (const NonLinearBoundary& e) {
        report.certificate = std::string("NonLinearBoundary: ") + e.what();
    }
    return report;
}

// --- high-approximation witnesses for the bounded-domain families ---

enum class HighApproxKind { Bundling, Constant, DegenerateOneTask };

struct HighApproxWitness {
    TwoTaskValuation t;
    AdditiveBid s;
    Alloc alloc = Alloc::Empty;
    double mech_makespan = 0.0;
    double opt_makespan = 0.0;
    double ratio = 0.0;
    bool unbounded = false;
};

inline double two_task_optimum(const TwoTaskValuation& t, const AdditiveBid& s) {
    double best = INF;
    for (Alloc a : {Alloc::Empty, Alloc::Task1, Alloc::Task2, Alloc::Both})
        best = std::min(best, std::max(alloc_cost(t, a), complement_cost(s, a)));
    return best;
}

namespace detail {

inline HighApproxWitness finish_witness(const TwoPlayerOracle& mech,
                                        const TwoTaskValuation& t, const AdditiveBid& s) {
    HighApproxWitness w;
    w.t = t;
    w.s = s;
    w.alloc = mech(t, s);
    w.mech_makespan = std::max(alloc_cost(t, w.alloc), complement_cost(s, w.alloc));
    w.opt_makespan = two_task_optimum(t, s);
    if (w.opt_makespan < EPS_CMP) {
        w.opt_makespan = EPS_CMP;  // the true optimum degenerates to 0
        w.unbounded = true;
    }
    w.ratio = w.mech_makespan / w.opt_makespan;
    return w;
}

}  // namespace detail

// Constructs the family's bad input and verifies the ratio is at least
// sqrt(B). Probes double-check that the oracle behaves like the declared
// family and throw FamilyMismatch otherwise.
inline HighApproxWitness high_approx_witness(HighApproxKind kind, const TwoPlayerOracle& mech,
                                             double B) {
    if (B <= 0.0) throw BadParameters("high_approx_witness: B must be positive");
    const double root = std::sqrt(B);
    switch (kind) {
        case HighApproxKind::Bundling: {
            const TwoTaskValuation t{root, 0.0, root};
            const AdditiveBid s{0.0, root};
            const Alloc a = mech(t, s);
            if (a == Alloc::Task1 || a == Alloc::Task2)
                throw FamilyMismatch("high_approx_witness: oracle split the bundle");
            return detail::finish_witness(mech, t, s);
        }
        case HighApproxKind::Constant: {
            const TwoTaskValuation probe = TwoTaskValuation::additive(root, root);
            const Alloc a = mech(probe, {1.0, 1.0});
            if (mech(TwoTaskValuation::additive(0.0, 0.0), {B, B}) != a)
                throw FamilyMismatch("high_approx_witness: allocation is not constant");
            switch (a) {
                case Alloc::Empty:  // all to the s-player; make s expensive
                    return detail::finish_witness(mech, probe, {B, B});
                case Alloc::Both:  // all to the t-player; optimum degenerates
                    return detail::finish_witness(mech, probe, {0.0, 0.0});
                case Alloc::Task1:
                    return detail::finish_witness(
                        mech, TwoTaskValuation::additive(0.0, 0.0), {B, B});
                case Alloc::Task2:
                    return detail::finish_witness(
                        mech, TwoTaskValuation::additive(0.0, 0.0), {B, B});
            }
            throw FamilyMismatch("high_approx_witness: unknown constant allocation");
        }
        case HighApproxKind::DegenerateOneTask: {
            // Task 2's assignment never depends on the bids.
            const TwoTaskValuation zero = TwoTaskValuation::additive(0.0, 0.0);
            const bool t_gets_2 = has_task2(mech(zero, {0.0, root}));
            const bool check = has_task2(mech(TwoTaskValuation::additive(0.0, B), {0.0, 0.0}));
            if (t_gets_2 != check)
                throw FamilyMismatch("high_approx_witness: task 2 allocation varies");
            if (t_gets_2)
                return detail::finish_witness(mech, TwoTaskValuation::additive(0.0, root),
                                              {0.0, 0.0});
            return detail::finish_witness(mech, zero, {0.0, root});
        }
    }
    throw BadParameters("high_approx_witness: unknown family");
}

}  // namespace wmonlab
