#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "wmonlab/common.hpp"
#include "wmonlab/curve.hpp"
#include "wmonlab/valuations.hpp"

namespace wmonlab {

// Allocation of the t-player in the two-task view. The complement goes to the
// s-player; both tasks are always allocated.
enum class Alloc { Empty = 0, Task1 = 1, Task2 = 2, Both = 3 };

inline bool has_task1(Alloc a) { return a == Alloc::Task1 || a == Alloc::Both; }
inline bool has_task2(Alloc a) { return a == Alloc::Task2 || a == Alloc::Both; }

inline std::string to_string(Alloc a) {
    switch (a) {
        case Alloc::Empty: return "empty";
        case Alloc::Task1: return "1";
        case Alloc::Task2: return "2";
        case Alloc::Both: return "12";
    }
    return "?";
}

// Cost of the t-player for an allocation.
inline double alloc_cost(const TwoTaskValuation& t, Alloc a) {
    switch (a) {
        case Alloc::Empty: return 0.0;
        case Alloc::Task1: return t.t1;
        case Alloc::Task2: return t.t2;
        case Alloc::Both: return t.t12;
    }
    return 0.0;
}

struct AdditiveBid {
    double s1 = 0.0;
    double s2 = 0.0;
};

// Cost of the additive s-player when the t-player holds `a`.
inline double complement_cost(const AdditiveBid& s, Alloc a) {
    switch (a) {
        case Alloc::Empty: return s.s1 + s.s2;
        case Alloc::Task1: return s.s2;
        case Alloc::Task2: return s.s1;
        case Alloc::Both: return 0.0;
    }
    return 0.0;
}

using TwoPlayerOracle = std::function<Alloc(const TwoTaskValuation&, const AdditiveBid&)>;
using AllocAtS = std::function<Alloc(const TwoTaskValuation&)>;

struct AffineParams {
    double mu_t = 1.0;
    double mu_s = 1.0;
    double gamma12 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma_empty = 0.0;

    void check() const {
        if (mu_t <= 0.0 || mu_s <= 0.0)
            throw BadParameters("AffineParams: multipliers must be positive");
    }
    double gluing_threshold() const { return std::min(gamma1, gamma2) - gamma_empty; }
};

// Argmin over the four affine expressions; ties (within EPS_CMP) broken by the
// fixed preference order empty < 1 < 2 < 12.
inline Alloc allocate_affine(const AffineParams& p, const TwoTaskValuation& t,
                             const AdditiveBid& s) {
    p.check();
    const std::array<double, 4> value = {
        p.mu_s * (s.s1 + s.s2) + p.gamma_empty,        // empty
        p.mu_t * t.t1 + p.mu_s * s.s2 + p.gamma1,      // 1
        p.mu_s * s.s1 + p.mu_t * t.t2 + p.gamma2,      // 2
        p.mu_t * t.t12 + p.gamma12,                    // 12
    };
    const std::array<Alloc, 4> order = {Alloc::Empty, Alloc::Task1, Alloc::Task2, Alloc::Both};
    double best = INF;
    for (double v : value) best = std::min(best, v);
    if (best == INF) throw BadParameters("allocate_affine: all expressions infinite");
    for (int i = 0; i < 4; ++i)
        if (value[i] <= best + EPS_CMP) return order[i];
    return Alloc::Empty;  // unreachable
}

inline void check_gluing(const AffineParams& p, const MonotoneCurve& xi) {
    const double thr = p.gluing_threshold();
    if (thr <= 0.0) return;  // bundling branch never active
    const double lhs = std::min(p.gamma1, p.gamma2) - p.gamma12;
    if (std::fabs(lhs - xi(thr)) > EPS_CMP)
        throw GluingViolation("relaxed affine minimizer: boundary condition violated");
}

inline Alloc allocate_relaxed(const AffineParams& p, const MonotoneCurve& xi,
                              const TwoTaskValuation& t, const AdditiveBid& s) {
    p.check();
    check_gluing(p, xi);
    const double x = p.mu_s * (s.s1 + s.s2);
    if (x >= p.gluing_threshold()) return allocate_affine(p, t, s);
    return p.mu_t * t.t12 < xi(x) ? Alloc::Both : Alloc::Empty;
}

inline Alloc allocate_one_dimensional(const MonotoneCurve& xi, const TwoTaskValuation& t,
                                      const AdditiveBid& s) {
    return t.t12 < xi(s.s1 + s.s2) ? Alloc::Both : Alloc::Empty;
}

// Only valid for additive bids; each task compares its own two bids.
inline Alloc allocate_task_independent(const MonotoneCurve& phi, const MonotoneCurve& eta,
                                       const TwoTaskValuation& t, const AdditiveBid& s) {
    const bool one = t.t1 < phi(s.s1);
    const bool two = t.t2 < eta(s.s2);
    if (one && two) return Alloc::Both;
    if (one) return Alloc::Task1;
    if (two) return Alloc::Task2;
    return Alloc::Empty;
}

inline Alloc allocate_constant(Alloc fixed, const TwoTaskValuation&, const AdditiveBid&) {
    return fixed;
}

// Threshold payments to the t-player that make the affine minimizer truthful.
struct PaymentProfile {
    double p_empty = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double p12 = 0.0;

    double of(Alloc a) const {
        switch (a) {
            case Alloc::Empty: return p_empty;
            case Alloc::Task1: return p1;
            case Alloc::Task2: return p2;
            case Alloc::Both: return p12;
        }
        return 0.0;
    }
};

inline PaymentProfile payments_affine(const AffineParams& p, const AdditiveBid& s) {
    p.check();
    if (std::isinf(p.gamma1) && p.gamma1 < 0)
        throw UnboundedPayment("payments_affine: gamma1 = -inf");
    if (std::isinf(p.gamma2) && p.gamma2 < 0)
        throw UnboundedPayment("payments_affine: gamma2 = -inf");
    if (std::isinf(p.gamma12) && p.gamma12 < 0)
        throw UnboundedPayment("payments_affine: gamma12 = -inf");
    PaymentProfile out;
    out.p1 = std::max(0.0, (p.mu_s * s.s1 + p.gamma_empty - p.gamma1) / p.mu_t);
    out.p2 = std::max(0.0, (p.mu_s * s.s2 + p.gamma_empty - p.gamma2) / p.mu_t);
    out.p12 = std::max({out.p1, out.p2,
                        (p.mu_s * (s.s1 + s.s2) + p.gamma_empty - p.gamma12) / p.mu_t});
    return out;
}

// The artifact's linear family on restricted instances: every primed task goes
// to the t-player; task i goes to the t-player iff t_i < max(0, lambda_i s_i +
// gamma_i), ties to the s-player.
struct PerTaskLinearParams {
    std::vector<double> lambda;  // one per pair; size 1 broadcasts
    std::vector<double> gamma;

    double lambda_of(int i) const { return lambda.size() == 1 ? lambda[0] : lambda.at(i); }
    double gamma_of(int i) const { return gamma.size() == 1 ? gamma[0] : gamma.at(i); }
    double threshold(int i, double s_i) const {
        return std::max(0.0, lambda_of(i) * s_i + gamma_of(i));
    }
};

// Full-instance allocation: machine index per task, indexed 2*pair + primed.
struct FullAllocation {
    std::vector<int> machine;

    int of(const TaskId& id) const { return machine[2 * id.pair + (id.primed ? 1 : 0)]; }
    void set(const TaskId& id, int m) { machine[2 * id.pair + (id.primed ? 1 : 0)] = m; }
    bool t_player_has(const TaskId& id) const { return of(id) == 0; }
};

using InstanceOracle = std::function<FullAllocation(const Instance&)>;

inline FullAllocation allocate_per_task_linear(const PerTaskLinearParams& params,
                                               const Instance& inst) {
    FullAllocation a;
    a.machine.assign(inst.task_count(), 0);
    for (int i = 0; i < inst.pair_count(); ++i) {
        if (params.lambda_of(i) < 0.0)
            throw BadParameters("per_task_linear: lambda must be nonnegative");
        const double t_i = inst.t.pairs[i].t1;
        a.machine[2 * i] = t_i < params.threshold(i, inst.s[i].first) ? 0 : i + 1;
        a.machine[2 * i + 1] = 0;  // primed twin always to the t-player
    }
    return a;
}

// Machine cost vector under a full allocation.
inline std::vector<double> machine_costs(const Instance& inst, const FullAllocation& a) {
    std::vector<double> cost(inst.n, 0.0);
    std::vector<TaskId> t_set;
    for (int i = 0; i < inst.pair_count(); ++i) {
        for (int primed = 0; primed < 2; ++primed) {
            TaskId id{i, primed != 0};
            int m = a.of(id);
            if (m == 0)
                t_set.push_back(id);
            else
                cost[m] += inst.machine_task_cost(m, id);
        }
    }
    cost[0] = eval_cost(inst.t, t_set);
    return cost;
}

inline double makespan(const Instance& inst, const FullAllocation& a) {
    double ms = 0.0;
    for (double c : machine_costs(inst, a)) ms = std::max(ms, c);
    return ms;
}

// Tagged description of one mechanism family, as read from mechanism JSON.
struct AffineMinSpec { AffineParams params; };
struct RelaxedAffineMinSpec { AffineParams params; MonotoneCurve xi; };
struct BundlingSpec { MonotoneCurve xi; };
struct TaskIndependentSpec { MonotoneCurve phi; MonotoneCurve eta; };
struct ConstantSpec { Alloc fixed = Alloc::Empty; };
struct PerTaskLinearSpec { PerTaskLinearParams params; };

using MechanismSpec = std::variant<AffineMinSpec, RelaxedAffineMinSpec, BundlingSpec,
                                   TaskIndependentSpec, ConstantSpec, PerTaskLinearSpec>;

// Two-player oracle for the 2-task families. PerTaskLinear is an n-machine
// mechanism and has no two-player view here.
inline TwoPlayerOracle two_player_oracle(const MechanismSpec& spec) {
    struct Visitor {
        TwoPlayerOracle operator()(const AffineMinSpec& m) const {
            return [m](const TwoTaskValuation& t, const AdditiveBid& s) {
                return allocate_affine(m.params, t, s);
            };
        }
        TwoPlayerOracle operator()(const RelaxedAffineMinSpec& m) const {
            return [m](const TwoTaskValuation& t, const AdditiveBid& s) {
                return allocate_relaxed(m.params, m.xi, t, s);
            };
        }
        TwoPlayerOracle operator()(const BundlingSpec& m) const {
            return [m](const TwoTaskValuation& t, const AdditiveBid& s) {
                return allocate_one_dimensional(m.xi, t, s);
            };
        }
        TwoPlayerOracle operator()(const TaskIndependentSpec& m) const {
            return [m](const TwoTaskValuation& t, const AdditiveBid& s) {
                return allocate_task_independent(m.phi, m.eta, t, s);
            };
        }
        TwoPlayerOracle operator()(const ConstantSpec& m) const {
            return [fixed = m.fixed](const TwoTaskValuation& t, const AdditiveBid& s) {
                return allocate_constant(fixed, t, s);
            };
        }
        TwoPlayerOracle operator()(const PerTaskLinearSpec&) const {
            throw BadParameters("per_task_linear has no two-player view");
        }
    };
    return std::visit(Visitor{}, spec);
}

inline InstanceOracle instance_oracle(const MechanismSpec& spec) {
    if (const auto* m = std::get_if<PerTaskLinearSpec>(&spec)) {
        return [params = m->params](const Instance& inst) {
            return allocate_per_task_linear(params, inst);
        };
    }
    throw BadParameters("only per_task_linear mechanisms run on full instances");
}

inline PerTaskLinearSpec vcg_spec() { return PerTaskLinearSpec{{{1.0}, {0.0}}}; }

}  // namespace wmonlab
