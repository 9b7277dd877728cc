#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "wmonlab/common.hpp"

namespace wmonlab {

// Cost of a machine for the subsets of a twin-task pair: {1}, {2}, {1,2}.
struct TwoTaskValuation {
    double t1 = 0.0;
    double t2 = 0.0;
    double t12 = 0.0;

    bool monotone() const {
        return t1 >= 0.0 && t2 >= 0.0 && t12 >= t1 - EPS_CMP && t12 >= t2 - EPS_CMP;
    }
    bool submodular() const { return monotone() && t12 <= t1 + t2 + EPS_CMP; }

    static TwoTaskValuation additive(double a, double b) { return {a, b, a + b}; }
};

// Valuation domains for a single two-task bid.
struct DomainAll {};                       // all monotone valuations
struct DomainAdditive {};                  // t12 = t1 + t2
struct DomainAdditiveBounded { double B; };
struct DomainEpsAdditive { double eps; };  // t12 in the open eps-band around additivity
struct DomainSubmodular {};
struct DomainSubmodularEps { double eps; };

using DomainSpec = std::variant<DomainAll, DomainAdditive, DomainAdditiveBounded,
                                DomainEpsAdditive, DomainSubmodular, DomainSubmodularEps>;

inline bool domain_check(const TwoTaskValuation& v, const DomainSpec& d) {
    if (!v.monotone()) throw NonMonotone("domain_check: valuation is not monotone");
    struct Visitor {
        const TwoTaskValuation& v;
        bool operator()(const DomainAll&) const { return true; }
        bool operator()(const DomainAdditive&) const {
            return approx_eq(v.t12, v.t1 + v.t2);
        }
        bool operator()(const DomainAdditiveBounded& d) const {
            if (d.B <= 0.0) throw BadParameters("domain_check: B must be positive");
            return approx_eq(v.t12, v.t1 + v.t2) && v.t1 < d.B && v.t2 < d.B;
        }
        bool operator()(const DomainEpsAdditive& d) const {
            if (d.eps <= 0.0) throw BadParameters("domain_check: eps must be positive");
            // Strictly open interval; boundary points are rejected.
            return v.t12 > v.t1 + v.t2 - d.eps && v.t12 < v.t1 + v.t2 + d.eps;
        }
        bool operator()(const DomainSubmodular&) const { return v.t12 <= v.t1 + v.t2; }
        bool operator()(const DomainSubmodularEps& d) const {
            return (*this)(DomainSubmodular{}) && (*this)(DomainEpsAdditive{d.eps});
        }
    };
    return std::visit(Visitor{v}, d);
}

// Task identifier inside a pair-structured instance: pair index (0-based) and
// whether the task is the primed twin.
struct TaskId {
    int pair = 0;
    bool primed = false;

    bool operator==(const TaskId&) const = default;
};

// The t-player's cost function: additive across pairs, arbitrary (submodular)
// within each pair.
struct PairwiseValuation {
    std::vector<TwoTaskValuation> pairs;

    int pair_count() const { return static_cast<int>(pairs.size()); }
};

inline double eval_cost(const PairwiseValuation& v, const std::vector<TaskId>& task_set) {
    // has[i]: 0 none, 1 task i, 2 task i', 3 both
    std::vector<int> has(v.pairs.size(), 0);
    for (const TaskId& id : task_set) {
        if (id.pair < 0 || id.pair >= v.pair_count())
            throw UnknownTask("eval_cost: task pair index out of range");
        has[id.pair] |= id.primed ? 2 : 1;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < has.size(); ++i) {
        const TwoTaskValuation& p = v.pairs[i];
        switch (has[i]) {
            case 1: total += p.t1; break;
            case 2: total += p.t2; break;
            case 3: total += p.t12; break;
            default: break;
        }
    }
    return total;
}

// A full n-machine instance: machine 0 is the t-player; machine i+1 is the
// s-player associated with pair i. s-players pay theta for any task outside
// their own pair.
struct Instance {
    int n = 2;
    double theta = 0.0;
    PairwiseValuation t;
    std::vector<std::pair<double, double>> s;  // (s_i, s_i') per pair

    static double default_theta(int n) { return 100.0 * n * n; }

    int pair_count() const { return t.pair_count(); }
    int task_count() const { return 2 * pair_count(); }

    // Cost of machine `m` for a single task.
    double machine_task_cost(int m, const TaskId& id) const {
        if (m == 0) {
            const TwoTaskValuation& p = t.pairs[id.pair];
            return id.primed ? p.t2 : p.t1;
        }
        if (m - 1 == id.pair) return id.primed ? s[id.pair].second : s[id.pair].first;
        return theta;
    }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_instance(const Instance& inst) {
    ValidationReport r;
    if (inst.n < 2) r.violations.push_back("BadMachineCount: n must be at least 2");
    if (inst.pair_count() != inst.n - 1)
        r.violations.push_back("BadPairCount: expected n-1 pairs");
    if (inst.theta < 4.0 * inst.n * inst.n)
        r.violations.push_back("ThetaTooSmall: theta < 4*n^2");
    if (static_cast<int>(inst.s.size()) != inst.pair_count())
        r.violations.push_back("BadBidCount: one s-bid pair per twin pair required");
    for (int i = 0; i < inst.pair_count(); ++i) {
        const TwoTaskValuation& p = inst.t.pairs[i];
        if (!p.monotone()) r.violations.push_back("PairNotMonotone: pair " + std::to_string(i));
        if (!p.submodular())
            r.violations.push_back("PairNotSubmodular: pair " + std::to_string(i));
        if (i < static_cast<int>(inst.s.size())) {
            if (inst.s[i].first < 0.0 || inst.s[i].second < 0.0)
                r.violations.push_back("NegativeBid: pair " + std::to_string(i));
        }
    }
    return r;
}

}  // namespace wmonlab
