#pragma once

// Shared fixtures for the test suites: reference mechanism families, control
// oracles, and independent brute-force oracles used to pin expected values.

#include <algorithm>
#include <cmath>
#include <vector>

#include "wmonlab/curve.hpp"
#include "wmonlab/lowerbound.hpp"
#include "wmonlab/mechanisms.hpp"
#include "wmonlab/truthfulness.hpp"
#include "wmonlab/valuations.hpp"

namespace testutil {

using namespace wmonlab;

// sqrt curve with exact breakpoints at the multiples of (hi / segments).
inline MonotoneCurve sqrt_curve(double hi = 2.0, int segments = 200) {
    return MonotoneCurve::sampled([](double x) { return std::sqrt(x); }, 0.0, hi, segments);
}

// Relaxed-affine family with gamma1 = gamma2 = 1, gamma12 = gamma_empty = 0
// and xi = sqrt; the gluing condition holds because sqrt(1) = 1.
inline RelaxedAffineMinSpec fig2_family() {
    AffineParams p;
    p.gamma1 = 1.0;
    p.gamma2 = 1.0;
    return RelaxedAffineMinSpec{p, sqrt_curve()};
}

inline AffineParams random_affine_params(Rng& rng) {
    AffineParams p;
    p.mu_t = rng.uniform(0.5, 2.0);
    p.mu_s = rng.uniform(0.5, 2.0);
    p.gamma12 = rng.uniform(-1.0, 1.0);
    p.gamma1 = rng.uniform(-1.0, 1.0);
    p.gamma2 = rng.uniform(-1.0, 1.0);
    p.gamma_empty = rng.uniform(-1.0, 1.0);
    return p;
}

// Control oracle violating WMON: task 1 goes to the t-player when its own bid
// is HIGH.
inline TwoPlayerOracle anti_monotone_oracle() {
    return [](const TwoTaskValuation& t, const AdditiveBid& s) {
        return t.t1 > s.s1 ? Alloc::Task1 : Alloc::Empty;
    };
}

// n-machine control: task 0 to the t-player iff its bid exceeds a fixed
// threshold (anti-monotone); other tasks always with their s-players; primed
// twins with the t-player.
inline InstanceOracle anti_monotone_instance_oracle(double threshold = 0.2) {
    return [threshold](const Instance& inst) {
        FullAllocation a;
        a.machine.assign(inst.task_count(), 0);
        for (int i = 0; i < inst.pair_count(); ++i) {
            const bool t_wins = i == 0 && inst.t.pairs[i].t1 > threshold;
            a.machine[2 * i] = t_wins ? 0 : i + 1;
        }
        return a;
    };
}

// Test-subject linear family with a genuinely coupled pair: tasks 0 and 1 are
// allocated jointly by a 2x2 affine-minimizer rule over (t_0, t_1, s_0, s_1);
// the remaining tasks use independent thresholds; primed twins always go to
// the t-player. The coupled boundaries are exactly truncated affine with
// slope mu in the own s value.
struct JointAffinePair {
    double mu = 1.0;  // weight of the s bids inside the joint rule
    double g_empty = 0.0, g1 = 0.0, g2 = 0.0, g12 = 0.0;
    double tail_lambda = 1.0, tail_gamma = 0.0;  // rule for tasks >= 2

    InstanceOracle oracle() const {
        JointAffinePair self = *this;
        return [self](const Instance& inst) {
            FullAllocation a;
            a.machine.assign(inst.task_count(), 0);
            const double t0 = inst.t.pairs[0].t1, t1 = inst.t.pairs[1].t1;
            const double s0 = self.mu * inst.s[0].first, s1 = self.mu * inst.s[1].first;
            const double val[4] = {s0 + s1 + self.g_empty, t0 + s1 + self.g1,
                                   s0 + t1 + self.g2, t0 + t1 + self.g12};
            int best = 0;
            for (int k = 1; k < 4; ++k)
                if (val[k] < val[best] - EPS_CMP) best = k;
            a.machine[0] = (best == 1 || best == 3) ? 0 : 1;
            a.machine[2] = (best == 2 || best == 3) ? 0 : 2;
            for (int i = 2; i < inst.pair_count(); ++i) {
                const double thr =
                    std::max(0.0, self.tail_lambda * inst.s[i].first + self.tail_gamma);
                a.machine[2 * i] = inst.t.pairs[i].t1 < thr ? 0 : i + 1;
            }
            return a;
        };
    }
};

// Independent oracle: exact optimum by enumerating every machine assignment.
inline double brute_force_optimum(const Instance& inst) {
    const int m = inst.task_count();
    std::vector<int> assign(m, 0);
    double best = INF;
    while (true) {
        best = std::min(best, makespan(inst, FullAllocation{assign}));
        int k = 0;
        while (k < m && ++assign[k] == inst.n) assign[k++] = 0;
        if (k == m) break;
    }
    return best;
}

inline Instance random_paired_instance(Rng& rng, int max_pairs = 5) {
    Instance inst;
    const int pairs = rng.uniform_int(1, max_pairs);
    inst.n = pairs + 1;
    inst.theta = Instance::default_theta(inst.n);
    for (int i = 0; i < pairs; ++i) {
        const double t1 = rng.uniform(0.0, 3.0);
        const double t2 = rng.uniform(0.0, 3.0);
        const double t12 = std::max(std::max(t1, t2), rng.uniform(0.5, 1.0) * (t1 + t2));
        inst.t.pairs.push_back({t1, t2, t12});
        inst.s.emplace_back(rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0));
    }
    return inst;
}

}  // namespace testutil
