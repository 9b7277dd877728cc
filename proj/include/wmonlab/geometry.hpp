#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wmonlab/common.hpp"
#include "wmonlab/curve.hpp"
#include "wmonlab/mechanisms.hpp"
#include "wmonlab/truthfulness.hpp"

namespace wmonlab {

// Critical values of the two-task region figure for fixed opponent bids.
// f' and g' are always defined (they equal P1 and P2); f and g are partial.
struct CriticalProfile {
    double f_prime = 0.0;
    double g_prime = 0.0;
    std::optional<double> f;
    std::optional<double> g;
    // Set when f'=g'=0 with a nonempty R12: f and g are then filled in by ray
    // probing even though the reference notation leaves them undefined.
    bool beyond_notation = false;
    VirtualPayments payments;
};

inline CriticalProfile critical_profile(const AllocAtS& alloc, double probe_ceiling,
                                        double tol = 1e-7) {
    const RecoveryDetail det = virtual_payments_detailed(alloc, probe_ceiling, tol);
    const VirtualPayments& P = det.payments;
    CriticalProfile cp;
    cp.payments = P;
    cp.f_prime = P.p1;
    cp.g_prime = P.p2;
    // f = P12 - P2 is defined when R12 borders R2 (both thresholds observed
    // positive) or when the difference vanishes; g symmetric.
    const double probe_tol = 2.0 * tol;
    if ((det.r12_nonempty && P.p2 > probe_tol) || P.p12 - P.p2 <= probe_tol)
        cp.f = P.p12 - P.p2;
    if ((det.r12_nonempty && P.p1 > probe_tol) || P.p12 - P.p1 <= probe_tol)
        cp.g = P.p12 - P.p1;
    if (P.p1 <= probe_tol && P.p2 <= probe_tol && det.r12_nonempty) {
        cp.f = P.p12;
        cp.g = P.p12;
        cp.beyond_notation = true;
    }
    return cp;
}

enum class FigureClass { Crossing, QuasiFlipping, QuasiBundling };

inline std::string to_string(FigureClass c) {
    switch (c) {
        case FigureClass::Crossing: return "crossing";
        case FigureClass::QuasiFlipping: return "quasi_flipping";
        case FigureClass::QuasiBundling: return "quasi_bundling";
    }
    return "?";
}

// QuasiBundling iff f' < f (equivalently P1 < P12 - P2); QuasiFlipping iff
// f' > f; Crossing otherwise. Falls back to the symmetric g-comparison when f
// is undefined.
inline FigureClass classify_figure(const CriticalProfile& cp, double tol = 1e-7) {
    auto compare = [&](double prime, double plain) {
        if (prime < plain - tol) return FigureClass::QuasiBundling;
        if (prime > plain + tol) return FigureClass::QuasiFlipping;
        return FigureClass::Crossing;
    };
    if (cp.f) return compare(cp.f_prime, *cp.f);
    if (cp.g) return compare(cp.g_prime, *cp.g);
    throw Undetermined("classify_figure: neither f nor g is defined");
}

struct BoundarySample {
    double s = 0.0;
    double psi = 0.0;
};

namespace detail {

// Threshold in the own bid at which the predicate flips from win to lose.
// Fixed 60-iteration bisection on [0, ceiling].
inline double win_threshold(const std::function<bool(double)>& wins, double ceiling) {
    const bool at0 = wins(0.0);
    const bool atC = wins(ceiling);
    if (at0 && atC) return INF;  // never priced out below the ceiling
    if (!at0) {
        if (!atC) return 0.0;
        throw NonMonotoneInOwnBid("win_threshold: loses at 0 but wins at the ceiling");
    }
    double lo = 0.0, hi = ceiling;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (wins(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Critical value psi_i(s_i) of task i (1 or 2) for the t-player, swept over
// s_i with the remaining coordinates fixed. t bids stay additive.
inline std::vector<BoundarySample> boundary_scan(const TwoPlayerOracle& oracle, int task,
                                                 const std::vector<double>& s_sweep,
                                                 double s_other, double t_other,
                                                 double probe_ceiling) {
    if (task != 1 && task != 2) throw BadParameters("boundary_scan: task must be 1 or 2");
    std::vector<BoundarySample> out;
    out.reserve(s_sweep.size());
    for (double s_i : s_sweep) {
        const AdditiveBid s = task == 1 ? AdditiveBid{s_i, s_other} : AdditiveBid{s_other, s_i};
        auto wins = [&](double t_i) {
            const TwoTaskValuation t = task == 1 ? TwoTaskValuation::additive(t_i, t_other)
                                                 : TwoTaskValuation::additive(t_other, t_i);
            const Alloc a = oracle(t, s);
            return task == 1 ? has_task1(a) : has_task2(a);
        };
        out.push_back({s_i, detail::win_threshold(wins, probe_ceiling)});
    }
    return out;
}

struct BoundaryFit {
    double lambda = 0.0;
    double gamma = 0.0;
    double max_residual = 0.0;
    bool linear = false;  // max_residual within the fit tolerance
};

// Least-squares fit of psi = max(0, lambda*s + gamma) using the strictly
// positive samples; the residual is measured against all samples.
inline BoundaryFit fit_truncated_affine(const std::vector<BoundarySample>& samples,
                                        double tol = 1e-6) {
    if (samples.size() < 3)
        throw InsufficientSamples("fit_truncated_affine: need at least 3 samples");
    std::vector<BoundarySample> pos;
    for (const auto& p : samples)
        if (p.psi > tol) pos.push_back(p);
    if (pos.size() < 2)
        throw InsufficientSamples("fit_truncated_affine: need at least 2 positive samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pos) {
        sx += p.s;
        sy += p.psi;
        sxx += p.s * p.s;
        sxy += p.s * p.psi;
    }
    const double n = static_cast<double>(pos.size());
    const double den = n * sxx - sx * sx;
    if (std::fabs(den) < 1e-12)
        throw InsufficientSamples("fit_truncated_affine: positive samples share one s value");
    BoundaryFit fit;
    fit.lambda = (n * sxy - sx * sy) / den;
    fit.gamma = (sy - fit.lambda * sx) / n;
    for (const auto& p : samples) {
        const double pred = std::max(0.0, fit.lambda * p.s + fit.gamma);
        fit.max_residual = std::max(fit.max_residual, std::fabs(pred - p.psi));
    }
    fit.linear = fit.max_residual <= tol;
    return fit;
}

struct SlopeInvarianceReport {
    std::vector<BoundaryFit> fits;  // one per opposing-t value
    double max_lambda_diff = 0.0;
    // Difference-quotient check f'(s1+d)-f'(s1) vs g'(s2+d)-g'(s2), reported
    // when all four boundary values are positive.
    std::optional<double> derivative_residual;
};

inline std::optional<double> derivative_equality_residual(const TwoPlayerOracle& oracle,
                                                          const AdditiveBid& s, double delta,
                                                          double probe_ceiling,
                                                          double tol = 1e-7) {
    const CriticalProfile base = critical_profile(fix_s(oracle, s), probe_ceiling, tol);
    const CriticalProfile shift1 =
        critical_profile(fix_s(oracle, {s.s1 + delta, s.s2}), probe_ceiling, tol);
    const CriticalProfile shift2 =
        critical_profile(fix_s(oracle, {s.s1, s.s2 + delta}), probe_ceiling, tol);
    if (base.f_prime <= tol || base.g_prime <= tol || shift1.f_prime <= tol ||
        shift2.g_prime <= tol)
        return std::nullopt;  // a boundary sits at zero; the claim needs both positive
    return std::fabs((shift1.f_prime - base.f_prime) - (shift2.g_prime - base.g_prime));
}

// Fits lambda_i of task i for each opposing-t value and reports the maximum
// pairwise slope difference; also runs the difference-quotient check at
// s_base with the given delta.
inline SlopeInvarianceReport slope_invariance_check(
    const TwoPlayerOracle& oracle, int task, const std::vector<double>& tj_values,
    const std::vector<double>& s_sweep, double s_other, double probe_ceiling,
    const AdditiveBid& s_base, double delta, double fit_tol = 1e-6) {
    SlopeInvarianceReport report;
    for (double tj : tj_values) {
        const auto samples = boundary_scan(oracle, task, s_sweep, s_other, tj, probe_ceiling);
        report.fits.push_back(fit_truncated_affine(samples, fit_tol));
    }
    for (std::size_t a = 0; a < report.fits.size(); ++a)
        for (std::size_t b = a + 1; b < report.fits.size(); ++b)
            report.max_lambda_diff = std::max(
                report.max_lambda_diff,
                std::fabs(report.fits[a].lambda - report.fits[b].lambda));
    try {
        report.derivative_residual =
            derivative_equality_residual(oracle, s_base, delta, probe_ceiling);
    } catch (const AssumptionViolated&) {
        report.derivative_residual = std::nullopt;
    }
    return report;
}

// |phi^-1(t1) + eta^-1(t12-t1) - eta^-1(t2) - phi^-1(t12-t2)|. Identically
// zero on valid bids is necessary for a truthful extension of the
// task-independent rule to exist.
inline double extension_identity_residual(const MonotoneCurve& phi, const MonotoneCurve& eta,
                                          const TwoTaskValuation& t) {
    if (!t.monotone()) throw OutOfRange("extension_identity_residual: bid not monotone");
    auto in_range = [](const MonotoneCurve& c, double y) {
        return y >= c.min_y() - EPS_CMP && y <= c.max_y() + EPS_CMP;
    };
    if (!in_range(phi, t.t1) || !in_range(phi, t.t12 - t.t2) || !in_range(eta, t.t2) ||
        !in_range(eta, t.t12 - t.t1))
        throw OutOfRange("extension_identity_residual: bid outside the curve ranges");
    return std::fabs(phi.inverse(t.t1) + eta.inverse(t.t12 - t.t1) - eta.inverse(t.t2) -
                     phi.inverse(t.t12 - t.t2));
}

// --- piecewise-structure helpers (rectilinear shift / dichotomy checks) ---

// Nearest slope bucket in {-1, 0, +1}; nullopt when outside every bucket's
// tolerance band.
inline std::optional<int> slope_bucket(double slope, double tol = 0.05) {
    for (int b : {-1, 0, 1})
        if (std::fabs(slope - b) <= tol) return b;
    return std::nullopt;
}

inline bool nondecreasing_samples(const std::vector<double>& ys, double tol = 1e-9) {
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] < ys[i - 1] - tol) return false;
    return true;
}

// Heights of the flat pieces of a sampled curve, detected by finite
// differences with the fixed step and slope buckets, deduplicated.
inline std::vector<double> plateau_heights(const std::function<double(double)>& fn, double x_lo,
                                           double x_hi, int samples, double height_tol,
                                           double fd_step = 1e-3) {
    std::vector<double> heights;
    for (int i = 0; i <= samples; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / samples;
        const double slope = (fn(x + fd_step) - fn(x)) / fd_step;
        if (auto b = slope_bucket(slope); b && *b == 0) {
            const double h = fn(x);
            bool known = false;
            for (double existing : heights)
                if (std::fabs(existing - h) <= height_tol) { known = true; break; }
            if (!known) heights.push_back(h);
        }
    }
    std::sort(heights.begin(), heights.end());
    return heights;
}

struct RectilinearShiftReport {
    std::vector<double> heights_a;
    std::vector<double> heights_b;
    double max_height_diff = 0.0;
    bool rectilinear = false;
};

// A pure horizontal translation preserves the set of plateau heights; compare
// the two curves' height sets.
inline RectilinearShiftReport rectilinear_shift_check(const std::function<double(double)>& fn_a,
                                                      const std::function<double(double)>& fn_b,
                                                      double x_lo, double x_hi, int samples,
                                                      double height_tol) {
    RectilinearShiftReport r;
    r.heights_a = plateau_heights(fn_a, x_lo, x_hi, samples, height_tol);
    r.heights_b = plateau_heights(fn_b, x_lo, x_hi, samples, height_tol);
    auto one_sided = [&](const std::vector<double>& from, const std::vector<double>& to) {
        double worst = 0.0;
        for (double h : from) {
            double best = INF;
            for (double k : to) best = std::min(best, std::fabs(h - k));
            worst = std::max(worst, best);
        }
        return worst;
    };
    r.max_height_diff = std::max(one_sided(r.heights_a, r.heights_b),
                                 one_sided(r.heights_b, r.heights_a));
    r.rectilinear = r.max_height_diff <= height_tol;
    return r;
}

}  // namespace wmonlab
