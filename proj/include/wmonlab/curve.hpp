#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "wmonlab/common.hpp"

namespace wmonlab {

// Non-decreasing piecewise-linear curve given by breakpoints with strictly
// increasing x. A jump is encoded by two breakpoints whose x values are
// EPS_CMP apart; evaluation at the jump point returns the lower branch.
// Outside the breakpoint range the curve is clamped to the end values.
class MonotoneCurve {
public:
    MonotoneCurve() = default;

    explicit MonotoneCurve(std::vector<std::pair<double, double>> breakpoints)
        : bp_(std::move(breakpoints)) {
        if (bp_.empty()) throw BadParameters("MonotoneCurve: no breakpoints");
        for (std::size_t i = 1; i < bp_.size(); ++i) {
            if (bp_[i].first <= bp_[i - 1].first)
                throw BadParameters("MonotoneCurve: x values must be strictly increasing");
            if (bp_[i].second < bp_[i - 1].second - EPS_CMP)
                throw BadParameters("MonotoneCurve: y values must be non-decreasing");
        }
    }

    static MonotoneCurve affine(double slope, double intercept, double x_lo, double x_hi) {
        return MonotoneCurve({{x_lo, slope * x_lo + intercept}, {x_hi, slope * x_hi + intercept}});
    }

    static MonotoneCurve identity(double x_hi) { return affine(1.0, 0.0, 0.0, x_hi); }

    // Dense piecewise-linear sampling of an increasing function.
    static MonotoneCurve sampled(const std::function<double(double)>& fn, double x_lo,
                                 double x_hi, int segments) {
        std::vector<std::pair<double, double>> bp;
        bp.reserve(segments + 1);
        for (int i = 0; i <= segments; ++i) {
            double x = x_lo + (x_hi - x_lo) * i / segments;
            bp.emplace_back(x, fn(x));
        }
        return MonotoneCurve(std::move(bp));
    }

    double operator()(double x) const {
        if (x <= bp_.front().first) return bp_.front().second;
        if (x >= bp_.back().first) return bp_.back().second;
        auto it = std::upper_bound(bp_.begin(), bp_.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }

    // Generalized inverse: smallest x with curve(x) >= y. On flat segments the
    // left endpoint is returned; across a jump the inverse is constant.
    double inverse(double y) const {
        if (y <= bp_.front().second) return bp_.front().first;
        if (y > bp_.back().second) return bp_.back().first;
        for (std::size_t i = 1; i < bp_.size(); ++i) {
            const auto& [x0, y0] = bp_[i - 1];
            const auto& [x1, y1] = bp_[i];
            if (y <= y1) {
                if (y1 - y0 <= 0.0) return x0;
                return x0 + (x1 - x0) * (y - y0) / (y1 - y0);
            }
        }
        return bp_.back().first;
    }

    double min_x() const { return bp_.front().first; }
    double max_x() const { return bp_.back().first; }
    double min_y() const { return bp_.front().second; }
    double max_y() const { return bp_.back().second; }

    const std::vector<std::pair<double, double>>& breakpoints() const { return bp_; }

private:
    std::vector<std::pair<double, double>> bp_;
};

}  // namespace wmonlab
