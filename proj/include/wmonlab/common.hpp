#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace wmonlab {

// Global absolute tolerance for real comparisons. Mutable so that the CLI
// can override it via --eps.
inline double EPS_CMP = 1e-9;

// Offset used to nudge probe points off allocation boundaries.
inline double boundary_nudge() { return 10.0 * EPS_CMP; }

inline constexpr double INF = std::numeric_limits<double>::infinity();

inline bool approx_eq(double a, double b) { return std::fabs(a - b) <= EPS_CMP; }
inline bool approx_le(double a, double b) { return a <= b + EPS_CMP; }

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownTask : Error { using Error::Error; };
struct NonMonotone : Error { using Error::Error; };
struct GluingViolation : Error { using Error::Error; };
struct UnboundedPayment : Error { using Error::Error; };
struct BadProbe : Error { using Error::Error; };
struct AssumptionViolated : Error { using Error::Error; };
struct BadPerturbation : Error { using Error::Error; };
struct NonMonotoneInOwnBid : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct BadParameters : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct DegenerateOptimum : Error { using Error::Error; };
struct FamilyMismatch : Error { using Error::Error; };
struct Undetermined : Error { using Error::Error; };
struct WMONViolation : Error { using Error::Error; };
struct NonLinearBoundary : Error { using Error::Error; };

// Deterministic uniform doubles on top of a 64-bit generator state.
// std::uniform_real_distribution is implementation-defined, which would break
// the byte-identical-report contract across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

}  // namespace wmonlab
