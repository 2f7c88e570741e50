#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace parobs {

using Real = double;

// Spatial point, dim 1 or 2. The second component is ignored in 1D.
struct Point {
    std::array<Real, 2> x{0.0, 0.0};
    Real& operator[](int i) { return x[size_t(i)]; }
    Real operator[](int i) const { return x[size_t(i)]; }
};

struct SpaceTimePoint {
    Point x;
    Real t = 0.0;
};

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error { using Error::Error; };
struct NonUniformSourceError : Error { using Error::Error; };
struct GridTooSmallError : Error { using Error::Error; };
struct EmptyRegionError : Error { using Error::Error; };
struct OutOfDomainError : Error { using Error::Error; };
struct SolverDivergedError : Error { using Error::Error; };
struct PolicyCycleError : Error { using Error::Error; };
struct NoBoundaryError : Error { using Error::Error; };
struct MultivaluedGraphError : Error { using Error::Error; };
struct RadiusUnderresolvedError : Error { using Error::Error; };
struct DegenerateFieldError : Error { using Error::Error; };

// Deterministic PRNG (splitmix64). std::mt19937 + distributions are
// implementation-defined across standard libraries; outputs must be
// reproducible bit-for-bit from a seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    Real uniform() { return Real(next_u64() >> 11) * 0x1.0p-53; }

    Real uniform(Real a, Real b) { return a + (b - a) * uniform(); }

private:
    uint64_t state_;
};

inline bool nearly_equal(Real a, Real b, Real tol) { return std::abs(a - b) <= tol; }

} // namespace parobs
