#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace annlab {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Pinned tolerances. Changing any of these invalidates frozen test values.
namespace tol {
inline constexpr double kSameLeaf = 1e-9;        // |dxi| below this means "same leaf"
inline constexpr double kRay = 1e-9;             // radians; winding ray snap
inline constexpr double kPathFloor = 1e-12;      // adaptive refinement step floor
inline constexpr double kYClamp = 1e-12;         // boundary clamp for y
inline constexpr double kChordRoot = 1e-12;      // billiard arclength root target
inline constexpr double kDegenerateChord = 1e-6; // theta distance from {0, pi}
inline constexpr double kDeckCommute = 1e-10;
inline constexpr double kInverse = 1e-8;
}  // namespace tol

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* name() const noexcept { return "Error"; }
};

// exit code 1
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
    const char* name() const noexcept override { return "ConfigError"; }
};
// exit code 2
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
    const char* name() const noexcept override { return "PreconditionError"; }
};
// exit code 3
struct RefinementError : Error {
    explicit RefinementError(const std::string& msg) : Error(msg) {}
    const char* name() const noexcept override { return "RefinementError"; }
};

#define ANNLAB_ERROR(NAME, BASE)                                    \
    struct NAME : BASE {                                            \
        explicit NAME(const std::string& msg) : BASE(msg) {}        \
        const char* name() const noexcept override { return #NAME; } \
    }

ANNLAB_ERROR(BaseMismatch, PreconditionError);
ANNLAB_ERROR(CoincidentPoints, PreconditionError);
ANNLAB_ERROR(PairOutsideDomain, PreconditionError);
ANNLAB_ERROR(TwistConditionFailed, PreconditionError);
ANNLAB_ERROR(NonAdjacentStep, RefinementError);
ANNLAB_ERROR(InversionFailure, RefinementError);
ANNLAB_ERROR(NonInjectiveSample, RefinementError);
ANNLAB_ERROR(VanishingDifference, RefinementError);
ANNLAB_ERROR(PathRefinementExhausted, RefinementError);
ANNLAB_ERROR(BracketLost, RefinementError);
ANNLAB_ERROR(FixedPointOnPath, RefinementError);
ANNLAB_ERROR(NoIntersectionFound, RefinementError);
ANNLAB_ERROR(OnlyOneFound, RefinementError);
ANNLAB_ERROR(UnsupportedKind, ConfigError);

#undef ANNLAB_ERROR

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }
inline Vec2 rotate(const Vec2& a, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return {a.x * c - a.y * s, a.x * s + a.y * c};
}
inline Vec2 normalize(const Vec2& a) {
    const double n = a.norm();
    return {a.x / n, a.y / n};
}

/** Signed angle from a to b in (-pi, pi]. */
inline double signed_angle(const Vec2& a, const Vec2& b) {
    return std::atan2(cross(a, b), dot(a, b));
}

/** Point of the lifted annulus R x [0,1]; x is the lifted coordinate. */
struct LiftedPoint {
    double x = 0.0;  // lift of the angular coordinate, not reduced mod 1
    double y = 0.0;  // radial coordinate in [0,1]
};

inline Vec2 as_vec(const LiftedPoint& p) { return {p.x, p.y}; }
inline LiftedPoint as_point(const Vec2& v) { return {v.x, v.y}; }

inline double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;  // guard against x = -1e-17 style rounding
    return f;
}

inline double clamp_y(double y) {
    if (y < 0.0 && y > -tol::kYClamp) return 0.0;
    if (y > 1.0 && y < 1.0 + tol::kYClamp) return 1.0;
    return y;
}

/** Distance on the annulus T x [0,1] (x taken mod 1). */
inline double annulus_dist(const LiftedPoint& a, const LiftedPoint& b) {
    double dx = frac(a.x - b.x);
    dx = std::min(dx, 1.0 - dx);
    return std::hypot(dx, a.y - b.y);
}

}  // namespace annlab
