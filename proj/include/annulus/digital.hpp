#pragma once

#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "annulus/geometry.hpp"

namespace annlab {

/**
 * Digital line substrate: Z carries the topology whose points are open at odd
 * integers and closed at even ones, and the angle classes live in the quotient
 * Z/4Z with canonical representatives {-1, 0, 1, 2}.  The projection Z -> Z/4Z
 * is a covering map for this topology, so continuous class paths lift uniquely
 * once a base value is fixed.
 */
enum class AngleClass : int {
    LeftOf = -1,   // leaf of the first point precedes the leaf of the second
    Below = 0,     // same leaf, first point below the second
    RightOf = 1,   // leaf of the second point precedes the leaf of the first
    Above = 2,     // same leaf, first point above the second
};

using LiftedAngle = int;

inline int canonical_residue(int k) {
    int r = ((k % 4) + 4) % 4;   // 0..3
    return r == 3 ? -1 : r;
}

/** Covering projection k -> k + 4Z, canonical representative in {-1,0,1,2}. */
inline AngleClass project(LiftedAngle k) {
    return static_cast<AngleClass>(canonical_residue(k));
}

inline int rep(AngleClass c) { return static_cast<int>(c); }

inline bool is_even(AngleClass c) { return rep(c) == 0 || rep(c) == 2; }

/**
 * True iff one class lies in every neighborhood of the other, i.e. the pair is
 * {0,+-1}, {2,+-1} or equal.  The two open singletons {-1} and {1} are not
 * adjacent, and neither are the closed points 0 and 2.
 */
inline bool is_adjacent(AngleClass a, AngleClass b) {
    if (a == b) return true;
    return is_even(a) != is_even(b);
}

/**
 * Unique lift of a Khalimsky-continuous class sequence starting at base.
 * Throws BaseMismatch if project(base) != classes.front(), NonAdjacentStep on
 * a non-continuous step (callers own the refinement loop).
 */
inline std::vector<LiftedAngle> lift_class_path(const std::vector<AngleClass>& classes,
                                                LiftedAngle base) {
    if (classes.empty()) return {};
    if (project(base) != classes.front())
        throw BaseMismatch("lift_class_path: base does not project to the first class");
    std::vector<LiftedAngle> lift;
    lift.reserve(classes.size());
    lift.push_back(base);
    for (size_t i = 1; i < classes.size(); ++i) {
        const LiftedAngle prev = lift.back();
        if (classes[i] == classes[i - 1]) {
            lift.push_back(prev);
        } else if (project(prev - 1) == classes[i]) {
            lift.push_back(prev - 1);
        } else if (project(prev + 1) == classes[i]) {
            lift.push_back(prev + 1);
        } else {
            throw NonAdjacentStep("lift_class_path: step " + std::to_string(i) +
                                  " is not Khalimsky-adjacent");
        }
    }
    return lift;
}

/** (min, max) of a lifted sequence; a continuous lift attains every integer between. */
inline std::pair<LiftedAngle, LiftedAngle> interval_hull(const std::vector<LiftedAngle>& values) {
    if (values.empty())
        throw PreconditionError("interval_hull: empty sequence");
    LiftedAngle lo = values.front(), hi = values.front();
    for (LiftedAngle v : values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return {lo, hi};
}

/**
 * Maps a continuous winding angle psi (radians, angle of the difference vector
 * in leaf coordinates) to the digital line: the up ray pi/2 + 2k*pi maps to
 * 4k, the down ray to 4k + 2, open half planes to the odd value in between.
 * Ray hits are decided within ray_tol.
 */
inline LiftedAngle discretize_winding(double psi, double ray_tol = tol::kRay) {
    const double u = (psi - kPi / 2.0) / kPi;
    const double k_near = std::round(u);
    if (std::abs(u - k_near) * kPi <= ray_tol)
        return 2 * static_cast<LiftedAngle>(k_near);
    return 2 * static_cast<LiftedAngle>(std::floor(u)) + 1;
}

/**
 * Digital value of an unwrapped winding angle when the class at that endpoint
 * has already been decided (by the leaf-coordinate tolerance, which outranks
 * the ray tolerance).  psi must be within pi/2 of the correct cell.
 */
inline LiftedAngle winding_value_for_class(double psi, AngleClass cls) {
    const long k = std::lround((psi - kPi / 2.0) / kPi);
    if (is_even(cls)) {
        const LiftedAngle v = 2 * static_cast<LiftedAngle>(k);
        if (project(v) != cls)
            throw PathRefinementExhausted("winding_value_for_class: even class does not match ray");
        return v;
    }
    const LiftedAngle below = 2 * static_cast<LiftedAngle>(k) - 1;
    const LiftedAngle above = below + 2;
    if (project(below) == cls) return below;
    if (project(above) == cls) return above;
    throw PathRefinementExhausted("winding_value_for_class: odd class does not match either cell");
}

}  // namespace annlab
