#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "annulus/foliation.hpp"
#include "annulus/maps.hpp"

namespace annlab {

/**
 * Digital class of the one-step displacement of z, measured against F.
 * Undefined exactly on the fixed point set, where the pair degenerates.
 */
inline AngleClass displacement_class(const MapSpec& f, LiftedPoint z, const FoliationRef& F) {
    return angle_class(z, apply_lift(f, z), F);
}

struct DeltaOptions {
    double base_x = 0.0;       // anchor point (base_x, 0) on the bottom circle
    double fixed_tol = 1e-9;   // displacement size treated as a fixed point
    int max_reroutes = 9;
    double refine_floor = 1e-10;
};

namespace detail {

/**
 * Khalimsky-continuous class sequence along the segment a -> b, refined until
 * consecutive classes are adjacent.  Throws FixedPointOnPath when refinement
 * drives the sampling onto a vanishing displacement.
 */
inline void delta_segment(const MapSpec& f, const FoliationRef& F, LiftedPoint a, LiftedPoint b,
                          double floor_step, double fixed_tol,
                          std::vector<AngleClass>& out) {
    const auto at = [&](double u) -> AngleClass {
        const LiftedPoint z{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
        const LiftedPoint w = apply_lift(f, z);
        if (std::hypot(w.x - z.x, w.y - z.y) < fixed_tol)
            throw FixedPointOnPath("delta path crosses the fixed point set");
        try {
            return angle_class(z, w, F);
        } catch (const CoincidentPoints&) {
            throw FixedPointOnPath("delta path crosses the fixed point set");
        }
    };
    struct Span {
        double u0, u1;
        AngleClass c0, c1;
    };
    const AngleClass first = at(0.0), last = at(1.0);
    if (out.empty() || out.back() != first) out.push_back(first);
    std::vector<AngleClass> collected;
    // in-order traversal: emit midpoint classes between non-adjacent ends
    std::function<void(const Span&)> walk = [&](const Span& sp) {
        if (is_adjacent(sp.c0, sp.c1)) {
            if (collected.empty() || collected.back() != sp.c1) collected.push_back(sp.c1);
            return;
        }
        if (sp.u1 - sp.u0 < floor_step)
            throw PathRefinementExhausted("delta path class sequence does not stabilize");
        const double um = 0.5 * (sp.u0 + sp.u1);
        const AngleClass cm = at(um);
        walk({sp.u0, um, sp.c0, cm});
        walk({um, sp.u1, cm, sp.c1});
    };
    walk({0.0, 1.0, first, last});
    for (AngleClass c : collected)
        if (out.back() != c) out.push_back(c);
}

}  // namespace detail

/**
 * Integer lift of the displacement class over the complement of the fixed
 * point set, anchored on a boundary circle where the value is the odd
 * boundary representative (contract: the anchor class must be odd).  Paths
 * are axis-aligned staircases from the bottom anchor; a staircase crossing a
 * fixed point is rerouted through shifted waypoints.  When an interior fixed
 * circle walls off the upper component entirely, the lift restarts from the
 * top circle with the same odd-representative normalization.
 */
inline int delta_lift(const MapSpec& f, LiftedPoint z, const FoliationRef& F,
                      const DeltaOptions& opt = {}) {
    z.x = frac(z.x);  // the displacement class is deck invariant

    const auto from_anchor = [&](double side) -> int {
        const LiftedPoint base{opt.base_x, side};
        AngleClass base_cls;
        try {
            base_cls = displacement_class(f, base, F);
        } catch (const CoincidentPoints&) {
            throw TwistConditionFailed("delta_lift: anchor sits on a fixed boundary circle");
        }
        if (is_even(base_cls))
            throw TwistConditionFailed("delta_lift: anchor displacement class is not odd");
        const int base_value = rep(base_cls);

        // waypoint heights for the horizontal leg; the direct corner first
        std::vector<double> heights = {z.y, side};
        for (int i = 1; i < opt.max_reroutes; ++i)
            heights.push_back(frac(0.5 + 0.381966011 * i) * 0.96 + 0.02);

        for (double h : heights) {
            const LiftedPoint c1{base.x, h};
            const LiftedPoint c2{z.x, h};
            try {
                std::vector<AngleClass> classes;
                detail::delta_segment(f, F, base, c1, opt.refine_floor, opt.fixed_tol, classes);
                detail::delta_segment(f, F, c1, c2, opt.refine_floor, opt.fixed_tol, classes);
                detail::delta_segment(f, F, c2, z, opt.refine_floor, opt.fixed_tol, classes);
                const std::vector<LiftedAngle> lifted = lift_class_path(classes, base_value);
                return lifted.back();
            } catch (const FixedPointOnPath&) {
                continue;  // try the next staircase
            }
        }
        throw FixedPointOnPath("delta_lift: every staircase reroute crossed a fixed point");
    };

    try {
        return from_anchor(0.0);
    } catch (const FixedPointOnPath&) {
        return from_anchor(1.0);
    }
}

inline int delta_lift(const MapSpec& f, LiftedPoint z, const DeltaOptions& opt = {}) {
    return delta_lift(f, z, FoliationRef::vertical(), opt);
}

// ---------------------------------------------------------------------------
// leaf intersection extremes
// ---------------------------------------------------------------------------

struct LeafIntersections {
    std::vector<double> params;        // along the preimage leaf, increasing
    std::vector<LiftedPoint> points;   // on the vertical leaf at x
    LiftedPoint lowest;                // minimal y among intersections
    LiftedPoint last;                  // maximal parameter along the preimage leaf
    int count = 0;
};

/**
 * Intersections of the vertical leaf at x with the f-preimage of the vertical
 * leaf at x_image, parameterized by the preimage leaf parameter t in [0,1].
 * The two marked points realize the minimal height and the maximal parameter;
 * when the preimage leaf is monotone they coincide.
 */
inline LeafIntersections leaf_intersection_extremes(const MapSpec& f, double x, double x_image,
                                                    int samples = 512) {
    if (samples < 8) throw ConfigError("leaf_intersection_extremes: too few samples");
    const auto curve_x = [&](double t) { return apply_inverse(f, {x_image, t}).x - x; };
    LeafIntersections out;
    double prev_t = 0.0;
    double prev_v = curve_x(0.0);
    const auto accept = [&](double t) {
        if (!out.params.empty() && t - out.params.back() < 1e-9) return;
        const LiftedPoint p = apply_inverse(f, {x_image, t});
        out.params.push_back(t);
        out.points.push_back({x, p.y});
    };
    if (std::abs(prev_v) < 1e-12) accept(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const double v = curve_x(t);
        if (std::abs(v) < 1e-12) {
            accept(t);
        } else if (prev_v != 0.0 && ((prev_v < 0.0) != (v < 0.0))) {
            double lo = prev_t, hi = t, flo = prev_v;
            for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = curve_x(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            accept(0.5 * (lo + hi));
        }
        prev_t = t;
        prev_v = v;
    }
    out.count = static_cast<int>(out.points.size());
    if (out.count == 0)
        throw NoIntersectionFound("leaf_intersection_extremes: leaves do not meet");
    size_t lowest = 0;
    for (size_t i = 1; i < out.points.size(); ++i)
        if (out.points[i].y < out.points[lowest].y) lowest = i;
    out.lowest = out.points[lowest];
    out.last = out.points.back();
    return out;
}

}  // namespace annlab
