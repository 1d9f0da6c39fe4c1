#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "annulus/maps.hpp"

namespace annlab {

/** Birkhoff average of the lifted displacement; the error bar is rigorous. */
struct RotationEstimate {
    double value = 0.0;
    double half_width = 0.0;  // 1/n for an orbit of length n
    int iterates = 0;
};

inline RotationEstimate rotation_number(const MapSpec& f, LiftedPoint z0, int n) {
    if (n < 1) throw ConfigError("rotation_number: need at least one iterate");
    LiftedPoint z = z0;
    for (int i = 0; i < n; ++i) z = apply_lift(f, z);
    return {(z.x - z0.x) / n, 1.0 / n, n};
}

/**
 * Rotation numbers of the two boundary restrictions.  lo/hi order the
 * interval; increasing_in_y records the twist orientation (true when the top
 * circle rotates faster).
 */
struct TwistInterval {
    double rho0 = 0.0;  // bottom circle
    double rho1 = 0.0;  // top circle
    double lo = 0.0;
    double hi = 0.0;
    double half_width = 0.0;
    bool increasing_in_y = false;
};

inline TwistInterval twist_interval(const MapSpec& f, int n = 256) {
    const RotationEstimate bottom = rotation_number(f, {0.0, 0.0}, n);
    const RotationEstimate top = rotation_number(f, {0.0, 1.0}, n);
    TwistInterval out;
    out.rho0 = bottom.value;
    out.rho1 = top.value;
    out.lo = std::min(out.rho0, out.rho1);
    out.hi = std::max(out.rho0, out.rho1);
    out.half_width = bottom.half_width;
    out.increasing_in_y = out.rho1 > out.rho0;
    return out;
}

/**
 * Birkhoff order test: the orbit, its one-step images and the neighboring deck
 * translates must induce a monotone circle correspondence.  Checked across
 * three fundamental domains so seam effects cannot hide a violation.
 */
inline bool well_ordered_check(const MapSpec& f, const std::vector<LiftedPoint>& orbit) {
    if (orbit.size() < 2) return true;
    std::vector<std::pair<double, double>> pairs;  // (x, image x)
    pairs.reserve(orbit.size() * 3);
    for (const LiftedPoint& z : orbit) {
        const double fx = apply_lift(f, z).x;
        for (int k = -1; k <= 1; ++k)
            pairs.emplace_back(z.x + k, fx + k);
    }
    std::sort(pairs.begin(), pairs.end());
    for (size_t i = 1; i < pairs.size(); ++i) {
        if (pairs[i].first - pairs[i - 1].first < 1e-12) return false;  // vertically aligned
        if (pairs[i].second <= pairs[i - 1].second) return false;
    }
    return true;
}

}  // namespace annlab
