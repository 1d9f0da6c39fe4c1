#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "annulus/foliation.hpp"
#include "annulus/maps.hpp"
#include "annulus/rotation.hpp"

namespace annlab {

struct OrbitOptions {
    double tol = 1e-10;         // target residual on the displacement
    int leaf_grid = 64;         // vertical leaves scanned
    int t_grid = 64;            // samples along each leaf
    int boundary_checks = 16;
    double dedup_factor = 10.0;
    bool require_two = true;    // alarm when certified hypotheses deliver less
};

/**
 * Displacement whose zeros are the lifted (p,q) periodic points: walking q
 * steps backward from the p-translate must return to the start, so
 * D(z) = f^{-q}(T^p z) - z, equivalent to f^q(z) = T^p(z).
 */
inline Vec2 pq_displacement(const MapSpec& f, int p, int q, LiftedPoint z) {
    LiftedPoint w{z.x + p, z.y};
    for (int i = 0; i < q; ++i) w = apply_inverse(f, w);
    return {w.x - z.x, w.y - z.y};
}

struct CandidateBand {
    double x = 0.0;
    double t_lo = 0.0, t_hi = 0.0;  // leaf parameter window of the even class
    double t_star = 0.0;            // refined horizontal-displacement zero
    AngleClass cls = AngleClass::Below;  // Below: drifts up, Above: drifts down
    bool near_fixed = false;        // the full displacement already vanishes
};

namespace detail {

/** All zeros of the x-displacement along the leaf at x, in increasing t. */
inline std::vector<double> leaf_crossings(const MapSpec& f, int p, int q, double x, int t_grid) {
    std::vector<double> out;
    double prev_t = 0.0;
    double prev = pq_displacement(f, p, q, {x, 0.0}).x;
    for (int j = 1; j <= t_grid; ++j) {
        const double t = static_cast<double>(j) / t_grid;
        const double cur = pq_displacement(f, p, q, {x, t}).x;
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = prev_t, hi = t, flo = prev;
            for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = pq_displacement(f, p, q, {x, mid}).x;
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push_back(0.5 * (lo + hi));
        }
        prev_t = t;
        prev = cur;
    }
    return out;
}

inline void check_twist_condition(const MapSpec& f, int p, int q, int probes) {
    // the backward displacement points right on C0 for the decreasing frame
    // and left for the increasing one; both are valid, mixtures are not
    int orientation = 0;
    for (int i = 0; i < probes; ++i) {
        const double x = (i + 0.5) / probes;
        const double bottom = pq_displacement(f, p, q, {x, 0.0}).x;
        const double top = pq_displacement(f, p, q, {x, 1.0}).x;
        if (std::abs(bottom) <= tol::kSameLeaf || std::abs(top) <= tol::kSameLeaf ||
            (bottom < 0.0) == (top < 0.0))
            throw TwistConditionFailed(
                "p/q displacement does not point opposite ways on C0 and C1");
        const int o = bottom > 0.0 ? 1 : -1;
        if (orientation == 0)
            orientation = o;
        else if (o != orientation)
            throw TwistConditionFailed("p/q boundary displacement changes orientation");
    }
}

}  // namespace detail

/**
 * Candidate loci for (p,q) periodic points: the bands along each scanned leaf
 * where the displacement class turns even.  The class labels whether the
 * orbit candidate drifts up (Below) or down (Above) at the crossing; bands
 * whose full displacement already vanishes are flagged.
 */
inline std::vector<CandidateBand> pb_candidates(const MapSpec& f, int p, int q,
                                                const OrbitOptions& opt = {}) {
    detail::check_twist_condition(f, p, q, opt.boundary_checks);
    std::vector<CandidateBand> out;
    for (int i = 0; i < opt.leaf_grid; ++i) {
        const double x = static_cast<double>(i) / opt.leaf_grid;
        for (double t : detail::leaf_crossings(f, p, q, x, opt.t_grid)) {
            CandidateBand band;
            band.x = x;
            band.t_star = t;
            const Vec2 d = pq_displacement(f, p, q, {x, t});
            band.cls = d.y >= 0.0 ? AngleClass::Below : AngleClass::Above;
            band.near_fixed = std::hypot(d.x, d.y) <= opt.tol;
            // band width from the local slope of the x-displacement
            const double h = 1.0 / (4.0 * opt.t_grid);
            const double slope =
                (pq_displacement(f, p, q, {x, std::min(1.0, t + h)}).x -
                 pq_displacement(f, p, q, {x, std::max(0.0, t - h)}).x) /
                (std::min(1.0, t + h) - std::max(0.0, t - h));
            const double half = std::abs(slope) > 1e-12 ? tol::kSameLeaf / std::abs(slope) : h;
            band.t_lo = std::max(0.0, t - half);
            band.t_hi = std::min(1.0, t + half);
            out.push_back(band);
        }
    }
    return out;
}

struct OrbitRecord {
    int p = 0, q = 1;
    std::vector<LiftedPoint> points;  // one period of the forward orbit
    double rotation = 0.0;
    double residual = 0.0;            // |f^q z - T^p z| at the seed
    bool degenerate_continuum = false;
    bool well_ordered = false;
};

namespace detail {

inline OrbitRecord make_record(const MapSpec& f, int p, int q, LiftedPoint seed) {
    OrbitRecord rec;
    rec.p = p;
    rec.q = q;
    rec.rotation = static_cast<double>(p) / q;
    LiftedPoint z = seed;
    for (int i = 0; i < q; ++i) {
        rec.points.push_back(z);
        z = apply_lift(f, z);
    }
    rec.residual = std::max(std::abs(z.x - seed.x - p), std::abs(z.y - seed.y));
    rec.well_ordered = well_ordered_check(f, rec.points);
    return rec;
}

inline double orbit_set_distance(const OrbitRecord& a, const OrbitRecord& b) {
    double worst = 0.0;
    for (const LiftedPoint& za : a.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const LiftedPoint& zb : b.points) best = std::min(best, annulus_dist(za, zb));
        worst = std::max(worst, best);
    }
    for (const LiftedPoint& zb : b.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const LiftedPoint& za : a.points) best = std::min(best, annulus_dist(za, zb));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace detail

/**
 * Two-level bisection for one orbit: inside, the leaf parameter is driven to
 * the zero of the horizontal displacement nearest the hint; outside, the leaf
 * is bisected on the sign of the remaining vertical displacement.  The outer
 * bracket [x_lo, x_hi] must straddle a sign change of that vertical residue.
 */
inline OrbitRecord refine_orbit(const MapSpec& f, int p, int q, double x_lo, double x_hi,
                                double t_hint, const OrbitOptions& opt = {}) {
    const auto vertical_at = [&](double x, double hint) -> std::pair<double, double> {
        const auto crossings = detail::leaf_crossings(f, p, q, x, opt.t_grid);
        if (crossings.empty())
            throw BracketLost("refine_orbit: leaf lost its horizontal crossing");
        double best = crossings.front();
        for (double t : crossings)
            if (std::abs(t - hint) < std::abs(best - hint)) best = t;
        return {pq_displacement(f, p, q, {x, best}).y, best};
    };
    auto [h_lo, t_lo] = vertical_at(x_lo, t_hint);
    auto [h_hi, t_hi] = vertical_at(x_hi, t_hint);
    if ((h_lo < 0.0) == (h_hi < 0.0))
        throw BracketLost("refine_orbit: vertical residue does not change sign");
    double hint = 0.5 * (t_lo + t_hi);
    for (int it = 0; it < 60 && x_hi - x_lo > 1e-14; ++it) {
        const double mid = 0.5 * (x_lo + x_hi);
        const auto [h_mid, t_mid] = vertical_at(mid, hint);
        hint = t_mid;
        if ((h_mid < 0.0) == (h_lo < 0.0)) {
            x_lo = mid;
            h_lo = h_mid;
        } else {
            x_hi = mid;
            h_hi = h_mid;
        }
    }
    const double x = 0.5 * (x_lo + x_hi);
    const auto [h_fin, t_fin] = vertical_at(x, hint);
    (void)h_fin;
    return detail::make_record(f, p, q, {x, t_fin});
}

/**
 * All (p,q) periodic orbits reachable by the leaf scan.  Requires the twist
 * condition across the scanned boundary probes; an integrable-style vertical
 * residue that vanishes identically is returned as two well-separated
 * representatives of the degenerate continuum.  Under certified recurrence
 * hypotheses fewer than two distinct orbits raises OnlyOneFound.
 */
inline std::vector<OrbitRecord> find_pq_orbits(const MapSpec& f, int p, int q,
                                               const OrbitOptions& opt = {}) {
    if (q < 1) throw ConfigError("find_pq_orbits: q must be positive");
    if (std::gcd(std::abs(p), q) != 1 && !(p == 0 && q == 1))
        throw ConfigError("find_pq_orbits: p/q must be in lowest terms");
    detail::check_twist_condition(f, p, q, opt.boundary_checks);

    // leaf scan: vertical residues over every branch of the crossing curves
    std::vector<std::vector<double>> crossings(opt.leaf_grid);
    std::vector<std::vector<double>> h(opt.leaf_grid);
    bool single_branch = true;
    double max_abs_h = 0.0;
    for (int i = 0; i < opt.leaf_grid; ++i) {
        const double x = static_cast<double>(i) / opt.leaf_grid;
        crossings[i] = detail::leaf_crossings(f, p, q, x, opt.t_grid);
        if (crossings[i].empty())
            throw BracketLost("find_pq_orbits: a scanned leaf has no horizontal crossing");
        if (crossings[i].size() != 1) single_branch = false;
        h[i].reserve(crossings[i].size());
        for (double t : crossings[i]) {
            h[i].push_back(pq_displacement(f, p, q, {x, t}).y);
            max_abs_h = std::max(max_abs_h, std::abs(h[i].back()));
        }
    }

    if (single_branch && max_abs_h <= opt.tol) {
        // a continuum of (p,q) points: report two well-separated
        // representatives, half a period apart so their orbits differ
        OrbitRecord first = detail::make_record(f, p, q, {0.0, crossings[0][0]});
        first.degenerate_continuum = true;
        const int i1 = std::clamp(
            static_cast<int>(std::lround(opt.leaf_grid / (2.0 * q))), 1, opt.leaf_grid - 1);
        OrbitRecord second = detail::make_record(
            f, p, q, {static_cast<double>(i1) / opt.leaf_grid, crossings[i1][0]});
        second.degenerate_continuum = true;
        return {std::move(first), std::move(second)};
    }

    // the crossing curves may fold, so branches are continued leaf to leaf by
    // proximity; a bracket that straddles a fold is rejected by the residual
    std::vector<OrbitRecord> found;
    for (int i = 0; i < opt.leaf_grid; ++i) {
        const int j = (i + 1) % opt.leaf_grid;
        for (size_t k = 0; k < crossings[i].size(); ++k) {
            const double t = crossings[i][k];
            size_t kn = 0;
            for (size_t l = 1; l < crossings[j].size(); ++l)
                if (std::abs(crossings[j][l] - t) < std::abs(crossings[j][kn] - t)) kn = l;
            if ((h[i][k] < 0.0) == (h[j][kn] < 0.0)) continue;
            const double x_lo = static_cast<double>(i) / opt.leaf_grid;
            const double x_hi = static_cast<double>(i + 1) / opt.leaf_grid;
            try {
                OrbitRecord rec = refine_orbit(f, p, q, x_lo, x_hi, t, opt);
                if (rec.residual <= 1e3 * opt.tol) found.push_back(std::move(rec));
            } catch (const BracketLost&) {
                continue;  // crossing curve folded inside the bracket
            }
        }
    }

    // orbits rediscovered from different leaves collapse to one record
    std::vector<OrbitRecord> unique;
    for (auto& rec : found) {
        bool fresh = true;
        for (const auto& kept : unique) {
            if (detail::orbit_set_distance(rec, kept) <= opt.dedup_factor * 1e3 * opt.tol) {
                fresh = false;
                break;
            }
        }
        if (fresh) unique.push_back(std::move(rec));
    }

    if (opt.require_two && unique.size() < 2 && non_wandering_certified(f))
        throw OnlyOneFound("find_pq_orbits: certified map produced " +
                           std::to_string(unique.size()) + " orbit(s), expected two");
    return unique;
}

}  // namespace annlab
