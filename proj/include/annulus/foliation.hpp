#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "annulus/digital.hpp"
#include "annulus/geometry.hpp"
#include "annulus/maps.hpp"

namespace annlab {

/**
 * A radial foliation presented as the pushforward m(V) of the vertical
 * foliation V by a lifted homeomorphism m.  Leaf coordinates of a point are
 * the preimage under the designated lift: xi orders the leaves, eta orders
 * points along a leaf.
 */
struct FoliationRef {
    MapPtr push;

    static FoliationRef vertical() {
        return FoliationRef{std::make_shared<const MapSpec>(MapSpec::identity())};
    }
    static FoliationRef pushforward(MapSpec m) {
        return FoliationRef{std::make_shared<const MapSpec>(std::move(m))};
    }
    bool is_vertical() const { return *push == MapSpec::identity(); }
    bool operator==(const FoliationRef& o) const { return *push == *o.push; }
};

/** Image foliation g(F). */
inline FoliationRef map_foliation(const MapSpec& g, const FoliationRef& F) {
    if (F.is_vertical()) return FoliationRef::pushforward(g);
    MapSpec combined = MapSpec::compose({g, *F.push});
    return FoliationRef::pushforward(std::move(combined));
}

/** Preimage foliation g^{-1}(F). */
inline FoliationRef inverse_map_foliation(const MapSpec& g, const FoliationRef& F) {
    return map_foliation(MapSpec::inverse(g), F);
}

inline Vec2 leaf_coordinates(const FoliationRef& F, LiftedPoint z) {
    const LiftedPoint c = apply_inverse(*F.push, z);
    return {c.x, c.y};
}

inline LiftedPoint leaf_point(const FoliationRef& F, double xi, double eta) {
    return apply_lift(*F.push, {xi, eta});
}

/**
 * Digital angle of an ordered pair against a foliation.  The leaf-ordinate
 * difference decides: |dxi| <= same_leaf_tol means the pair shares a leaf and
 * the sign of deta picks Below/Above; otherwise the sign of dxi picks
 * LeftOf/RightOf in the leaf order.
 */
inline AngleClass angle_class(LiftedPoint z, LiftedPoint zp, const FoliationRef& F,
                              double same_leaf_tol = tol::kSameLeaf) {
    const Vec2 c0 = leaf_coordinates(F, z);
    const Vec2 c1 = leaf_coordinates(F, zp);
    const double dxi = c1.x - c0.x;
    const double deta = c1.y - c0.y;
    if (std::abs(dxi) <= same_leaf_tol) {
        if (std::abs(deta) <= same_leaf_tol)
            throw CoincidentPoints("angle_class: points coincide in leaf coordinates");
        return deta > 0.0 ? AngleClass::Below : AngleClass::Above;
    }
    return dxi > 0.0 ? AngleClass::LeftOf : AngleClass::RightOf;
}

// canonical representatives for each natural-lift normalization
inline int rep_m101(AngleClass c) {
    if (c == AngleClass::Above)
        throw PairOutsideDomain("class Above has no {-1,0,1} representative");
    return rep(c);
}
inline int rep_123(AngleClass c) {
    if (c == AngleClass::Below)
        throw PairOutsideDomain("class Below has no {1,2,3} representative");
    return c == AngleClass::LeftOf ? 3 : rep(c);
}
inline int rep_m10(AngleClass c) {
    if (c != AngleClass::LeftOf && c != AngleClass::Below)
        throw PairOutsideDomain("class outside the lower-half-order domain");
    return rep(c);
}

// ---------------------------------------------------------------------------
// continuous winding tracking
// ---------------------------------------------------------------------------

struct WindingResult {
    double psi_start = 0.0;
    double psi_end = 0.0;
};

/**
 * Tracks the continuous angle of a nonvanishing planar field u -> v(u) over
 * [0,1].  Steps are accepted only when the endpoint rotation and both midpoint
 * half-rotations stay below pi/3, otherwise the step halves; the refinement
 * floor is 1e-12.
 */
template <class V>
WindingResult track_winding(V&& v, double floor_step = tol::kPathFloor) {
    const auto angle_of = [](const Vec2& w) {
        if (w.norm() < 1e-13)
            throw VanishingDifference("track_winding: difference vector vanished");
        return std::atan2(w.y, w.x);
    };
    Vec2 cur = v(0.0);
    WindingResult out;
    out.psi_start = angle_of(cur);
    out.psi_end = out.psi_start;
    double u = 0.0;
    double h = 1.0 / 16.0;
    const double max_turn = kPi / 3.0;
    while (u < 1.0) {
        if (h < floor_step)
            throw PathRefinementExhausted("track_winding: step floor reached at u=" +
                                          std::to_string(u));
        const double u1 = std::min(1.0, u + h);
        Vec2 nxt, mid;
        try {
            nxt = v(u1);
            mid = v(0.5 * (u + u1));
            angle_of(nxt);
            angle_of(mid);
        } catch (const VanishingDifference&) {
            if (h < 4.0 * floor_step) throw;
            h *= 0.5;
            continue;
        }
        const double d1 = signed_angle(cur, mid);
        const double d2 = signed_angle(mid, nxt);
        if (std::abs(d1) > max_turn || std::abs(d2) > max_turn) {
            h *= 0.5;
            continue;
        }
        out.psi_end += d1 + d2;
        cur = nxt;
        u = u1;
        h = std::min(1.0 / 16.0, h * 1.7);
    }
    return out;
}

// ---------------------------------------------------------------------------
// pair domains and natural lifts
// ---------------------------------------------------------------------------

/** Annular subregion bounded below/above by a circle or an essential graph. */
struct RegionSpec {
    enum class Kind { SubAnnulus, Graph };

    Kind kind = Kind::SubAnnulus;
    double y_low = 0.0;
    double y_high = 1.0;
    std::vector<double> psi;  // uniform samples on [0,1), linear interpolation
    bool upper = false;       // graph side: false => { y < psi }, true => { y > psi }
    int regular_exhaustion = 32;

    static RegionSpec sub_annulus(double y_low, double y_high) {
        if (!(0.0 <= y_low && y_low < y_high && y_high <= 1.0))
            throw ConfigError("RegionSpec: need 0 <= y_low < y_high <= 1");
        RegionSpec r;
        r.kind = Kind::SubAnnulus;
        r.y_low = y_low;
        r.y_high = y_high;
        return r;
    }
    static RegionSpec graph_lower(std::vector<double> samples) {
        RegionSpec r;
        r.kind = Kind::Graph;
        r.psi = std::move(samples);
        r.upper = false;
        if (r.psi.size() < 2) throw ConfigError("RegionSpec: graph needs >= 2 samples");
        return r;
    }
    static RegionSpec graph_upper(std::vector<double> samples) {
        RegionSpec r = graph_lower(std::move(samples));
        r.upper = true;
        return r;
    }

    bool lower_sided() const {
        if (kind == Kind::Graph) return !upper;
        return y_low == 0.0;
    }
    bool upper_sided() const {
        if (kind == Kind::Graph) return upper;
        return y_high == 1.0;
    }

    double graph_height(double x) const {
        const double xf = frac(x) * static_cast<double>(psi.size());
        const size_t i = std::min(static_cast<size_t>(xf), psi.size() - 1);
        const double w = xf - static_cast<double>(i);
        const double next = psi[(i + 1) % psi.size()];
        return (1.0 - w) * psi[i] + w * next;
    }

    bool contains(LiftedPoint z) const {
        if (kind == Kind::Graph)
            return upper ? z.y > graph_height(z.x) : z.y < graph_height(z.x);
        if (y_low == 0.0 && y_high < 1.0) return z.y < y_high;
        if (y_high == 1.0 && y_low > 0.0) return z.y > y_low;
        return y_low < z.y && z.y < y_high;
    }

    /** Nested regular regions exhausting U from inside (index 0 innermost). */
    std::vector<RegionSpec> exhaustion() const {
        std::vector<RegionSpec> out;
        out.reserve(regular_exhaustion);
        for (int n = 0; n < regular_exhaustion; ++n) {
            const double shrink = 1.0 / static_cast<double>(n + 2);
            RegionSpec r = *this;
            if (kind == Kind::SubAnnulus) {
                const double height = y_high - y_low;
                if (lower_sided())
                    r.y_high = y_low + height * (1.0 - shrink);
                else
                    r.y_low = y_high - height * (1.0 - shrink);
            } else {
                for (double& v : r.psi)
                    v = upper ? v + (1.0 - v) * shrink : v * (1.0 - shrink);
            }
            out.push_back(std::move(r));
        }
        return out;
    }
};

enum class PairDomainKind {
    LeafComplement,   // pairs not in class Below against the anchor foliation
    LowerHalfOrder,   // pairs in classes {LeftOf, Below} against the anchor
    BoundaryProduct,  // C0 x C1
    LowerAnnulus,
    UpperAnnulus,
    LowerDisk,
    UpperDisk,
};

struct PairDomain {
    PairDomainKind kind = PairDomainKind::BoundaryProduct;
    std::optional<FoliationRef> anchor;  // LeafComplement / LowerHalfOrder
    std::optional<RegionSpec> region;    // the four region kinds

    static PairDomain leaf_complement(FoliationRef F) {
        return {PairDomainKind::LeafComplement, std::move(F), std::nullopt};
    }
    static PairDomain lower_half_order(FoliationRef F) {
        return {PairDomainKind::LowerHalfOrder, std::move(F), std::nullopt};
    }
    static PairDomain boundary_product() {
        return {PairDomainKind::BoundaryProduct, std::nullopt, std::nullopt};
    }
    static PairDomain lower_annulus(RegionSpec U) {
        if (!U.lower_sided()) throw ConfigError("lower_annulus: region is not lower-sided");
        return {PairDomainKind::LowerAnnulus, std::nullopt, std::move(U)};
    }
    static PairDomain upper_annulus(RegionSpec U) {
        if (!U.upper_sided()) throw ConfigError("upper_annulus: region is not upper-sided");
        return {PairDomainKind::UpperAnnulus, std::nullopt, std::move(U)};
    }
    static PairDomain lower_disk(RegionSpec U) {
        if (!U.lower_sided()) throw ConfigError("lower_disk: region is not lower-sided");
        return {PairDomainKind::LowerDisk, std::nullopt, std::move(U)};
    }
    static PairDomain upper_disk(RegionSpec U) {
        if (!U.upper_sided()) throw ConfigError("upper_disk: region is not upper-sided");
        return {PairDomainKind::UpperDisk, std::nullopt, std::move(U)};
    }
};

namespace detail {

/**
 * Khalimsky continuation along a pair path: the first point stays at z, the
 * second moves as path(u), and the digital angle is tracked against F.  The
 * returned lift at u=1 is anchored by the known value at u=0.
 */
inline int continue_pair_lift(const FoliationRef& F, LiftedPoint z,
                              const std::function<LiftedPoint(double)>& path,
                              AngleClass cls_start, int value_start, AngleClass cls_end) {
    const Vec2 base = leaf_coordinates(F, z);
    const auto w = [&](double u) { return leaf_coordinates(F, path(u)) - base; };
    const WindingResult wr = track_winding(w);
    const int d_start = winding_value_for_class(wr.psi_start, cls_start);
    const int d_end = winding_value_for_class(wr.psi_end, cls_end);
    return value_start + (d_end - d_start);
}

inline bool near_boundary(double y, double target) { return std::abs(y - target) <= 1e-9; }

}  // namespace detail

/**
 * Value of the natural integer lift of the digital angle over a canonical
 * simply connected pair domain.  Normalizations: {1,2,3}-valued on the
 * leaf-complement domain at its anchor foliation, {-1,0}-valued on the
 * lower-half-order domain at its anchor, {-1,0,1}-valued on C0 x C1 for every
 * foliation, and the annulus/disk domains extend the boundary normalization.
 * Values away from the anchors are computed by Khalimsky-continuous
 * continuation along pair paths inside the domain.
 */
inline int natural_lift(const PairDomain& dom, LiftedPoint z, LiftedPoint zp,
                        const FoliationRef& F) {
    switch (dom.kind) {
        case PairDomainKind::BoundaryProduct: {
            if (!detail::near_boundary(z.y, 0.0) || !detail::near_boundary(zp.y, 1.0))
                throw PairOutsideDomain("boundary_product: pair not on C0 x C1");
            return rep_m101(angle_class(z, zp, F));
        }
        case PairDomainKind::LeafComplement: {
            const FoliationRef& F0 = *dom.anchor;
            const AngleClass cls0 = angle_class(z, zp, F0);
            if (cls0 == AngleClass::Below)
                throw PairOutsideDomain("leaf_complement: pair is in class Below at the anchor");
            if (F == F0) return rep_123(cls0);
            const int side = cls0 == AngleClass::RightOf ? -1 : 1;
            const int anchor_value = side > 0 ? 3 : 1;
            const AngleClass anchor_cls = side > 0 ? AngleClass::LeftOf : AngleClass::RightOf;
            const Vec2 c0 = leaf_coordinates(F0, z);
            const Vec2 target = leaf_coordinates(F0, zp) - c0;
            const Vec2 start{static_cast<double>(side), 0.0};
            const auto path = [&](double u) {
                const Vec2 p = c0 + start * (1.0 - u) + target * u;
                return leaf_point(F0, p.x, p.y);
            };
            return detail::continue_pair_lift(F, z, path, anchor_cls, anchor_value,
                                              angle_class(z, zp, F));
        }
        case PairDomainKind::LowerHalfOrder: {
            const FoliationRef& F0 = *dom.anchor;
            const AngleClass cls0 = angle_class(z, zp, F0);
            const int direct = rep_m10(cls0);  // throws when outside the domain
            if (F == F0) return direct;
            const Vec2 c0 = leaf_coordinates(F0, z);
            const Vec2 target = leaf_coordinates(F0, zp) - c0;
            const Vec2 start{1.0, 0.0};
            const auto path = [&](double u) {
                const Vec2 p = c0 + start * (1.0 - u) + target * u;
                return leaf_point(F0, p.x, p.y);
            };
            return detail::continue_pair_lift(F, z, path, AngleClass::LeftOf, -1,
                                              angle_class(z, zp, F));
        }
        case PairDomainKind::LowerAnnulus:
        case PairDomainKind::LowerDisk: {
            const RegionSpec& U = *dom.region;
            if (!U.contains(z) || U.contains(zp))
                throw PairOutsideDomain("lower region: need z in U and z' in the complement");
            const LiftedPoint top{zp.x, 1.0};
            const AngleClass cls_top = angle_class(z, top, F);
            const auto path = [&](double u) {
                return LiftedPoint{zp.x, 1.0 + u * (zp.y - 1.0)};
            };
            return detail::continue_pair_lift(F, z, path, cls_top, rep_m101(cls_top),
                                              angle_class(z, zp, F));
        }
        case PairDomainKind::UpperAnnulus:
        case PairDomainKind::UpperDisk: {
            const RegionSpec& U = *dom.region;
            if (U.contains(z) || !U.contains(zp))
                throw PairOutsideDomain("upper region: need z in the complement and z' in U");
            const LiftedPoint top{zp.x, 1.0};
            const AngleClass cls_top = angle_class(z, top, F);
            const auto path = [&](double u) {
                return LiftedPoint{zp.x, 1.0 + u * (zp.y - 1.0)};
            };
            return detail::continue_pair_lift(F, z, path, cls_top, rep_m101(cls_top),
                                              angle_class(z, zp, F));
        }
    }
    throw Error("natural_lift: unreachable");
}

// ---------------------------------------------------------------------------
// abstract angle tau
// ---------------------------------------------------------------------------

/**
 * tau(z, z', F, F') = theta(F') - theta(F) for the continuous lift of the
 * digital angle of the fixed pair along any path of foliations from F to F'.
 * Primary route: difference of natural lifts over a canonical pair domain
 * (integer anchors, one pair-space continuation).
 */
inline int tau(LiftedPoint z, LiftedPoint zp, const FoliationRef& F, const FoliationRef& G) {
    const AngleClass cf = angle_class(z, zp, F);
    if (F == G) return 0;
    if (cf != AngleClass::Below) {
        const PairDomain dom = PairDomain::leaf_complement(F);
        return natural_lift(dom, z, zp, G) - rep_123(cf);
    }
    const AngleClass cg = angle_class(z, zp, G);
    if (cg != AngleClass::Below) {
        const PairDomain dom = PairDomain::leaf_complement(G);
        return rep_123(cg) - natural_lift(dom, z, zp, F);
    }
    const PairDomain dom = PairDomain::lower_half_order(F);
    return natural_lift(dom, z, zp, G);  // direct value at F is 0
}

/**
 * Oracle route for tau: ride the canonical isotopies from F back to the
 * vertical foliation and on to F', tracking the continuous winding of the
 * difference vector in moving leaf coordinates.  Independent of the
 * natural-lift continuation; the two must agree exactly.
 */
inline int tau_isotopy(LiftedPoint z, LiftedPoint zp, const FoliationRef& F,
                       const FoliationRef& G) {
    LiftedPoint seed_z = z, seed_zp = zp;
    const auto coords_at = [&](const MapSpec& push, double t, LiftedPoint p,
                               LiftedPoint* seed) {
        const LiftedPoint c = isotopy_eval_inverse(push, t, p, seed);
        *seed = c;
        return Vec2{c.x, c.y};
    };
    const auto w = [&](double u) -> Vec2 {
        const bool first = u <= 0.5;
        const MapSpec& push = first ? *F.push : *G.push;
        const double t = first ? 1.0 - 2.0 * u : 2.0 * u - 1.0;
        const Vec2 a = coords_at(push, t, z, &seed_z);
        const Vec2 b = coords_at(push, t, zp, &seed_zp);
        return b - a;
    };
    const WindingResult wr = track_winding(w);
    const int d0 = winding_value_for_class(wr.psi_start, angle_class(z, zp, F));
    const int d1 = winding_value_for_class(wr.psi_end, angle_class(z, zp, G));
    return d1 - d0;
}

// ---------------------------------------------------------------------------
// monotonicity certification
// ---------------------------------------------------------------------------

enum class Direction { Increasing, Decreasing };

struct PairSampler {
    int same_leaf = 100;
    int cross_leaf = 350;
    int boundary = 50;
    std::uint64_t seed = 417;
    double margin = 0.02;  // distance from the boundary circles for interior samples
};

struct PairCounterexample {
    LiftedPoint z, zp;
    int tau_value = 0;
    AngleClass cls_F = AngleClass::Below;
    AngleClass cls_G = AngleClass::Below;
    std::string reason;
};

struct MonotonicityReport {
    std::string direction;  // "increasing" | "decreasing" | "neither"
    int pairs_checked = 0;
    int same_leaf_pairs = 0;
    int tau_zero_pairs = 0;
    std::vector<PairCounterexample> counterexamples;
    bool certified() const { return counterexamples.empty(); }
};

/**
 * Samples pairs (same leaf, cross leaf, boundary-to-boundary) and certifies
 * the sign condition tau(z, z', F, f^{-1}(F)) >= 0 (increasing) or <= 0
 * (decreasing), with the strictness clause: tau = 0 forces both endpoint
 * classes into {LeftOf, RightOf}.
 */
inline MonotonicityReport is_monotone(const MapSpec& f, const FoliationRef& F, Direction dir,
                                      const PairSampler& sampler = {}) {
    const FoliationRef G = inverse_map_foliation(f, F);
    std::mt19937_64 rng(sampler.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> window(-1.5, 1.5);

    MonotonicityReport report;
    report.direction = dir == Direction::Increasing ? "increasing" : "decreasing";

    const auto check_pair = [&](LiftedPoint z, LiftedPoint zp, bool same_leaf) {
        const int t = tau(z, zp, F, G);
        ++report.pairs_checked;
        if (same_leaf) ++report.same_leaf_pairs;
        const bool sign_ok = dir == Direction::Increasing ? t >= 0 : t <= 0;
        if (!sign_ok) {
            report.counterexamples.push_back(
                {z, zp, t, angle_class(z, zp, F), angle_class(z, zp, G), "tau sign violation"});
            return;
        }
        if (t == 0) {
            ++report.tau_zero_pairs;
            const AngleClass a = angle_class(z, zp, F);
            const AngleClass b = angle_class(z, zp, G);
            if (is_even(a) || is_even(b))
                report.counterexamples.push_back(
                    {z, zp, t, a, b, "tau = 0 with a same-leaf class"});
        }
    };

    const double lo = sampler.margin, span = 1.0 - 2.0 * sampler.margin;
    for (int i = 0; i < sampler.same_leaf; ++i) {
        const double xi = unit(rng);
        double e0 = lo + span * unit(rng), e1 = lo + span * unit(rng);
        if (std::abs(e0 - e1) < 0.05) e1 = lo + span * unit(rng);
        if (e0 > e1) std::swap(e0, e1);
        check_pair(leaf_point(F, xi, e0), leaf_point(F, xi, e1), true);
    }
    for (int i = 0; i < sampler.cross_leaf; ++i) {
        const double xi = unit(rng);
        const LiftedPoint z = leaf_point(F, xi, lo + span * unit(rng));
        const LiftedPoint zp = leaf_point(F, xi + window(rng), lo + span * unit(rng));
        try {
            check_pair(z, zp, false);
        } catch (const CoincidentPoints&) {
            --i;
        }
    }
    for (int i = 0; i < sampler.boundary; ++i) {
        const LiftedPoint z = leaf_point(F, unit(rng), 0.0);
        const LiftedPoint zp = leaf_point(F, window(rng) + z.x, 1.0);
        check_pair(z, zp, false);
    }
    if (!report.counterexamples.empty()) report.direction = "neither";
    return report;
}

// ---------------------------------------------------------------------------
// membership scan: which lift values a region's pairs actually realize
// ---------------------------------------------------------------------------

struct MembershipGrid {
    int deck_window = 2;  // search z' over x in [x(z) - w, x(z) + w]
    int nx = 48;          // x samples per unit
    int ny = 24;          // y samples across the complement
};

struct MembershipWitness {
    LiftedPoint z, zp;
    int value = 0;
};

struct MembershipResult {
    enum class Kind { None, Exactly2, Above2 } kind = Kind::None;
    std::optional<MembershipWitness> exactly2;
    std::optional<MembershipWitness> above2;
    int max_value = 0;
    int pairs_scanned = 0;
};

/**
 * Scans deck-translated partners z' across the complement of a lower region
 * for natural-lift values >= 2.  When only values > 2 appear on the grid, an
 * intermediate-value continuation along the vertical segment toward C1 locates
 * an exact value-2 witness (the lift passes every intermediate integer).
 */
inline MembershipResult membership_class(LiftedPoint z, const PairDomain& dom,
                                         const FoliationRef& F,
                                         const MembershipGrid& grid = {}) {
    if (dom.kind != PairDomainKind::LowerAnnulus && dom.kind != PairDomainKind::LowerDisk)
        throw PreconditionError("membership_class: domain must be a lower region");
    const RegionSpec& U = *dom.region;
    if (!U.contains(z))
        throw PairOutsideDomain("membership_class: z is not in U");

    MembershipResult result;
    const auto value_at = [&](LiftedPoint zp) { return natural_lift(dom, z, zp, F); };

    const double x_lo = z.x - grid.deck_window;
    const double x_hi = z.x + grid.deck_window;
    const int nx_total = grid.nx * 2 * grid.deck_window;
    for (int i = 0; i <= nx_total; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / nx_total;
        const double floor_y =
            U.kind == RegionSpec::Kind::Graph ? U.graph_height(x) : U.y_high;
        for (int j = 0; j <= grid.ny; ++j) {
            const double y = floor_y + (1.0 - floor_y) * j / grid.ny;
            const LiftedPoint zp{x, std::min(1.0, y + 1e-6)};
            if (U.contains(zp)) continue;
            int v;
            try {
                v = value_at(zp);
            } catch (const RefinementError&) {
                continue;
            }
            ++result.pairs_scanned;
            result.max_value = std::max(result.max_value, v);
            if (v == 2 && !result.exactly2) result.exactly2 = {z, zp, v};
            if (v > 2 && !result.above2) result.above2 = {z, zp, v};
        }
    }

    if (result.above2 && !result.exactly2) {
        // ascend toward C1: the lift drops to {-1,0,1} there, so it passes 2
        const LiftedPoint from = result.above2->zp;
        double u_above = 0.0, u_below = 1.0;  // u = 1 is the top circle
        const auto probe = [&](double u) {
            return LiftedPoint{from.x, from.y + u * (1.0 - from.y)};
        };
        for (int it = 0; it < 80 && !result.exactly2; ++it) {
            const double u = 0.5 * (u_above + u_below);
            int v;
            try {
                v = value_at(probe(u));
            } catch (const RefinementError&) {
                break;
            }
            if (v == 2) {
                result.exactly2 = {z, probe(u), v};
            } else if (v > 2) {
                u_above = u;
            } else {
                u_below = u;
            }
        }
    }

    if (result.above2)
        result.kind = MembershipResult::Kind::Above2;
    else if (result.exactly2)
        result.kind = MembershipResult::Kind::Exactly2;
    return result;
}

}  // namespace annlab
