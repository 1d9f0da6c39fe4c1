#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "annulus/curve.hpp"
#include "annulus/geometry.hpp"

namespace annlab {

struct MapSpec;
using MapPtr = std::shared_ptr<const MapSpec>;

struct IntegrableTwistNode {
    double a = 0.0;  // rigid rotation part
    double b = 0.0;  // shear: x -> x + a + b*y
    bool operator==(const IntegrableTwistNode&) const = default;
};

struct BilliardNode {
    CurvePtr curve;
    bool operator==(const BilliardNode& o) const { return *curve == *o.curve; }
};

/**
 * Boundary-pinned vertical kick (x, y) -> (x, y + eps*y*(1-y)*h(x)) with
 * h(x) = sum_k harmonics[k] * sin(2*pi*(k+1)*x).  The construction invariant
 * |eps| * sum|harmonics| < 1 keeps every fiber map a monotone bijection.
 */
struct PinnedKickNode {
    double eps = 0.0;
    std::vector<double> harmonics;
    bool operator==(const PinnedKickNode&) const = default;
};

struct ComposeNode {
    std::vector<MapPtr> items;  // function composition: items.back() acts first
    bool operator==(const ComposeNode& o) const;
};

struct InverseNode {
    MapPtr item;
    bool operator==(const InverseNode& o) const;
};

struct PowerNode {
    MapPtr item;
    int n = 1;
    bool operator==(const PowerNode& o) const;
};

struct DeckNode {
    int n = 1;  // T^n : (x, y) -> (x + n, y)
    bool operator==(const DeckNode&) const = default;
};

/**
 * Symbolic description of a boundary-preserving homeomorphism of the annulus
 * together with its designated lift.  Value-semantic immutable tree; copies
 * are cheap and evaluation is thread-safe.
 */
struct MapSpec {
    std::variant<IntegrableTwistNode, BilliardNode, PinnedKickNode, ComposeNode,
                 InverseNode, PowerNode, DeckNode>
        node;

    static MapSpec integrable_twist(double a, double b) {
        return MapSpec{IntegrableTwistNode{a, b}};
    }
    static MapSpec billiard(ConvexCurve curve) {
        return MapSpec{BilliardNode{std::make_shared<const ConvexCurve>(std::move(curve))}};
    }
    static MapSpec pinned_kick(double eps, std::vector<double> harmonics) {
        double sum = 0.0;
        for (double c : harmonics) sum += std::abs(c);
        if (std::abs(eps) * sum >= 1.0)
            throw std::invalid_argument("PinnedKick: |eps| * sum|harmonics| must be < 1");
        return MapSpec{PinnedKickNode{eps, std::move(harmonics)}};
    }
    static MapSpec compose(std::vector<MapSpec> items) {
        ComposeNode node;
        node.items.reserve(items.size());
        for (auto& m : items) node.items.push_back(std::make_shared<const MapSpec>(std::move(m)));
        return MapSpec{std::move(node)};
    }
    static MapSpec inverse(MapSpec m) {
        return MapSpec{InverseNode{std::make_shared<const MapSpec>(std::move(m))}};
    }
    static MapSpec power(MapSpec m, int n) {
        return MapSpec{PowerNode{std::make_shared<const MapSpec>(std::move(m)), n}};
    }
    static MapSpec deck(int n) { return MapSpec{DeckNode{n}}; }
    static MapSpec identity() { return deck(0); }

    bool operator==(const MapSpec& o) const { return node == o.node; }
};

inline bool ComposeNode::operator==(const ComposeNode& o) const {
    if (items.size() != o.items.size()) return false;
    for (size_t i = 0; i < items.size(); ++i)
        if (!(*items[i] == *o.items[i])) return false;
    return true;
}
inline bool InverseNode::operator==(const InverseNode& o) const { return *item == *o.item; }
inline bool PowerNode::operator==(const PowerNode& o) const {
    return n == o.n && *item == *o.item;
}

// ---------------------------------------------------------------------------
// billiard step
// ---------------------------------------------------------------------------

struct BilliardStep {
    double s_next = 0.0;      // normalized arclength mod 1
    double theta_next = 0.0;  // chord-tangent angle at arrival, in (0, pi)
    double ds = 0.0;          // forward arc displacement, in (0, 1)
    bool degenerate = false;  // theta too close to 0 or pi: no chord cast
};

/**
 * One bounce in Birkhoff coordinates: leave gamma(s) at angle theta from the
 * positively oriented tangent, hit the boundary once (strict convexity), and
 * return the arrival point with the reflected angle.  Root finding on the
 * arclength parameter is bracketed bisection to 1e-12 plus a Newton polish.
 */
inline BilliardStep billiard_step(const ConvexCurve& curve, double s, double theta) {
    // below the guard the chord-offset extremum falls under double roundoff
    // and no bracket can be certified; use the grazing limit instead
    if (theta < tol::kDegenerateChord || theta > kPi - tol::kDegenerateChord) {
        BilliardStep out;
        out.s_next = frac(s);
        out.theta_next = theta;
        out.ds = theta < kPi / 2.0 ? 0.0 : 1.0;
        out.degenerate = true;
        return out;
    }
    // root find in the analytic parameter; arclength is recovered once at the end
    const double ts = curve.param_of_arclength(s);
    const Vec2 p = curve.position_param(ts);
    const Vec2 dir = rotate(normalize(curve.derivative_param(ts)), theta);
    const Vec2 n = perp(dir);
    const auto f = [&](double t) { return dot(n, curve.position_param(t) - p); };

    // widen from the departure point until the signed offset flips
    const double eps0 = 1e-12;
    double lo = ts + eps0, hi = 0.0;
    double step = 1e-6;
    bool bracketed = false;
    for (; step < 2.0; step *= 2.0) {
        const double t = std::min(ts + step, ts + 1.0 - eps0);
        if (f(t) > 0.0) {
            hi = t;
            bracketed = true;
            break;
        }
        lo = t;
        if (t >= ts + 1.0 - eps0) break;
    }
    if (!bracketed)
        throw NoIntersectionFound("billiard_step: chord re-intersection not bracketed");

    for (int i = 0; i < 60 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) hi = mid; else lo = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double deriv = dot(n, curve.derivative_param(t));
        if (deriv == 0.0) break;
        const double dt = f(t) / deriv;
        t -= dt;
        if (std::abs(dt) < tol::kChordRoot * 1e-3) break;
    }
    if (t <= ts || t >= ts + 1.0)
        throw NoIntersectionFound("billiard_step: root escaped the forward window");

    const double wrap = t >= 1.0 ? 1.0 : 0.0;
    BilliardStep out;
    out.ds = curve.arclength_of_param(t - wrap) + wrap - s;
    if (out.ds <= 0.0 || out.ds >= 1.0)
        throw NoIntersectionFound("billiard_step: arc displacement left (0,1)");
    out.s_next = frac(s + out.ds);
    out.theta_next = std::abs(signed_angle(curve.derivative_param(t), dir));
    out.degenerate = false;
    return out;
}

// ---------------------------------------------------------------------------
// lift evaluation
// ---------------------------------------------------------------------------

LiftedPoint apply_lift(const MapSpec& m, LiftedPoint z);
LiftedPoint apply_inverse(const MapSpec& m, LiftedPoint z);

namespace detail {

inline double kick_shape(const PinnedKickNode& k, double x) {
    const double xf = frac(x);
    double h = 0.0;
    for (size_t j = 0; j < k.harmonics.size(); ++j)
        h += k.harmonics[j] * std::sin(kTwoPi * (j + 1) * xf);
    return h;
}

inline double kick_forward_y(const PinnedKickNode& k, double eps, double x, double y) {
    return clamp_y(y + eps * y * (1.0 - y) * kick_shape(k, x));
}

/** Inverse fiber map: solves y + eps*y*(1-y)*h = target on [0,1] (monotone). */
inline double kick_inverse_y(const PinnedKickNode& k, double eps, double x, double target) {
    const double h = kick_shape(k, x);
    const auto c = [&](double y) { return y + eps * y * (1.0 - y) * h; };
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (c(mid) < target) lo = mid; else hi = mid;
    }
    double y = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        const double deriv = 1.0 + eps * (1.0 - 2.0 * y) * h;
        y -= (c(y) - target) / deriv;
    }
    y = clamp_y(std::min(1.0, std::max(0.0, y)));
    if (std::abs(c(y) - target) > tol::kInverse * 1e-3)
        throw InversionFailure("PinnedKick inverse fiber solve did not converge");
    return y;
}

inline LiftedPoint billiard_lift(const BilliardNode& node, LiftedPoint z, bool forward) {
    const double y = clamp_y(z.y);
    if (y <= 0.0) return {z.x, 0.0};
    if (y >= 1.0) return {forward ? z.x + 1.0 : z.x - 1.0, 1.0};
    if (forward) {
        const BilliardStep st = billiard_step(*node.curve, frac(z.x), y * kPi);
        return {z.x + st.ds, st.theta_next / kPi};
    }
    // reversibility: B^-1 = T^-1 R B R with R(s, theta) = (s, pi - theta)
    const LiftedPoint r{z.x, 1.0 - y};
    const BilliardStep st = billiard_step(*node.curve, frac(r.x), r.y * kPi);
    const LiftedPoint fwd{r.x + st.ds - 1.0, st.theta_next / kPi};
    return {fwd.x, 1.0 - fwd.y};
}

}  // namespace detail

inline LiftedPoint apply_lift(const MapSpec& m, LiftedPoint z) {
    return std::visit(
        [&](const auto& node) -> LiftedPoint {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IntegrableTwistNode>) {
                return {z.x + node.a + node.b * z.y, z.y};
            } else if constexpr (std::is_same_v<T, BilliardNode>) {
                return detail::billiard_lift(node, z, true);
            } else if constexpr (std::is_same_v<T, PinnedKickNode>) {
                return {z.x, detail::kick_forward_y(node, node.eps, z.x, z.y)};
            } else if constexpr (std::is_same_v<T, ComposeNode>) {
                LiftedPoint w = z;
                for (auto it = node.items.rbegin(); it != node.items.rend(); ++it)
                    w = apply_lift(**it, w);
                return w;
            } else if constexpr (std::is_same_v<T, InverseNode>) {
                return apply_inverse(*node.item, z);
            } else if constexpr (std::is_same_v<T, PowerNode>) {
                LiftedPoint w = z;
                const int cnt = std::abs(node.n);
                for (int i = 0; i < cnt; ++i)
                    w = node.n >= 0 ? apply_lift(*node.item, w) : apply_inverse(*node.item, w);
                return w;
            } else {
                static_assert(std::is_same_v<T, DeckNode>);
                return {z.x + node.n, z.y};
            }
        },
        m.node);
}

inline LiftedPoint apply_inverse(const MapSpec& m, LiftedPoint z) {
    return std::visit(
        [&](const auto& node) -> LiftedPoint {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IntegrableTwistNode>) {
                return {z.x - node.a - node.b * z.y, z.y};
            } else if constexpr (std::is_same_v<T, BilliardNode>) {
                return detail::billiard_lift(node, z, false);
            } else if constexpr (std::is_same_v<T, PinnedKickNode>) {
                return {z.x, detail::kick_inverse_y(node, node.eps, z.x, z.y)};
            } else if constexpr (std::is_same_v<T, ComposeNode>) {
                LiftedPoint w = z;
                for (const auto& item : node.items) w = apply_inverse(*item, w);
                return w;
            } else if constexpr (std::is_same_v<T, InverseNode>) {
                return apply_lift(*node.item, z);
            } else if constexpr (std::is_same_v<T, PowerNode>) {
                LiftedPoint w = z;
                const int cnt = std::abs(node.n);
                for (int i = 0; i < cnt; ++i)
                    w = node.n >= 0 ? apply_inverse(*node.item, w) : apply_lift(*node.item, w);
                return w;
            } else {
                static_assert(std::is_same_v<T, DeckNode>);
                return {z.x - node.n, z.y};
            }
        },
        m.node);
}

// ---------------------------------------------------------------------------
// isotopies
// ---------------------------------------------------------------------------

/**
 * Canonical isotopy from the identity (t=0) to the map (t=1).  Parameter
 * scaling on primitives (equivalently lift-linear interpolation), lift-linear
 * interpolation on billiards, factor-wise composition elsewhere.  Intermediate
 * billiard interpolants are not guaranteed injective; inversion may throw.
 */
struct IsotopyHandle {
    MapPtr source;
};

inline IsotopyHandle isotopy_of(MapSpec m) {
    return IsotopyHandle{std::make_shared<const MapSpec>(std::move(m))};
}

LiftedPoint isotopy_eval(const MapSpec& m, double t, LiftedPoint z);
LiftedPoint isotopy_eval_inverse(const MapSpec& m, double t, LiftedPoint z,
                                 const LiftedPoint* seed = nullptr);

namespace detail {

/** Damped 2D Newton with finite-difference Jacobian for G(z) = target. */
template <class G>
LiftedPoint newton_invert(G&& g, LiftedPoint target, LiftedPoint seed) {
    LiftedPoint z = seed;
    z.y = std::min(1.0, std::max(0.0, z.y));
    const Vec2 tv = as_vec(target);
    double res = (as_vec(g(z)) - tv).norm();
    for (int it = 0; it < 60; ++it) {
        if (res <= 1e-12) return z;
        const double hx = 1e-7;
        const double hy = z.y + 1e-7 <= 1.0 ? 1e-7 : -1e-7;
        const Vec2 gz = as_vec(g(z));
        const Vec2 gx = as_vec(g({z.x + hx, z.y}));
        const Vec2 gy = as_vec(g({z.x, z.y + hy}));
        const double j11 = (gx.x - gz.x) / hx, j12 = (gy.x - gz.x) / hy;
        const double j21 = (gx.y - gz.y) / hx, j22 = (gy.y - gz.y) / hy;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14)
            throw InversionFailure("newton_invert: singular finite-difference Jacobian");
        const Vec2 r = gz - tv;
        const double dx = (j22 * r.x - j12 * r.y) / det;
        const double dy = (j11 * r.y - j21 * r.x) / det;
        double lambda = 1.0;
        bool moved = false;
        for (int back = 0; back < 8; ++back) {
            LiftedPoint cand{z.x - lambda * dx,
                             std::min(1.0, std::max(0.0, z.y - lambda * dy))};
            const double cres = (as_vec(g(cand)) - tv).norm();
            if (cres < res) {
                z = cand;
                res = cres;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        // a stalled line search near the finite-difference noise floor still
        // counts as success if the final tolerance below is met
        if (!moved) break;
    }
    if (res <= 1e-9) return z;
    throw InversionFailure("newton_invert: no convergence");
}

}  // namespace detail

inline LiftedPoint isotopy_eval(const MapSpec& m, double t, LiftedPoint z) {
    return std::visit(
        [&](const auto& node) -> LiftedPoint {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IntegrableTwistNode>) {
                return {z.x + t * (node.a + node.b * z.y), z.y};
            } else if constexpr (std::is_same_v<T, BilliardNode>) {
                const LiftedPoint w = detail::billiard_lift(node, z, true);
                return {(1.0 - t) * z.x + t * w.x, (1.0 - t) * z.y + t * w.y};
            } else if constexpr (std::is_same_v<T, PinnedKickNode>) {
                return {z.x, detail::kick_forward_y(node, t * node.eps, z.x, z.y)};
            } else if constexpr (std::is_same_v<T, ComposeNode>) {
                LiftedPoint w = z;
                for (auto it = node.items.rbegin(); it != node.items.rend(); ++it)
                    w = isotopy_eval(**it, t, w);
                return w;
            } else if constexpr (std::is_same_v<T, InverseNode>) {
                return isotopy_eval_inverse(*node.item, t, z);
            } else if constexpr (std::is_same_v<T, PowerNode>) {
                LiftedPoint w = z;
                const int cnt = std::abs(node.n);
                for (int i = 0; i < cnt; ++i)
                    w = node.n >= 0 ? isotopy_eval(*node.item, t, w)
                                    : isotopy_eval_inverse(*node.item, t, w);
                return w;
            } else {
                static_assert(std::is_same_v<T, DeckNode>);
                return {z.x + t * node.n, z.y};
            }
        },
        m.node);
}

inline LiftedPoint isotopy_eval_inverse(const MapSpec& m, double t, LiftedPoint z,
                                        const LiftedPoint* seed) {
    return std::visit(
        [&](const auto& node) -> LiftedPoint {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IntegrableTwistNode>) {
                return {z.x - t * (node.a + node.b * z.y), z.y};
            } else if constexpr (std::is_same_v<T, BilliardNode>) {
                const auto slice = [&node](double s) {
                    return [&node, s](LiftedPoint p) {
                        const LiftedPoint w = detail::billiard_lift(node, p, true);
                        return LiftedPoint{(1.0 - s) * p.x + s * w.x,
                                           (1.0 - s) * p.y + s * w.y};
                    };
                };
                try {
                    return detail::newton_invert(slice(t), z, seed ? *seed : z);
                } catch (const InversionFailure&) {
                    // the caller's seed missed the Newton basin; restart from
                    // the identity slice (exact solution p = z at s = 0) and
                    // march the slice time up with warm restarts
                    LiftedPoint p = z;
                    double s = 0.0, h = 1.0 / 32.0;
                    while (s < t) {
                        const double s1 = std::min(t, s + h);
                        try {
                            p = detail::newton_invert(slice(s1), z, p);
                        } catch (const InversionFailure&) {
                            h *= 0.5;
                            if (h < 1e-6) throw;
                            continue;
                        }
                        s = s1;
                        h = std::min(1.0 / 32.0, h * 1.7);
                    }
                    return p;
                }
            } else if constexpr (std::is_same_v<T, PinnedKickNode>) {
                return {z.x, detail::kick_inverse_y(node, t * node.eps, z.x, z.y)};
            } else if constexpr (std::is_same_v<T, ComposeNode>) {
                LiftedPoint w = z;
                for (const auto& item : node.items)
                    w = isotopy_eval_inverse(*item, t, w, seed);
                return w;
            } else if constexpr (std::is_same_v<T, InverseNode>) {
                return isotopy_eval(*node.item, t, z);
            } else if constexpr (std::is_same_v<T, PowerNode>) {
                LiftedPoint w = z;
                const int cnt = std::abs(node.n);
                for (int i = 0; i < cnt; ++i)
                    w = node.n >= 0 ? isotopy_eval_inverse(*node.item, t, w, seed)
                                    : isotopy_eval(*node.item, t, w);
                return w;
            } else {
                static_assert(std::is_same_v<T, DeckNode>);
                return {z.x - t * node.n, z.y};
            }
        },
        m.node);
}

inline LiftedPoint isotopy_eval(const IsotopyHandle& h, double t, LiftedPoint z) {
    return isotopy_eval(*h.source, t, z);
}

/** Runtime injectivity probe for one isotopy time slice. */
inline void check_injective_sample(const IsotopyHandle& h, double t,
                                   const std::vector<LiftedPoint>& probes) {
    std::vector<LiftedPoint> images;
    images.reserve(probes.size());
    for (const auto& p : probes) images.push_back(isotopy_eval(h, t, p));
    for (size_t i = 0; i < probes.size(); ++i) {
        for (size_t j = i + 1; j < probes.size(); ++j) {
            const double din = (as_vec(probes[i]) - as_vec(probes[j])).norm();
            const double dout = (as_vec(images[i]) - as_vec(images[j])).norm();
            if (din > 1e-6 && dout < 1e-10)
                throw NonInjectiveSample("isotopy slice collapses a probe pair at t=" +
                                         std::to_string(t));
        }
    }
}

// ---------------------------------------------------------------------------
// certificates
// ---------------------------------------------------------------------------

namespace detail {

struct LeafKinds {
    bool twist = false;
    bool billiard = false;
    bool kick = false;
};

inline void collect_leaf_kinds(const MapSpec& m, LeafKinds& out) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IntegrableTwistNode>) {
                out.twist = true;
            } else if constexpr (std::is_same_v<T, BilliardNode>) {
                out.billiard = true;
            } else if constexpr (std::is_same_v<T, PinnedKickNode>) {
                out.kick = true;
            } else if constexpr (std::is_same_v<T, ComposeNode>) {
                for (const auto& item : node.items) collect_leaf_kinds(*item, out);
            } else if constexpr (std::is_same_v<T, InverseNode>) {
                collect_leaf_kinds(*node.item, out);
            } else if constexpr (std::is_same_v<T, PowerNode>) {
                collect_leaf_kinds(*node.item, out);
            }
        },
        m.node);
}

}  // namespace detail

/**
 * True when the map provably preserves a smooth positive measure: integrable
 * factors preserve Lebesgue, billiard factors preserve sin(theta) ds dtheta,
 * deck factors preserve both.  Mixing the two families, or any PinnedKick
 * factor, loses the certificate (the map may still be non-wandering).
 */
inline bool non_wandering_certified(const MapSpec& m) {
    detail::LeafKinds kinds;
    detail::collect_leaf_kinds(m, kinds);
    if (kinds.kick) return false;
    return !(kinds.twist && kinds.billiard);
}

struct TwistCone {
    double beta = 0.0;        // cone half-angle: min deviation of Df.v from the vertical axis
    double min_dxdy = 0.0;    // min over probes of d(p1 f)/dy
    bool positive_twist = false;
};

/**
 * Finite-difference twist certificate over an interior probe grid; beta is
 * measured on both Df.v and Df^-1.v and feeds the Lipschitz acceptance bound
 * cot(beta) for certified invariant graphs.
 */
inline TwistCone measure_twist_cone(const MapSpec& m, int nx = 16, int ny = 16) {
    const double h = 1e-6;
    TwistCone cone;
    cone.beta = kPi / 2.0;
    cone.min_dxdy = std::numeric_limits<double>::infinity();
    const Vec2 up{0.0, 1.0}, down{0.0, -1.0};
    for (int i = 0; i < nx; ++i) {
        for (int j = 1; j < ny; ++j) {
            const double x = (i + 0.5) / nx;
            const double y = static_cast<double>(j) / ny;
            for (int inv = 0; inv < 2; ++inv) {
                const auto eval = [&](LiftedPoint p) {
                    return inv == 0 ? apply_lift(m, p) : apply_inverse(m, p);
                };
                const Vec2 lo = as_vec(eval({x, y - h}));
                const Vec2 hi = as_vec(eval({x, y + h}));
                const Vec2 w = (hi - lo) * (1.0 / (2.0 * h));
                const double dev =
                    std::min(std::abs(signed_angle(w, up)), std::abs(signed_angle(w, down)));
                cone.beta = std::min(cone.beta, dev);
                if (inv == 0) cone.min_dxdy = std::min(cone.min_dxdy, w.x);
            }
        }
    }
    cone.positive_twist = cone.min_dxdy > 0.0;
    return cone;
}

}  // namespace annlab
