#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "annulus/maps.hpp"

using namespace annlab;

namespace {

// a small zoo exercising every node kind
std::vector<MapSpec> zoo() {
    return {
        MapSpec::integrable_twist(0.0, 1.0),
        MapSpec::integrable_twist(0.25, -0.5),
        MapSpec::pinned_kick(0.3, {1.0}),
        MapSpec::pinned_kick(-0.4, {0.5, 0.3}),
        MapSpec::billiard(ConvexCurve::ellipse(1.0, 1.0)),
        MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.5)),
        MapSpec::compose({MapSpec::pinned_kick(0.9, {1.0}), MapSpec::integrable_twist(0.0, 1.0)}),
        MapSpec::inverse(MapSpec::integrable_twist(0.1, 0.7)),
        MapSpec::power(MapSpec::integrable_twist(0.1, 0.2), 3),
        MapSpec::power(MapSpec::pinned_kick(0.2, {0.7}), -2),
        MapSpec::deck(2),
        MapSpec::compose({MapSpec::deck(-1), MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.8))}),
    };
}

std::vector<LiftedPoint> probe_grid() {
    std::vector<LiftedPoint> out;
    for (double x : {-0.7, 0.0, 0.31, 1.9})
        for (double y : {0.0, 0.15, 0.5, 0.85, 1.0}) out.push_back({x, y});
    return out;
}

}  // namespace

TEST_CASE("map specs compare structurally") {
    CHECK(MapSpec::integrable_twist(0.0, 1.0) == MapSpec::integrable_twist(0.0, 1.0));
    CHECK_FALSE(MapSpec::integrable_twist(0.0, 1.0) == MapSpec::integrable_twist(0.0, 1.0001));
    CHECK(MapSpec::identity() == MapSpec::deck(0));
    const MapSpec c1 = MapSpec::compose({MapSpec::deck(1), MapSpec::pinned_kick(0.2, {1.0})});
    const MapSpec c2 = MapSpec::compose({MapSpec::deck(1), MapSpec::pinned_kick(0.2, {1.0})});
    const MapSpec c3 = MapSpec::compose({MapSpec::pinned_kick(0.2, {1.0}), MapSpec::deck(1)});
    CHECK(c1 == c2);
    CHECK_FALSE(c1 == c3);
    CHECK(MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.5)) ==
          MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.5)));
}

TEST_CASE("pinned kick construction invariant") {
    CHECK_THROWS_AS(MapSpec::pinned_kick(1.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MapSpec::pinned_kick(0.5, {1.0, 1.0}), std::invalid_argument);
    CHECK_NOTHROW(MapSpec::pinned_kick(0.99, {1.0}));
    CHECK_NOTHROW(MapSpec::pinned_kick(-0.3, {0.5, 0.4, 0.1}));
}

TEST_CASE("deck translation commutes with every lift") {
    for (const MapSpec& m : zoo()) {
        for (const LiftedPoint& z : probe_grid()) {
            const LiftedPoint a = apply_lift(m, {z.x + 1.0, z.y});
            const LiftedPoint b = apply_lift(m, z);
            CHECK(std::abs(a.x - (b.x + 1.0)) < tol::kDeckCommute);
            CHECK(std::abs(a.y - b.y) < tol::kDeckCommute);
        }
    }
}

TEST_CASE("inverse evaluation round trips") {
    for (const MapSpec& m : zoo()) {
        for (const LiftedPoint& z : probe_grid()) {
            const LiftedPoint w = apply_lift(m, z);
            CHECK(w.y >= 0.0);
            CHECK(w.y <= 1.0);
            const LiftedPoint back = apply_inverse(m, w);
            CHECK(std::abs(back.x - z.x) < tol::kInverse);
            CHECK(std::abs(back.y - z.y) < tol::kInverse);
        }
    }
}

TEST_CASE("boundary circles are preserved") {
    for (const MapSpec& m : zoo()) {
        for (double x : {-0.3, 0.0, 0.62}) {
            CHECK(apply_lift(m, {x, 0.0}).y == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(apply_lift(m, {x, 1.0}).y == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("composition applies rightmost first") {
    const MapSpec m =
        MapSpec::compose({MapSpec::deck(1), MapSpec::integrable_twist(0.0, 1.0)});
    const LiftedPoint w = apply_lift(m, {0.0, 0.5});
    CHECK(w.x == doctest::Approx(1.5));
    CHECK(w.y == doctest::Approx(0.5));
    // inverse runs the factors the other way
    const LiftedPoint z = apply_inverse(m, w);
    CHECK(z.x == doctest::Approx(0.0));
    CHECK(z.y == doctest::Approx(0.5));
}

TEST_CASE("powers iterate with sign") {
    const MapSpec m = MapSpec::power(MapSpec::integrable_twist(0.1, 0.0), 3);
    CHECK(apply_lift(m, {0.0, 0.3}).x == doctest::Approx(0.3));
    const MapSpec neg = MapSpec::power(MapSpec::integrable_twist(0.1, 0.0), -2);
    CHECK(apply_lift(neg, {0.0, 0.3}).x == doctest::Approx(-0.2));
    CHECK(apply_lift(MapSpec::power(MapSpec::deck(1), 0), {0.4, 0.2}).x == doctest::Approx(0.4));
}

TEST_CASE("pinned kick fixes the marked circles and the zero set of the shape") {
    const MapSpec m = MapSpec::pinned_kick(0.9, {1.0});
    CHECK(apply_lift(m, {0.25, 0.0}).y == doctest::Approx(0.0));
    CHECK(apply_lift(m, {0.25, 1.0}).y == doctest::Approx(1.0));
    // sin(2 pi x) vanishes at x = 0 and x = 1/2
    CHECK(apply_lift(m, {0.0, 0.37}).y == doctest::Approx(0.37));
    CHECK(apply_lift(m, {0.5, 0.37}).y == doctest::Approx(0.37));
    CHECK(apply_lift(m, {0.25, 0.5}).y == doctest::Approx(0.5 + 0.9 * 0.25));
    // x never moves
    for (const LiftedPoint& z : probe_grid()) CHECK(apply_lift(m, z).x == z.x);
}

// --------------------------------------------------------------------------
// billiards
// --------------------------------------------------------------------------

TEST_CASE("circle billiard advances the arc by theta/pi") {
    const ConvexCurve circle = ConvexCurve::ellipse(1.0, 1.0);
    for (double theta : {kPi / 6.0, kPi / 3.0, kPi / 2.0, 2.0 * kPi / 3.0}) {
        for (double s : {0.0, 0.21, 0.77}) {
            const BilliardStep st = billiard_step(circle, s, theta);
            CHECK_FALSE(st.degenerate);
            CHECK(st.ds == doctest::Approx(theta / kPi).epsilon(1e-9));
            CHECK(st.theta_next == doctest::Approx(theta).epsilon(1e-9));
        }
    }
}

TEST_CASE("circle billiard lift equals the unit shear") {
    const MapSpec bil = MapSpec::billiard(ConvexCurve::ellipse(1.0, 1.0));
    const MapSpec twist = MapSpec::integrable_twist(0.0, 1.0);
    for (const LiftedPoint& z : probe_grid()) {
        const LiftedPoint a = apply_lift(bil, z);
        const LiftedPoint b = apply_lift(twist, z);
        CHECK(std::abs(a.x - b.x) < 1e-8);
        CHECK(std::abs(a.y - b.y) < 1e-8);
    }
}

TEST_CASE("ellipse axes carry the period-two bounces") {
    const ConvexCurve e = ConvexCurve::ellipse(1.0, 0.5);
    // major axis: s = 0 <-> s = 1/2 at right angles
    BilliardStep st = billiard_step(e, 0.0, kPi / 2.0);
    CHECK(st.s_next == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.theta_next == doctest::Approx(kPi / 2.0).epsilon(1e-10));
    // minor axis: s = 1/4 <-> s = 3/4
    st = billiard_step(e, 0.25, kPi / 2.0);
    CHECK(st.s_next == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(st.theta_next == doctest::Approx(kPi / 2.0).epsilon(1e-10));
}

TEST_CASE("degenerate grazing shots stay on the boundary") {
    const ConvexCurve e = ConvexCurve::ellipse(1.0, 0.5);
    const BilliardStep lo = billiard_step(e, 0.3, 0.0);
    CHECK(lo.degenerate);
    CHECK(lo.ds == 0.0);
    const BilliardStep hi = billiard_step(e, 0.3, kPi);
    CHECK(hi.degenerate);
    CHECK(hi.ds == 1.0);
    const MapSpec m = MapSpec::billiard(e);
    CHECK(apply_lift(m, {0.3, 0.0}).x == doctest::Approx(0.3));
    CHECK(apply_lift(m, {0.3, 1.0}).x == doctest::Approx(1.3));
    CHECK(apply_inverse(m, {0.3, 1.0}).x == doctest::Approx(-0.7));
}

TEST_CASE("billiard inverse agrees with the reflected forward map") {
    const ConvexCurve e = ConvexCurve::ellipse(1.0, 0.6);
    const MapSpec m = MapSpec::billiard(e);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(0.05, 0.95);
    for (int i = 0; i < 50; ++i) {
        const LiftedPoint z{ux(rng), uy(rng)};
        const LiftedPoint w = apply_lift(m, z);
        const LiftedPoint back = apply_inverse(m, w);
        CHECK(std::abs(back.x - z.x) < 1e-9);
        CHECK(std::abs(back.y - z.y) < 1e-9);
    }
}

TEST_CASE("chords of the fourier table and the ellipse stay inside the curve") {
    const ConvexCurve c = ConvexCurve::fourier({0.08, 0.02});
    for (double s : {0.0, 0.33, 0.71}) {
        const BilliardStep st = billiard_step(c, s, 1.1);
        CHECK(st.ds > 0.0);
        CHECK(st.ds < 1.0);
        CHECK(st.theta_next > 0.0);
        CHECK(st.theta_next < kPi);
    }
    CHECK_THROWS_AS(ConvexCurve::fourier({0.9}), std::invalid_argument);
    CHECK_THROWS_AS(ConvexCurve::ellipse(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("arclength tables invert the parameterization") {
    for (const ConvexCurve& c :
         {ConvexCurve::ellipse(1.0, 0.5), ConvexCurve::fourier({0.1, 0.05})}) {
        for (double t : {0.0, 0.1, 0.37, 0.5, 0.93}) {
            const double s = c.arclength_of_param(t);
            const double back = c.param_of_arclength(s);
            CHECK(std::abs(back - t) < 1e-10);
        }
        // quarter symmetry of the ellipse puts the axis points at s = k/4
        if (c.kind() == ConvexCurve::Kind::Ellipse) {
            CHECK(c.arclength_of_param(0.25) == doctest::Approx(0.25).epsilon(1e-12));
            CHECK(c.arclength_of_param(0.5) == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
}

// --------------------------------------------------------------------------
// isotopies
// --------------------------------------------------------------------------

TEST_CASE("isotopies run from the identity to the map") {
    for (const MapSpec& m : zoo()) {
        for (const LiftedPoint& z : probe_grid()) {
            const LiftedPoint at0 = isotopy_eval(m, 0.0, z);
            CHECK(std::abs(at0.x - z.x) < 1e-12);
            CHECK(std::abs(at0.y - z.y) < 1e-12);
            const LiftedPoint at1 = isotopy_eval(m, 1.0, z);
            const LiftedPoint direct = apply_lift(m, z);
            CHECK(std::abs(at1.x - direct.x) < 1e-9);
            CHECK(std::abs(at1.y - direct.y) < 1e-9);
        }
    }
}

TEST_CASE("isotopy slices preserve the boundary and invert") {
    for (const MapSpec& m : zoo()) {
        for (double t : {0.25, 0.5, 0.9}) {
            CHECK(std::abs(isotopy_eval(m, t, {0.4, 0.0}).y) < 1e-12);
            CHECK(std::abs(isotopy_eval(m, t, {0.4, 1.0}).y - 1.0) < 1e-12);
            for (const LiftedPoint& z : probe_grid()) {
                const LiftedPoint w = isotopy_eval(m, t, z);
                const LiftedPoint back = isotopy_eval_inverse(m, t, w, &z);
                CHECK(std::abs(back.x - z.x) < 1e-7);
                CHECK(std::abs(back.y - z.y) < 1e-7);
            }
        }
    }
}

TEST_CASE("isotopy slices pass the injectivity probe") {
    const IsotopyHandle h = isotopy_of(
        MapSpec::compose({MapSpec::pinned_kick(0.9, {1.0}), MapSpec::integrable_twist(0.0, 1.0)}));
    for (double t : {0.0, 0.33, 0.66, 1.0}) CHECK_NOTHROW(check_injective_sample(h, t, probe_grid()));
}

// --------------------------------------------------------------------------
// certificates
// --------------------------------------------------------------------------

TEST_CASE("measure certificates follow the factor families") {
    CHECK(non_wandering_certified(MapSpec::integrable_twist(0.0, 1.0)));
    CHECK(non_wandering_certified(MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.5))));
    CHECK(non_wandering_certified(MapSpec::deck(3)));
    CHECK(non_wandering_certified(MapSpec::compose(
        {MapSpec::integrable_twist(0.1, 0.3), MapSpec::integrable_twist(0.0, -1.0)})));
    CHECK(non_wandering_certified(MapSpec::power(
        MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.7)), 2)));
    CHECK_FALSE(non_wandering_certified(MapSpec::pinned_kick(0.2, {1.0})));
    CHECK_FALSE(non_wandering_certified(MapSpec::compose(
        {MapSpec::pinned_kick(0.2, {1.0}), MapSpec::integrable_twist(0.0, 1.0)})));
    CHECK_FALSE(non_wandering_certified(MapSpec::compose(
        {MapSpec::integrable_twist(0.0, 1.0), MapSpec::billiard(ConvexCurve::ellipse(1.0, 0.5))})));
}

TEST_CASE("twist cone of the unit shear is the diagonal cone") {
    const TwistCone cone = measure_twist_cone(MapSpec::integrable_twist(0.0, 1.0));
    CHECK(cone.positive_twist);
    CHECK(cone.min_dxdy == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(cone.beta == doctest::Approx(kPi / 4.0).epsilon(1e-4));
    const TwistCone neg = measure_twist_cone(MapSpec::integrable_twist(0.0, -1.0));
    CHECK_FALSE(neg.positive_twist);
    CHECK(neg.beta == doctest::Approx(kPi / 4.0).epsilon(1e-4));
}

TEST_CASE("circle billiard twist cone matches the shear") {
    const TwistCone cone = measure_twist_cone(MapSpec::billiard(ConvexCurve::ellipse(1.0, 1.0)), 8, 8);
    CHECK(cone.positive_twist);
    CHECK(cone.min_dxdy == doctest::Approx(1.0).epsilon(1e-3));
}
