#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "annulus/digital.hpp"

using namespace annlab;

TEST_CASE("canonical residues cycle through {-1,0,1,2}") {
    const int expect[4] = {0, 1, 2, -1};
    for (int k = -20; k <= 20; ++k) {
        CHECK(canonical_residue(k) == expect[((k % 4) + 4) % 4]);
        CHECK(rep(project(k)) == canonical_residue(k));
    }
    CHECK(project(0) == AngleClass::Below);
    CHECK(project(1) == AngleClass::RightOf);
    CHECK(project(2) == AngleClass::Above);
    CHECK(project(3) == AngleClass::LeftOf);
    CHECK(project(-1) == AngleClass::LeftOf);
    CHECK(project(-2) == AngleClass::Above);
}

TEST_CASE("adjacency pairs even with odd only") {
    const AngleClass all[4] = {AngleClass::LeftOf, AngleClass::Below, AngleClass::RightOf,
                               AngleClass::Above};
    for (AngleClass a : all) {
        for (AngleClass b : all) {
            const bool expect = a == b || (is_even(a) != is_even(b));
            CHECK(is_adjacent(a, b) == expect);
        }
    }
    CHECK_FALSE(is_adjacent(AngleClass::LeftOf, AngleClass::RightOf));
    CHECK_FALSE(is_adjacent(AngleClass::Below, AngleClass::Above));
}

namespace {

// reference lifting: breadth-first over integer steps in {-1,0,+1}
std::vector<std::vector<int>> all_lifts(const std::vector<AngleClass>& classes, int base) {
    std::vector<std::vector<int>> acc;
    if (classes.empty() || project(base) != classes.front()) return acc;
    acc.push_back({base});
    for (size_t i = 1; i < classes.size(); ++i) {
        std::vector<std::vector<int>> next;
        for (auto& path : acc) {
            for (int step : {-1, 0, 1}) {
                const int v = path.back() + step;
                if (project(v) != classes[i]) continue;
                auto grown = path;
                grown.push_back(v);
                next.push_back(std::move(grown));
            }
        }
        acc = std::move(next);
        if (acc.empty()) break;
    }
    return acc;
}

}  // namespace

TEST_CASE("class paths lift uniquely against brute-force enumeration") {
    const AngleClass all[4] = {AngleClass::LeftOf, AngleClass::Below, AngleClass::RightOf,
                               AngleClass::Above};
    // every class sequence of length <= 5, every base in a window
    std::vector<std::vector<AngleClass>> seqs = {{}};
    for (int len = 1; len <= 5; ++len) {
        std::vector<std::vector<AngleClass>> grown;
        for (const auto& s : seqs) {
            for (AngleClass c : all) {
                auto t = s;
                t.push_back(c);
                grown.push_back(std::move(t));
            }
        }
        int checked = 0;
        for (const auto& s : grown) {
            for (int base = -5; base <= 6; ++base) {
                if (project(base) != s.front()) continue;
                const auto oracle = all_lifts(s, base);
                bool continuous = true;
                for (size_t i = 1; i < s.size(); ++i)
                    if (!is_adjacent(s[i - 1], s[i])) continuous = false;
                if (!continuous) {
                    CHECK(oracle.empty());
                    CHECK_THROWS_AS(lift_class_path(s, base), NonAdjacentStep);
                } else {
                    REQUIRE(oracle.size() == 1);
                    CHECK(lift_class_path(s, base) == oracle.front());
                }
                ++checked;
            }
        }
        CHECK(checked > 0);
        seqs = std::move(grown);
    }
}

TEST_CASE("random continuous walks project and relift exactly") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> step(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> walk = {std::uniform_int_distribution<int>(-9, 9)(rng)};
        for (int i = 0; i < 40; ++i) walk.push_back(walk.back() + step(rng));
        std::vector<AngleClass> classes;
        for (int v : walk) classes.push_back(project(v));
        CHECK(lift_class_path(classes, walk.front()) == walk);
        const auto [lo, hi] = interval_hull(walk);
        for (int v : walk) {
            CHECK(lo <= v);
            CHECK(v <= hi);
        }
    }
    CHECK_THROWS_AS(interval_hull({}), PreconditionError);
}

TEST_CASE("base must project to the first class") {
    CHECK_THROWS_AS(lift_class_path({AngleClass::Below}, 1), BaseMismatch);
    CHECK(lift_class_path({AngleClass::Below}, 4) == std::vector<LiftedAngle>{4});
    CHECK(lift_class_path({AngleClass::Below}, -8) == std::vector<LiftedAngle>{-8});
}

TEST_CASE("winding discretization: rays even, half planes odd") {
    const double q = kPi / 2.0;
    CHECK(discretize_winding(q) == 0);         // up
    CHECK(discretize_winding(kPi) == 1);       // left
    CHECK(discretize_winding(3.0 * q) == 2);   // down
    CHECK(discretize_winding(0.0) == -1);      // right
    CHECK(discretize_winding(-q) == -2);
    CHECK(discretize_winding(-kPi) == -3);
    CHECK(discretize_winding(5.0 * q) == 4);
    CHECK(discretize_winding(q + 1e-12) == 0);     // inside the ray snap
    CHECK(discretize_winding(q + 1e-7) == 1);      // outside it
    CHECK(discretize_winding(q - 1e-7) == -1);
    // full-turn equivariance: psi + 2 pi n adds 4n
    for (int n = -3; n <= 3; ++n) {
        for (double psi : {0.3, 1.8, 3.0, -2.4}) {
            CHECK(discretize_winding(psi + kTwoPi * n) == discretize_winding(psi) + 4 * n);
        }
    }
}

TEST_CASE("class-directed winding values pick the consistent cell") {
    const double q = kPi / 2.0;
    // within each open cell the odd value is unambiguous
    CHECK(winding_value_for_class(2.0, AngleClass::RightOf) == 1);
    CHECK(winding_value_for_class(0.3, AngleClass::LeftOf) == -1);
    CHECK(winding_value_for_class(-2.0, AngleClass::RightOf) == -3);
    // near a ray the class decides between the two neighboring odd cells
    CHECK(winding_value_for_class(q - 1e-11, AngleClass::LeftOf) == -1);
    CHECK(winding_value_for_class(q + 1e-11, AngleClass::RightOf) == 1);
    CHECK(winding_value_for_class(q, AngleClass::Below) == 0);
    CHECK(winding_value_for_class(q + 0.2, AngleClass::Below) == 0);
    CHECK(winding_value_for_class(3.0 * q - 0.2, AngleClass::Above) == 2);
    CHECK(winding_value_for_class(-q + 0.1, AngleClass::Above) == -2);
    CHECK_THROWS_AS(winding_value_for_class(q, AngleClass::Above), RefinementError);
    // agreement with the undirected discretization away from rays
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 500; ++i) {
        const double psi = u(rng);
        const LiftedAngle d = discretize_winding(psi);
        CHECK(winding_value_for_class(psi, project(d)) == d);
    }
}
