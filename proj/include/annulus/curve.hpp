#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "annulus/geometry.hpp"

namespace annlab {

/**
 * Strictly convex C^2 boundary curve, parameterized analytically by t in [0,1)
 * (counterclockwise) with a precomputed table inverting normalized arclength.
 * Immutable after construction; safe to share across worker threads.
 *
 * Supported shapes:
 *   Ellipse(a, b)             (a cos 2pi t, b sin 2pi t)
 *   FourierBoundary(c)        polar r(phi) = 1 + sum_k c[k] cos((k+1) phi)
 *
 * Construction throws std::invalid_argument when sampled curvature is not
 * strictly positive.
 */
class ConvexCurve {
public:
    enum class Kind { Ellipse, Fourier };

    static ConvexCurve ellipse(double a, double b) {
        return ConvexCurve(Kind::Ellipse, a, b, {});
    }
    static ConvexCurve fourier(std::vector<double> radius_harmonics) {
        return ConvexCurve(Kind::Fourier, 0.0, 0.0, std::move(radius_harmonics));
    }

    Kind kind() const { return _kind; }
    double a() const { return _a; }
    double b() const { return _b; }
    const std::vector<double>& harmonics() const { return _coef; }
    double length() const { return _length; }

    bool operator==(const ConvexCurve& o) const {
        return _kind == o._kind && _a == o._a && _b == o._b && _coef == o._coef;
    }

    Vec2 position_param(double t) const {
        const double phi = kTwoPi * t;
        if (_kind == Kind::Ellipse) return {_a * std::cos(phi), _b * std::sin(phi)};
        const double r = radius(phi);
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    Vec2 derivative_param(double t) const {
        const double phi = kTwoPi * t;
        if (_kind == Kind::Ellipse)
            return {-kTwoPi * _a * std::sin(phi), kTwoPi * _b * std::cos(phi)};
        const double r = radius(phi), dr = radius_d1(phi);
        const double c = std::cos(phi), s = std::sin(phi);
        return {kTwoPi * (dr * c - r * s), kTwoPi * (dr * s + r * c)};
    }

    Vec2 second_derivative_param(double t) const {
        const double phi = kTwoPi * t;
        const double w = kTwoPi * kTwoPi;
        if (_kind == Kind::Ellipse)
            return {-w * _a * std::cos(phi), -w * _b * std::sin(phi)};
        const double r = radius(phi), dr = radius_d1(phi), ddr = radius_d2(phi);
        const double c = std::cos(phi), s = std::sin(phi);
        return {w * ((ddr - r) * c - 2.0 * dr * s), w * ((ddr - r) * s + 2.0 * dr * c)};
    }

    double curvature_param(double t) const {
        const Vec2 d1 = derivative_param(t), d2 = second_derivative_param(t);
        const double sp = d1.norm();
        return cross(d1, d2) / (sp * sp * sp);
    }

    /** Analytic parameter for normalized arclength s (s taken mod 1). */
    double param_of_arclength(double s) const {
        const double target = frac(s) * _length;
        size_t lo = 0, hi = kCells;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            if (_cum[mid] <= target) lo = mid; else hi = mid;
        }
        const double cell = (_cum[lo + 1] > _cum[lo])
                                ? (target - _cum[lo]) / (_cum[lo + 1] - _cum[lo])
                                : 0.0;
        double t = (static_cast<double>(lo) + cell) / kCells;
        const double t0 = static_cast<double>(lo) / kCells;
        for (int it = 0; it < 4; ++it) {
            const double arc = _cum[lo] + gauss_arc(t0, t);
            const double speed = derivative_param(t).norm();
            t -= (arc - target) / speed;
        }
        return t;
    }

    Vec2 point_at(double s) const { return position_param(param_of_arclength(s)); }
    Vec2 tangent_at(double s) const { return normalize(derivative_param(param_of_arclength(s))); }

    /** Normalized arclength from parameter 0 to parameter t in [0,1]. */
    double arclength_of_param(double t) const {
        const double tf = frac(t);
        const size_t cell = std::min(static_cast<size_t>(tf * kCells), kCells - 1);
        const double t0 = static_cast<double>(cell) / kCells;
        return (_cum[cell] + gauss_arc(t0, tf)) / _length;
    }

private:
    static constexpr size_t kCells = 4096;

    ConvexCurve(Kind kind, double a, double b, std::vector<double> coef)
        : _kind(kind), _a(a), _b(b), _coef(std::move(coef)) {
        if (_kind == Kind::Ellipse && (_a <= 0.0 || _b <= 0.0))
            throw std::invalid_argument("ConvexCurve: ellipse semi-axes must be positive");
        _cum.resize(kCells + 1, 0.0);
        for (size_t i = 0; i < kCells; ++i) {
            const double t0 = static_cast<double>(i) / kCells;
            const double t1 = static_cast<double>(i + 1) / kCells;
            _cum[i + 1] = _cum[i] + gauss_arc(t0, t1);
        }
        _length = _cum[kCells];
        for (size_t i = 0; i <= kCells; ++i) {
            if (curvature_param(static_cast<double>(i) / kCells) <= 0.0)
                throw std::invalid_argument("ConvexCurve: boundary is not strictly convex");
        }
    }

    double radius(double phi) const {
        double r = 1.0;
        for (size_t k = 0; k < _coef.size(); ++k) r += _coef[k] * std::cos((k + 1) * phi);
        return r;
    }
    double radius_d1(double phi) const {
        double r = 0.0;
        for (size_t k = 0; k < _coef.size(); ++k) {
            const double m = static_cast<double>(k + 1);
            r -= _coef[k] * m * std::sin(m * phi);
        }
        return r;
    }
    double radius_d2(double phi) const {
        double r = 0.0;
        for (size_t k = 0; k < _coef.size(); ++k) {
            const double m = static_cast<double>(k + 1);
            r -= _coef[k] * m * m * std::cos(m * phi);
        }
        return r;
    }

    // 5-point Gauss-Legendre of |gamma'| over [t0, t1]
    double gauss_arc(double t0, double t1) const {
        static constexpr std::array<double, 5> xs = {
            -0.9061798459386640, -0.5384693101056831, 0.0,
            0.5384693101056831, 0.9061798459386640};
        static constexpr std::array<double, 5> ws = {
            0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
            0.4786286704993665, 0.2369268850561891};
        const double h = 0.5 * (t1 - t0), c = 0.5 * (t0 + t1);
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) acc += ws[i] * derivative_param(c + h * xs[i]).norm();
        return acc * h;
    }

    Kind _kind;
    double _a, _b;
    std::vector<double> _coef;
    std::vector<double> _cum;
    double _length = 0.0;
};

using CurvePtr = std::shared_ptr<const ConvexCurve>;

}  // namespace annlab
