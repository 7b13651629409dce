#pragma once

#include <array>
#include <cmath>

#include "explab/geometry.hpp"

namespace explab {

/// Hyperbolic toral automorphism (x, y) -> (2x + y, x + y) mod 1.
struct CatMap {
    static constexpr std::array<std::array<double, 2>, 2> matrix{{{2.0, 1.0}, {1.0, 1.0}}};
    static constexpr std::array<std::array<double, 2>, 2> inverse{{{1.0, -1.0}, {-1.0, 2.0}}};

    static double unstable_eigenvalue() noexcept { return (3.0 + std::sqrt(5.0)) / 2.0; }
    static double stable_eigenvalue() noexcept { return (3.0 - std::sqrt(5.0)) / 2.0; }

    /// Unit eigenvectors; the stable line has slope -(1 + sqrt 5)/2.
    static std::array<double, 2> unstable_direction() noexcept {
        double s = (std::sqrt(5.0) - 1.0) / 2.0, n = std::hypot(1.0, s);
        return {1.0 / n, s / n};
    }
    static std::array<double, 2> stable_direction() noexcept {
        double s = -(1.0 + std::sqrt(5.0)) / 2.0, n = std::hypot(1.0, s);
        return {1.0 / n, s / n};
    }

    static Point forward(const Point& p) noexcept {
        return Point::torus(2.0 * p.c[0] + p.c[1], p.c[0] + p.c[1]);
    }
    static Point backward(const Point& p) noexcept {
        return Point::torus(p.c[0] - p.c[1], -p.c[0] + 2.0 * p.c[1]);
    }

    /// Linear lift to the plane (no reduction mod 1).
    static Point lift_forward(const Point& p) noexcept {
        return Point::plane(2.0 * p.c[0] + p.c[1], p.c[0] + p.c[1]);
    }
    static Point lift_backward(const Point& p) noexcept {
        return Point::plane(p.c[0] - p.c[1], -p.c[0] + 2.0 * p.c[1]);
    }
};

}  // namespace explab
