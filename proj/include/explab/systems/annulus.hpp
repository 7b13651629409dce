#pragma once

#include <cmath>

#include "explab/geometry.hpp"

namespace explab {

/// Time-one map of the unit-speed rotation field (-y, x)/r on 1 <= r <= 2.
/// Orbits are circles traversed with angular velocity 1/r, so the map is a rotation by 1/r
/// radians on the circle of radius r.
struct AnnulusTimeOne {
    static Point rotate(const Point& p, double t) {
        double r = std::hypot(p.c[0], p.c[1]);
        double a = t / r;
        double c = std::cos(a), s = std::sin(a);
        Point q = p;
        q.c[0] = c * p.c[0] - s * p.c[1];
        q.c[1] = s * p.c[0] + c * p.c[1];
        return q;
    }
    static Point forward(const Point& p) { return rotate(p, 1.0); }
    static Point backward(const Point& p) { return rotate(p, -1.0); }
};

}  // namespace explab
