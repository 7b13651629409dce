#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "explab/geometry.hpp"

namespace explab {

/// theta -> 2 theta mod 1.  Not invertible; each point has the two preimages theta/2 and
/// theta/2 + 1/2.
struct DoublingCircle {
    static Point forward(const Point& p) noexcept { return Point::circle(2.0 * p.c[0]); }
    static std::array<Point, 2> preimages(const Point& p) noexcept {
        return {Point::circle(p.c[0] / 2.0), Point::circle(p.c[0] / 2.0 + 0.5)};
    }
};

/// Closed arc [start, start + length] on the circle R/Z.
struct Arc {
    double start = 0.0;
    double length = 0.0;
};

/// Lebesgue measure of the image of the arc after n doublings.  The image of an arc is an arc
/// of twice the length until it wraps the whole circle, so the value is min(1, 2^n length),
/// exact in floating point.
inline double doubling_arc(const Arc& arc, int n) {
    if (!(arc.length > 0.0 && arc.length < 1.0)) throw std::domain_error("doubling_arc: length must lie in (0,1)");
    if (n < 0) throw std::domain_error("doubling_arc: n must be nonnegative");
    return std::min(1.0, std::ldexp(arc.length, std::min(n, 1100)));
}

/// Shift on the inverse limit of the doubling map: g(a)_n = a_{n+1}.
struct SolenoidShift {
    static SolenoidPoint forward(const SolenoidPoint& s) {
        SolenoidPoint t = s;
        const int K = s.K;
        // The dropped coordinate a_{-K} is (a_{-K+1} + d)/2; remember d for going back.
        double dropped = s.at(-K), next = s.at(-K + 1);
        auto d = static_cast<std::uint8_t>(std::lround(2.0 * dropped - next) != 0);
        t.past.push_front(d);
        for (int n = -K; n < K; ++n) t.window[static_cast<std::size_t>(n + K)] = s.at(n + 1);
        t.window[static_cast<std::size_t>(2 * K)] = wrap_unit(2.0 * s.at(K));
        return t;
    }

    static SolenoidPoint backward(const SolenoidPoint& s) {
        SolenoidPoint t = s;
        const int K = s.K;
        std::uint8_t d = 0;  // digit 0 once the stored history is exhausted
        if (!t.past.empty()) {
            d = t.past.front();
            t.past.pop_front();
        }
        for (int n = K; n > -K; --n) t.window[static_cast<std::size_t>(n + K)] = s.at(n - 1);
        t.window[0] = (s.at(-K) + d) / 2.0;
        return t;
    }
};

}  // namespace explab
