#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace explab {

/// Absolute tolerance for floating-point comparisons unless an operation says otherwise.
inline constexpr double kTolerance = 1e-9;

enum class SpaceTag : std::uint8_t { plane2, plane3, torus2, circle, annulus };

constexpr int ambient_dim(SpaceTag tag) noexcept {
    switch (tag) {
        case SpaceTag::plane3: return 3;
        case SpaceTag::circle: return 1;
        default: return 2;
    }
}

constexpr std::string_view to_string(SpaceTag tag) noexcept {
    switch (tag) {
        case SpaceTag::plane2: return "plane2";
        case SpaceTag::plane3: return "plane3";
        case SpaceTag::torus2: return "torus2";
        case SpaceTag::circle: return "circle";
        case SpaceTag::annulus: return "annulus";
    }
    return "?";
}

inline SpaceTag space_tag_from_string(std::string_view s) {
    for (auto t : {SpaceTag::plane2, SpaceTag::plane3, SpaceTag::torus2, SpaceTag::circle,
                   SpaceTag::annulus})
        if (to_string(t) == s) return t;
    throw std::domain_error("unknown space tag: " + std::string(s));
}

/// Wrap into [0, 1).
inline double wrap_unit(double v) noexcept {
    double r = v - std::floor(v);
    return r >= 1.0 ? 0.0 : r;
}

/// A point of one of the phase spaces. Circle points keep their angle (in turns) in c[0];
/// torus coordinates are always the canonical representatives in [0,1)^2.
struct Point {
    std::array<double, 3> c{};
    SpaceTag tag = SpaceTag::plane2;

    int dim() const noexcept { return ambient_dim(tag); }
    double operator[](std::size_t i) const noexcept { return c[i]; }
    double x() const noexcept { return c[0]; }
    double y() const noexcept { return c[1]; }
    double z() const noexcept { return c[2]; }

    static Point plane(double x, double y) noexcept { return {{x, y, 0.0}, SpaceTag::plane2}; }
    static Point plane3(double x, double y, double z) noexcept {
        return {{x, y, z}, SpaceTag::plane3};
    }
    static Point torus(double x, double y) noexcept {
        return {{wrap_unit(x), wrap_unit(y), 0.0}, SpaceTag::torus2};
    }
    static Point circle(double theta) noexcept { return {{wrap_unit(theta), 0.0, 0.0}, SpaceTag::circle}; }
    static Point annulus(double x, double y) {
        double r = std::hypot(x, y);
        if (r < 1.0 - kTolerance || r > 2.0 + kTolerance)
            throw std::domain_error("annulus point outside 1 <= r <= 2");
        return {{x, y, 0.0}, SpaceTag::annulus};
    }

    friend bool operator==(const Point&, const Point&) = default;
};

enum class Metric : std::uint8_t { euclidean, torus_quotient, circle_arc_chord, solenoid_weighted };

constexpr std::string_view to_string(Metric m) noexcept {
    switch (m) {
        case Metric::euclidean: return "euclidean";
        case Metric::torus_quotient: return "torus_quotient";
        case Metric::circle_arc_chord: return "circle_arc_chord";
        case Metric::solenoid_weighted: return "solenoid_weighted";
    }
    return "?";
}

/// The metric a phase space carries by default.
constexpr Metric metric_for(SpaceTag tag) noexcept {
    switch (tag) {
        case SpaceTag::torus2: return Metric::torus_quotient;
        case SpaceTag::circle: return Metric::circle_arc_chord;
        default: return Metric::euclidean;
    }
}

constexpr bool compatible(Metric m, SpaceTag tag) noexcept {
    switch (m) {
        case Metric::euclidean:
            return tag == SpaceTag::plane2 || tag == SpaceTag::plane3 || tag == SpaceTag::annulus;
        case Metric::torus_quotient: return tag == SpaceTag::torus2;
        case Metric::circle_arc_chord: return tag == SpaceTag::circle;
        case Metric::solenoid_weighted: return false;
    }
    return false;
}

/// Shortest arc between two angles given in turns; lies in [0, 1/2].
inline double circle_distance(double a, double b) noexcept {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

inline double euclidean_distance(const Point& p, const Point& q) noexcept {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        double d = p.c[i] - q.c[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Torus distance: minimum over the nine integer-shift representatives.
inline double torus_distance(const Point& p, const Point& q) noexcept {
    double dx = p.c[0] - q.c[0];
    double dy = p.c[1] - q.c[1];
    double best = INFINITY;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) best = std::min(best, std::hypot(dx + i, dy + j));
    return best;
}

inline double distance(Metric metric, const Point& p, const Point& q) {
    if (p.tag != q.tag) throw std::domain_error("distance: points from different spaces");
    if (!compatible(metric, p.tag))
        throw std::domain_error("distance: metric " + std::string(to_string(metric)) +
                                " not defined on " + std::string(to_string(p.tag)));
    switch (metric) {
        case Metric::euclidean: return euclidean_distance(p, q);
        case Metric::torus_quotient: return torus_distance(p, q);
        case Metric::circle_arc_chord: return circle_distance(p.c[0], q.c[0]);
        case Metric::solenoid_weighted: break;
    }
    throw std::domain_error("distance: unsupported metric");
}

inline double distance(const Point& p, const Point& q) { return distance(metric_for(p.tag), p, q); }

/// Point of the inverse limit of the doubling map, truncated to the window a_{-K}..a_K.
///
/// `past` stores the binary digits needed to step further back than the window:
/// a_{-K-1-j} = (a_{-K-j} + past[j]) / 2.  Backward shifts consume digits, forward
/// shifts recover and push them, so the two are exact inverses on stored data.
struct SolenoidPoint {
    int K = 16;
    std::vector<double> window;  // window[n + K] = a_n
    std::deque<std::uint8_t> past;

    double at(int n) const { return window.at(static_cast<std::size_t>(n + K)); }

    /// Builds the window from a_0 and the digits d_1, d_2, ... with a_{-n} = (a_{-n+1} + d_n)/2.
    /// Digits beyond index K are kept for later backward shifts.
    static SolenoidPoint from_coordinate(double a0, int K, const std::vector<std::uint8_t>& digits) {
        SolenoidPoint s;
        s.K = K;
        s.window.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
        s.window[static_cast<std::size_t>(K)] = wrap_unit(a0);
        for (int n = 1; n <= K; ++n) {
            std::uint8_t d = n - 1 < static_cast<int>(digits.size()) ? digits[n - 1] : 0;
            s.window[static_cast<std::size_t>(K - n)] =
                (s.window[static_cast<std::size_t>(K - n + 1)] + d) / 2.0;
        }
        for (int n = 1; n <= K; ++n)
            s.window[static_cast<std::size_t>(K + n)] =
                wrap_unit(2.0 * s.window[static_cast<std::size_t>(K + n - 1)]);
        for (std::size_t j = static_cast<std::size_t>(K); j < digits.size(); ++j)
            s.past.push_back(digits[j]);
        return s;
    }

    /// Upper bound on the metric mass discarded by the window truncation.
    double truncation_bound() const noexcept { return std::ldexp(1.0, 1 - K); }
};

inline double distance(const SolenoidPoint& a, const SolenoidPoint& b) {
    if (a.K != b.K || a.window.size() != b.window.size())
        throw std::domain_error("solenoid points with different windows");
    double s = 0.0;
    for (int n = -a.K; n <= a.K; ++n) s += std::ldexp(circle_distance(a.at(n), b.at(n)), -std::abs(n));
    return s;
}

}  // namespace explab
