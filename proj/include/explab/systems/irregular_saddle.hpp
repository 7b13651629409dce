#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "explab/errors.hpp"
#include "explab/geometry.hpp"
#include "explab/point_cloud.hpp"

namespace explab {

// ---------------------------------------------------------------------------------------------
// The piecewise linear map T.
//
//   T1(x, y) = (x/2, y/2)          on x >= y >= 0
//   T2(x, y) = (x/2, 2y)           on x <= 0 or y <= 0
//   T3(x, y) = (x/2, -3x/2 + 2y)   on y >= x >= 0
//
// T3 is the linear map with T3(1,1) = (1/2,1/2) and T3(0,1) = (0,2).  Each piece maps its own
// sector onto itself, so the inverse is piecewise on the same sectors.

enum class Sector { t1, t2, t3 };

inline Sector sector_of(double x, double y) noexcept {
    if (x <= 0.0 || y <= 0.0) return Sector::t2;
    return x >= y ? Sector::t1 : Sector::t3;
}

inline constexpr double kT3[2][2] = {{0.5, 0.0}, {-1.5, 2.0}};

inline Point piecewise_T(const Point& p) noexcept {
    double x = p.c[0], y = p.c[1];
    Point q = p;
    switch (sector_of(x, y)) {
        case Sector::t1: q.c[0] = x / 2; q.c[1] = y / 2; break;
        case Sector::t2: q.c[0] = x / 2; q.c[1] = 2 * y; break;
        case Sector::t3:
            q.c[0] = kT3[0][0] * x + kT3[0][1] * y;
            q.c[1] = kT3[1][0] * x + kT3[1][1] * y;
            break;
    }
    return q;
}

inline Point piecewise_T_inverse(const Point& p) noexcept {
    double x = p.c[0], y = p.c[1];
    Point q = p;
    switch (sector_of(x, y)) {
        case Sector::t1: q.c[0] = 2 * x; q.c[1] = 2 * y; break;
        case Sector::t2: q.c[0] = 2 * x; q.c[1] = y / 2; break;
        case Sector::t3:  // inverse of ((1/2, 0), (-3/2, 2))
            q.c[0] = 2 * x;
            q.c[1] = (y + 3 * x) / 2;
            break;
    }
    return q;
}

/// R1 = {(x, y) in [0,1]^2 : x >= y}.
inline bool in_R1(const Point& p) noexcept {
    return p.c[0] <= 1.0 && p.c[1] >= 0.0 && p.c[0] >= p.c[1];
}

// ---------------------------------------------------------------------------------------------
// The comb E = base ∪ D, with D_1 = ∪_i C(1/2 + 2^-i) and D_{n+1} = T1(D_n).

struct EGeometry {
    int levels_N = 20;
    int per_level_I = 40;
    bool include_limit_segments = true;

    void validate() const {
        if (levels_N < 1 || per_level_I < 1) throw precondition_error("EGeometry: N and I must be >= 1");
        if (per_level_I > 52) throw precondition_error("EGeometry: I above 52 is below double resolution");
    }
};

/// Vertical segment C(a) = {a} x [0, a]; the base [0,1] x {0} is stored with level 0.
struct Segment {
    double a = 0.0;
    int level = 0;
    int index = 0;     // i for comb segments, 0 for base and limit segments
    bool limit = false;

    bool is_base() const noexcept { return level == 0; }
    Point lo() const noexcept { return is_base() ? Point::plane(0.0, 0.0) : Point::plane(a, 0.0); }
    Point hi() const noexcept { return is_base() ? Point::plane(1.0, 0.0) : Point::plane(a, a); }
};

inline double point_segment_distance(double px, double py, const Segment& s) noexcept {
    if (s.is_base()) {
        double cx = std::clamp(px, 0.0, 1.0);
        return std::hypot(px - cx, py);
    }
    double cy = std::clamp(py, 0.0, s.a);
    return std::hypot(px - s.a, py - cy);
}

struct ESet {
    EGeometry geometry;
    std::vector<Segment> segments;      // base first, then by level and index
    std::vector<double> truncation_bound;  // per level n = 1..N: 2^{-n-I}
    PointCloud sample;
};

inline std::vector<Segment> e_segments(const EGeometry& g) {
    g.validate();
    std::vector<Segment> out;
    out.push_back({1.0, 0, 0, false});
    for (int n = 1; n <= g.levels_N; ++n) {
        double scale = std::ldexp(1.0, -(n - 1));
        for (int i = 1; i <= g.per_level_I; ++i)
            out.push_back({scale * (0.5 + std::ldexp(1.0, -i)), n, i, false});
    }
    if (g.include_limit_segments) {
        for (int n = 1; n <= g.levels_N; ++n) {
            double a = std::ldexp(1.0, -n);
            bool present = std::any_of(out.begin(), out.end(), [a](const Segment& s) { return !s.is_base() && s.a == a; });
            if (!present) out.push_back({a, n, 0, true});
        }
    }
    return out;
}

/// Segment list plus a sample with spacing at most h along every segment.
inline ESet build_E(const EGeometry& g, double h) {
    if (!(h > 0.0)) throw precondition_error("build_E: resolution must be positive");
    ESet e;
    e.geometry = g;
    e.segments = e_segments(g);
    for (int n = 1; n <= g.levels_N; ++n) e.truncation_bound.push_back(std::ldexp(1.0, -n - g.per_level_I));
    std::vector<Point> pts;
    for (const auto& s : e.segments) {
        auto chain = segment_chain(s.lo(), s.hi(), h);
        pts.insert(pts.end(), chain.chain.begin(), chain.chain.end());
    }
    e.sample = PointCloud(canonical_points(std::move(pts)), h, SpaceTag::plane2);
    return e;
}

namespace detail {

/// Level-one abscissas 1/2 + 2^-i, ascending.
inline const std::vector<double>& level_one_abscissas(int I) {
    thread_local std::vector<double> cache;
    thread_local int cached_I = -1;
    if (cached_I != I) {
        cache.clear();
        for (int i = I; i >= 1; --i) cache.push_back(0.5 + std::ldexp(1.0, -i));
        cached_I = I;
    }
    return cache;
}

/// Distance from q to D_1 (truncated at I), pruned against `best`.
inline double distance_to_D1(double qx, double qy, const std::vector<double>& a, double best) noexcept {
    auto seg = [qx, qy](double ai) {
        double dx = qx - ai;
        if (qy < 0.0) return std::hypot(dx, qy);
        if (qy <= ai) return std::fabs(dx);
        return std::hypot(dx, qy - ai);
    };
    auto it = std::lower_bound(a.begin(), a.end(), qx);
    std::ptrdiff_t mid = it - a.begin();
    for (std::ptrdiff_t k = mid; k < static_cast<std::ptrdiff_t>(a.size()); ++k) {
        if (a[static_cast<std::size_t>(k)] - qx >= best) break;
        best = std::min(best, seg(a[static_cast<std::size_t>(k)]));
    }
    for (std::ptrdiff_t k = mid - 1; k >= 0; --k) {
        if (qx - a[static_cast<std::size_t>(k)] >= best) break;
        best = std::min(best, seg(a[static_cast<std::size_t>(k)]));
    }
    return best;
}

inline double box_distance(double x, double y, double x0, double x1, double y0, double y1) noexcept {
    double dx = x < x0 ? x0 - x : (x > x1 ? x - x1 : 0.0);
    double dy = y < y0 ? y0 - y : (y > y1 ? y - y1 : 0.0);
    return std::hypot(dx, dy);
}

}  // namespace detail

/// rho(p) = dist(p, E).
///
/// The comb part G = ∪ D_n satisfies G = D_1 ∪ T1(G), hence
///   dist(p, G) = min(dist(p, D_1), dist(2p, G) / 2).
/// The recursion is unrolled over dyadic scales and stops once the bounding square
/// [0, 2^-k]^2 of T1^k(G) is farther than the best distance so far, so every level is
/// represented (the level count N only matters for sampling and export).  The index truncation
/// I leaves out segments within 2^{-I-1} of C(1/2), which itself belongs to D_2.
inline double rho(const Point& p, const EGeometry& g = {}) {
    const double px = p.c[0], py = p.c[1];
    double best = std::hypot(px - std::clamp(px, 0.0, 1.0), py);
    if (best == 0.0) return 0.0;
    const auto& a1 = detail::level_one_abscissas(g.per_level_I);
    double side = 1.0;   // G_k lies in [0, side]^2
    double scale = 1.0;  // q = p / scale
    for (int k = 0; k < 1100; ++k) {
        if (detail::box_distance(px, py, 0.0, side, 0.0, side) >= best) break;
        // D_1 at this scale lies in [side/2, side] x [0, side].
        if (detail::box_distance(px, py, side / 2, side, 0.0, side) < best) {
            double qx = px / scale, qy = py / scale;
            best = std::min(best, scale * detail::distance_to_D1(qx, qy, a1, best / scale));
        }
        side /= 2;
        scale /= 2;
    }
    return best;
}

// ---------------------------------------------------------------------------------------------
// The vertical flow of X = (0, rho) and the map f = phi_1 ∘ T.

struct IntegratorConfig {
    double step = 1e-3;
    double max_time = 1e4;
    bool verify = true;          // step-halving comparison on every call
    double tolerance = 1e-6;     // discrepancy that triggers accuracy_error

    void validate() const {
        if (!(step > 0.0)) throw precondition_error("IntegratorConfig: step must be positive");
        if (!(max_time > 0.0)) throw precondition_error("IntegratorConfig: max_time must be positive");
    }
};

struct FlowResult {
    Point point;
    double error_estimate = 0.0;  // |y(h) - y(h/2)|, or 0 when not verified
};

namespace detail {

inline double rk4_fiber(double x, double y, double t, double h, const EGeometry& g) {
    if (t == 0.0) return y;
    auto n = static_cast<long long>(std::ceil(std::fabs(t) / h));
    double dt = t / static_cast<double>(n);
    auto f = [&](double yy) { return rho(Point::plane(x, yy), g); };
    for (long long i = 0; i < n; ++i) {
        double k1 = f(y);
        if (k1 == 0.0) return y;  // on E: fixed for all time
        double k2 = f(y + dt * k1 / 2);
        double k3 = f(y + dt * k2 / 2);
        double k4 = f(y + dt * k3);
        y += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
    }
    return y;
}

}  // namespace detail

/// phi_t(p).  The x coordinate (and z for 3D points) is untouched.
inline FlowResult flow_time(const Point& p, double t, const EGeometry& g = {}, const IntegratorConfig& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(t)) throw precondition_error("flow_time: t must be finite");
    if (std::fabs(t) > cfg.max_time) throw precondition_error("flow_time: |t| exceeds max_time");
    FlowResult r{p, 0.0};
    if (t == 0.0 || rho(p, g) == 0.0) return r;
    double y = detail::rk4_fiber(p.c[0], p.c[1], t, cfg.step, g);
    if (cfg.verify) {
        double y2 = detail::rk4_fiber(p.c[0], p.c[1], t, cfg.step / 2, g);
        r.error_estimate = std::fabs(y - y2);
        if (r.error_estimate > cfg.tolerance)
            throw accuracy_error("flow_time: step-halving discrepancy " + std::to_string(r.error_estimate) +
                                     " at (" + std::to_string(p.c[0]) + ", " + std::to_string(p.c[1]) +
                                     "), t = " + std::to_string(t),
                                 r.error_estimate);
        y = y2;
    }
    r.point.c[1] = y;
    return r;
}

enum class Direction { forward, backward };

inline std::string_view to_string(Direction d) noexcept { return d == Direction::forward ? "forward" : "backward"; }

/// f = phi_1 ∘ T and f^-1 = T^-1 ∘ phi_-1 on the plane.
inline Point saddle_map(const Point& p, const EGeometry& g = {}, const IntegratorConfig& cfg = {},
                        Direction dir = Direction::forward) {
    Point q = Point::plane(p.c[0], p.c[1]);
    if (dir == Direction::forward) return flow_time(piecewise_T(q), 1.0, g, cfg).point;
    return piecewise_T_inverse(flow_time(q, -1.0, g, cfg).point);
}

/// (x, y, z) -> (f(x, y), 2z).
inline Point saddle3_map(const Point& p, const EGeometry& g = {}, const IntegratorConfig& cfg = {},
                         Direction dir = Direction::forward) {
    Point q = saddle_map(p, g, cfg, dir);
    return Point::plane3(q.c[0], q.c[1], dir == Direction::forward ? 2 * p.c[2] : p.c[2] / 2);
}

/// Highest y on the column through x in R1 whose orbit stays in R1 for `horizon` steps.
///
/// While an orbit stays in R1, f^n(p) = T^n(phi_n(p)) and T^n is a homothety there, so
/// f^n(p) is in R1 exactly when phi_n(p) is.  The flow is monotone on fibers, so the survivors
/// of a column form the interval [0, phi_{-horizon}(x, x)].
inline double saddle_column_threshold(double x, int horizon, const EGeometry& g = {}, const IntegratorConfig& cfg = {}) {
    if (x <= 0.0) return 0.0;
    return flow_time(Point::plane(x, x), -static_cast<double>(horizon), g, cfg).point.c[1];
}

}  // namespace explab
