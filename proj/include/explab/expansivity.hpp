#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "explab/dimension.hpp"
#include "explab/errors.hpp"
#include "explab/geometry.hpp"
#include "explab/point_cloud.hpp"
#include "explab/systems/catalog.hpp"

namespace explab {

/// Axis-aligned scan window in chart coordinates (torus windows may extend past [0,1)).
struct Window {
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    int dim = 2;

    static Window square(double x0, double x1, double y0, double y1) { return {{x0, y0, 0}, {x1, y1, 0}, 2}; }
    static Window around(const Point& c, double half, int dim) {
        Window w;
        w.dim = dim;
        for (int k = 0; k < dim; ++k) {
            w.lo[k] = c.c[k] - half;
            w.hi[k] = c.c[k] + half;
        }
        return w;
    }
    Window scaled(double factor) const {
        Window w = *this;
        for (int k = 0; k < dim; ++k) {
            double m = (lo[k] + hi[k]) / 2, r = (hi[k] - lo[k]) / 2 * factor;
            w.lo[k] = m - r;
            w.hi[k] = m + r;
        }
        return w;
    }
    bool contains(const Point& p) const noexcept {
        for (int k = 0; k < dim; ++k)
            if (p.c[k] < lo[k] || p.c[k] > hi[k]) return false;
        return true;
    }
};

namespace detail {

/// Builds a point of `tag` from chart coordinates, or nothing when outside the phase space.
inline std::optional<Point> make_point(SpaceTag tag, const std::array<double, 3>& c) {
    switch (tag) {
        case SpaceTag::plane2: return Point::plane(c[0], c[1]);
        case SpaceTag::plane3: return Point::plane3(c[0], c[1], c[2]);
        case SpaceTag::torus2: return Point::torus(c[0], c[1]);
        case SpaceTag::circle: return Point::circle(c[0]);
        case SpaceTag::annulus: {
            double r = std::hypot(c[0], c[1]);
            if (r < 1.0 || r > 2.0) return std::nullopt;
            return Point{{c[0], c[1], 0.0}, SpaceTag::annulus};
        }
    }
    return std::nullopt;
}

/// Grid points lo + i*h per axis (i >= 0) inside the window.
template <class Fn>
void for_each_grid_point(const Window& w, double h, std::array<double, 3> anchor, Fn&& fn) {
    std::array<std::int64_t, 3> i0{0, 0, 0}, i1{0, 0, 0};
    for (int k = 0; k < w.dim; ++k) {
        i0[k] = static_cast<std::int64_t>(std::ceil((w.lo[k] - anchor[k]) / h - 1e-9));
        i1[k] = static_cast<std::int64_t>(std::floor((w.hi[k] - anchor[k]) / h + 1e-9));
    }
    std::array<std::int64_t, 3> i = i0;
    std::array<double, 3> c{};
    for (i[2] = i0[2]; i[2] <= i1[2]; ++i[2])
        for (i[1] = i0[1]; i[1] <= i1[1]; ++i[1])
            for (i[0] = i0[0]; i[0] <= i1[0]; ++i[0]) {
                bool edge = false;
                for (int k = 0; k < w.dim; ++k) {
                    c[k] = anchor[k] + static_cast<double>(i[k]) * h;
                    edge = edge || i[k] == i0[k] || i[k] == i1[k];
                }
                fn(c, edge);
            }
}

inline std::int64_t grid_count(const Window& w, double h) {
    std::int64_t n = 1;
    for (int k = 0; k < w.dim; ++k) n *= static_cast<std::int64_t>(std::floor((w.hi[k] - w.lo[k]) / h + 1e-9)) + 1;
    return n;
}

/// Midpoint of a and b along the shortest connection in their space.
inline Point midpoint(const Point& a, const Point& b) {
    switch (a.tag) {
        case SpaceTag::torus2: {
            double dx = b.c[0] - a.c[0], dy = b.c[1] - a.c[1];
            dx -= std::round(dx);
            dy -= std::round(dy);
            return Point::torus(a.c[0] + dx / 2, a.c[1] + dy / 2);
        }
        case SpaceTag::circle: {
            double d = b.c[0] - a.c[0];
            d -= std::round(d);
            return Point::circle(a.c[0] + d / 2);
        }
        case SpaceTag::annulus: {
            // polar midpoint keeps the radius inside [1, 2]
            double ra = std::hypot(a.c[0], a.c[1]), rb = std::hypot(b.c[0], b.c[1]);
            double ta = std::atan2(a.c[1], a.c[0]), tb = std::atan2(b.c[1], b.c[0]);
            double dt = std::remainder(tb - ta, 2 * std::numbers::pi);
            double r = (ra + rb) / 2, t = ta + dt / 2;
            return Point{{r * std::cos(t), r * std::sin(t), 0.0}, SpaceTag::annulus};
        }
        default: {
            Point m = a;
            for (int k = 0; k < 3; ++k) m.c[k] = (a.c[k] + b.c[k]) / 2;
            return m;
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Dynamical balls

struct DynBallResult {
    Point center;
    double delta = 0.0;
    int horizon = 0;
    double grid_h = 0.0;
    PointCloud ball;
    double diameter = 0.0;
    std::size_t component_count = 0;
    bool touches_boundary = false;  // window too small: result inconclusive
    bool two_sided = true;          // false for non-invertible systems (forward orbits only)
};

/// Finite-horizon dynamical ball: grid points y of the window (anchored at x) with
/// dist(f^n x, f^n y) <= delta for |n| <= horizon.
inline DynBallResult dynamical_ball(const DynSystem& sys, const Point& x, double delta, int horizon, double grid_h,
                                    const Window& window) {
    if (!(delta > 0.0)) throw precondition_error("dynamical_ball: delta must be positive");
    if (!(grid_h > 0.0) || !(grid_h < delta / 10.0)) throw precondition_error("dynamical_ball: need grid_h < delta/10");
    if (horizon < 0) throw precondition_error("dynamical_ball: horizon must be >= 0");
    const SpaceTag tag = sys.space();
    if (tag == SpaceTag::plane3) throw unsupported_error("dynamical_ball: 3D scans are not supported");
    if (x.tag != tag) throw precondition_error("dynamical_ball: center not in the system's phase space");
    if (window.dim != ambient_dim(tag)) throw precondition_error("dynamical_ball: window dimension mismatch");
    for (int k = 0; k < window.dim; ++k)
        if (window.lo[k] > x.c[k] - delta || window.hi[k] < x.c[k] + delta)
            throw precondition_error("dynamical_ball: window must contain the delta-ball of the center");
    if (detail::grid_count(window, grid_h) > (std::int64_t{1} << 24))
        throw resource_error("dynamical_ball: grid exceeds 2^24 points");

    DynBallResult r;
    r.center = x;
    r.delta = delta;
    r.horizon = horizon;
    r.grid_h = grid_h;
    r.two_sided = sys.invertible();

    std::vector<Point> fwd{x}, bwd{x};
    for (int n = 1; n <= horizon; ++n) {
        fwd.push_back(system_eval(sys, fwd.back(), Direction::forward));
        if (r.two_sided) bwd.push_back(system_eval(sys, bwd.back(), Direction::backward));
    }

    std::vector<Point> ball;
    detail::for_each_grid_point(window, grid_h, x.c, [&](const std::array<double, 3>& c, bool edge) {
        auto y0 = detail::make_point(tag, c);
        if (!y0 || distance(*y0, x) > delta) return;
        Point y = *y0;
        for (int n = 1; n <= horizon; ++n) {
            y = system_eval(sys, y, Direction::forward);
            if (distance(y, fwd[static_cast<std::size_t>(n)]) > delta) return;
        }
        if (r.two_sided) {
            y = *y0;
            for (int n = 1; n <= horizon; ++n) {
                y = system_eval(sys, y, Direction::backward);
                if (distance(y, bwd[static_cast<std::size_t>(n)]) > delta) return;
            }
        }
        if (edge) r.touches_boundary = true;
        ball.push_back(*y0);
    });
    r.ball = PointCloud(std::move(ball), grid_h, tag);
    r.diameter = r.ball.empty() ? 0.0 : diameter(r.ball);
    r.component_count = r.ball.empty() ? 0 : chain_components(r.ball, 2.0 * grid_h).count;
    return r;
}

// ---------------------------------------------------------------------------------------------
// Continuum iteration

inline constexpr std::size_t kRefineLimit = 1'000'000;

/// f^n of a chain.  With `refine`, a pair whose image gap exceeds the chain's gap bound is
/// split at its midpoint (before mapping) until every image gap is within the bound.
inline ContinuumApprox continuum_iterate(const DynSystem& sys, const ContinuumApprox& C, int n, bool refine) {
    if (n == 0) return C;
    if (!sys.invertible() && n < 0) throw unsupported_error("continuum_iterate: backward iteration of a non-invertible map");
    const Direction dir = n > 0 ? Direction::forward : Direction::backward;
    ContinuumApprox cur = C;
    for (int step = 0; step < std::abs(n); ++step) {
        std::vector<Point> out;
        out.reserve(cur.chain.size());
        if (cur.chain.empty()) return cur;
        Point prev_src = cur.chain.front();
        Point prev_img = system_eval(sys, prev_src, dir);
        out.push_back(prev_img);
        for (std::size_t i = 1; i < cur.chain.size(); ++i) {
            const Point& src = cur.chain[i];
            Point img = system_eval(sys, src, dir);
            if (refine) {
                // Depth-first subdivision of [prev_src, src].
                struct Item { Point a, fa, b, fb; int depth; };
                std::vector<Item> stack{{prev_src, prev_img, src, img, 0}};
                std::vector<Point> tail;  // images in reverse order of emission
                while (!stack.empty()) {
                    Item it = stack.back();
                    stack.pop_back();
                    if (it.depth >= 60 || distance(it.fa, it.fb) <= cur.gap_bound) {
                        out.push_back(it.fb);
                        if (out.size() > kRefineLimit)
                            throw resource_error("continuum_iterate: refinement exceeds 10^6 points");
                        continue;
                    }
                    Point m = detail::midpoint(it.a, it.b);
                    Point fm = system_eval(sys, m, dir);
                    stack.push_back({m, fm, it.b, it.fb, it.depth + 1});
                    stack.push_back({it.a, it.fa, m, fm, it.depth + 1});
                }
            } else {
                out.push_back(img);
            }
            prev_src = src;
            prev_img = img;
        }
        cur = ContinuumApprox(std::move(out), cur.gap_bound, cur.tag);
    }
    return cur;
}

// ---------------------------------------------------------------------------------------------
// Seeds and notion tests

enum class Notion { expansive, n_expansive, cw, partial, dw, positive_dw, sensitivity };

constexpr std::string_view to_string(Notion n) noexcept {
    switch (n) {
        case Notion::expansive: return "expansive";
        case Notion::n_expansive: return "n_expansive";
        case Notion::cw: return "cw";
        case Notion::partial: return "partial";
        case Notion::dw: return "dw";
        case Notion::positive_dw: return "positive_dw";
        case Notion::sensitivity: return "sensitivity";
    }
    return "?";
}

inline Notion notion_from_string(std::string_view s) {
    for (auto n : {Notion::expansive, Notion::n_expansive, Notion::cw, Notion::partial, Notion::dw,
                   Notion::positive_dw, Notion::sensitivity})
        if (to_string(n) == s) return n;
    throw precondition_error("unknown notion: " + std::string(s));
}

/// Rectangle {c + s e_s + u e_u : |s| <= stable_half, |u| <= unstable_half} in the plane lift
/// of the cat map, e_s / e_u the unit eigenvectors.  Its iterates are again such rectangles and
/// are sampled exactly in the lift; projecting to the torus is 1-Lipschitz and injective on
/// each iterate, so covers of the lift project to covers of no larger mesh and order.
struct EigenRectangle {
    Point center = Point::plane(0, 0);
    double stable_half = 5e-6;
    double unstable_half = 5e-6;
    double resolution = 1e-3;

    /// Exact sample of A^n(R) in the lift with spacing <= resolution along both sides.
    PointCloud iterate_sample(int n) const {
        const double ls = std::pow(CatMap::stable_eigenvalue(), n), lu = std::pow(CatMap::unstable_eigenvalue(), n);
        auto es = CatMap::stable_direction(), eu = CatMap::unstable_direction();
        Point c = center;
        for (int k = 0; k < std::abs(n); ++k) c = n > 0 ? CatMap::lift_forward(c) : CatMap::lift_backward(c);
        const double S = stable_half * ls, U = unstable_half * lu;
        auto ns = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2 * S / resolution)));
        auto nu = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2 * U / resolution)));
        if ((ns + 1) * (nu + 1) > 4'000'000) throw resource_error("EigenRectangle: iterate sample too large");
        std::vector<Point> pts;
        pts.reserve(static_cast<std::size_t>((ns + 1) * (nu + 1)));
        for (std::int64_t i = 0; i <= ns; ++i)
            for (std::int64_t j = 0; j <= nu; ++j) {
                double s = -S + 2 * S * static_cast<double>(i) / static_cast<double>(ns);
                double u = -U + 2 * U * static_cast<double>(j) / static_cast<double>(nu);
                pts.push_back(Point::plane(c.c[0] + s * es[0] + u * eu[0], c.c[1] + s * es[1] + u * eu[1]));
            }
        return PointCloud(std::move(pts), resolution, SpaceTag::plane2);
    }

    double lift_diameter(int n) const {
        return 2 * std::hypot(stable_half * std::pow(CatMap::stable_eigenvalue(), n),
                              unstable_half * std::pow(CatMap::unstable_eigenvalue(), n));
    }
};

/// Arc of one path component of the solenoid: a_0 in [start, start + length], with the
/// backward digits fixed.
struct SolenoidArc {
    double start = 0.0;
    double length = 0.01;
    std::vector<std::uint8_t> digits;
    std::size_t samples = 64;

    std::vector<SolenoidPoint> sample(int K) const {
        std::vector<SolenoidPoint> out;
        for (std::size_t i = 0; i <= samples; ++i)
            out.push_back(SolenoidPoint::from_coordinate(
                start + length * static_cast<double>(i) / static_cast<double>(samples), K, digits));
        return out;
    }
};

struct Seed {
    std::string label;
    int construction_dim = 0;  // dimension known from the construction (segment 1, disk 2, ...)
    std::variant<PointCloud, ContinuumApprox, EigenRectangle, SolenoidArc> shape;
    /// Optional compact K containing the seed, claimed invariant with f|K an isometry.
    std::optional<PointCloud> isometric_support;
    /// Reference point for sensitivity and dynamical balls (defaults to the first sample).
    std::optional<Point> center;

    bool is_continuum() const noexcept { return !std::holds_alternative<PointCloud>(shape); }
};

struct NotionParams {
    Notion notion = Notion::cw;
    double delta_or_sigma = 0.1;
    int central_D = 0;
    int N = 1;
    int horizon = 40;
    double grid_h = 0.0;  // dynamical-ball grid; 0 selects delta/20
    std::vector<Seed> seeds;
};

enum class Verdict { pass, fail, inconclusive };

constexpr std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

constexpr int exit_code(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return 0;
        case Verdict::fail: return 3;
        case Verdict::inconclusive: return 4;
    }
    return 4;
}

struct Witness {
    std::string seed;
    std::string kind;        // first_n | invariant_set | isometric_support | linear_rectangle_family | surviving_set | unresolved
    std::optional<int> n;    // signed iterate achieving the criterion
    double value = 0.0;      // the measured quantity (diameter, dimension bound, distance)
    std::string detail;
    std::optional<PointCloud> data;  // surviving set or iterate, for export
};

struct ExpansivityReport {
    std::string system_id;
    NotionParams params;
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
    std::vector<Witness> witnesses;
    double elapsed_seconds = 0.0;
};

namespace detail {

/// Iterates one seed step by step in one direction.
class SeedOrbit {
public:
    SeedOrbit(const DynSystem& sys, const Seed& seed, Direction dir) : sys_(&sys), seed_(&seed), dir_(dir) {
        if (auto* c = std::get_if<PointCloud>(&seed.shape)) cloud_ = *c;
        if (auto* c = std::get_if<ContinuumApprox>(&seed.shape)) chain_ = *c;
        if (auto* a = std::get_if<SolenoidArc>(&seed.shape)) sol_ = a->sample(sys.solenoid_K);
        if (std::holds_alternative<EigenRectangle>(seed.shape) && sys.kind != SystemKind::cat_map)
            throw precondition_error("EigenRectangle seeds belong to the cat map");
        if (std::holds_alternative<SolenoidArc>(seed.shape) != (sys.kind == SystemKind::solenoid_shift))
            throw precondition_error("SolenoidArc seeds belong to the solenoid shift");
    }

    int n() const noexcept { return dir_ == Direction::forward ? k_ : -k_; }

    void step() {
        ++k_;
        if (cloud_)
            for (auto& p : cloud_->points) p = system_eval(*sys_, p, dir_);
        if (chain_) *chain_ = continuum_iterate(*sys_, *chain_, dir_ == Direction::forward ? 1 : -1, true);
        for (auto& s : sol_) s = system_eval(*sys_, s, dir_);
    }

    double diameter_now() const {
        if (cloud_) return explab::diameter(*cloud_);
        if (chain_) return explab::diameter(chain_->chain, chain_->tag);
        if (auto* r = std::get_if<EigenRectangle>(&seed_->shape)) {
            // torus diameter; exact sampling, projected
            if (r->lift_diameter(n()) >= 0.5) return explab::diameter(torus_sample());
            return r->lift_diameter(n());
        }
        double d = 0.0;
        for (std::size_t i = 0; i < sol_.size(); ++i)
            for (std::size_t j = i + 1; j < sol_.size(); ++j) d = std::max(d, distance(sol_[i], sol_[j]));
        return d;
    }

    /// Cloud on which dimension bounds are evaluated.
    PointCloud dim_cloud() const {
        if (cloud_) return *cloud_;
        if (chain_) return chain_->as_cloud();
        if (auto* r = std::get_if<EigenRectangle>(&seed_->shape)) return r->iterate_sample(n());
        throw precondition_error("dimension bounds are not available for solenoid seeds");
    }

    /// Points of the current iterate together with the image of the reference point.
    std::vector<Point> points() const {
        if (cloud_) return cloud_->points;
        if (chain_) return chain_->chain;
        if (std::holds_alternative<EigenRectangle>(seed_->shape)) return torus_sample().points;
        throw precondition_error("point access is not available for solenoid seeds");
    }

private:
    PointCloud torus_sample() const {
        auto lift = std::get<EigenRectangle>(seed_->shape).iterate_sample(n());
        std::vector<Point> pts;
        pts.reserve(lift.size());
        for (const auto& p : lift.points) pts.push_back(Point::torus(p.c[0], p.c[1]));
        return PointCloud(std::move(pts), lift.resolution_h, SpaceTag::torus2);
    }

    const DynSystem* sys_;
    const Seed* seed_;
    Direction dir_;
    int k_ = 0;
    std::optional<PointCloud> cloud_;
    std::optional<ContinuumApprox> chain_;
    std::vector<SolenoidPoint> sol_;
};

inline double seed_resolution(const Seed& s) {
    if (auto* c = std::get_if<PointCloud>(&s.shape)) return c->resolution_h;
    if (auto* c = std::get_if<ContinuumApprox>(&s.shape)) return c->gap_bound / 2;
    if (auto* r = std::get_if<EigenRectangle>(&s.shape)) return r->resolution;
    return 0.0;
}

/// Checks the witness that every iterate of the seed is a copy of the seed: either the seed
/// cloud is invariant (Hausdorff(f(C), C) <= 2h), or it lies in a claimed support K that is
/// invariant with f|K isometric on sampled pairs, or it is an eigen-rectangle.
inline std::optional<Witness> invariance_witness(const DynSystem& sys, const Seed& seed) {
    Witness w;
    w.seed = seed.label;
    if (std::holds_alternative<EigenRectangle>(seed.shape)) {
        w.kind = "linear_rectangle_family";
        w.detail = "A maps stable x unstable rectangles onto stable x unstable rectangles; every iterate has one "
                   "side at most the initial side, and the lift-to-torus projection is 1-Lipschitz and injective "
                   "on each iterate";
        return w;
    }
    if (!sys.point_valued()) return std::nullopt;
    auto map_cloud = [&](const PointCloud& C, Direction d) {
        std::vector<Point> out;
        out.reserve(C.size());
        for (const auto& p : C.points) out.push_back(system_eval(sys, p, d));
        return PointCloud(std::move(out), C.resolution_h, C.tag);
    };
    if (seed.isometric_support) {
        const PointCloud& K = *seed.isometric_support;
        auto own = std::holds_alternative<PointCloud>(seed.shape) ? std::get<PointCloud>(seed.shape)
                                                                 : std::get<ContinuumApprox>(seed.shape).as_cloud();
        double inside = directed_hausdorff_bucketed(own, K, K.metric());
        auto fK = map_cloud(K, Direction::forward);
        double inv = hausdorff_distance(fK, K);
        double iso = 0.0;
        std::size_t stride = std::max<std::size_t>(1, K.size() / 200);
        for (std::size_t i = 0; i < K.size(); i += stride)
            for (std::size_t j = i + stride; j < K.size(); j += stride)
                iso = std::max(iso, std::fabs(distance(fK.points[i], fK.points[j]) - distance(K.points[i], K.points[j])));
        if (inside <= 2 * K.resolution_h && inv <= 2 * K.resolution_h && iso <= 1e-9) {
            w.kind = "isometric_support";
            w.value = inv;
            w.detail = "seed within " + std::to_string(inside) + " of K; Hausdorff(f(K), K) = " + std::to_string(inv) +
                       "; isometry defect " + std::to_string(iso);
            return w;
        }
        return std::nullopt;
    }
    PointCloud C;
    if (auto* c = std::get_if<PointCloud>(&seed.shape)) C = *c;
    if (auto* c = std::get_if<ContinuumApprox>(&seed.shape)) C = c->as_cloud();
    if (C.empty()) return std::nullopt;
    double h = C.resolution_h;
    double fwd = hausdorff_distance(map_cloud(C, Direction::forward), C);
    double bwd = sys.invertible() ? hausdorff_distance(map_cloud(C, Direction::backward), C) : 0.0;
    if (std::max(fwd, bwd) <= 2 * h) {
        w.kind = "invariant_set";
        w.value = std::max(fwd, bwd);
        w.detail = "Hausdorff(f(C), C) = " + std::to_string(fwd) + " <= 2h";
        return w;
    }
    return std::nullopt;
}

enum class SeedOutcome { met, violated, open };

struct SeedResult {
    SeedOutcome outcome = SeedOutcome::open;
    Witness witness;
};

/// Runs the per-iterate criterion over n = 0, 1, -1, 2, -2, ... (forward only when
/// `two_sided` is false).  The criterion returns the measured value when met.
template <class Criterion>
std::optional<std::pair<int, double>> first_iterate(const DynSystem& sys, const Seed& seed, int horizon, bool two_sided,
                                                    Criterion&& crit) {
    SeedOrbit fw(sys, seed, Direction::forward);
    if (auto v = crit(fw)) return std::make_pair(0, *v);
    std::optional<SeedOrbit> bw;
    if (two_sided) bw.emplace(sys, seed, Direction::backward);
    for (int k = 1; k <= horizon; ++k) {
        fw.step();
        if (auto v = crit(fw)) return std::make_pair(k, *v);
        if (bw) {
            bw->step();
            if (auto v = crit(*bw)) return std::make_pair(-k, *v);
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Runs one (system, notion) experiment over all seeds.
inline ExpansivityReport test_notion(const DynSystem& sys, const NotionParams& params) {
    auto t0 = std::chrono::steady_clock::now();
    ExpansivityReport rep;
    rep.system_id = std::string(sys.id());
    rep.params = params;
    if (params.horizon < 1) throw precondition_error("test_notion: horizon must be >= 1");
    if (!(params.delta_or_sigma > 0.0)) throw precondition_error("test_notion: delta/sigma must be positive");
    if (params.seeds.empty()) throw precondition_error("test_notion: no seeds");
    const double ds = params.delta_or_sigma;
    const Notion notion = params.notion;
    const bool positive = notion == Notion::positive_dw;
    const bool two_sided = sys.invertible() && !positive;

    for (const auto& s : params.seeds) {
        double h = detail::seed_resolution(s);
        if (h > 0.0 && !(ds > 4 * h))
            throw precondition_error("test_notion: delta/sigma must exceed 4x the seed resolution (" + s.label + ")");
        switch (notion) {
            case Notion::cw:
                if (!s.is_continuum() || s.construction_dim < 1)
                    throw precondition_error("cw needs nontrivial continuum seeds (" + s.label + ")");
                break;
            case Notion::partial:
            case Notion::dw:
            case Notion::positive_dw:
                if (s.construction_dim <= params.central_D)
                    throw precondition_error("seed dimension must exceed the central dimension (" + s.label + ")");
                break;
            default: break;
        }
    }

    std::vector<detail::SeedResult> results;
    for (const auto& seed : params.seeds) {
        detail::SeedResult res;
        res.witness.seed = seed.label;
        switch (notion) {
            case Notion::expansive:
            case Notion::n_expansive: {
                if (!sys.point_valued()) throw unsupported_error("dynamical balls are not available on the solenoid");
                Point c = seed.center ? *seed.center : detail::SeedOrbit(sys, seed, Direction::forward).points().front();
                double gh = params.grid_h > 0 ? params.grid_h : ds / 20;
                auto ball = dynamical_ball(sys, c, ds, params.horizon, gh,
                                           Window::around(c, ds + 2 * gh, ambient_dim(c.tag)));
                std::size_t pointlike = 0;
                bool all_small = true;
                for (const auto& g : chain_components(ball.ball, 2 * gh).groups()) {
                    std::vector<Point> pts;
                    for (auto i : g) pts.push_back(ball.ball.points[i]);
                    if (diameter(pts, ball.ball.tag) <= 4 * gh) ++pointlike;
                    else all_small = false;
                }
                std::size_t bound = notion == Notion::expansive ? 1 : static_cast<std::size_t>(params.N);
                res.witness.value = ball.diameter;
                res.witness.data = ball.ball;
                if (ball.touches_boundary) {
                    res.outcome = detail::SeedOutcome::open;
                    res.witness.kind = "unresolved";
                    res.witness.detail = "ball reaches the scan window boundary";
                } else if (all_small && pointlike <= bound) {
                    res.outcome = detail::SeedOutcome::met;
                    res.witness.kind = "first_n";
                    res.witness.n = params.horizon;
                    res.witness.detail = std::to_string(pointlike) + " grid cluster(s) of diameter <= 4 grid_h survive |n| <= " +
                                         std::to_string(params.horizon);
                } else {
                    res.outcome = detail::SeedOutcome::violated;
                    res.witness.kind = "surviving_set";
                    res.witness.detail = std::to_string(ball.ball.size()) + " grid points in " +
                                         std::to_string(ball.component_count) + " cluster(s) stay delta-close for |n| <= " +
                                         std::to_string(params.horizon);
                }
                break;
            }
            case Notion::cw:
            case Notion::partial: {
                auto hit = detail::first_iterate(sys, seed, params.horizon, two_sided,
                                                 [ds](const detail::SeedOrbit& o) -> std::optional<double> {
                                                     double d = o.diameter_now();
                                                     if (d >= ds) return d;
                                                     return std::nullopt;
                                                 });
                if (hit) {
                    res.outcome = detail::SeedOutcome::met;
                    res.witness.kind = "first_n";
                    res.witness.n = hit->first;
                    res.witness.value = hit->second;
                    res.witness.detail = "diameter of the iterate reaches delta";
                }
                break;
            }
            case Notion::sensitivity: {
                auto hit = detail::first_iterate(
                    sys, seed, params.horizon, two_sided, [&, ds](const detail::SeedOrbit& o) -> std::optional<double> {
                        auto pts = o.points();
                        // reference point: the seed center's image or the first sample's
                        Point ref = pts.front();
                        if (seed.center) ref = system_iterate(sys, *seed.center, o.n());
                        double far = 0.0;
                        for (const auto& p : pts) far = std::max(far, distance(p, ref));
                        if (far > ds) return far;
                        return std::nullopt;
                    });
                if (hit) {
                    res.outcome = detail::SeedOutcome::met;
                    res.witness.kind = "first_n";
                    res.witness.n = hit->first;
                    res.witness.value = hit->second;
                    res.witness.detail = "some seed point separates from the reference by more than delta";
                }
                break;
            }
            case Notion::dw:
            case Notion::positive_dw: {
                const int D = params.central_D;
                int worst_upper = -1;
                bool upper_known = true;
                auto hit = detail::first_iterate(
                    sys, seed, params.horizon, two_sided, [&](const detail::SeedOrbit& o) -> std::optional<double> {
                        auto cloud = o.dim_cloud();
                        auto [lo, chain] = dim_lower_bound(cloud, ds);
                        if (lo > D) return static_cast<double>(lo);
                        try {
                            auto est = dim_eps_estimate(cloud, ds);
                            worst_upper = std::max(worst_upper, est.upper);
                        } catch (const std::domain_error&) {
                            upper_known = false;
                        }
                        return std::nullopt;
                    });
                if (hit) {
                    res.outcome = detail::SeedOutcome::met;
                    res.witness.kind = "first_n";
                    res.witness.n = hit->first;
                    res.witness.value = hit->second;
                    res.witness.detail = "sigma-dimension lower bound exceeds D";
                } else if (upper_known && worst_upper <= D) {
                    res.witness.value = worst_upper;
                    res.witness.detail = "sigma-dimension upper bound <= D for every |n| <= horizon";
                } else {
                    res.witness.value = worst_upper;
                    res.witness.detail = upper_known ? "some iterate has upper bound > D but no certified lower bound"
                                                     : "some iterate admits no single-chart cover";
                    res.witness.kind = "unresolved";
                    results.push_back(res);
                    continue;
                }
                break;
            }
        }

        if (res.outcome == detail::SeedOutcome::open && res.witness.kind.empty()) {
            // Criterion never met within the horizon: only an invariance witness makes it a failure.
            auto inv = detail::invariance_witness(sys, seed);
            bool bounded = true;
            if (inv && (notion == Notion::cw || notion == Notion::partial || notion == Notion::sensitivity)) {
                // iterates are copies of the seed, so the seed's own measure bounds every iterate
                detail::SeedOrbit o(sys, seed, Direction::forward);
                bounded = o.diameter_now() < ds;
            }
            if (inv && bounded) {
                res.outcome = detail::SeedOutcome::violated;
                std::string measured = res.witness.detail;
                double value = res.witness.value;
                res.witness = *inv;
                res.witness.value = value;
                if (!measured.empty()) res.witness.detail = measured + "; " + res.witness.detail;
            } else {
                res.witness.kind = "unresolved";
                if (res.witness.detail.empty())
                    res.witness.detail = "criterion not met within the horizon and no invariance witness";
            }
        }
        results.push_back(res);
    }

    std::size_t met = 0, violated = 0;
    for (const auto& r : results) {
        met += r.outcome == detail::SeedOutcome::met;
        violated += r.outcome == detail::SeedOutcome::violated;
        rep.witnesses.push_back(r.witness);
    }
    const std::string scope = two_sided ? "|n| <= " : "0 <= n <= ";
    if (violated > 0) {
        rep.verdict = Verdict::fail;
        rep.reason = std::to_string(violated) + " seed(s) violate the criterion for " + scope +
                     std::to_string(params.horizon);
    } else if (met == results.size()) {
        rep.verdict = Verdict::pass;
        rep.reason = "all " + std::to_string(met) + " seed(s) meet the criterion within " + scope +
                     std::to_string(params.horizon);
    } else {
        rep.verdict = Verdict::inconclusive;
        rep.reason = std::to_string(results.size() - met) + " seed(s) unresolved at horizon " +
                     std::to_string(params.horizon);
    }
    if (!sys.invertible() && !positive) rep.reason += " (non-invertible map: forward orbits only)";
    rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Stable sets

namespace detail {

/// Escape rule for the saddle: leaving [-2,2]^2, or leaving R1 after having been in R1.
struct SaddleEscape {
    bool was_in_R1 = false;
    bool escaped(const Point& p) {
        if (std::fabs(p.c[0]) > 2 || std::fabs(p.c[1]) > 2) return true;
        bool in = in_R1(p);
        if (was_in_R1 && !in) return true;
        was_in_R1 = was_in_R1 || in;
        return false;
    }
};

inline bool saddle_survives_direct(const DynSystem& sys, Point p, int horizon) {
    SaddleEscape esc;
    Point q = Point::plane(p.c[0], p.c[1]);
    if (esc.escaped(q)) return false;
    for (int n = 1; n <= horizon; ++n) {
        q = saddle_map(q, sys.geometry, sys.integrator, Direction::forward);
        if (esc.escaped(q)) return false;
    }
    return true;
}

}  // namespace detail

/// Reference scan: every grid point is iterated with the escape rule.
inline PointCloud saddle_stable_scan_direct(const DynSystem& sys, const Window& window, double grid_h, int horizon) {
    std::vector<Point> out;
    detail::for_each_grid_point(window, grid_h, window.lo, [&](const std::array<double, 3>& c, bool) {
        if (detail::saddle_survives_direct(sys, Point::plane(c[0], c[1]), horizon)) out.push_back(Point::plane(c[0], c[1]));
    });
    return PointCloud(std::move(out), grid_h, SpaceTag::plane2);
}

/// Grid points of the window whose forward orbit survives `horizon` steps.
///
/// Saddles: in R1 the survivors of each column are [0, phi_{-horizon}(x, x)] (one backward
/// integration per column).  Points with y > max(x, 0) stay in T2/T3 sectors where the height
/// above the diagonal at least doubles every step, so they escape [-2,2]^2 once 2^n * gap > 2;
/// only those too close for that bound, and points outside [0,1] x [0,inf), are iterated.
/// Other systems: orbits are iterated and escape when they leave the window scaled by 2 about
/// its center; the cat map is iterated in its linear lift (a chart at the fixed point).
inline PointCloud stable_set_scan(const DynSystem& sys, const Window& window, double grid_h, int horizon) {
    if (!(grid_h > 0.0)) throw precondition_error("stable_set_scan: grid must be positive");
    if (horizon < 0) throw precondition_error("stable_set_scan: horizon must be >= 0");
    for (int k = 0; k < window.dim; ++k)
        if ((window.hi[k] - window.lo[k]) / grid_h > 1024 + 1e-9)
            throw precondition_error("stable_set_scan: at most 2^10 grid steps per axis");
    if (!sys.point_valued()) throw unsupported_error("stable_set_scan: solenoid not supported");
    const SpaceTag tag = sys.space();
    const bool saddle = sys.kind == SystemKind::irregular_saddle_2d || sys.kind == SystemKind::irregular_saddle_3d;
    const SpaceTag out_tag = sys.kind == SystemKind::cat_map ? SpaceTag::plane2 : tag;
    if (window.dim != ambient_dim(tag)) throw precondition_error("stable_set_scan: window dimension mismatch");
    std::vector<Point> out;

    if (horizon == 0) {
        detail::for_each_grid_point(window, grid_h, window.lo, [&](const std::array<double, 3>& c, bool) {
            if (sys.kind == SystemKind::cat_map) out.push_back(Point::plane(c[0], c[1]));
            else if (auto p = detail::make_point(tag, c)) out.push_back(*p);
        });
        return PointCloud(std::move(out), grid_h, out_tag);
    }

    if (saddle) {
        std::vector<std::pair<double, double>> column_cache;  // (x, threshold)
        auto threshold = [&](double x) {
            for (const auto& [cx, th] : column_cache)
                if (cx == x) return th;
            double th = saddle_column_threshold(x, horizon, sys.geometry, sys.integrator);
            column_cache.emplace_back(x, th);
            return th;
        };
        auto survives2 = [&](double x, double y) {
            Point p = Point::plane(x, y);
            if (std::fabs(x) > 2 || std::fabs(y) > 2) return false;
            if (in_R1(p)) return y <= threshold(x);
            if (y > 0 && x <= 1) {
                double gap = y - std::max(x, 0.0);
                if (std::ldexp(gap, std::min(horizon, 1000)) > 2.0) return false;
            }
            return detail::saddle_survives_direct(sys, p, horizon);
        };
        detail::for_each_grid_point(window, grid_h, window.lo, [&](const std::array<double, 3>& c, bool) {
            if (sys.kind == SystemKind::irregular_saddle_3d) {
                // z doubles each step and is otherwise decoupled
                if (std::ldexp(std::fabs(c[2]), std::min(horizon, 1000)) > 2.0) return;
                if (survives2(c[0], c[1])) out.push_back(Point::plane3(c[0], c[1], c[2]));
            } else if (survives2(c[0], c[1])) {
                out.push_back(Point::plane(c[0], c[1]));
            }
        });
        return PointCloud(std::move(out), grid_h, out_tag);
    }

    const Window box = window.scaled(2.0);
    detail::for_each_grid_point(window, grid_h, window.lo, [&](const std::array<double, 3>& c, bool) {
        Point p;
        if (sys.kind == SystemKind::cat_map) {
            p = Point::plane(c[0], c[1]);
        } else {
            auto q = detail::make_point(tag, c);
            if (!q) return;
            p = *q;
        }
        Point y = p;
        for (int n = 1; n <= horizon; ++n) {
            y = sys.kind == SystemKind::cat_map ? CatMap::lift_forward(y) : system_eval(sys, y, Direction::forward);
            Point chart = y;
            if (tag == SpaceTag::circle) chart.c[0] -= std::round(chart.c[0] - (box.lo[0] + box.hi[0]) / 2);
            if (!box.contains(chart)) return;
        }
        out.push_back(p);
    });
    return PointCloud(std::move(out), grid_h, out_tag);
}

// ---------------------------------------------------------------------------------------------
// Doubly asymptotic sectors

/// Number of tol-chain clusters of {a in A : dist(a, B) <= tol}.
inline std::size_t cluster_intersections(const ContinuumApprox& A, const ContinuumApprox& B, double tol) {
    if (A.tag != B.tag) throw std::domain_error("cluster_intersections: chains from different spaces");
    if (!(tol >= 2 * std::max(A.gap_bound, B.gap_bound)))
        throw precondition_error("cluster_intersections: tol must be >= 2 * max gap bound");
    if (A.chain.empty() || B.chain.empty()) return 0;
    detail::BucketGrid grid(B.chain, tol, B.tag);
    const Metric m = metric_for(A.tag);
    std::vector<Point> near;
    for (const auto& a : A.chain) {
        bool hit = false;
        grid.for_each_near(a, 1, [&](std::uint32_t j) { hit = hit || distance(m, a, B.chain[j]) <= tol; });
        if (hit) near.push_back(a);
    }
    if (near.empty()) return 0;
    return chain_components(PointCloud(std::move(near), tol, A.tag), tol).count;
}

}  // namespace explab
