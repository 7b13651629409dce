// explab: command-line runner for the catalog experiments.
//
// Every subcommand reads an optional JSON config, applies flag overrides, validates the result
// completely, runs, and only then writes its files.  Exit codes: 0 pass / done, 2 invalid
// config, 3 fail verdict, 4 inconclusive, 5 resource limit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "explab/dimension.hpp"
#include "explab/errors.hpp"
#include "explab/expansivity.hpp"
#include "explab/io.hpp"
#include "explab/svg.hpp"
#include "explab/systems/catalog.hpp"
#include "explab/tangency.hpp"
#include "explab/version.hpp"

namespace fs = std::filesystem;
using namespace explab;
using json = io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitResource = 5;

struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------------
// Config access with type checks; unknown keys are reported by finish().

class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw schema_error(where_ + ": expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        seen_.insert(k);
        if (!j_.contains(k)) throw schema_error(where_ + "." + k + ": required");
        return j_.at(k);
    }

    double number(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number()) throw schema_error(where_ + "." + k + ": expected a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) throw schema_error(where_ + "." + k + ": not finite");
        return d;
    }
    double number(const std::string& k, double dflt) { return has(k) ? number(k) : (seen_.insert(k), dflt); }

    double positive(const std::string& k) {
        double d = number(k);
        if (!(d > 0)) throw schema_error(where_ + "." + k + ": must be positive");
        return d;
    }
    double positive(const std::string& k, double dflt) { return has(k) ? positive(k) : (seen_.insert(k), dflt); }

    long long integer(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number_integer()) throw schema_error(where_ + "." + k + ": expected an integer");
        return v.get<long long>();
    }
    long long integer(const std::string& k, long long dflt) { return has(k) ? integer(k) : (seen_.insert(k), dflt); }

    bool boolean(const std::string& k, bool dflt) {
        if (!has(k)) return seen_.insert(k), dflt;
        const auto& v = raw(k);
        if (!v.is_boolean()) throw schema_error(where_ + "." + k + ": expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_string()) throw schema_error(where_ + "." + k + ": expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& k, const std::string& dflt) { return has(k) ? string(k) : (seen_.insert(k), dflt); }

    std::vector<double> numbers(const std::string& k, std::size_t lo, std::size_t hi) {
        const auto& v = raw(k);
        if (!v.is_array() || v.size() < lo || v.size() > hi)
            throw schema_error(where_ + "." + k + ": expected an array of " + std::to_string(lo) +
                               (lo == hi ? "" : " to " + std::to_string(hi)) + " numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw schema_error(where_ + "." + k + ": expected numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    Fields object(const std::string& k) { return Fields(raw(k), where_ + "." + k); }
    std::string path(const std::string& k) const { return where_ + "." + k; }
    const std::string& where() const { return where_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw schema_error(where_ + "." + it.key() + ": unknown field");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------------------------
// Parsed pieces of a run

struct Outputs {
    std::map<std::string, std::string> files;  // name -> contents, written together at the end

    void cloud(const std::string& stem, const PointCloud& C) {
        files[stem + ".csv"] = io::cloud_csv(C.points, C.tag);
        files[stem + ".json"] = io::cloud_sidecar(C, stem + ".csv").dump(2) + "\n";
    }
};

DynSystem parse_system(const json& j) {
    if (j.is_string()) return DynSystem::make(system_kind_from_string(j.get<std::string>()));
    Fields f(j, "system");
    DynSystem sys = DynSystem::make(system_kind_from_string(f.string("kind")));
    if (f.has("geometry")) {
        auto g = f.object("geometry");
        sys.geometry.levels_N = static_cast<int>(g.integer("levels_N", sys.geometry.levels_N));
        sys.geometry.per_level_I = static_cast<int>(g.integer("per_level_I", sys.geometry.per_level_I));
        sys.geometry.include_limit_segments = g.boolean("include_limit_segments", sys.geometry.include_limit_segments);
        g.finish();
        sys.geometry.validate();
    }
    if (f.has("integrator")) {
        auto g = f.object("integrator");
        sys.integrator.step = g.positive("step", sys.integrator.step);
        sys.integrator.max_time = g.positive("max_time", sys.integrator.max_time);
        sys.integrator.verify = g.boolean("verify", sys.integrator.verify);
        sys.integrator.tolerance = g.positive("tolerance", sys.integrator.tolerance);
        g.finish();
    }
    sys.solenoid_K = static_cast<int>(f.integer("solenoid_K", sys.solenoid_K));
    if (sys.solenoid_K < 2 || sys.solenoid_K > 60) throw schema_error("system.solenoid_K: must lie in 2..60");
    f.finish();
    return sys;
}

json system_json(const DynSystem& sys) {
    json j{{"kind", std::string(sys.id())}};
    if (sys.kind == SystemKind::irregular_saddle_2d || sys.kind == SystemKind::irregular_saddle_3d) {
        j["geometry"] = {{"levels_N", sys.geometry.levels_N},
                         {"per_level_I", sys.geometry.per_level_I},
                         {"include_limit_segments", sys.geometry.include_limit_segments}};
        j["integrator"] = {{"step", sys.integrator.step},
                           {"max_time", sys.integrator.max_time},
                           {"verify", sys.integrator.verify},
                           {"tolerance", sys.integrator.tolerance}};
    }
    if (sys.kind == SystemKind::solenoid_shift) j["solenoid_K"] = sys.solenoid_K;
    return j;
}

Point parse_point(Fields& f, const std::string& k, SpaceTag tag) {
    int d = ambient_dim(tag);
    auto c = f.numbers(k, static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    std::array<double, 3> a{};
    for (int i = 0; i < d; ++i) a[i] = c[static_cast<std::size_t>(i)];
    auto p = detail::make_point(tag, a);
    if (!p) throw schema_error(f.path(k) + ": outside the phase space (" + std::string(to_string(tag)) + ")");
    return *p;
}

std::vector<std::uint8_t> parse_digits(Fields& f, const std::string& k) {
    std::vector<std::uint8_t> out;
    if (!f.has(k)) return out;
    const auto& v = f.raw(k);
    if (!v.is_array()) throw schema_error(f.path(k) + ": expected an array of 0/1 digits");
    for (const auto& d : v) {
        if (!d.is_number_integer() || (d.get<int>() != 0 && d.get<int>() != 1))
            throw schema_error(f.path(k) + ": digits must be 0 or 1");
        out.push_back(static_cast<std::uint8_t>(d.get<int>()));
    }
    return out;
}

/// Straight chain between two chart points, mapped into the space (torus and circle wrap).
ContinuumApprox chart_chain(SpaceTag tag, const Point& a, const Point& b, double gap, const std::string& where) {
    double len = std::hypot(b.c[0] - a.c[0], b.c[1] - a.c[1], b.c[2] - a.c[2]);
    auto m = std::max<long long>(1, static_cast<long long>(std::ceil(len / gap)));
    if (m > 2'000'000) throw resource_error(where + ": chain exceeds 2e6 points");
    std::vector<Point> pts;
    for (long long i = 0; i <= m; ++i) {
        std::array<double, 3> c{};
        double t = static_cast<double>(i) / static_cast<double>(m);
        for (int k = 0; k < 3; ++k) c[k] = a.c[k] + (b.c[k] - a.c[k]) * t;
        auto p = detail::make_point(tag, c);
        if (!p) throw schema_error(where + ": chain leaves the phase space");
        pts.push_back(*p);
    }
    return ContinuumApprox(std::move(pts), gap, tag);
}

/// Raw chart coordinates for chain endpoints (no wrapping, so segments may cross the seam).
Point chart_point(Fields& f, const std::string& k, SpaceTag tag) {
    int d = ambient_dim(tag);
    auto c = f.numbers(k, static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    Point p = Point::plane3(0, 0, 0);
    for (int i = 0; i < d; ++i) p.c[i] = c[static_cast<std::size_t>(i)];
    return p;
}

PointCloud parse_cloud(const json& j, const std::string& where, std::mt19937_64& rng) {
    Fields f(j, where);
    std::string shape = f.string("shape");
    PointCloud out;
    if (shape == "file") {
        std::string path = f.string("path");
        f.finish();
        try {
            return io::read_cloud(path);
        } catch (const std::exception& e) {
            throw schema_error(where + ".path: " + e.what());
        }
    }
    double h = f.positive("h");
    if (shape == "segment") {
        auto tag = space_tag_from_string(f.string("space", "plane2"));
        auto a = chart_point(f, "from", tag), b = chart_point(f, "to", tag);
        out = chart_chain(tag, a, b, h, where).as_cloud();
    } else if (shape == "circle") {
        double r = f.positive("radius");
        auto m = static_cast<long long>(std::ceil(2 * std::numbers::pi * r / h));
        if (m > 2'000'000) throw resource_error(where + ": too many points");
        std::vector<Point> pts;
        for (long long k = 0; k < m; ++k) {
            double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
            pts.push_back(Point::plane(r * std::cos(t), r * std::sin(t)));
        }
        out = PointCloud(std::move(pts), h, SpaceTag::plane2);
    } else if (shape == "square") {
        double side = f.positive("side");
        auto n = static_cast<long long>(std::ceil(side / h));
        if ((n + 1) * (n + 1) > 4'000'000) throw resource_error(where + ": too many points");
        std::vector<Point> pts;
        for (long long i = 0; i <= n; ++i)
            for (long long k = 0; k <= n; ++k)
                pts.push_back(Point::plane(side * static_cast<double>(i) / static_cast<double>(n),
                                           side * static_cast<double>(k) / static_cast<double>(n)));
        out = PointCloud(std::move(pts), h, SpaceTag::plane2);
    } else if (shape == "thin_annulus") {
        double r0 = f.number("r0"), r1 = f.number("r1");
        if (!(1.0 <= r0 && r0 < r1 && r1 <= 2.0)) throw schema_error(where + ": need 1 <= r0 < r1 <= 2");
        int rings = std::max(1, static_cast<int>(std::ceil((r1 - r0) / (h / 2))));
        std::vector<Point> pts;
        for (int q = 0; q <= rings; ++q) {
            double rr = r0 + (r1 - r0) * q / rings;
            auto m = static_cast<long long>(std::ceil(2 * std::numbers::pi * rr / h));
            for (long long k = 0; k < m; ++k) {
                double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
                pts.push_back(Point::annulus(rr * std::cos(t), rr * std::sin(t)));
            }
            if (pts.size() > 4'000'000) throw resource_error(where + ": too many points");
        }
        out = PointCloud(std::move(pts), h, SpaceTag::annulus);
    } else if (shape == "disk") {
        auto tag = space_tag_from_string(f.string("space", "plane2"));
        if (ambient_dim(tag) != 2) throw schema_error(where + ".space: disks need a 2D space");
        auto c = chart_point(f, "center", tag);
        double r = f.positive("radius");
        auto n = static_cast<long long>(std::ceil(r / h));
        if ((2 * n + 1) * (2 * n + 1) > 4'000'000) throw resource_error(where + ": too many points");
        std::vector<Point> pts;
        for (long long i = -n; i <= n; ++i)
            for (long long k = -n; k <= n; ++k) {
                double dx = static_cast<double>(i) * h, dy = static_cast<double>(k) * h;
                if (std::hypot(dx, dy) > r) continue;
                if (auto p = detail::make_point(tag, {c.c[0] + dx, c.c[1] + dy, 0})) pts.push_back(*p);
            }
        out = PointCloud(std::move(pts), h, tag);
    } else if (shape == "random") {
        auto tag = space_tag_from_string(f.string("space", "plane2"));
        auto count = f.integer("count");
        if (count < 1 || count > 1'000'000) throw schema_error(where + ".count: must lie in 1..1e6");
        auto lo = f.has("box") ? f.numbers("box", 2, 2) : std::vector<double>{0.0, 1.0};
        std::uniform_real_distribution<double> U(lo[0], lo[1]);
        std::vector<Point> pts;
        while (static_cast<long long>(pts.size()) < count) {
            std::array<double, 3> c{U(rng), U(rng), U(rng)};
            if (tag == SpaceTag::annulus) {
                std::uniform_real_distribution<double> R(1, 2), T(0, 2 * std::numbers::pi);
                double rr = R(rng), t = T(rng);
                c = {rr * std::cos(t), rr * std::sin(t), 0};
            }
            if (auto p = detail::make_point(tag, c)) pts.push_back(*p);
        }
        out = PointCloud(std::move(pts), h, tag);
    } else {
        throw schema_error(where + ".shape: unknown shape '" + shape + "'");
    }
    f.finish();
    return out;
}

std::vector<Seed> parse_seeds(const json& j, const DynSystem& sys, std::mt19937_64& rng) {
    if (!j.is_array() || j.empty()) throw schema_error("params.seeds: expected a nonempty array");
    std::vector<Seed> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string where = "params.seeds[" + std::to_string(i) + "]";
        Fields f(j[i], where);
        std::string type = f.string("type");
        std::string label = f.string("label", type + " " + std::to_string(i));
        if (type == "solenoid_arc") {
            if (sys.point_valued()) throw schema_error(where + ": solenoid arcs need the solenoid_shift system");
            SolenoidArc arc;
            arc.start = f.number("start");
            arc.length = f.positive("length");
            arc.samples = static_cast<std::size_t>(f.integer("samples", 64));
            arc.digits = parse_digits(f, "digits");
            Seed s;
            s.label = label;
            s.construction_dim = static_cast<int>(f.integer("dim", 1));
            s.shape = arc;
            f.finish();
            out.push_back(std::move(s));
            continue;
        }
        if (!sys.point_valued()) throw schema_error(where + ": the solenoid takes solenoid_arc seeds only");
        const SpaceTag tag = sys.space();
        if (type == "segment") {
            Seed s;
            s.label = label;
            s.construction_dim = static_cast<int>(f.integer("dim", 1));
            auto a = chart_point(f, "from", tag), b = chart_point(f, "to", tag);
            s.shape = chart_chain(tag, a, b, f.positive("gap"), where);
            if (f.has("center")) s.center = parse_point(f, "center", tag);
            f.finish();
            out.push_back(std::move(s));
        } else if (type == "random_segments") {
            auto count = f.integer("count");
            if (count < 1 || count > 1000) throw schema_error(where + ".count: must lie in 1..1000");
            double len = f.positive("length"), gap = f.positive("gap");
            auto box = f.has("box") ? f.numbers("box", 2 * static_cast<std::size_t>(ambient_dim(tag)),
                                                2 * static_cast<std::size_t>(ambient_dim(tag)))
                                    : std::vector<double>{};
            f.finish();
            const int d = ambient_dim(tag);
            std::normal_distribution<double> N(0, 1);
            for (long long k = 0; k < count; ++k) {
                for (int attempt = 0;; ++attempt) {
                    if (attempt > 1000) throw schema_error(where + ": cannot place segments inside the space");
                    Point a = Point::plane3(0, 0, 0), b = a;
                    double norm = 0;
                    std::array<double, 3> dir{};
                    for (int q = 0; q < d; ++q) {
                        dir[q] = N(rng);
                        norm += dir[q] * dir[q];
                    }
                    norm = std::sqrt(norm);
                    for (int q = 0; q < d; ++q) {
                        double lo = box.empty() ? (tag == SpaceTag::annulus ? -2.0 : 0.0) : box[2 * q];
                        double hi = box.empty() ? (tag == SpaceTag::annulus ? 2.0 : 1.0) : box[2 * q + 1];
                        a.c[q] = std::uniform_real_distribution<double>(lo, hi)(rng);
                        b.c[q] = a.c[q] + len * dir[q] / norm;
                    }
                    try {
                        Seed s;
                        s.label = label + " #" + std::to_string(k);
                        s.construction_dim = 1;
                        s.shape = chart_chain(tag, a, b, gap, where);
                        out.push_back(std::move(s));
                        break;
                    } catch (const schema_error&) {
                    }
                }
            }
        } else if (type == "eigen_rectangle") {
            if (sys.kind != SystemKind::cat_map) throw schema_error(where + ": eigen rectangles belong to cat_map");
            EigenRectangle R;
            auto c = f.numbers("center", 2, 2);
            R.center = Point::plane(c[0], c[1]);
            R.stable_half = f.positive("stable_half", R.stable_half);
            R.unstable_half = f.positive("unstable_half", R.unstable_half);
            R.resolution = f.positive("resolution", R.resolution);
            Seed s;
            s.label = label;
            s.construction_dim = static_cast<int>(f.integer("dim", 2));
            s.shape = R;
            f.finish();
            out.push_back(std::move(s));
        } else if (type == "cloud") {
            Seed s;
            s.label = label;
            s.construction_dim = static_cast<int>(f.integer("dim"));
            auto C = parse_cloud(f.raw("cloud"), f.path("cloud"), rng);
            if (C.tag != tag) throw schema_error(where + ".cloud: space does not match the system");
            if (C.empty()) throw schema_error(where + ".cloud: empty");
            s.shape = std::move(C);
            if (f.has("center")) s.center = parse_point(f, "center", tag);
            f.finish();
            out.push_back(std::move(s));
        } else {
            throw schema_error(where + ".type: unknown seed type '" + type + "'");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Operations.  Each returns its exit code and fills `report` and `out`.

struct Run {
    DynSystem sys;
    std::uint64_t seed = 0;
    std::mt19937_64 rng;
    json report;
    Outputs out;
};

int op_catalog(Fields& p, Run& run) {
    p.finish();
    json list = json::array();
    for (auto k : kAllSystems) {
        auto s = DynSystem::make(k);
        json e{{"id", std::string(s.id())}, {"description", std::string(s.description())}, {"invertible", s.invertible()}};
        e["space"] = s.point_valued() ? std::string(to_string(s.space())) : std::string("solenoid");
        list.push_back(e);
    }
    run.report["systems"] = list;
    return kExitOk;
}

int op_orbit(Fields& p, Run& run) {
    int n = static_cast<int>(p.integer("horizon"));
    if (n < 0 || n > 100000) throw schema_error("params.horizon: must lie in 0..100000");
    std::string dir = p.string("direction", "forward");
    if (dir != "forward" && dir != "backward") throw schema_error("params.direction: forward or backward");
    Direction d = dir == "forward" ? Direction::forward : Direction::backward;
    if (d == Direction::backward && !run.sys.invertible()) throw schema_error("params.direction: map is not invertible");
    std::string csv;
    if (!run.sys.point_valued()) {
        auto s = SolenoidPoint::from_coordinate(p.number("start"), run.sys.solenoid_K, parse_digits(p, "digits"));
        p.finish();
        csv = "n,a0\n";
        for (int k = 0; k <= n; ++k) {
            if (k) s = system_eval(run.sys, s, d);
            csv += std::to_string(d == Direction::forward ? k : -k) + "," + io::fmt17(s.at(0)) + "\n";
        }
    } else {
        Point x = parse_point(p, "start", run.sys.space());
        p.finish();
        int dim = ambient_dim(x.tag);
        csv = "n," + io::csv_header(x.tag) + "\n";
        for (int k = 0; k <= n; ++k) {
            if (k) x = system_eval(run.sys, x, d);
            csv += std::to_string(d == Direction::forward ? k : -k);
            for (int q = 0; q < dim; ++q) csv += "," + io::fmt17(x.c[q]);
            csv += "\n";
        }
    }
    run.out.files["orbit.csv"] = csv;
    run.report["orbit_csv"] = "orbit.csv";
    run.report["steps"] = n;
    return kExitOk;
}

svg::Style style_for(const std::string& title, const std::string& note) {
    svg::Style st;
    st.title = title;
    st.resolution_note = note;
    return st;
}

int op_ball(Fields& p, Run& run) {
    if (!run.sys.point_valued()) throw schema_error("system: dynamical balls need a point-valued system");
    const SpaceTag tag = run.sys.space();
    Point c = parse_point(p, "center", tag);
    double delta = p.positive("delta");
    int horizon = static_cast<int>(p.integer("horizon"));
    double grid = p.positive("grid");
    double half = p.positive("window_half", delta + 2 * grid);
    p.finish();
    auto b = dynamical_ball(run.sys, c, delta, horizon, grid, Window::around(c, half, ambient_dim(tag)));
    run.out.cloud("ball", b.ball);
    run.report["ball"] = {{"center", io::point_json(c)},
                          {"delta", delta},
                          {"horizon", horizon},
                          {"grid", grid},
                          {"points", b.ball.size()},
                          {"diameter", b.diameter},
                          {"components", b.component_count},
                          {"touches_boundary", b.touches_boundary},
                          {"two_sided", b.two_sided},
                          {"csv", "ball.csv"}};
    if (ambient_dim(tag) == 2) {
        svg::Figure fig(style_for("dynamical ball, horizon " + std::to_string(horizon), "grid " + io::fmt17(grid)));
        fig.set_window(c.c[0] - half, c.c[0] + half, c.c[1] - half, c.c[1] + half);
        fig.points(b.ball.points, "#1f77b4", "ball");
        fig.points({c}, "#d62728", "center", 2.5);
        run.out.files["ball.svg"] = fig.str();
    }
    return b.touches_boundary ? exit_code(Verdict::inconclusive) : kExitOk;
}

int op_dim(Fields& p, Run& run) {
    auto C = parse_cloud(p.raw("cloud"), "params.cloud", run.rng);
    double eps = p.positive("epsilon");
    bool oracle = p.boolean("oracle", false);
    p.finish();
    if (C.empty()) throw schema_error("params.cloud: empty");
    auto e = dim_eps_estimate(C, eps);
    run.out.cloud("cloud", C);
    json r = io::dim_estimate_json(e);
    if (oracle) r["oracle"] = dim_eps_oracle(C, eps);
    run.report["dimension"] = r;
    if (e.witness_cover.dim == 2 && !e.witness_cover.empty()) {
        svg::Figure fig(style_for("cover of order " + std::to_string(e.upper), "epsilon " + io::fmt17(eps)));
        fig.boxes(e.witness_cover, "#2ca02c", "witness cover");
        fig.points(euclidean_chart(C).points, "#333333", "cloud", 0.8);
        run.out.files["cover.svg"] = fig.str();
    }
    return kExitOk;
}

int op_stable_set(Fields& p, Run& run) {
    if (!run.sys.point_valued()) throw schema_error("system: stable-set scans need a point-valued system");
    const int d = ambient_dim(run.sys.space());
    auto w = p.numbers("window", 2 * static_cast<std::size_t>(d), 2 * static_cast<std::size_t>(d));
    Window win;
    win.dim = d;
    for (int k = 0; k < d; ++k) {
        win.lo[k] = w[2 * static_cast<std::size_t>(k)];
        win.hi[k] = w[2 * static_cast<std::size_t>(k) + 1];
        if (!(win.lo[k] < win.hi[k])) throw schema_error("params.window: need lo < hi on every axis");
    }
    double grid = p.positive("grid");
    int horizon = static_cast<int>(p.integer("horizon"));
    const bool saddle2 = run.sys.kind == SystemKind::irregular_saddle_2d;
    bool compare = p.boolean("compare_E", saddle2);
    if (compare && !saddle2) throw schema_error("params.compare_E: only for irregular_saddle_2d");
    double e_res = p.positive("E_resolution", grid);
    std::optional<double> tol;
    if (p.has("hausdorff_tol")) tol = p.positive("hausdorff_tol");
    if (tol && !compare) throw schema_error("params.hausdorff_tol: needs compare_E");
    p.finish();

    auto S = stable_set_scan(run.sys, win, grid, horizon);
    run.out.cloud("stable_set", S);
    json r{{"window", w}, {"grid", grid}, {"horizon", horizon}, {"points", S.size()}, {"csv", "stable_set.csv"}};
    int code = kExitOk;
    std::optional<ESet> E;
    if (compare) {
        E = build_E(run.sys.geometry, e_res);
        // the comb restricted to the scan window
        std::vector<Point> inside;
        for (const auto& q : E->sample.points)
            if (win.contains(q)) inside.push_back(q);
        PointCloud Ew(std::move(inside), e_res, SpaceTag::plane2);
        json c{{"E_resolution", e_res}, {"E_points_in_window", Ew.size()}};
        if (!S.empty() && !Ew.empty()) {
            double dh = hausdorff_distance(S, Ew);
            c["hausdorff"] = dh;
            c["scan_to_E"] = directed_hausdorff_bucketed(S, Ew, Metric::euclidean);
            c["E_to_scan"] = directed_hausdorff_bucketed(Ew, S, Metric::euclidean);
            if (tol) {
                c["tolerance"] = *tol;
                Verdict v = dh <= *tol ? Verdict::pass : Verdict::fail;
                c["verdict"] = std::string(to_string(v));
                code = exit_code(v);
            }
        } else {
            c["hausdorff"] = nullptr;
            if (tol) code = exit_code(Verdict::inconclusive);
        }
        r["comparison"] = c;
        run.out.files["E_segments.json"] = io::segments_json(*E).dump(2) + "\n";
    }
    run.report["stable_set"] = r;
    if (d == 2) {
        svg::Figure fig(style_for(compare ? "stable set scan over the comb E" : "stable set scan",
                                  "grid " + io::fmt17(grid) + ", horizon " + std::to_string(horizon)));
        fig.set_window(win.lo[0], win.hi[0], win.lo[1], win.hi[1]);
        fig.points(S.points, "#1f77b4", "survivors", 0.9);
        if (E) fig.segments(E->segments, "#d62728", "E");
        run.out.files["stable_set.svg"] = fig.str();
    }
    return code;
}

int op_test(Fields& p, Run& run) {
    NotionParams np;
    np.notion = notion_from_string(p.string("notion"));
    np.delta_or_sigma = p.positive("delta_or_sigma");
    np.central_D = static_cast<int>(p.integer("central_D", 0));
    np.N = static_cast<int>(p.integer("N", 1));
    np.horizon = static_cast<int>(p.integer("horizon", 40));
    np.grid_h = p.has("grid") ? p.positive("grid") : 0.0;
    np.seeds = parse_seeds(p.raw("seeds"), run.sys, run.rng);
    p.finish();
    if (np.central_D < -1) throw schema_error("params.central_D: must be >= -1");
    if (np.N < 1) throw schema_error("params.N: must be >= 1");

    auto rep = test_notion(run.sys, np);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < rep.witnesses.size(); ++i) {
        const auto& w = rep.witnesses[i];
        if (w.data && !w.data->empty()) {
            std::string stem = "witness_" + std::to_string(i);
            run.out.cloud(stem, *w.data);
            files.push_back(stem + ".csv");
        } else {
            files.emplace_back();
        }
    }
    run.report["expansivity"] = io::expansivity_json(rep, files);
    return exit_code(rep.verdict);
}

int op_tangency(Fields& p, Run& run) {
    JetPair jp;
    try {
        jp.stable = io::polynomial_from_json(p.raw("stable"));
        jp.unstable = io::polynomial_from_json(p.raw("unstable"));
    } catch (const std::exception& e) {
        throw schema_error(std::string("params: ") + e.what());
    }
    jp.r = static_cast<int>(p.integer("r"));
    jp.window = p.positive("window", 1.0);
    p.finish();
    auto order = tangency_order(jp);
    auto b = local_ball_cardinality_bound(jp);
    run.report["tangency"] = {{"stable", io::polynomial_json(jp.stable)},
                              {"unstable", io::polynomial_json(jp.unstable)},
                              {"r", jp.r},
                              {"window", jp.window},
                              {"order", order ? json(*order) : json("exceeds r")},
                              {"unbounded", b.unbounded},
                              {"bound", b.bound},
                              {"root_count", b.root_count},
                              {"verified", b.verified}};
    if (b.unbounded) return exit_code(Verdict::fail);
    return b.verified ? kExitOk : exit_code(Verdict::fail);
}

int op_render(Fields& p, Run& run) {
    std::string title = p.string("title", "");
    std::string note = p.string("resolution_note", "");
    svg::Figure fig(style_for(title, note));
    if (p.has("window")) {
        auto w = p.numbers("window", 4, 4);
        fig.set_window(w[0], w[1], w[2], w[3]);
    }
    const auto& layers = p.raw("layers");
    if (!layers.is_array()) throw schema_error("params.layers: expected an array");
    std::vector<std::function<void()>> draw;
    json done = json::array();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        std::string where = "params.layers[" + std::to_string(i) + "]";
        Fields f(layers[i], where);
        std::string kind = f.string("kind");
        std::string color = f.string("color", "#1f77b4");
        std::string label = f.string("label", kind);
        if (kind == "cloud") {
            auto C = parse_cloud(f.raw("cloud"), f.path("cloud"), run.rng);
            if (ambient_dim(C.tag) != 2)
                throw schema_error(where + ": only 2D clouds render; project to two coordinates first");
            double radius = f.positive("radius", 1.2);
            draw.push_back([&fig, C, color, label, radius] { fig.points(C.points, color, label, radius); });
            done.push_back({{"kind", kind}, {"points", C.size()}});
        } else if (kind == "E") {
            EGeometry g;
            g.levels_N = static_cast<int>(f.integer("levels_N", 6));
            g.per_level_I = static_cast<int>(f.integer("per_level_I", 12));
            g.include_limit_segments = f.boolean("include_limit_segments", true);
            g.validate();
            auto segs = e_segments(g);
            draw.push_back([&fig, segs, color, label] { fig.segments(segs, color, label); });
            done.push_back({{"kind", kind}, {"segments", segs.size()}});
        } else {
            throw schema_error(where + ".kind: cloud or E");
        }
        f.finish();
    }
    p.finish();
    for (auto& d : draw) d();
    run.out.files["render.svg"] = fig.str();
    run.report["render"] = {{"svg", "render.svg"}, {"layers", done}};
    return kExitOk;
}

const std::map<std::string, int (*)(Fields&, Run&)>& operations() {
    static const std::map<std::string, int (*)(Fields&, Run&)> ops{
        {"catalog", op_catalog}, {"orbit", op_orbit},     {"ball", op_ball},         {"dim", op_dim},
        {"stable-set", op_stable_set}, {"test", op_test}, {"tangency", op_tangency}, {"render", op_render},
    };
    return ops;
}

// ---------------------------------------------------------------------------------------------

struct Flags {
    std::string config, system, out = "explab_out";
    std::optional<std::uint64_t> seed;
    std::optional<long long> horizon;
    std::optional<double> grid, delta;
};

/// Config with the command-line overrides applied.
json effective_config(const std::string& op, const Flags& fl) {
    json cfg = json::object();
    if (!fl.config.empty()) {
        std::string text;
        try {
            text = io::read_text(fl.config);
        } catch (const std::exception& e) {
            throw schema_error(e.what());
        }
        try {
            cfg = json::parse(text);
        } catch (const json::parse_error& e) {
            throw schema_error(std::string("config is not valid JSON: ") + e.what());
        }
        if (!cfg.is_object()) throw schema_error("config: expected an object");
    }
    if (cfg.contains("operation") && (!cfg["operation"].is_string() || cfg["operation"].get<std::string>() != op))
        throw schema_error("config.operation does not match the subcommand '" + op + "'");
    cfg["operation"] = op;
    if (!fl.system.empty()) {
        if (cfg.contains("system") && cfg["system"].is_object()) cfg["system"]["kind"] = fl.system;
        else cfg["system"] = fl.system;
    }
    if (!cfg.contains("system")) cfg["system"] = "cat_map";
    if (fl.seed) cfg["seed"] = *fl.seed;
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    if (!cfg.contains("params")) cfg["params"] = json::object();
    if (!cfg["params"].is_object()) throw schema_error("config.params: expected an object");
    auto& p = cfg["params"];
    if (fl.horizon) p["horizon"] = *fl.horizon;
    if (fl.grid) p["grid"] = *fl.grid;
    if (fl.delta) {
        if (op == "test") p["delta_or_sigma"] = *fl.delta;
        else if (op == "dim") p["epsilon"] = *fl.delta;
        else p["delta"] = *fl.delta;
    }
    return cfg;
}

void write_outputs(const std::string& dir, const Outputs& out) {
    fs::create_directories(dir);
    for (const auto& [name, text] : out.files) io::write_text((fs::path(dir) / name).string(), text);
}

int run_command(const std::string& op, const Flags& fl) {
    json cfg;
    Run run;
    int code = kExitOk;
    try {
        cfg = effective_config(op, fl);
        Fields top(cfg, "config");
        top.string("operation");
        try {
            run.sys = parse_system(top.raw("system"));
        } catch (const precondition_error& e) {
            throw schema_error(std::string("system: ") + e.what());
        }
        const auto& sv = top.raw("seed");
        if (!sv.is_number_unsigned() && !(sv.is_number_integer() && sv.get<long long>() >= 0))
            throw schema_error("config.seed: expected a nonnegative integer");
        run.seed = sv.get<std::uint64_t>();
        run.rng.seed(run.seed);
        auto params = top.object("params");
        top.finish();

        const std::string canonical = cfg.dump();
        run.report = io::report_envelope(op, canonical);
        run.report["seed"] = run.seed;
        run.report["system"] = system_json(run.sys);
        run.report["config"] = cfg;
        code = operations().at(op)(params, run);
    } catch (const schema_error& e) {
        std::cerr << "explab: invalid config: " << e.what() << "\n";
        return kExitSchema;
    } catch (const precondition_error& e) {
        std::cerr << "explab: invalid parameters: " << e.what() << "\n";
        return kExitSchema;
    } catch (const unsupported_error& e) {
        std::cerr << "explab: unsupported: " << e.what() << "\n";
        return kExitSchema;
    } catch (const resource_error& e) {
        std::cerr << "explab: resource limit: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::bad_alloc&) {
        std::cerr << "explab: resource limit: out of memory\n";
        return kExitResource;
    } catch (const accuracy_error& e) {
        std::cerr << "explab: accuracy check failed: " << e.what() << "\n";
        return exit_code(Verdict::inconclusive);
    } catch (const std::domain_error& e) {
        std::cerr << "explab: invalid input: " << e.what() << "\n";
        return kExitSchema;
    }
    run.report["exit_code"] = code;
    run.out.files["report.json"] = run.report.dump(2) + "\n";
    try {
        write_outputs(fl.out, run.out);
    } catch (const std::exception& e) {
        std::cerr << "explab: " << e.what() << "\n";
        return kExitResource;
    }
    std::cout << run.report.dump(2) << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explab " EXPLAB_VERSION ": expansivity experiments on explicit dynamical systems"};
    app.set_version_flag("--version", std::string(EXPLAB_VERSION));
    app.require_subcommand(1);
    Flags fl;
    std::string chosen;
    const std::vector<std::pair<std::string, std::string>> subs{
        {"catalog", "list the catalog systems"},
        {"orbit", "iterate one point"},
        {"ball", "finite-horizon dynamical ball on a grid"},
        {"dim", "bracket the epsilon-dimension of a point cloud"},
        {"stable-set", "grid scan of the stable set of the origin"},
        {"test", "run an expansivity notion over seeds"},
        {"tangency", "tangency order and Sturm root count of a jet pair"},
        {"render", "draw clouds and the comb E as SVG"},
    };
    for (const auto& [name, help] : subs) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("--config", fl.config, "JSON config file")->check(CLI::ExistingFile);
        sc->add_option("--system", fl.system, "catalog system id");
        sc->add_option("--out", fl.out, "output directory")->capture_default_str();
        sc->add_option("--seed", fl.seed, "seed for randomized sampling");
        sc->add_option("--horizon", fl.horizon, "iteration horizon");
        sc->add_option("--grid", fl.grid, "grid spacing");
        sc->add_option("--delta", fl.delta, "delta, sigma or epsilon of the operation");
        sc->callback([&chosen, n = name] { chosen = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitSchema;
    }
    return run_command(chosen, fl);
}
