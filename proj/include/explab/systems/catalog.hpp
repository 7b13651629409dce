#pragma once

#include <array>
#include <string>
#include <string_view>

#include "explab/errors.hpp"
#include "explab/geometry.hpp"
#include "explab/systems/annulus.hpp"
#include "explab/systems/cat_map.hpp"
#include "explab/systems/doubling.hpp"
#include "explab/systems/irregular_saddle.hpp"

namespace explab {

enum class SystemKind {
    cat_map,
    annulus_time_one,
    irregular_saddle_2d,
    irregular_saddle_3d,
    doubling_circle,
    solenoid_shift,
};

inline constexpr std::array<SystemKind, 6> kAllSystems = {
    SystemKind::cat_map,         SystemKind::annulus_time_one, SystemKind::irregular_saddle_2d,
    SystemKind::irregular_saddle_3d, SystemKind::doubling_circle,  SystemKind::solenoid_shift,
};

constexpr std::string_view to_string(SystemKind k) noexcept {
    switch (k) {
        case SystemKind::cat_map: return "cat_map";
        case SystemKind::annulus_time_one: return "annulus_time_one";
        case SystemKind::irregular_saddle_2d: return "irregular_saddle_2d";
        case SystemKind::irregular_saddle_3d: return "irregular_saddle_3d";
        case SystemKind::doubling_circle: return "doubling_circle";
        case SystemKind::solenoid_shift: return "solenoid_shift";
    }
    return "?";
}

inline SystemKind system_kind_from_string(std::string_view s) {
    for (auto k : kAllSystems)
        if (to_string(k) == s) return k;
    throw precondition_error("unknown system: " + std::string(s));
}

/// One catalog entry.  Parameters other than the kind only matter for the saddles
/// (geometry, integrator) and the solenoid (window size).
struct DynSystem {
    SystemKind kind = SystemKind::cat_map;
    EGeometry geometry{};
    IntegratorConfig integrator{};
    int solenoid_K = 16;

    static DynSystem make(SystemKind k) { return DynSystem{k, {}, {}, 16}; }

    std::string_view id() const noexcept { return to_string(kind); }

    /// Phase space of Point-valued systems; the solenoid uses SolenoidPoint instead.
    SpaceTag space() const {
        switch (kind) {
            case SystemKind::cat_map: return SpaceTag::torus2;
            case SystemKind::annulus_time_one: return SpaceTag::annulus;
            case SystemKind::irregular_saddle_2d: return SpaceTag::plane2;
            case SystemKind::irregular_saddle_3d: return SpaceTag::plane3;
            case SystemKind::doubling_circle: return SpaceTag::circle;
            case SystemKind::solenoid_shift: break;
        }
        throw unsupported_error("solenoid_shift acts on SolenoidPoint, not Point");
    }

    bool point_valued() const noexcept { return kind != SystemKind::solenoid_shift; }
    bool invertible() const noexcept { return kind != SystemKind::doubling_circle; }

    std::string_view description() const noexcept {
        switch (kind) {
            case SystemKind::cat_map: return "(x, y) -> (2x + y, x + y) mod 1 on the torus";
            case SystemKind::annulus_time_one: return "time-one map of X = (-y, x)/r on 1 <= r <= 2";
            case SystemKind::irregular_saddle_2d: return "f = phi_1 o T, irregular saddle at the origin";
            case SystemKind::irregular_saddle_3d: return "(x, y, z) -> (f(x, y), 2z)";
            case SystemKind::doubling_circle: return "theta -> 2 theta mod 1 (not invertible)";
            case SystemKind::solenoid_shift: return "shift on the inverse limit of the doubling map";
        }
        return "";
    }
};

inline Point system_eval(const DynSystem& sys, const Point& p, Direction dir) {
    if (!sys.point_valued()) throw unsupported_error("solenoid_shift: evaluate on SolenoidPoint");
    if (p.tag != sys.space())
        throw precondition_error(std::string(sys.id()) + ": point from space " + std::string(to_string(p.tag)));
    const bool fwd = dir == Direction::forward;
    switch (sys.kind) {
        case SystemKind::cat_map: return fwd ? CatMap::forward(p) : CatMap::backward(p);
        case SystemKind::annulus_time_one: return fwd ? AnnulusTimeOne::forward(p) : AnnulusTimeOne::backward(p);
        case SystemKind::irregular_saddle_2d: return saddle_map(p, sys.geometry, sys.integrator, dir);
        case SystemKind::irregular_saddle_3d: return saddle3_map(p, sys.geometry, sys.integrator, dir);
        case SystemKind::doubling_circle:
            if (!fwd) throw unsupported_error("doubling_circle is not invertible; use DoublingCircle::preimages");
            return DoublingCircle::forward(p);
        case SystemKind::solenoid_shift: break;
    }
    throw unsupported_error("system_eval: unsupported system");
}

inline SolenoidPoint system_eval(const DynSystem& sys, const SolenoidPoint& s, Direction dir) {
    if (sys.kind != SystemKind::solenoid_shift)
        throw precondition_error(std::string(sys.id()) + ": SolenoidPoint given");
    return dir == Direction::forward ? SolenoidShift::forward(s) : SolenoidShift::backward(s);
}

/// n-th iterate; negative n runs backward.
inline Point system_iterate(const DynSystem& sys, Point p, int n) {
    Direction d = n >= 0 ? Direction::forward : Direction::backward;
    for (int k = 0; k < std::abs(n); ++k) p = system_eval(sys, p, d);
    return p;
}

}  // namespace explab
