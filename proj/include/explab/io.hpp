#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "explab/dimension.hpp"
#include "explab/expansivity.hpp"
#include "explab/geometry.hpp"
#include "explab/point_cloud.hpp"
#include "explab/systems/irregular_saddle.hpp"
#include "explab/tangency.hpp"
#include "explab/version.hpp"

namespace explab::io {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit, used to stamp reports with the hash of their configuration.
inline std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------------------------
// Point clouds: CSV rows plus a JSON sidecar carrying the space tag and resolution.

inline std::string csv_header(SpaceTag tag) {
    switch (ambient_dim(tag)) {
        case 1: return "theta";
        case 3: return "x,y,z";
        default: return "x,y";
    }
}

inline std::string cloud_csv(const std::vector<Point>& pts, SpaceTag tag) {
    std::string out = csv_header(tag) + "\n";
    int d = ambient_dim(tag);
    for (const auto& p : pts) {
        for (int k = 0; k < d; ++k) {
            if (k) out += ',';
            out += fmt17(p.c[k]);
        }
        out += '\n';
    }
    return out;
}

inline json cloud_sidecar(const PointCloud& C, std::string_view csv_name) {
    return json{{"format", "explab-point-cloud"},
                {"version", EXPLAB_VERSION},
                {"space_tag", std::string(to_string(C.tag))},
                {"resolution_h", C.resolution_h},
                {"count", C.size()},
                {"csv", std::string(csv_name)}};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Writes `stem`.csv and `stem`.json into `dir`.
inline void write_cloud(const std::string& dir, const std::string& stem, const PointCloud& C) {
    write_text(dir + "/" + stem + ".csv", cloud_csv(C.points, C.tag));
    write_text(dir + "/" + stem + ".json", cloud_sidecar(C, stem + ".csv").dump(2) + "\n");
}

/// Reads a cloud from its JSON sidecar path (the CSV is resolved next to it).
inline PointCloud read_cloud(const std::string& sidecar_path) {
    json meta = json::parse(read_text(sidecar_path));
    SpaceTag tag = space_tag_from_string(meta.at("space_tag").get<std::string>());
    double h = meta.at("resolution_h").get<double>();
    std::string dir = sidecar_path.substr(0, sidecar_path.find_last_of('/') + 1);
    std::istringstream in(read_text(dir + meta.at("csv").get<std::string>()));
    std::string line;
    std::getline(in, line);
    if (line != csv_header(tag)) throw std::domain_error("point cloud CSV header mismatch");
    std::vector<Point> pts;
    int d = ambient_dim(tag);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 3> c{};
        std::istringstream row(line);
        std::string cell;
        for (int k = 0; k < d; ++k) {
            if (!std::getline(row, cell, ',')) throw std::domain_error("short CSV row");
            c[k] = std::stod(cell);
        }
        switch (tag) {
            case SpaceTag::torus2: pts.push_back(Point::torus(c[0], c[1])); break;
            case SpaceTag::circle: pts.push_back(Point::circle(c[0])); break;
            case SpaceTag::annulus: pts.push_back(Point::annulus(c[0], c[1])); break;
            case SpaceTag::plane3: pts.push_back(Point::plane3(c[0], c[1], c[2])); break;
            case SpaceTag::plane2: pts.push_back(Point::plane(c[0], c[1])); break;
        }
    }
    return PointCloud(std::move(pts), h, tag);
}

// ---------------------------------------------------------------------------------------------
// JSON encoders

inline json point_json(const Point& p) {
    json a = json::array();
    for (int k = 0; k < ambient_dim(p.tag); ++k) a.push_back(p.c[k]);
    return a;
}

inline json cover_json(const Cover& cv) {
    json boxes = json::array();
    for (const auto& b : cv.boxes) {
        json c = json::array(), h = json::array();
        for (int k = 0; k < b.dim; ++k) {
            c.push_back(b.center[k]);
            h.push_back(b.half[k]);
        }
        boxes.push_back(json{{"center", c}, {"half_extents", h}});
    }
    return boxes;
}

inline Cover cover_from_json(const json& j, int dim) {
    Cover cv;
    cv.dim = dim;
    for (const auto& b : j) {
        Box box;
        box.dim = dim;
        for (int k = 0; k < dim; ++k) {
            box.center[k] = b.at("center").at(k).get<double>();
            box.half[k] = b.at("half_extents").at(k).get<double>();
        }
        cv.boxes.push_back(box);
    }
    return cv;
}

inline json dim_estimate_json(const DimEstimate& e) {
    json j{{"epsilon", e.epsilon},
           {"lower", e.lower},
           {"upper", e.upper},
           {"candidates_tried", e.candidates_tried},
           {"witness_cover",
            json{{"kind", e.witness_cover.kind},
                 {"size", e.witness_cover.size()},
                 {"mesh", mesh(e.witness_cover)},
                 {"order", cover_order(e.witness_cover)},
                 {"boxes", cover_json(e.witness_cover)}}}};
    if (e.witness_chain) {
        json chain = json::array();
        for (const auto& p : e.witness_chain->chain) chain.push_back(point_json(p));
        j["witness_chain"] = json{{"gap_bound", e.witness_chain->gap_bound}, {"points", chain}};
    } else {
        j["witness_chain"] = nullptr;
    }
    return j;
}

inline json segments_json(const ESet& e) {
    json segs = json::array();
    for (const auto& s : e.segments) {
        if (s.is_base())
            segs.push_back(json{{"kind", "base"}, {"from", json::array({0.0, 0.0})}, {"to", json::array({1.0, 0.0})}});
        else
            segs.push_back(json{{"kind", s.limit ? "limit" : "comb"},
                                {"level", s.level},
                                {"index", s.index},
                                {"a", s.a},
                                {"from", json::array({s.a, 0.0})},
                                {"to", json::array({s.a, s.a})}});
    }
    json bounds = json::array();
    for (double b : e.truncation_bound) bounds.push_back(b);
    return json{{"levels_N", e.geometry.levels_N},
                {"per_level_I", e.geometry.per_level_I},
                {"include_limit_segments", e.geometry.include_limit_segments},
                {"truncation_bound_per_level", bounds},
                {"segments", segs}};
}

/// Report envelope shared by every experiment.
inline json report_envelope(std::string_view operation, std::string_view config_text) {
    return json{{"tool", "explab"},
                {"version", EXPLAB_VERSION},
                {"operation", std::string(operation)},
                {"config_hash", "fnv1a64:" + hex64(fnv1a(config_text))}};
}

/// Witness entries; attached clouds are referenced by file name (written by the caller).
inline json expansivity_json(const ExpansivityReport& r, const std::vector<std::string>& witness_files = {}) {
    json w = json::array();
    for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
        const auto& x = r.witnesses[i];
        json e{{"seed", x.seed}, {"kind", x.kind}, {"n", x.n ? json(*x.n) : json(nullptr)}, {"value", x.value},
               {"detail", x.detail}};
        if (i < witness_files.size() && !witness_files[i].empty()) e["data_csv"] = witness_files[i];
        w.push_back(e);
    }
    return json{{"system", r.system_id},
                {"notion", std::string(to_string(r.params.notion))},
                {"delta_or_sigma", r.params.delta_or_sigma},
                {"central_D", r.params.central_D},
                {"N", r.params.N},
                {"horizon", r.params.horizon},
                {"seed_count", r.params.seeds.size()},
                {"verdict", std::string(to_string(r.verdict))},
                {"reason", r.reason},
                {"witnesses", w}};
}

inline json polynomial_json(const Polynomial& p) {
    json a = json::array();
    for (double c : p.coeffs()) a.push_back(c);
    return a;
}

inline Polynomial polynomial_from_json(const json& j) {
    if (!j.is_array()) throw std::domain_error("polynomial must be a coefficient array");
    std::vector<double> c;
    for (const auto& v : j) c.push_back(v.get<double>());
    return Polynomial(std::move(c));
}

}  // namespace explab::io
