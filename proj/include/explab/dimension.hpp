#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "explab/errors.hpp"
#include "explab/geometry.hpp"
#include "explab/point_cloud.hpp"

namespace explab {

/// Open axis-aligned box.
struct Box {
    std::array<double, 3> center{};
    std::array<double, 3> half{};
    int dim = 2;

    double lo(int i) const noexcept { return center[i] - half[i]; }
    double hi(int i) const noexcept { return center[i] + half[i]; }

    double diameter() const noexcept {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += half[i] * half[i];
        return 2.0 * std::sqrt(s);
    }

    bool contains(const Point& p) const noexcept {
        for (int i = 0; i < dim; ++i)
            if (!(p.c[i] > lo(i) && p.c[i] < hi(i))) return false;
        return true;
    }

    bool intersects(const Box& o) const noexcept {
        for (int i = 0; i < dim; ++i)
            if (!(lo(i) < o.hi(i) && o.lo(i) < hi(i))) return false;
        return true;
    }

    /// Parameter interval {t in [0,1] : a + t(b-a) in box}, as an open interval (lo, hi)
    /// clipped to the closed segment. Empty when lo >= hi.
    std::pair<double, double> segment_interval(const Point& a, const Point& b) const noexcept {
        double tlo = -INFINITY, thi = INFINITY;
        for (int i = 0; i < dim; ++i) {
            double d = b.c[i] - a.c[i];
            if (d == 0.0) {
                if (!(a.c[i] > lo(i) && a.c[i] < hi(i))) return {1.0, 0.0};
                continue;
            }
            double t0 = (lo(i) - a.c[i]) / d, t1 = (hi(i) - a.c[i]) / d;
            if (t0 > t1) std::swap(t0, t1);
            tlo = std::max(tlo, t0);
            thi = std::min(thi, t1);
        }
        if (!(tlo < thi) || tlo >= 1.0 || thi <= 0.0) return {1.0, 0.0};
        return {tlo, thi};
    }
};

/// Finite family of open boxes. Coverage of a particular cloud is checked with `covers`.
struct Cover {
    std::vector<Box> boxes;
    int dim = 2;
    std::string kind;  // "brick", "path", "external"

    bool empty() const noexcept { return boxes.empty(); }
    std::size_t size() const noexcept { return boxes.size(); }
};

/// Largest box diameter; 0 for the empty cover (check Cover::empty to tell the cases apart).
inline double mesh(const Cover& cover) noexcept {
    double m = 0.0;
    for (const auto& b : cover.boxes) m = std::max(m, b.diameter());
    return m;
}

namespace detail {

// Max number of boxes sharing a point, by sweeping axis `axis` and recursing on the rest.
inline int max_depth(const std::vector<const Box*>& boxes, int axis, int dim) {
    if (boxes.empty()) return 0;
    if (axis == dim - 1) {
        std::vector<std::pair<double, int>> ev;
        ev.reserve(2 * boxes.size());
        for (const auto* b : boxes) {
            ev.emplace_back(b->lo(axis), +1);
            ev.emplace_back(b->hi(axis), -1);
        }
        // Open intervals: at a shared coordinate, closings happen first.
        std::sort(ev.begin(), ev.end());
        int cur = 0, best = 0;
        for (auto [x, d] : ev) best = std::max(best, cur += d);
        return best;
    }
    std::vector<double> coords;
    coords.reserve(2 * boxes.size());
    for (const auto* b : boxes) {
        coords.push_back(b->lo(axis));
        coords.push_back(b->hi(axis));
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    std::vector<const Box*> by_lo(boxes);
    std::sort(by_lo.begin(), by_lo.end(), [axis](auto* a, auto* b) { return a->lo(axis) < b->lo(axis); });
    std::vector<const Box*> active;
    std::size_t next = 0;
    int best = 0;
    for (std::size_t k = 0; k + 1 < coords.size(); ++k) {
        double a = coords[k], b = coords[k + 1];
        bool grew = false;
        while (next < by_lo.size() && by_lo[next]->lo(axis) <= a) {
            active.push_back(by_lo[next++]);
            grew = true;
        }
        std::erase_if(active, [&](const Box* x) { return x->hi(axis) <= a; });
        (void)b;
        // A cell whose active set only shrank cannot beat the previous cell.
        if (!grew || static_cast<int>(active.size()) <= best) continue;
        best = std::max(best, max_depth(active, axis + 1, dim));
    }
    return best;
}

}  // namespace detail

/// Exact order of the cover: (maximum number of boxes sharing a point) - 1.
/// Depth is constant on the cells of the arrangement cut out by all box faces, so
/// a sweep over the compressed coordinates is exact.  The empty cover has order -1.
inline int cover_order(const Cover& cover) {
    std::vector<const Box*> boxes;
    boxes.reserve(cover.size());
    for (const auto& b : cover.boxes) boxes.push_back(&b);
    return detail::max_depth(boxes, 0, cover.dim) - 1;
}

/// Reference order: max membership count over an explicit probe grid, minus 1.
inline int cover_order_probe(const Cover& cover, int per_axis) {
    if (cover.empty()) return -1;
    double lo[3] = {INFINITY, INFINITY, INFINITY}, hi[3] = {-INFINITY, -INFINITY, -INFINITY};
    for (const auto& b : cover.boxes)
        for (int i = 0; i < cover.dim; ++i) {
            lo[i] = std::min(lo[i], b.lo(i));
            hi[i] = std::max(hi[i], b.hi(i));
        }
    int best = 0;
    int n1 = cover.dim > 1 ? per_axis : 1, n2 = cover.dim > 2 ? per_axis : 1;
    for (int a = 0; a < per_axis; ++a)
        for (int b = 0; b < n1; ++b)
            for (int c = 0; c < n2; ++c) {
                Point p;
                int idx[3] = {a, b, c};
                for (int i = 0; i < cover.dim; ++i)
                    p.c[i] = lo[i] + (hi[i] - lo[i]) * (idx[i] + 0.5) / per_axis;
                int depth = 0;
                for (const auto& bx : cover.boxes) depth += bx.contains(p);
                best = std::max(best, depth);
            }
    return best - 1;
}

/// Pairs of cloud points at distance <= 2h.  The union of these segments together with the
/// samples is the set the cloud stands for when dimension is estimated.
inline std::vector<std::pair<std::size_t, std::size_t>> cloud_links(const PointCloud& C) {
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for_each_close_pair(C.points, C.tag, 2.0 * C.resolution_h,
                        [&](std::size_t i, std::size_t j) { links.emplace_back(i, j); });
    return links;
}

namespace detail {

/// Does the union of open intervals cover the closed interval [0,1]?
inline bool covers_unit_interval(std::vector<std::pair<double, double>> iv) {
    std::sort(iv.begin(), iv.end());
    double pos = 0.0, reach = -INFINITY;
    std::size_t k = 0;
    while (true) {
        while (k < iv.size() && iv[k].first < pos) reach = std::max(reach, iv[k++].second);
        if (reach <= pos) return false;
        pos = reach;
        if (pos > 1.0) return true;
    }
}

}  // namespace detail

/// Uniform grid over box extents, for point and segment queries against a cover.
class BoxIndex {
public:
    explicit BoxIndex(const Cover& cover) : cover_(&cover), dim_(cover.dim) {
        double w = 0.0;
        for (const auto& b : cover.boxes)
            for (int i = 0; i < dim_; ++i) w = std::max(w, 2.0 * b.half[i]);
        cell_ = w > 0.0 ? w : 1.0;
        for (std::size_t n = 0; n < cover.boxes.size(); ++n) {
            const auto& b = cover.boxes[n];
            Key lo = key_of(b.center, -1, b), hi = key_of(b.center, +1, b);
            for (auto a = lo[0]; a <= hi[0]; ++a)
                for (auto c = lo[1]; c <= hi[1]; ++c)
                    for (auto e = lo[2]; e <= hi[2]; ++e) cells_[{a, c, e}].push_back(n);
        }
    }

    /// Calls fn(box_index) for boxes registered in cells meeting the closed box [lo, hi];
    /// a box may be reported more than once.
    template <class Fn>
    void for_each_candidate(const std::array<double, 3>& lo, const std::array<double, 3>& hi, Fn&& fn) const {
        Key a = key_point(lo), b = key_point(hi);
        for (auto i = a[0]; i <= b[0]; ++i)
            for (auto j = a[1]; j <= b[1]; ++j)
                for (auto k = a[2]; k <= b[2]; ++k) {
                    auto it = cells_.find({i, j, k});
                    if (it == cells_.end()) continue;
                    for (auto n : it->second) fn(n);
                }
    }

    bool contains(const Point& p) const {
        std::array<double, 3> q{p.c[0], p.c[1], p.c[2]};
        bool in = false;
        for_each_candidate(q, q, [&](std::size_t n) { in = in || cover_->boxes[n].contains(p); });
        return in;
    }

private:
    using Key = std::array<std::int64_t, 3>;

    Key key_point(const std::array<double, 3>& x) const {
        Key k{0, 0, 0};
        for (int i = 0; i < dim_; ++i) k[i] = static_cast<std::int64_t>(std::floor(x[i] / cell_));
        return k;
    }
    Key key_of(const std::array<double, 3>& c, int sign, const Box& b) const {
        std::array<double, 3> x{};
        for (int i = 0; i < dim_; ++i) x[i] = c[i] + sign * b.half[i];
        return key_point(x);
    }

    const Cover* cover_;
    int dim_;
    double cell_ = 1.0;
    std::map<Key, std::vector<std::size_t>> cells_;
};

/// Every sample lies in some box, and every 2h-link segment is covered by the union.
inline bool covers(const Cover& cover, const PointCloud& C,
                   const std::vector<std::pair<std::size_t, std::size_t>>& links) {
    if (cover.empty()) return C.empty();
    BoxIndex index(cover);
    for (const auto& p : C.points)
        if (!index.contains(p)) return false;
    std::vector<std::pair<double, double>> iv;
    for (auto [i, j] : links) {
        iv.clear();
        const auto& a = C.points[i];
        const auto& b = C.points[j];
        std::array<double, 3> lo{}, hi{};
        for (int t = 0; t < 3; ++t) {
            lo[t] = std::min(a.c[t], b.c[t]);
            hi[t] = std::max(a.c[t], b.c[t]);
        }
        bool inside_one = false;
        index.for_each_candidate(lo, hi, [&](std::size_t n) {
            const auto& bx = cover.boxes[n];
            if (inside_one) return;
            if (bx.contains(a) && bx.contains(b)) {
                inside_one = true;  // boxes are convex
                return;
            }
            auto t = bx.segment_interval(a, b);
            if (t.first < t.second) iv.push_back(t);
        });
        if (!inside_one && !detail::covers_unit_interval(iv)) return false;
    }
    return true;
}

inline bool covers(const Cover& cover, const PointCloud& C) { return covers(cover, C, cloud_links(C)); }

/// Planar Euclidean chart for a cloud.  Torus clouds are unwrapped around their first point and
/// accepted only when the unwrapped extent is below 1/2 per axis, where the chart is an isometry.
inline PointCloud euclidean_chart(const PointCloud& C) {
    switch (C.tag) {
        case SpaceTag::plane2:
        case SpaceTag::plane3:
        case SpaceTag::annulus: return C;
        case SpaceTag::torus2: {
            if (C.empty()) return PointCloud({}, C.resolution_h, SpaceTag::plane2);
            const auto& o = C.points.front();
            std::vector<Point> pts;
            pts.reserve(C.size());
            double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
            for (const auto& p : C.points) {
                Point q = Point::plane(p.c[0], p.c[1]);
                for (int i = 0; i < 2; ++i) {
                    q.c[i] -= std::round(q.c[i] - o.c[i]);
                    lo[i] = std::min(lo[i], q.c[i]);
                    hi[i] = std::max(hi[i], q.c[i]);
                }
                pts.push_back(q);
            }
            if (hi[0] - lo[0] >= 0.5 || hi[1] - lo[1] >= 0.5)
                throw std::domain_error("torus cloud does not fit in a single chart");
            return PointCloud(std::move(pts), C.resolution_h, SpaceTag::plane2);
        }
        case SpaceTag::circle: {
            if (C.empty()) return C;
            const auto& o = C.points.front();
            std::vector<Point> pts;
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& p : C.points) {
                Point q = p;
                q.c[0] -= std::round(q.c[0] - o.c[0]);
                lo = std::min(lo, q.c[0]);
                hi = std::max(hi, q.c[0]);
                pts.push_back(q);
            }
            if (hi - lo >= 0.5) throw std::domain_error("circle cloud does not fit in a single chart");
            // Reuse the plane tag with one active coordinate is not possible; keep circle points
            // but unwrapped, and let callers treat them as 1-dimensional Euclidean data.
            return PointCloud(std::move(pts), C.resolution_h, SpaceTag::circle);
        }
    }
    return C;
}

/// Staggered brick tiling.  Along the last axis the space is cut into slabs; inside a slab the
/// remaining axes are bricked with an offset of half a brick per step of the next axis and a
/// quarter brick per step of the axis after it, so that no more than d+1 enlarged bricks meet.
struct BrickLayout {
    int dim = 2;
    double length = 0.0;  // brick edge before enlargement
    double margin = 0.0;  // enlargement per face
    std::array<int, 3> shift{0, 0, 0};  // global offset of half a brick per axis

    static BrickLayout for_epsilon(int dim, double epsilon, double scale, std::array<int, 3> shift) {
        static constexpr double edge[4] = {0.0, 0.8, 0.55, 0.45};
        BrickLayout b;
        b.dim = dim;
        b.length = edge[dim] * epsilon * scale;
        b.margin = epsilon / 20.0;
        b.shift = shift;
        return b;
    }

    double offset(int axis, const std::array<std::int64_t, 3>& k) const noexcept {
        double o = 0.5 * shift[axis];
        if (axis + 1 < dim) o += 0.5 * static_cast<double>(k[axis + 1]);
        if (axis + 2 < dim) o += 0.25 * static_cast<double>(k[axis + 2]);
        return o * length;
    }

    Box box(const std::array<std::int64_t, 3>& k) const {
        Box b;
        b.dim = dim;
        for (int i = 0; i < dim; ++i) {
            b.center[i] = offset(i, k) + (static_cast<double>(k[i]) + 0.5) * length;
            b.half[i] = 0.5 * length + margin;
        }
        return b;
    }

    /// Calls fn(k) for every brick whose enlarged box meets the closed box [lo, hi].
    template <class Fn>
    void for_each_meeting(const std::array<double, 3>& lo, const std::array<double, 3>& hi, Fn&& fn) const {
        std::array<std::int64_t, 3> k{0, 0, 0};
        walk(dim - 1, k, lo, hi, fn);
    }

private:
    template <class Fn>
    void walk(int axis, std::array<std::int64_t, 3>& k, const std::array<double, 3>& lo,
              const std::array<double, 3>& hi, Fn& fn) const {
        if (axis < 0) {
            fn(k);
            return;
        }
        double base = offset(axis, k);
        auto first = static_cast<std::int64_t>(std::floor((lo[axis] - margin - base) / length)) - 1;
        auto last = static_cast<std::int64_t>(std::floor((hi[axis] + margin - base) / length)) + 1;
        for (std::int64_t v = first; v <= last; ++v) {
            double blo = base + static_cast<double>(v) * length - margin;
            double bhi = blo + length + 2.0 * margin;
            if (!(blo < hi[axis] && lo[axis] < bhi)) continue;
            k[axis] = v;
            walk(axis - 1, k, lo, hi, fn);
        }
        k[axis] = 0;
    }
};

namespace detail {

inline void require_resolution(const PointCloud& C, double epsilon, const char* what) {
    if (!(epsilon > 4.0 * C.resolution_h))
        throw precondition_error(std::string(what) + ": epsilon must exceed 4 * resolution_h");
}

inline int cover_dim(const PointCloud& C) { return C.tag == SpaceTag::circle ? 1 : ambient_dim(C.tag); }

inline Cover brick_cover_impl(const PointCloud& C, const std::vector<std::pair<std::size_t, std::size_t>>& links,
                              double epsilon, double scale, std::array<int, 3> shift) {
    int d = cover_dim(C);
    auto layout = BrickLayout::for_epsilon(d, epsilon, scale, shift);
    std::map<std::array<std::int64_t, 3>, bool> kept;
    for (const auto& p : C.points) {
        std::array<double, 3> q{p.c[0], p.c[1], p.c[2]};
        layout.for_each_meeting(q, q, [&](const auto& k) {
            if (!kept.count(k) && layout.box(k).contains(p)) kept[k] = true;
        });
    }
    for (auto [i, j] : links) {
        const auto& a = C.points[i];
        const auto& b = C.points[j];
        std::array<double, 3> lo{}, hi{};
        for (int t = 0; t < 3; ++t) {
            lo[t] = std::min(a.c[t], b.c[t]);
            hi[t] = std::max(a.c[t], b.c[t]);
        }
        layout.for_each_meeting(lo, hi, [&](const auto& k) {
            if (kept.count(k)) return;
            auto t = layout.box(k).segment_interval(a, b);
            if (t.first < t.second) kept[k] = true;
        });
    }
    Cover cover;
    cover.dim = d;
    cover.kind = "brick";
    for (const auto& [k, _] : kept) cover.boxes.push_back(layout.box(k));
    return cover;
}

}  // namespace detail

/// Staggered brick cover of C by open boxes of diameter < epsilon; order <= ambient dimension.
/// Bricks meeting neither a sample nor a 2h-link are pruned.
inline Cover brick_cover(const PointCloud& C, double epsilon, double scale = 1.0,
                         std::array<int, 3> shift = {0, 0, 0}) {
    detail::require_resolution(C, epsilon, "brick_cover");
    auto chart = euclidean_chart(C);
    return detail::brick_cover_impl(chart, cloud_links(chart), epsilon, scale, shift);
}

namespace detail {

/// Buckets net points in cells of side `radius` for nearest-within-radius queries.
class NetCells {
public:
    NetCells(double radius, int dim) : radius_(radius), dim_(dim) {}

    void insert(const Point& p, std::size_t idx) { cells_[key(p)].push_back(idx); }

    /// Nearest stored point among the 3^d surrounding cells: (index, distance); distance is
    /// infinite when none is closer than `radius`-ish cells allow.
    std::pair<std::size_t, double> nearest(const std::vector<Point>& net, const Point& p) const {
        auto k = key(p);
        std::pair<std::size_t, double> best{0, INFINITY};
        for (int a = -1; a <= 1; ++a)
            for (int b = (dim_ > 1 ? -1 : 0); b <= (dim_ > 1 ? 1 : 0); ++b)
                for (int c = (dim_ > 2 ? -1 : 0); c <= (dim_ > 2 ? 1 : 0); ++c) {
                    auto it = cells_.find({k[0] + a, k[1] + b, k[2] + c});
                    if (it == cells_.end()) continue;
                    for (auto j : it->second) {
                        double s = 0.0;
                        for (int i = 0; i < dim_; ++i) s += (net[j].c[i] - p.c[i]) * (net[j].c[i] - p.c[i]);
                        double dd = std::sqrt(s);
                        if (dd < best.second || (dd == best.second && j < best.first)) best = {j, dd};
                    }
                }
        return best;
    }

private:
    std::array<std::int64_t, 3> key(const Point& p) const {
        std::array<std::int64_t, 3> k{0, 0, 0};
        for (int i = 0; i < dim_; ++i) k[i] = static_cast<std::int64_t>(std::floor(p.c[i] / radius_));
        return k;
    }
    double radius_;
    int dim_;
    std::map<std::array<std::int64_t, 3>, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// Greedy Euclidean net; points taken in lexicographic order.  A point joins the net when it
/// is at least `radius` from every existing net point, so every sample lies within `radius`
/// of the net.
inline std::vector<Point> greedy_net(const PointCloud& C, double radius) {
    std::vector<Point> sorted = C.points;
    std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) { return a.c < b.c; });
    int d = detail::cover_dim(C);
    std::vector<Point> net;
    detail::NetCells cells(radius, d);
    for (const auto& p : sorted) {
        if (cells.nearest(net, p).second < radius) continue;
        cells.insert(p, net.size());
        net.push_back(p);
    }
    return net;
}

/// Chain cover for thin, curve-like sets.  Samples are grouped by their nearest point of a
/// greedy (epsilon/4)-net; each group, together with the midpoints of 2h-links leaving it,
/// gets its bounding box padded by epsilon/40.  Returned only when the box-intersection graph
/// is a disjoint union of paths and cycles of length >= 4 (so no three boxes meet), the boxes
/// cover the cloud with its links, and the mesh is below epsilon.
inline std::optional<Cover> path_cover(const PointCloud& C, double epsilon) {
    detail::require_resolution(C, epsilon, "path_cover");
    auto chart = euclidean_chart(C);
    int d = detail::cover_dim(chart);
    double r = epsilon / 4.0;
    auto net = greedy_net(chart, r);
    detail::NetCells cells(r, d);
    for (std::size_t i = 0; i < net.size(); ++i) cells.insert(net[i], i);

    const auto& pts = chart.points;
    std::vector<std::size_t> owner(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) owner[i] = cells.nearest(net, pts[i]).first;

    std::vector<std::array<double, 3>> lo(net.size()), hi(net.size());
    for (std::size_t k = 0; k < net.size(); ++k)
        for (int a = 0; a < 3; ++a) {
            lo[k][a] = INFINITY;
            hi[k][a] = -INFINITY;
        }
    auto grow = [&](std::size_t k, const std::array<double, 3>& x) {
        for (int a = 0; a < d; ++a) {
            lo[k][a] = std::min(lo[k][a], x[a]);
            hi[k][a] = std::max(hi[k][a], x[a]);
        }
    };
    for (std::size_t i = 0; i < pts.size(); ++i) grow(owner[i], pts[i].c);
    for (auto [i, j] : cloud_links(chart)) {
        if (owner[i] == owner[j]) continue;
        std::array<double, 3> m{};
        for (int a = 0; a < d; ++a) m[a] = (pts[i].c[a] + pts[j].c[a]) / 2;
        grow(owner[i], m);
        grow(owner[j], m);
    }

    const double pad = epsilon / 40.0;
    Cover cover;
    cover.dim = d;
    cover.kind = "path";
    for (std::size_t k = 0; k < net.size(); ++k) {
        Box b;
        b.dim = d;
        for (int a = 0; a < d; ++a) {
            b.center[a] = (lo[k][a] + hi[k][a]) / 2;
            b.half[a] = (hi[k][a] - lo[k][a]) / 2 + pad;
        }
        cover.boxes.push_back(b);
    }
    if (!(mesh(cover) < epsilon)) return std::nullopt;

    std::vector<std::vector<std::size_t>> adj(net.size());
    BoxIndex index(cover);
    for (std::size_t i = 0; i < cover.size(); ++i) {
        std::array<double, 3> blo{}, bhi{};
        for (int k = 0; k < d; ++k) {
            blo[k] = cover.boxes[i].lo(k);
            bhi[k] = cover.boxes[i].hi(k);
        }
        bool too_many = false;
        index.for_each_candidate(blo, bhi, [&](std::size_t j) {
            if (j <= i || !cover.boxes[i].intersects(cover.boxes[j])) return;
            if (std::find(adj[i].begin(), adj[i].end(), j) != adj[i].end()) return;
            adj[i].push_back(j);
            adj[j].push_back(i);
            too_many = too_many || adj[i].size() > 2 || adj[j].size() > 2;
        });
        if (too_many) return std::nullopt;
    }
    // Degree <= 2 leaves only 3-cycles as a way for three boxes to share a point
    // (axis-parallel boxes that pairwise intersect have a common point).
    for (std::size_t i = 0; i < adj.size(); ++i)
        if (adj[i].size() == 2) {
            auto j = adj[i][0], k = adj[i][1];
            if (std::find(adj[j].begin(), adj[j].end(), k) != adj[j].end()) return std::nullopt;
        }
    if (!covers(cover, chart)) return std::nullopt;
    return cover;
}

/// Two-sided estimate of the epsilon-dimension of the set a cloud represents.
struct DimEstimate {
    double epsilon = 0.0;
    int lower = 0;
    int upper = 0;
    Cover witness_cover;
    std::optional<ContinuumApprox> witness_chain;
    std::size_t candidates_tried = 0;
};

namespace detail {

// BFS path inside the 2h-link graph between two points.
inline std::vector<std::size_t> link_path(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& links,
                                          std::size_t from, std::size_t to) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [i, j] : links) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<std::size_t> prev(n, n);
    std::queue<std::size_t> q;
    q.push(from);
    prev[from] = from;
    while (!q.empty()) {
        auto v = q.front();
        q.pop();
        if (v == to) break;
        for (auto w : adj[v])
            if (prev[w] == n) {
                prev[w] = v;
                q.push(w);
            }
    }
    std::vector<std::size_t> path;
    if (prev[to] == n) return path;
    for (auto v = to; v != from; v = prev[v]) path.push_back(v);
    path.push_back(from);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace detail

/// Lower bound: 1 when some 2h-chain component has diameter >= epsilon (a continuum of
/// diameter >= epsilon needs overlapping cover elements), else 0.  Works for any metric the
/// cloud carries; the optional witness is a 2h-chain between two points >= epsilon apart.
inline std::pair<int, std::optional<ContinuumApprox>> dim_lower_bound(const PointCloud& C, double epsilon) {
    if (C.empty()) return {0, std::nullopt};
    double delta = 2.0 * C.resolution_h;
    auto comps = chain_components(C, delta);
    auto groups = comps.groups();
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    for (const auto& g : groups) {
        std::vector<Point> pts;
        pts.reserve(g.size());
        for (auto i : g) pts.push_back(C.points[i]);
        if (diameter(pts, C.tag) < epsilon) continue;
        // Find a far pair and a linking chain for the witness.
        std::size_t a = 0, b = 0;
        double best = -1.0;
        std::size_t stride = std::max<std::size_t>(1, pts.size() / 2000);
        for (std::size_t i = 0; i < pts.size(); i += stride)
            for (std::size_t j = 0; j < pts.size(); ++j) {
                double dd = distance(pts[i], pts[j]);
                if (dd > best) {
                    best = dd;
                    a = i;
                    b = j;
                }
            }
        std::optional<ContinuumApprox> chain;
        if (best >= epsilon) {
            PointCloud sub(pts, C.resolution_h, C.tag);
            auto path = detail::link_path(pts.size(), cloud_links(sub), a, b);
            std::vector<Point> cp;
            for (auto v : path) cp.push_back(pts[v]);
            chain = ContinuumApprox(std::move(cp), delta, C.tag);
        }
        return {1, chain};
    }
    return {0, std::nullopt};
}

/// Candidate covers the estimator evaluates: brick covers at every half-brick global shift and
/// three scales, then the chain cover when applicable.
inline std::vector<Cover> generated_covers(const PointCloud& chart, double epsilon) {
    std::vector<Cover> out;
    int d = detail::cover_dim(chart);
    auto links = cloud_links(chart);
    for (double scale : {1.0, 0.95, 0.9})
        for (int mask = 0; mask < (1 << d); ++mask) {
            std::array<int, 3> shift{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
            out.push_back(detail::brick_cover_impl(chart, links, epsilon, scale, shift));
        }
    if (auto pc = path_cover(chart, epsilon)) out.push_back(std::move(*pc));
    return out;
}

/// Brackets dim_eps of the represented set.  `extra` covers (for example witnesses found at a
/// smaller epsilon, or the witness of a nearby set) are re-evaluated as candidates; only those
/// with mesh < epsilon that cover the cloud and its links are accepted.
inline DimEstimate dim_eps_estimate(const PointCloud& C, double epsilon, const std::vector<Cover>& extra = {}) {
    detail::require_resolution(C, epsilon, "dim_eps_estimate");
    DimEstimate est;
    est.epsilon = epsilon;
    if (C.empty()) {
        est.witness_cover.dim = detail::cover_dim(C);
        return est;
    }
    auto chart = euclidean_chart(C);
    auto links = cloud_links(chart);
    auto candidates = generated_covers(chart, epsilon);
    int best = INT32_MAX;
    auto consider = [&](const Cover& cv, bool verify) {
        ++est.candidates_tried;
        if (cv.empty() || cv.dim != detail::cover_dim(chart) || !(mesh(cv) < epsilon)) return;
        if (verify && !covers(cv, chart, links)) return;
        int ord = cover_order(cv);
        if (ord < best) {
            best = ord;
            est.witness_cover = cv;
        }
    };
    for (const auto& cv : candidates) consider(cv, cv.kind != "brick");
    for (const auto& cv : extra) consider(cv, true);
    est.upper = best;
    auto [lo, chain] = dim_lower_bound(C, epsilon);
    est.lower = lo;
    est.witness_chain = std::move(chain);
    return est;
}

/// Maximum number of points dim_eps_oracle accepts.
inline constexpr std::size_t kOracleLimit = 12;

namespace detail {

// One candidate ball of the oracle: samples inside it (bitmask) and, per link, the open
// parameter interval of the link inside it.
struct OracleBall {
    std::uint32_t samples = 0;
    std::vector<std::pair<double, double>> link;
};

inline OracleBall oracle_ball(const std::vector<Point>& pts, const std::vector<std::pair<std::size_t, std::size_t>>& links,
                              const Point& centre, double radius) {
    OracleBall ball;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (euclidean_distance(centre, pts[i]) < radius) ball.samples |= 1u << i;
    for (auto [ia, ib] : links) {
        const auto& a = pts[ia];
        const auto& b = pts[ib];
        // |a + t(b-a) - centre|^2 < radius^2
        double A = 0, B = 0, K = 0;
        for (int k = 0; k < 3; ++k) {
            double dk = b.c[k] - a.c[k], ek = a.c[k] - centre.c[k];
            A += dk * dk;
            B += 2 * dk * ek;
            K += ek * ek;
        }
        K -= radius * radius;
        double disc = B * B - 4 * A * K;
        if (A == 0.0 || disc <= 0.0) {
            ball.link.emplace_back(1.0, 0.0);
            continue;
        }
        double s = std::sqrt(disc);
        ball.link.emplace_back((-B - s) / (2 * A), (-B + s) / (2 * A));
    }
    return ball;
}

// Max depth of the chosen intervals on [0,1], or -1 when they do not cover it.
inline int link_depth(std::vector<std::pair<double, double>>& iv, std::vector<double>& probes) {
    if (!covers_unit_interval(iv)) return -1;
    probes.assign({0.0, 1.0});
    for (auto [a, b] : iv) {
        if (a > 0.0 && a < 1.0) probes.push_back(a);
        if (b > 0.0 && b < 1.0) probes.push_back(b);
    }
    std::sort(probes.begin(), probes.end());
    std::size_t m = probes.size();
    for (std::size_t k = 0; k + 1 < m; ++k) probes.push_back(0.5 * (probes[k] + probes[k + 1]));
    int depth = 0;
    for (double t : probes) {
        int cnt = 0;
        for (auto [a, b] : iv) cnt += (a < t && t < b);
        depth = std::max(depth, cnt);
    }
    return depth;
}

}  // namespace detail

/// Exact minimum order of a cover drawn from a fixed candidate family: around every sample,
/// the open ball of radius epsilon/2 - h and the one of radius h (diameters < epsilon).  A
/// subfamily is admissible when it covers the samples and their 2h-links; its order is taken on
/// that covered set.  Concentric candidates are nested, so each sample contributes at most one.
inline int dim_eps_oracle(const PointCloud& C, double epsilon) {
    if (C.size() > kOracleLimit) throw resource_error("dim_eps_oracle: cloud exceeds 12 points");
    detail::require_resolution(C, epsilon, "dim_eps_oracle");
    if (C.empty()) return -1;
    auto chart = euclidean_chart(C);
    const auto& pts = chart.points;
    const std::size_t n = pts.size();
    const double h = C.resolution_h;
    auto links = cloud_links(chart);

    // choice[c]: 0 none, 1 small ball, 2 large ball
    std::vector<std::array<detail::OracleBall, 2>> balls(n);
    for (std::size_t c = 0; c < n; ++c) {
        balls[c][0] = detail::oracle_ball(pts, links, pts[c], h);
        balls[c][1] = detail::oracle_ball(pts, links, pts[c], epsilon / 2.0 - h);
    }
    // last centre whose large ball still reaches sample i (for the coverage cut)
    std::vector<std::size_t> last_reach(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < n; ++c)
            if (balls[c][1].samples >> i & 1u) last_reach[i] = c;

    std::vector<int> choice(n, 0), depth(n, 0);
    std::vector<std::pair<double, double>> iv;
    std::vector<double> probes;
    auto leaf_ok = [&](int cap) {
        for (std::size_t l = 0; l < links.size(); ++l) {
            iv.clear();
            for (std::size_t c = 0; c < n; ++c) {
                if (!choice[c]) continue;
                auto s = balls[c][choice[c] - 1].link[l];
                if (s.first < s.second && s.first < 1.0 && s.second > 0.0) iv.push_back(s);
            }
            int d = detail::link_depth(iv, probes);
            if (d < 0 || d > cap) return false;
        }
        return true;
    };
    // Depth-first over centres with sample depth capped at cap.
    auto search = [&](auto&& self, std::size_t c, int cap) -> bool {
        if (c == n) {
            for (std::size_t i = 0; i < n; ++i)
                if (depth[i] == 0) return false;
            return leaf_ok(cap);
        }
        for (std::size_t i = 0; i < n; ++i)
            if (depth[i] == 0 && last_reach[i] < c) return false;
        for (int opt : {0, 1, 2}) {
            std::uint32_t s = opt ? balls[c][opt - 1].samples : 0u;
            bool fits = true;
            for (std::size_t i = 0; i < n; ++i)
                if ((s >> i & 1u) && depth[i] + 1 > cap) fits = false;
            if (!fits) continue;
            choice[c] = opt;
            for (std::size_t i = 0; i < n; ++i) depth[i] += s >> i & 1u;
            bool found = self(self, c + 1, cap);
            for (std::size_t i = 0; i < n; ++i) depth[i] -= s >> i & 1u;
            choice[c] = 0;
            if (found) return true;
        }
        return false;
    };
    for (int cap = 1; cap <= static_cast<int>(n); ++cap)
        if (search(search, 0, cap)) return cap - 1;
    return static_cast<int>(n) - 1;  // not reached: all large balls together always qualify
}

}  // namespace explab
