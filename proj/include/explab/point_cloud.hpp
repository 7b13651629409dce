#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "explab/geometry.hpp"

namespace explab {

/// Finite sample of a compact set. Every point of the represented set is claimed to lie
/// within `resolution_h` of a sample.
struct PointCloud {
    std::vector<Point> points;
    double resolution_h = 0.0;
    SpaceTag tag = SpaceTag::plane2;

    PointCloud() = default;
    PointCloud(std::vector<Point> pts, double h, SpaceTag t) : points(std::move(pts)), resolution_h(h), tag(t) {
        if (!(h > 0.0)) throw std::domain_error("point cloud resolution must be positive");
        for (const auto& p : points)
            if (p.tag != tag) throw std::domain_error("point cloud mixes spaces");
    }

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    Metric metric() const noexcept { return metric_for(tag); }
};

/// Ordered chain standing in for a continuum; consecutive points are at most `gap_bound` apart.
struct ContinuumApprox {
    std::vector<Point> chain;
    double gap_bound = 0.0;
    SpaceTag tag = SpaceTag::plane2;

    ContinuumApprox() = default;
    ContinuumApprox(std::vector<Point> pts, double gap, SpaceTag t) : chain(std::move(pts)), gap_bound(gap), tag(t) {
        for (const auto& p : chain)
            if (p.tag != tag) throw std::domain_error("chain mixes spaces");
    }

    double max_gap() const {
        double g = 0.0;
        for (std::size_t i = 1; i < chain.size(); ++i) g = std::max(g, distance(chain[i - 1], chain[i]));
        return g;
    }
    bool gaps_ok() const { return max_gap() <= gap_bound + kTolerance; }

    PointCloud as_cloud() const {
        // A chain with gaps <= g represents a continuum within g/2 of its vertices.
        return PointCloud(chain, std::max(gap_bound / 2.0, 1e-300), tag);
    }
};

/// Samples a straight chain from `a` to `b` (in plane coordinates) with gaps <= gap.
inline ContinuumApprox segment_chain(const Point& a, const Point& b, double gap) {
    double len = euclidean_distance(a, b);
    auto n = static_cast<std::size_t>(std::ceil(len / gap));
    n = std::max<std::size_t>(n, 1);
    std::vector<Point> pts;
    pts.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n);
        Point p = a;
        for (int k = 0; k < 3; ++k) p.c[k] = a.c[k] + t * (b.c[k] - a.c[k]);
        if (p.tag == SpaceTag::torus2) p = Point::torus(p.c[0], p.c[1]);
        if (p.tag == SpaceTag::circle) p = Point::circle(p.c[0]);
        pts.push_back(p);
    }
    return ContinuumApprox(std::move(pts), gap, a.tag);
}

namespace detail {

inline void require_nonempty(const PointCloud& c, const char* what) {
    if (c.empty()) throw std::domain_error(std::string(what) + ": empty point cloud");
}

/// Uniform bucket grid over Euclidean or torus points for radius and nearest-neighbour
/// queries. Circle points are bucketed on their angle with wraparound.
class BucketGrid {
    using Index = std::array<std::int64_t, 3>;

public:
    BucketGrid(const std::vector<Point>& pts, double cell, SpaceTag tag)
        : pts_(&pts), tag_(tag), dim_(ambient_dim(tag)) {
        wrap_ = tag == SpaceTag::torus2 || tag == SpaceTag::circle;
        if (wrap_) {
            ncell_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(1.0 / cell)));
            cell_ = 1.0 / static_cast<double>(ncell_);
        } else {
            cell_ = cell;
        }
        buckets_.reserve(pts.size());
        for (std::uint32_t i = 0; i < pts.size(); ++i) buckets_[index_of(pts[i])].push_back(i);
    }

    double cell() const noexcept { return cell_; }

    /// Calls fn(j) for every stored point in cells within `r` cells (Chebyshev) of p's cell.
    template <class Fn>
    void for_each_near(const Point& p, int r, Fn&& fn) const {
        auto base = index_of(p);
        visit_block(base, r, fn);
    }

    /// Exact nearest-neighbour distance from p to the stored set.
    double nearest(const Point& p, Metric metric) const {
        auto base = index_of(p);
        double best = INFINITY;
        for (std::int64_t r = 0;; ++r) {
            bool all = visit_ring(base, r, [&](std::uint32_t j) {
                best = std::min(best, distance(metric, p, (*pts_)[j]));
            });
            // Points outside rings 0..r are at least r*cell away.
            if (all || best <= static_cast<double>(r) * cell_) break;
        }
        return best;
    }

private:
    Index index_of(const Point& p) const {
        Index idx{0, 0, 0};
        for (int k = 0; k < dim_; ++k) {
            auto v = static_cast<std::int64_t>(std::floor(p.c[k] / cell_));
            if (wrap_) v = ((v % ncell_) + ncell_) % ncell_;
            idx[k] = v;
        }
        return idx;
    }

    struct IndexHash {
        std::size_t operator()(const Index& idx) const noexcept {
            std::uint64_t h = 1469598103934665603ull;
            for (auto v : idx) {
                h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };

    const std::vector<std::uint32_t>* bucket(Index idx) const {
        if (wrap_)
            for (int k = 0; k < dim_; ++k) idx[k] = ((idx[k] % ncell_) + ncell_) % ncell_;
        auto it = buckets_.find(idx);
        return it == buckets_.end() ? nullptr : &it->second;
    }

    bool covers_all(std::int64_t r) const { return wrap_ && 2 * r + 1 >= ncell_; }

    template <class Fn>
    void visit_block(const Index& base, std::int64_t r, Fn& fn) const {
        // On a wrapped grid narrower than the block, each cell is visited once.
        std::int64_t lo = covers_all(r) ? 0 : -r;
        std::int64_t hi = covers_all(r) ? ncell_ - 1 : r;
        std::int64_t lo1 = dim_ > 1 ? lo : 0, hi1 = dim_ > 1 ? hi : 0;
        std::int64_t lo2 = dim_ > 2 ? lo : 0, hi2 = dim_ > 2 ? hi : 0;
        for (std::int64_t a = lo; a <= hi; ++a)
            for (std::int64_t b = lo1; b <= hi1; ++b)
                for (std::int64_t c = lo2; c <= hi2; ++c)
                    if (auto* v = bucket({base[0] + a, base[1] + b, base[2] + c}))
                        for (auto j : *v) fn(j);
    }

    // Returns true once every cell of the grid has been visited.
    template <class Fn>
    bool visit_ring(const Index& base, std::int64_t r, Fn&& fn) const {
        if (covers_all(r)) {
            visit_block(base, r, fn);
            return true;
        }
        std::int64_t r1 = dim_ > 1 ? r : 0, r2 = dim_ > 2 ? r : 0;
        for (std::int64_t a = -r; a <= r; ++a)
            for (std::int64_t b = -r1; b <= r1; ++b)
                for (std::int64_t c = -r2; c <= r2; ++c) {
                    if (std::max({std::llabs(a), std::llabs(b), std::llabs(c)}) != r) continue;
                    if (auto* v = bucket({base[0] + a, base[1] + b, base[2] + c}))
                        for (auto j : *v) fn(j);
                }
        return false;
    }

    const std::vector<Point>* pts_;
    SpaceTag tag_;
    int dim_;
    bool wrap_ = false;
    std::int64_t ncell_ = 1;
    double cell_ = 1.0;
    std::unordered_map<Index, std::vector<std::uint32_t>, IndexHash> buckets_;
};

inline double bounding_span(const std::vector<Point>& a, const std::vector<Point>& b, int dim) {
    double lo[3] = {INFINITY, INFINITY, INFINITY}, hi[3] = {-INFINITY, -INFINITY, -INFINITY};
    for (const auto* v : {&a, &b})
        for (const auto& p : *v)
            for (int k = 0; k < dim; ++k) {
                lo[k] = std::min(lo[k], p.c[k]);
                hi[k] = std::max(hi[k], p.c[k]);
            }
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(s);
}

}  // namespace detail

/// Point count above which Hausdorff distance switches from all-pairs to bucketed search.
inline constexpr std::size_t kBruteForceHausdorffLimit = 5000;

/// sup_{a in A} inf_{b in B} dist(a, b), all pairs.
inline double directed_hausdorff_brute(const PointCloud& A, const PointCloud& B, Metric metric) {
    double h = 0.0;
    for (const auto& a : A.points) {
        double best = INFINITY;
        for (const auto& b : B.points) best = std::min(best, distance(metric, a, b));
        h = std::max(h, best);
    }
    return h;
}

inline double directed_hausdorff_bucketed(const PointCloud& A, const PointCloud& B, Metric metric) {
    int dim = ambient_dim(B.tag);
    double span = detail::bounding_span(A.points, B.points, dim);
    double target = std::pow(static_cast<double>(B.size()), 1.0 / dim);
    double cell = std::max(span / std::max(target, 1.0), 1e-12);
    if (metric != Metric::euclidean) cell = std::min(cell, 0.25);
    detail::BucketGrid grid(B.points, cell, B.tag);
    double h = 0.0;
    for (const auto& a : A.points) h = std::max(h, grid.nearest(a, metric));
    return h;
}

inline double hausdorff_distance(const PointCloud& A, const PointCloud& B, Metric metric) {
    detail::require_nonempty(A, "hausdorff_distance");
    detail::require_nonempty(B, "hausdorff_distance");
    if (A.tag != B.tag) throw std::domain_error("hausdorff_distance: clouds from different spaces");
    if (!compatible(metric, A.tag)) throw std::domain_error("hausdorff_distance: metric/space mismatch");
    bool small = A.size() <= kBruteForceHausdorffLimit && B.size() <= kBruteForceHausdorffLimit;
    if (small || metric == Metric::circle_arc_chord)
        return std::max(directed_hausdorff_brute(A, B, metric), directed_hausdorff_brute(B, A, metric));
    return std::max(directed_hausdorff_bucketed(A, B, metric), directed_hausdorff_bucketed(B, A, metric));
}

inline double hausdorff_distance(const PointCloud& A, const PointCloud& B) {
    return hausdorff_distance(A, B, metric_for(A.tag));
}

/// Disjoint-set forest with path halving.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

/// Partition of a cloud; labels are numbered in order of first appearance.
struct Components {
    std::vector<std::size_t> label;
    std::size_t count = 0;

    std::vector<std::vector<std::size_t>> groups() const {
        std::vector<std::vector<std::size_t>> g(count);
        for (std::size_t i = 0; i < label.size(); ++i) g[label[i]].push_back(i);
        return g;
    }
};

namespace detail {
inline Components relabel(UnionFind& uf, std::size_t n) {
    Components c;
    c.label.assign(n, 0);
    std::unordered_map<std::size_t, std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, fresh] = ids.try_emplace(uf.find(i), ids.size());
        c.label[i] = it->second;
    }
    c.count = ids.size();
    return c;
}
}  // namespace detail

/// Calls fn(i, j) (i < j) for every pair of cloud points at distance <= delta.
template <class Fn>
void for_each_close_pair(const std::vector<Point>& pts, SpaceTag tag, double delta, Fn&& fn) {
    Metric metric = metric_for(tag);
    if (pts.size() < 64 || tag == SpaceTag::circle) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                if (distance(metric, pts[i], pts[j]) <= delta) fn(i, j);
        return;
    }
    double cell = std::max(delta, 1e-12);
    if (tag == SpaceTag::torus2) cell = std::max(cell, 1e-6);
    detail::BucketGrid grid(pts, cell, tag);
    for (std::size_t i = 0; i < pts.size(); ++i)
        grid.for_each_near(pts[i], 1, [&](std::uint32_t j) {
            if (j > i && distance(metric, pts[i], pts[j]) <= delta) fn(i, static_cast<std::size_t>(j));
        });
}

/// Maximal delta-connected components: two points share a component iff a chain with
/// steps <= delta joins them.
inline Components chain_components(const PointCloud& C, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("chain_components: delta must be positive");
    detail::require_nonempty(C, "chain_components");
    UnionFind uf(C.size());
    for_each_close_pair(C.points, C.tag, delta, [&](std::size_t i, std::size_t j) { uf.unite(i, j); });
    return detail::relabel(uf, C.size());
}

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) noexcept {
    return (a.c[0] - o.c[0]) * (b.c[1] - o.c[1]) - (a.c[1] - o.c[1]) * (b.c[0] - o.c[0]);
}

/// Andrew's monotone chain; collinear points dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.c[0] < b.c[0] || (a.c[0] == b.c[0] && a.c[1] < b.c[1]);
    });
    if (pts.size() < 3) return pts;
    std::vector<Point> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

template <class P, class Dist>
double brute_diameter(const std::vector<P>& pts, Dist&& dist) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, dist(pts[i], pts[j]));
    return d;
}

}  // namespace detail

/// Maximum pairwise distance. Planar Euclidean clouds go through the convex hull.
inline double diameter(const std::vector<Point>& pts, SpaceTag tag) {
    if (pts.empty()) throw std::domain_error("diameter: empty point cloud");
    Metric metric = metric_for(tag);
    if (metric == Metric::euclidean && ambient_dim(tag) == 2) {
        auto hull = detail::convex_hull(pts);
        return detail::brute_diameter(hull, euclidean_distance);
    }
    return detail::brute_diameter(pts, [&](const Point& a, const Point& b) { return distance(metric, a, b); });
}

inline double diameter(const PointCloud& C) { return diameter(C.points, C.tag); }

/// Union of two clouds on the same space; resolution is the coarser of the two.
inline PointCloud cloud_union(const PointCloud& A, const PointCloud& B) {
    if (A.tag != B.tag) throw std::domain_error("cloud_union: different spaces");
    std::vector<Point> pts = A.points;
    pts.insert(pts.end(), B.points.begin(), B.points.end());
    return PointCloud(std::move(pts), std::max(A.resolution_h, B.resolution_h), A.tag);
}

/// Sorted, duplicate-free copy (lexicographic order), used for set comparisons.
inline std::vector<Point> canonical_points(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.c < b.c; });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace explab
