#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "explab/expansivity.hpp"
#include "generators.hpp"

using namespace explab;

namespace {

DynSystem sys_of(SystemKind k) { return DynSystem::make(k); }

ContinuumApprox torus_segment(double x, double y, double dx, double dy, double gap) {
    std::vector<Point> pts;
    double len = std::hypot(dx, dy);
    int m = std::max(1, static_cast<int>(std::ceil(len / gap)));
    for (int i = 0; i <= m; ++i) pts.push_back(Point::torus(x + dx * i / m, y + dy * i / m));
    return ContinuumApprox(pts, gap, SpaceTag::torus2);
}

Seed chain_seed(std::string label, ContinuumApprox c) {
    Seed s;
    s.label = std::move(label);
    s.construction_dim = 1;
    s.shape = std::move(c);
    return s;
}

}  // namespace

TEST(DynamicalBall, CatMapCollapsesToCenter) {
    auto cat = sys_of(SystemKind::cat_map);
    auto c = Point::torus(0.3, 0.6);
    auto r = dynamical_ball(cat, c, 0.05, 20, 5e-4, Window::around(c, 0.052, 2));
    EXPECT_FALSE(r.touches_boundary);
    EXPECT_TRUE(r.two_sided);
    ASSERT_GE(r.ball.size(), 1u);
    EXPECT_LE(r.diameter, 4 * 5e-4);
    EXPECT_EQ(r.component_count, 1u);
}

TEST(DynamicalBall, AnnulusKeepsAnArcOfTheCircle) {
    auto ann = sys_of(SystemKind::annulus_time_one);
    auto c = Point::annulus(1.5, 0.0);
    auto r = dynamical_ball(ann, c, 0.1, 20, 0.005, Window::around(c, 0.11, 2));
    // points on the same circle rotate rigidly with the center
    EXPECT_GE(r.diameter, 0.15);
    double top = 0;
    for (const auto& p : r.ball.points) top = std::max(top, p.y());
    EXPECT_GT(top, 0.07);
}

TEST(DynamicalBall, ShrinksAsTheHorizonGrows) {
    auto ann = sys_of(SystemKind::annulus_time_one);
    auto c = Point::annulus(1.2, 0.3);
    auto w = Window::around(c, 0.11, 2);
    std::set<std::array<double, 3>> last;
    bool first = true;
    for (int horizon : {0, 2, 5, 10, 20}) {
        auto r = dynamical_ball(ann, c, 0.1, horizon, 0.005, w);
        std::set<std::array<double, 3>> now;
        for (const auto& p : r.ball.points) now.insert(p.c);
        if (!first) {
            for (const auto& q : now) EXPECT_TRUE(last.count(q)) << "horizon " << horizon;
        }
        EXPECT_TRUE(now.count(c.c));
        last = std::move(now);
        first = false;
    }
}

TEST(DynamicalBall, DoublingCircleIsOneSided) {
    auto dbl = sys_of(SystemKind::doubling_circle);
    auto c = Point::circle(0.3);
    auto r = dynamical_ball(dbl, c, 0.05, 12, 1e-4, Window::around(c, 0.06, 1));
    EXPECT_FALSE(r.two_sided);
    EXPECT_LE(r.diameter, 0.05 / 2048 + 2e-4);
}

TEST(DynamicalBall, Preconditions) {
    auto cat = sys_of(SystemKind::cat_map);
    auto c = Point::torus(0.5, 0.5);
    EXPECT_THROW(dynamical_ball(cat, c, 0.0, 5, 1e-3, Window::around(c, 0.1, 2)), precondition_error);
    EXPECT_THROW(dynamical_ball(cat, c, 0.05, 5, 0.01, Window::around(c, 0.1, 2)), precondition_error);
    EXPECT_THROW(dynamical_ball(cat, c, 0.05, 5, 1e-3, Window::around(c, 0.03, 2)), precondition_error);
    EXPECT_THROW(dynamical_ball(cat, Point::plane(0.5, 0.5), 0.05, 5, 1e-3, Window::around(c, 0.1, 2)),
                 precondition_error);
    EXPECT_THROW(dynamical_ball(sys_of(SystemKind::irregular_saddle_3d), Point::plane3(0.5, 0.2, 0), 0.05, 5, 1e-3,
                                Window::around(Point::plane3(0.5, 0.2, 0), 0.1, 3)),
                 unsupported_error);
}

TEST(ContinuumIterate, ZeroStepsIsIdentity) {
    auto C = torus_segment(0.2, 0.2, 0.01, 0, 1e-3);
    auto D = continuum_iterate(sys_of(SystemKind::cat_map), C, 0, true);
    EXPECT_EQ(D.chain.size(), C.chain.size());
    EXPECT_EQ(hausdorff_distance(D.as_cloud(), C.as_cloud()), 0.0);
}

TEST(ContinuumIterate, UnstableSegmentStretchesByTheEigenvalue) {
    auto eu = CatMap::unstable_direction();
    const double len = 1e-3;
    auto C = torus_segment(0.3, 0.4, len * eu[0], len * eu[1], 1e-4);
    auto D = continuum_iterate(sys_of(SystemKind::cat_map), C, 5, true);
    EXPECT_TRUE(D.gaps_ok());
    double expected = std::pow(CatMap::unstable_eigenvalue(), 5) * len;
    EXPECT_NEAR(distance(D.chain.front(), D.chain.back()), expected, 1e-9);
    EXPECT_NEAR(diameter(D.as_cloud()), expected, 1e-9);
    // backward iteration undoes it; refinement midpoints land between the original samples
    auto B = continuum_iterate(sys_of(SystemKind::cat_map), D, -5, false);
    EXPECT_LT(directed_hausdorff_brute(C.as_cloud(), B.as_cloud(), Metric::torus_quotient), 1e-9);
    EXPECT_LE(hausdorff_distance(B.as_cloud(), C.as_cloud()), 1e-4 / 2 + 1e-9);
}

TEST(ContinuumIterate, BackwardOnNonInvertibleMapIsRejected) {
    std::vector<Point> pts{Point::circle(0.1), Point::circle(0.1005)};
    ContinuumApprox C(pts, 1e-3, SpaceTag::circle);
    EXPECT_THROW(continuum_iterate(sys_of(SystemKind::doubling_circle), C, -1, true), unsupported_error);
}

TEST(Notion, NamesRoundTrip) {
    for (auto n : {Notion::expansive, Notion::n_expansive, Notion::cw, Notion::partial, Notion::dw,
                   Notion::positive_dw, Notion::sensitivity})
        EXPECT_EQ(notion_from_string(to_string(n)), n);
    EXPECT_THROW(notion_from_string("weak"), precondition_error);
    EXPECT_EQ(exit_code(Verdict::pass), 0);
    EXPECT_EQ(exit_code(Verdict::fail), 3);
    EXPECT_EQ(exit_code(Verdict::inconclusive), 4);
}

TEST(TestNotion, CatMapIsCwExpansive) {
    NotionParams p;
    p.notion = Notion::cw;
    p.delta_or_sigma = 0.1;
    p.horizon = 20;
    p.seeds = {chain_seed("horizontal", torus_segment(0.1, 0.2, 0.01, 0, 1e-3)),
               chain_seed("vertical", torus_segment(0.7, 0.3, 0, 0.01, 1e-3)),
               chain_seed("stable", torus_segment(0.4, 0.4, 0.01 * CatMap::stable_direction()[0],
                                                  0.01 * CatMap::stable_direction()[1], 1e-3))};
    auto rep = test_notion(sys_of(SystemKind::cat_map), p);
    EXPECT_EQ(rep.verdict, Verdict::pass) << rep.reason;
    ASSERT_EQ(rep.witnesses.size(), 3u);
    for (const auto& w : rep.witnesses) {
        EXPECT_EQ(w.kind, "first_n");
        ASSERT_TRUE(w.n.has_value());
        EXPECT_GE(w.value, 0.1);
    }
    // the stable segment grows only under backward iteration
    EXPECT_LT(*rep.witnesses[2].n, 0);
}

TEST(TestNotion, CwAgreesWithPartialAtDZero) {
    NotionParams p;
    p.delta_or_sigma = 0.1;
    p.horizon = 20;
    p.seeds = {chain_seed("h", torus_segment(0.1, 0.2, 0.01, 0, 1e-3))};
    p.notion = Notion::cw;
    auto a = test_notion(sys_of(SystemKind::cat_map), p);
    p.notion = Notion::partial;
    p.central_D = 0;
    auto b = test_notion(sys_of(SystemKind::cat_map), p);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.witnesses[0].n, b.witnesses[0].n);
}

TEST(TestNotion, ThinAnnulusIsNotDw) {
    NotionParams p;
    p.notion = Notion::dw;
    p.delta_or_sigma = 0.1;
    p.central_D = 1;
    p.horizon = 4;
    Seed s;
    s.label = "thin annulus";
    s.construction_dim = 2;
    s.shape = gen::thin_annulus(1.0, 1.01, 0.005);
    p.seeds = {s};
    auto rep = test_notion(sys_of(SystemKind::annulus_time_one), p);
    EXPECT_EQ(rep.verdict, Verdict::fail) << rep.reason;
    ASSERT_EQ(rep.witnesses.size(), 1u);
    EXPECT_EQ(rep.witnesses[0].value, 1.0);
    EXPECT_NE(rep.witnesses[0].kind, "unresolved");
}

TEST(TestNotion, CatRectangleIsNotDw) {
    NotionParams p;
    p.notion = Notion::dw;
    p.delta_or_sigma = 0.05;
    p.central_D = 1;
    p.horizon = 6;
    Seed s;
    s.label = "eigen rectangle";
    s.construction_dim = 2;
    EigenRectangle R;
    R.center = Point::plane(0.3, 0.3);
    s.shape = R;
    p.seeds = {s};
    auto rep = test_notion(sys_of(SystemKind::cat_map), p);
    EXPECT_EQ(rep.verdict, Verdict::fail) << rep.reason;
    EXPECT_EQ(rep.witnesses[0].kind, "linear_rectangle_family");
    EXPECT_LE(rep.witnesses[0].value, 1.0);
}

TEST(TestNotion, HorizonExhaustionWithoutWitnessIsInconclusive) {
    NotionParams p;
    p.notion = Notion::cw;
    p.delta_or_sigma = 0.1;
    p.horizon = 2;  // far too short for a 1e-3 segment
    p.seeds = {chain_seed("tiny", torus_segment(0.1, 0.2, 1e-3, 0, 1e-4))};
    auto rep = test_notion(sys_of(SystemKind::cat_map), p);
    EXPECT_EQ(rep.verdict, Verdict::inconclusive);
    EXPECT_EQ(rep.witnesses[0].kind, "unresolved");
}

TEST(TestNotion, Preconditions) {
    NotionParams p;
    p.notion = Notion::cw;
    auto cat = sys_of(SystemKind::cat_map);
    EXPECT_THROW(test_notion(cat, p), precondition_error);  // no seeds
    Seed pt;
    pt.label = "cloud";
    pt.shape = PointCloud({Point::torus(0.1, 0.1)}, 1e-3, SpaceTag::torus2);
    p.seeds = {pt};
    EXPECT_THROW(test_notion(cat, p), precondition_error);  // cw needs a continuum
    p.seeds = {chain_seed("coarse", torus_segment(0.1, 0.2, 0.01, 0, 0.05))};
    EXPECT_THROW(test_notion(cat, p), precondition_error);  // delta <= 4 * resolution
    p.seeds = {chain_seed("h", torus_segment(0.1, 0.2, 0.01, 0, 1e-3))};
    p.horizon = 0;
    EXPECT_THROW(test_notion(cat, p), precondition_error);
    p.horizon = 5;
    p.notion = Notion::dw;
    p.central_D = 1;
    EXPECT_THROW(test_notion(cat, p), precondition_error);  // segment dimension 1 <= D
}

TEST(StableScan, HorizonZeroKeepsTheWholeGrid) {
    auto cat = sys_of(SystemKind::cat_map);
    auto C = stable_set_scan(cat, Window::square(-0.1, 0.1, -0.1, 0.1), 0.01, 0);
    EXPECT_EQ(C.size(), 21u * 21u);
}

TEST(StableScan, CatMapFollowsTheStableLine) {
    auto cat = sys_of(SystemKind::cat_map);
    const double g = 1.0 / 512;
    auto C = stable_set_scan(cat, Window::square(-0.25, 0.25, -0.25, 0.25), g, 8);
    ASSERT_GT(C.size(), 0u);
    const double slope = -(1 + std::sqrt(5.0)) / 2;
    for (const auto& p : C.points) {
        // distance to the line y = slope * x; survivors sit within the window's unstable tolerance
        double d = std::fabs(p.y() - slope * p.x()) / std::hypot(1.0, slope);
        EXPECT_LT(d, 0.5 * std::pow(CatMap::unstable_eigenvalue(), -7)) << p.x() << ", " << p.y();
    }
    double xmin = 1, xmax = -1;
    for (const auto& p : C.points) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
    }
    EXPECT_LT(xmin, -0.1);
    EXPECT_GT(xmax, 0.1);
}

TEST(StableScan, SaddleShortcutMatchesDirectScan) {
    auto sad = sys_of(SystemKind::irregular_saddle_2d);
    sad.geometry = {8, 12, true};
    auto w = Window::square(-0.25, 1.0, -0.25, 1.0);
    const double g = 1.0 / 16;
    auto fast = stable_set_scan(sad, w, g, 6);
    auto slow = saddle_stable_scan_direct(sad, w, g, 6);
    EXPECT_EQ(canonical_points(fast.points), canonical_points(slow.points));
}

TEST(StableScan, Preconditions) {
    auto cat = sys_of(SystemKind::cat_map);
    EXPECT_THROW(stable_set_scan(cat, Window::square(0, 1, 0, 1), 1e-4, 3), precondition_error);
    EXPECT_THROW(stable_set_scan(cat, Window::square(0, 1, 0, 1), 0.0, 3), precondition_error);
    EXPECT_THROW(stable_set_scan(sys_of(SystemKind::solenoid_shift), Window::square(0, 1, 0, 1), 0.01, 3),
                 unsupported_error);
}

TEST(ClusterIntersections, CountsCrossings) {
    auto seg = [](double x0, double y0, double x1, double y1) {
        auto c = segment_chain(Point::plane(x0, y0), Point::plane(x1, y1), 1e-3);
        return ContinuumApprox(c.chain, 1e-3, SpaceTag::plane2);
    };
    auto horizontal = seg(-1, 0, 1, 0);
    EXPECT_EQ(cluster_intersections(horizontal, seg(0, -1, 0, 1), 0.01), 1u);
    // a parabola crossing twice
    std::vector<Point> arc;
    for (int i = 0; i <= 4000; ++i) {
        double x = -1 + i * 5e-4;
        arc.push_back(Point::plane(x, x * x - 0.25));
    }
    ContinuumApprox parabola(arc, 1e-3, SpaceTag::plane2);
    EXPECT_EQ(cluster_intersections(horizontal, parabola, 0.01), 2u);
    EXPECT_EQ(cluster_intersections(horizontal, seg(-1, 0.5, 1, 0.5), 0.01), 0u);
    EXPECT_THROW(cluster_intersections(horizontal, parabola, 1e-3), precondition_error);
}
