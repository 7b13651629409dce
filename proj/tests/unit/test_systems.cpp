#include <gtest/gtest.h>

#include <cmath>

#include "explab/systems/catalog.hpp"
#include "generators.hpp"

using namespace explab;

// ---- catalog ---------------------------------------------------------------------------------

TEST(Catalog, NamesRoundTrip) {
    for (auto k : kAllSystems) EXPECT_EQ(system_kind_from_string(to_string(k)), k);
    EXPECT_THROW(system_kind_from_string("henon"), precondition_error);
}

TEST(Catalog, ForwardThenBackwardIsIdentity) {
    gen::Rng r(21);
    for (auto k : kAllSystems) {
        auto sys = DynSystem::make(k);
        if (!sys.point_valued() || !sys.invertible()) continue;
        int trials = (k == SystemKind::irregular_saddle_2d || k == SystemKind::irregular_saddle_3d) ? 200 : 2000;
        for (int t = 0; t < trials; ++t) {
            Point p = gen::random_point(r, sys.space());
            if (sys.space() == SpaceTag::plane2 || sys.space() == SpaceTag::plane3)
                for (int d = 0; d < ambient_dim(p.tag); ++d) p.c[d] /= 2;  // [-1,1]^d
            Point q = system_eval(sys, system_eval(sys, p, Direction::forward), Direction::backward);
            ASSERT_LE(distance(p, q), 1e-8) << to_string(k);
        }
    }
}

TEST(Catalog, DoublingHasNoBackward) {
    auto sys = DynSystem::make(SystemKind::doubling_circle);
    EXPECT_THROW(system_eval(sys, Point::circle(0.3), Direction::backward), unsupported_error);
    auto pre = DoublingCircle::preimages(Point::circle(0.3));
    for (const auto& q : pre) EXPECT_NEAR(distance(DoublingCircle::forward(q), Point::circle(0.3)), 0.0, 1e-15);
}

TEST(Catalog, WrongSpaceIsRejected) {
    auto sys = DynSystem::make(SystemKind::cat_map);
    EXPECT_THROW(system_eval(sys, Point::plane(0.1, 0.1), Direction::forward), precondition_error);
    EXPECT_THROW(DynSystem::make(SystemKind::solenoid_shift).space(), unsupported_error);
}

// ---- cat map ---------------------------------------------------------------------------------

TEST(CatMap, FixedPointAndHandArithmetic) {
    EXPECT_EQ(CatMap::forward(Point::torus(0, 0)), Point::torus(0, 0));
    auto q = CatMap::forward(Point::torus(0.25, 0.5));
    EXPECT_NEAR(q.x(), 0.0, 1e-15);
    EXPECT_NEAR(q.y(), 0.75, 1e-15);
}

TEST(CatMap, EigenvectorsAndGrowth) {
    auto eu = CatMap::unstable_direction(), es = CatMap::stable_direction();
    auto lu = CatMap::unstable_eigenvalue(), ls = CatMap::stable_eigenvalue();
    EXPECT_NEAR(2 * eu[0] + eu[1], lu * eu[0], 1e-12);
    EXPECT_NEAR(eu[0] + eu[1], lu * eu[1], 1e-12);
    EXPECT_NEAR(2 * es[0] + es[1], ls * es[0], 1e-12);
    EXPECT_NEAR(es[0] + es[1], ls * es[1], 1e-12);
    EXPECT_NEAR(lu, (3 + std::sqrt(5.0)) / 2, 1e-15);
    EXPECT_NEAR(es[1] / es[0], -(1 + std::sqrt(5.0)) / 2, 1e-12);
    auto v = CatMap::lift_forward(Point::plane(eu[0], eu[1]));
    EXPECT_NEAR(std::hypot(v.x(), v.y()), lu, 1e-12);
}

// ---- annulus ---------------------------------------------------------------------------------

TEST(Annulus, UnitSpeedRotation) {
    auto q = AnnulusTimeOne::forward(Point::annulus(1, 0));
    EXPECT_NEAR(q.x(), std::cos(1.0), 1e-15);
    EXPECT_NEAR(q.y(), std::sin(1.0), 1e-15);
    auto p = AnnulusTimeOne::forward(Point::annulus(2, 0));
    EXPECT_NEAR(std::atan2(p.y(), p.x()), 0.5, 1e-15);
}

TEST(Annulus, PreservesRadius) {
    gen::Rng r(22);
    for (int t = 0; t < 1000; ++t) {
        auto p = gen::random_point(r, SpaceTag::annulus);
        auto q = AnnulusTimeOne::forward(p);
        EXPECT_NEAR(std::hypot(q.x(), q.y()), std::hypot(p.x(), p.y()), 1e-14);
    }
}

// ---- piecewise T -----------------------------------------------------------------------------

TEST(PiecewiseT, PrescribedImages) {
    auto a = piecewise_T(Point::plane(1, 1));
    EXPECT_EQ(a.x(), 0.5);
    EXPECT_EQ(a.y(), 0.5);
    auto b = piecewise_T(Point::plane(0, 1));
    EXPECT_EQ(b.x(), 0.0);
    EXPECT_EQ(b.y(), 2.0);
    auto c = piecewise_T(Point::plane(-1, 3));
    EXPECT_EQ(c.x(), -0.5);
    EXPECT_EQ(c.y(), 6.0);
}

TEST(PiecewiseT, T3MatrixFromTwoImages) {
    // columns: T3(1,0) = T3(1,1) - T3(0,1), T3(0,1)
    double c0x = 0.5 - 0.0, c0y = 0.5 - 2.0;
    EXPECT_EQ(kT3[0][0], c0x);
    EXPECT_EQ(kT3[1][0], c0y);
    EXPECT_EQ(kT3[0][1], 0.0);
    EXPECT_EQ(kT3[1][1], 2.0);
    EXPECT_EQ(kT3[0][0] * kT3[1][1] - kT3[0][1] * kT3[1][0], 1.0);
}

TEST(PiecewiseT, ContinuousAcrossSectorBoundaries) {
    gen::Rng r(23);
    for (int t = 0; t < 1000; ++t) {
        double x = r.uniform(0, 3), y = r.uniform(0, 3);
        // diagonal: T1 = T3
        Point t1 = Point::plane(x / 2, x / 2);
        Point t3 = Point::plane(kT3[0][0] * x + kT3[0][1] * x, kT3[1][0] * x + kT3[1][1] * x);
        EXPECT_NEAR(t1.x(), t3.x(), 1e-15);
        EXPECT_NEAR(t1.y(), t3.y(), 1e-15);
        EXPECT_NEAR(piecewise_T(Point::plane(x, x)).x(), x / 2, 1e-15);
        EXPECT_NEAR(piecewise_T(Point::plane(x, x)).y(), x / 2, 1e-15);
        // positive x axis: T1 = T2
        EXPECT_EQ(piecewise_T(Point::plane(x, 0)), Point::plane(x / 2, 0));
        // positive y axis: T2 = T3
        EXPECT_EQ(piecewise_T(Point::plane(0, y)), Point::plane(0, 2 * y));
        EXPECT_EQ(Point::plane(kT3[0][1] * y, kT3[1][1] * y), Point::plane(0, 2 * y));
    }
}

TEST(PiecewiseT, InverseOnEverySector) {
    gen::Rng r(24);
    for (int t = 0; t < 10000; ++t) {
        auto p = gen::random_point(r, SpaceTag::plane2);
        auto q = piecewise_T_inverse(piecewise_T(p));
        ASSERT_NEAR(q.x(), p.x(), 1e-14);
        ASSERT_NEAR(q.y(), p.y(), 1e-14);
    }
}

// ---- E and rho -------------------------------------------------------------------------------

TEST(ESet, LevelOneAbscissas) {
    auto segs = e_segments({1, 3, false});
    std::vector<double> a;
    for (const auto& s : segs)
        if (!s.is_base()) a.push_back(s.a);
    EXPECT_EQ(a, (std::vector<double>{1.0, 0.75, 0.625}));
    EXPECT_TRUE(segs.front().is_base());
}

TEST(ESet, LevelTwoIsHalfOfLevelOne) {
    auto segs = e_segments({2, 3, false});
    std::vector<double> a;
    for (const auto& s : segs)
        if (s.level == 2) a.push_back(s.a);
    EXPECT_EQ(a, (std::vector<double>{0.5, 0.375, 0.3125}));
    for (const auto& s : segs)
        if (s.level == 2) {
            EXPECT_EQ(s.hi().y(), s.a);  // heights halve with the abscissa
        }
}

TEST(ESet, LimitSegmentsAndTruncationBound) {
    auto e = build_E({3, 4, true}, 0.01);
    int limits = 0;
    for (const auto& s : e.segments) limits += s.limit;
    EXPECT_EQ(limits, 1);  // only C(1/8); C(1/2) and C(1/4) are first teeth of levels 2 and 3
    ASSERT_EQ(e.truncation_bound.size(), 3u);
    EXPECT_EQ(e.truncation_bound[0], std::ldexp(1.0, -5));
    EXPECT_THROW(EGeometry({1, 53, true}).validate(), precondition_error);
}

TEST(ESet, SampleSpacing) {
    auto e = build_E({2, 5, true}, 0.02);
    for (const auto& s : e.segments) {
        for (double t = 0; t <= 1; t += 0.01) {
            Point q = Point::plane(s.lo().x() + t * (s.hi().x() - s.lo().x()), s.lo().y() + t * (s.hi().y() - s.lo().y()));
            double best = INFINITY;
            for (const auto& p : e.sample.points) best = std::min(best, distance(p, q));
            ASSERT_LE(best, 0.01 + 1e-12);
        }
    }
}

TEST(Rho, Values) {
    EXPECT_EQ(rho(Point::plane(1, 0.5)), 0.0);
    EXPECT_EQ(rho(Point::plane(0.3, 0)), 0.0);
    EXPECT_NEAR(rho(Point::plane(0.9, 0.5)), 0.1, 1e-15);
    EXPECT_NEAR(rho(piecewise_T(Point::plane(0.9, 0.5))), 0.05, 1e-15);
}

TEST(Rho, MatchesSegmentMinimization) {
    EGeometry g{6, 10, true};
    auto segs = e_segments(g);
    gen::Rng r(25);
    for (int t = 0; t < 3000; ++t) {
        double x = r.uniform(-0.5, 1.5), y = r.uniform(-0.5, 1.5);
        double best = INFINITY;
        for (const auto& s : segs) best = std::min(best, point_segment_distance(x, y, s));
        // recursion covers all levels; the finite list only reaches level 6, whose truncation
        // error is at most 2^-6 near the origin
        double rr = rho(Point::plane(x, y), g);
        ASSERT_LE(rr, best + 1e-15);
        if (x > 1.0 / 32 || y > 1.0 / 32 || x < 0 || y < 0) {
            ASSERT_NEAR(rr, best, std::ldexp(1.0, -g.per_level_I) + 1e-15);
        }
    }
}

TEST(Rho, OneLipschitz) {
    gen::Rng r(26);
    for (int t = 0; t < 10000; ++t) {
        auto p = gen::random_point(r, SpaceTag::plane2), q = gen::random_point(r, SpaceTag::plane2);
        ASSERT_LE(std::fabs(rho(p) - rho(q)), distance(p, q) + 1e-12);
    }
}

TEST(Rho, LemmaIdentityOnR1) {
    gen::Rng r(27);
    for (int t = 0; t < 10000; ++t) {
        double x = r.uniform(0, 1), y = r.uniform(0, x);
        auto p = Point::plane(x, y);
        ASSERT_NEAR(rho(piecewise_T(p)), rho(p) / 2, 1e-9);
    }
}

// ---- flow and saddle map ---------------------------------------------------------------------

TEST(Flow, FixesE) {
    for (auto p : {Point::plane(1, 0.3), Point::plane(0.75, 0.75), Point::plane(0.2, 0)}) {
        auto r = flow_time(p, 5.0);
        EXPECT_EQ(r.point, p);
    }
}

TEST(Flow, StepRefinementOracle) {
    auto coarse = flow_time(Point::plane(0.6, 0.3), 1.0);
    IntegratorConfig fine;
    fine.step = 1e-4;
    auto ref = flow_time(Point::plane(0.6, 0.3), 1.0, {}, fine);
    EXPECT_NEAR(coarse.point.y(), ref.point.y(), 1e-8);
    EXPECT_EQ(coarse.point.x(), 0.6);
    EXPECT_LE(coarse.error_estimate, 1e-6);
}

TEST(Flow, MonotoneOnFibers) {
    double last = -INFINITY;
    for (double t = 0; t <= 3; t += 0.25) {
        double y = flow_time(Point::plane(0.6, 0.1), t).point.y();
        EXPECT_GE(y, last);
        last = y;
    }
}

TEST(Flow, AccuracyErrorIsReported) {
    IntegratorConfig cfg;
    cfg.step = 0.5;
    cfg.tolerance = 1e-14;
    // above the comb rho grows like a hypotenuse, so coarse steps disagree
    EXPECT_THROW(flow_time(Point::plane(0.3, 0.6), 3.0, {}, cfg), accuracy_error);
    // beside a tooth rho is constant along the fiber and RK4 is exact
    EXPECT_NO_THROW(flow_time(Point::plane(0.6, 0.3), 3.0, {}, cfg));
}

TEST(SaddleMap, HalvesPointsOfE) {
    auto e = build_E({3, 6, true}, 0.05);
    for (const auto& p : e.sample.points) {
        auto q = saddle_map(p);
        EXPECT_EQ(q.x(), p.x() / 2);
        EXPECT_EQ(q.y(), p.y() / 2);
    }
}

TEST(SaddleMap, OffEPointLeavesR1) {
    // (0.7, 0.69) is in R1 and off E; (0.75, 0.74) would lie on C(3/4), a subset of E.
    EXPECT_EQ(rho(Point::plane(0.75, 0.74)), 0.0);
    Point p = Point::plane(0.7, 0.69);
    ASSERT_TRUE(in_R1(p));
    ASSERT_GT(rho(p), 0.0);
    int left = -1;
    for (int n = 1; n <= 200 && left < 0; ++n) {
        p = saddle_map(p);
        if (!in_R1(p)) left = n;
    }
    EXPECT_GT(left, 0);
}

TEST(SaddleMap, PreservesVerticalFoliation) {
    gen::Rng r(28);
    for (int t = 0; t < 300; ++t) {
        auto p = Point::plane(r.uniform(-1, 1), r.uniform(-1, 1));
        EXPECT_EQ(saddle_map(p).x(), piecewise_T(p).x());
    }
}

TEST(SaddleMap, BackwardAfterForward) {
    gen::Rng r(29);
    for (int t = 0; t < 1000; ++t) {
        auto p = Point::plane(r.uniform(-1, 1), r.uniform(-1, 1));
        auto q = saddle_map(saddle_map(p), {}, {}, Direction::backward);
        ASSERT_LE(distance(p, q), 1e-7);
    }
}

TEST(SaddleMap, ThreeDimensionalModelDoublesZ) {
    auto q = saddle3_map(Point::plane3(0.5, 0.0, 0.25));
    EXPECT_EQ(q.z(), 0.5);
    EXPECT_EQ(q.x(), 0.25);
}

TEST(SaddleMap, ColumnThresholdSeparatesSurvivors) {
    const int H = 8;
    double x = 0.59;
    double th = saddle_column_threshold(x, H);
    auto survives = [&](double y) {
        Point p = Point::plane(x, y);
        for (int n = 0; n < H; ++n) {
            p = saddle_map(p);
            if (!in_R1(p)) return false;
        }
        return true;
    };
    EXPECT_TRUE(survives(th * 0.98));
    EXPECT_FALSE(survives(std::min(x, th * 1.02 + 1e-4)));
}

// ---- doubling and solenoid -------------------------------------------------------------------

TEST(DoublingArc, Values) {
    EXPECT_NEAR(doubling_arc({0, 0.01}, 6), 0.64, 1e-15);
    EXPECT_EQ(doubling_arc({0.3, 0.2}, 0), 0.2);
    EXPECT_EQ(doubling_arc({0, 0.3}, 2), 1.0);
    EXPECT_THROW(doubling_arc({0, 0}, 1), std::domain_error);
}

TEST(DoublingArc, MatchesDenseSampling) {
    gen::Rng r(30);
    for (int t = 0; t < 100; ++t) {
        Arc a{r.uniform(0, 1), r.uniform(0.001, 0.2)};
        int n = r.integer(0, 6);
        // image of the arc is the arc [2^n s, 2^n (s + l)] wrapped; measure on a fine grid
        const int M = 1 << 14;
        std::vector<char> hit(M, 0);
        // image step stays below a quarter cell
        const int S = static_cast<int>(std::ceil(4.0 * a.length * (1 << n) * M)) + 1000;
        for (int i = 0; i <= S; ++i) {
            double th = a.start + a.length * i / S;
            double im = wrap_unit(std::ldexp(th, n));
            hit[static_cast<std::size_t>(std::min(M - 1.0, std::floor(im * M)))] = 1;
        }
        double measured = 0;
        for (char h : hit) measured += h;
        measured /= M;
        EXPECT_NEAR(doubling_arc(a, n), measured, 2.0 / M);
    }
}

TEST(Solenoid, ShiftRoundTripAndCompatibility) {
    gen::Rng r(31);
    for (int t = 0; t < 500; ++t) {
        std::vector<std::uint8_t> digits(40);
        for (auto& d : digits) d = static_cast<std::uint8_t>(r.integer(0, 1));
        auto s = SolenoidPoint::from_coordinate(r.uniform(0, 1), 16, digits);
        auto f = SolenoidShift::forward(s);
        for (int n = -16; n < 16; ++n) ASSERT_EQ(f.at(n), s.at(n + 1));
        for (int n = -16; n < 16; ++n) ASSERT_NEAR(circle_distance(2 * f.at(n), f.at(n + 1)), 0.0, 1e-12);
        auto b = SolenoidShift::backward(f);
        ASSERT_LE(distance(b, s), 1e-12);
        auto fb = SolenoidShift::forward(SolenoidShift::backward(s));
        ASSERT_LE(distance(fb, s), 1e-12);
    }
}

TEST(Solenoid, TruncationBound) {
    EXPECT_EQ(SolenoidPoint::from_coordinate(0.1, 16, {}).truncation_bound(), std::ldexp(1.0, -15));
}
