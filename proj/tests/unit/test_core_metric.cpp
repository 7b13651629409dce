#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "explab/geometry.hpp"
#include "explab/point_cloud.hpp"
#include "generators.hpp"

using namespace explab;

TEST(Distance, EuclideanPythagoras) {
    EXPECT_DOUBLE_EQ(distance(Metric::euclidean, Point::plane(0, 0), Point::plane(3, 4)), 5.0);
}

TEST(Distance, TorusWrapsAround) {
    EXPECT_NEAR(distance(Metric::torus_quotient, Point::torus(0.1, 0), Point::torus(0.9, 0)), 0.2, 1e-12);
}

TEST(Distance, TorusCanonicalRepresentatives) {
    auto p = Point::torus(1.25, -0.25);
    EXPECT_DOUBLE_EQ(p.x(), 0.25);
    EXPECT_DOUBLE_EQ(p.y(), 0.75);
    EXPECT_EQ(distance(p, Point::torus(0.25, 0.75)), 0.0);
}

TEST(Distance, SolenoidSingleTerm) {
    auto a = SolenoidPoint::from_coordinate(0.3, 16, {});
    auto b = a;
    b.window[16] = 0.4;  // index 0 only
    EXPECT_NEAR(distance(a, b), 0.1, 1e-12);
}

TEST(Distance, MismatchedSpacesThrow) {
    EXPECT_THROW(distance(Point::plane(0, 0), Point::torus(0, 0)), std::domain_error);
    EXPECT_THROW(distance(Metric::torus_quotient, Point::plane(0, 0), Point::plane(1, 1)), std::domain_error);
}

TEST(Distance, AnnulusRejectsOutsidePoints) {
    EXPECT_THROW(Point::annulus(0.5, 0), std::domain_error);
    EXPECT_THROW(Point::annulus(2.5, 0), std::domain_error);
    EXPECT_NO_THROW(Point::annulus(1.5, 0));
}

class MetricAxioms : public ::testing::TestWithParam<SpaceTag> {};

TEST_P(MetricAxioms, RandomTriples) {
    gen::Rng r(17 + static_cast<int>(GetParam()));
    for (int t = 0; t < 10000; ++t) {
        auto p = gen::random_point(r, GetParam()), q = gen::random_point(r, GetParam()),
             s = gen::random_point(r, GetParam());
        double pq = distance(p, q), qs = distance(q, s), ps = distance(p, s);
        ASSERT_GE(pq, 0.0);
        ASSERT_EQ(pq, distance(q, p));
        ASSERT_EQ(distance(p, p), 0.0);
        ASSERT_GE(pq + qs - ps, -1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(AllSpaces, MetricAxioms,
                         ::testing::Values(SpaceTag::plane2, SpaceTag::plane3, SpaceTag::torus2, SpaceTag::circle,
                                           SpaceTag::annulus));

TEST(MetricAxioms, SolenoidRandomTriples) {
    gen::Rng r(5);
    auto random_sol = [&] {
        std::vector<std::uint8_t> digits(24);
        for (auto& d : digits) d = static_cast<std::uint8_t>(r.integer(0, 1));
        return SolenoidPoint::from_coordinate(r.uniform(0, 1), 16, digits);
    };
    for (int t = 0; t < 10000; ++t) {
        auto a = random_sol(), b = random_sol(), c = random_sol();
        ASSERT_EQ(distance(a, b), distance(b, a));
        ASSERT_EQ(distance(a, a), 0.0);
        ASSERT_GE(distance(a, b) + distance(b, c) - distance(a, c), -1e-12);
    }
}

TEST(Hausdorff, IdenticalCloudsGiveZero) {
    gen::Rng r(1);
    auto A = gen::random_cloud(r, 50, SpaceTag::plane2);
    EXPECT_EQ(hausdorff_distance(A, A), 0.0);
}

TEST(Hausdorff, DirectedFromExtraPoint) {
    PointCloud A({Point::plane(0, 0)}, 0.1, SpaceTag::plane2);
    PointCloud B({Point::plane(0, 0), Point::plane(1, 0)}, 0.1, SpaceTag::plane2);
    EXPECT_DOUBLE_EQ(hausdorff_distance(A, B), 1.0);
}

TEST(Hausdorff, MatchesBruteForceOracle) {
    gen::Rng r(2);
    for (auto tag : {SpaceTag::plane2, SpaceTag::torus2, SpaceTag::plane3}) {
        auto A = gen::random_cloud(r, 200, tag), B = gen::random_cloud(r, 200, tag);
        Metric m = metric_for(tag);
        double oracle = std::max(directed_hausdorff_brute(A, B, m), directed_hausdorff_brute(B, A, m));
        EXPECT_EQ(hausdorff_distance(A, B), oracle);
    }
}

TEST(Hausdorff, BucketedPathAgreesWithBruteForce) {
    gen::Rng r(3);
    for (auto tag : {SpaceTag::plane2, SpaceTag::torus2}) {
        auto A = gen::random_cloud(r, 6000, tag), B = gen::random_cloud(r, 5500, tag);
        Metric m = metric_for(tag);
        double oracle = std::max(directed_hausdorff_brute(A, B, m), directed_hausdorff_brute(B, A, m));
        EXPECT_EQ(hausdorff_distance(A, B), oracle);
    }
}

TEST(Hausdorff, ZeroIffEqualAsSets) {
    gen::Rng r(4);
    auto A = gen::random_cloud(r, 40, SpaceTag::plane2);
    auto shuffled = A.points;
    std::reverse(shuffled.begin(), shuffled.end());
    shuffled.push_back(shuffled.front());  // duplicate
    PointCloud B(shuffled, A.resolution_h, A.tag);
    EXPECT_EQ(hausdorff_distance(A, B), 0.0);
    EXPECT_EQ(canonical_points(A.points), canonical_points(B.points));
    B.points.back().c[0] += 1e-6;
    EXPECT_GT(hausdorff_distance(A, B), 0.0);
}

TEST(Hausdorff, EmptyCloudThrows) {
    PointCloud A({}, 0.1, SpaceTag::plane2), B({Point::plane(0, 0)}, 0.1, SpaceTag::plane2);
    EXPECT_THROW(hausdorff_distance(A, B), std::domain_error);
}

TEST(ChainComponents, GapComparison) {
    std::vector<Point> pts{Point::plane(0, 0), Point::plane(0.05, 0), Point::plane(0.1, 0), Point::plane(0.5, 0)};
    auto c = chain_components(PointCloud(pts, 0.01, SpaceTag::plane2), 0.06);
    ASSERT_EQ(c.count, 2u);
    EXPECT_EQ(c.label[0], c.label[1]);
    EXPECT_EQ(c.label[1], c.label[2]);
    EXPECT_NE(c.label[2], c.label[3]);
}

TEST(ChainComponents, Singleton) {
    EXPECT_EQ(chain_components(PointCloud({Point::plane(1, 1)}, 0.1, SpaceTag::plane2), 0.1).count, 1u);
}

TEST(ChainComponents, UnitSquareGridIsConnected) {
    auto sq = gen::square_cloud(1.0, 0.01);
    auto c = chain_components(sq, 0.02);
    EXPECT_EQ(c.count, 1u);
    // union-find oracle over all pairs on a subsample
    std::vector<Point> sub(sq.points.begin(), sq.points.begin() + 300);
    PointCloud S(sub, 0.01, SpaceTag::plane2);
    UnionFind uf(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i)
        for (std::size_t j = i + 1; j < sub.size(); ++j)
            if (distance(sub[i], sub[j]) <= 0.02) uf.unite(i, j);
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < sub.size(); ++i) roots.insert(uf.find(i));
    EXPECT_EQ(chain_components(S, 0.02).count, roots.size());
}

TEST(ChainComponents, MonotoneInDelta) {
    gen::Rng r(6);
    auto C = gen::random_cloud(r, 300, SpaceTag::torus2);
    std::size_t last = C.size() + 1;
    for (double d = 0.005; d < 0.3; d *= 1.5) {
        auto n = chain_components(C, d).count;
        EXPECT_LE(n, last);
        last = n;
    }
}

TEST(ChainComponents, CircleWrapsAcrossZero) {
    std::vector<Point> pts{Point::circle(0.99), Point::circle(0.0), Point::circle(0.5)};
    EXPECT_EQ(chain_components(PointCloud(pts, 0.01, SpaceTag::circle), 0.02).count, 2u);
}

TEST(Diameter, Diagonal) {
    PointCloud C({Point::plane(0, 0), Point::plane(1, 1)}, 0.1, SpaceTag::plane2);
    EXPECT_DOUBLE_EQ(diameter(C), std::sqrt(2.0));
}

TEST(Diameter, SingletonAndEmpty) {
    EXPECT_EQ(diameter(PointCloud({Point::plane(3, 4)}, 0.1, SpaceTag::plane2)), 0.0);
    EXPECT_THROW(diameter(PointCloud({}, 0.1, SpaceTag::plane2)), std::domain_error);
}

TEST(Diameter, UnitCircleSample) {
    auto C = gen::circle_cloud(1.0, 0.01);
    EXPECT_NEAR(diameter(C), 2.0, 0.02);
    // exhaustive pairs oracle
    double d = 0;
    for (std::size_t i = 0; i < C.size(); ++i)
        for (std::size_t j = i + 1; j < C.size(); ++j) d = std::max(d, distance(C.points[i], C.points[j]));
    EXPECT_EQ(diameter(C), d);
}

TEST(Diameter, UnionDominates) {
    gen::Rng r(8);
    for (int t = 0; t < 50; ++t) {
        auto A = gen::random_cloud(r, 30, SpaceTag::torus2), B = gen::random_cloud(r, 30, SpaceTag::torus2);
        EXPECT_GE(diameter(cloud_union(A, B)), std::max(diameter(A), diameter(B)));
    }
}

TEST(PointCloud, RejectsMixedSpacesAndBadResolution) {
    EXPECT_THROW(PointCloud({Point::plane(0, 0), Point::torus(0, 0)}, 0.1, SpaceTag::plane2), std::domain_error);
    EXPECT_THROW(PointCloud({Point::plane(0, 0)}, 0.0, SpaceTag::plane2), std::domain_error);
}

TEST(ContinuumApprox, GapBoundIsTestable) {
    auto c = segment_chain(Point::plane(0, 0), Point::plane(1, 0), 0.01);
    EXPECT_TRUE(c.gaps_ok());
    EXPECT_LE(c.max_gap(), 0.01 + 1e-12);
    c.chain.erase(c.chain.begin() + 10);
    EXPECT_FALSE(c.gaps_ok());
}
