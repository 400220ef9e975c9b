#include "mvcheb/moments.hpp"
#include "mvcheb/regions.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mvcheb;

namespace
{

ErrorKind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an mvcheb::Error";
    return ErrorKind::IoError;
}

const CovarianceMatrix& example_cov()
{
    static const CovarianceMatrix c{{1, 1}, {1, 26}};
    return c;
}

} // namespace

TEST(Mahalanobis, Examples)
{
    const auto p = invert_spd(example_cov());
    EXPECT_EQ(mahalanobis_sq(Vector{3, 4}, Vector{3, 4}, p), 0.0);
    EXPECT_NEAR(mahalanobis_sq(Vector{1, 1}, Vector{0, 0}, p), 1.0, 1e-15);

    const auto id = invert_spd(CovarianceMatrix(SquareMatrix::identity(3)));
    EXPECT_DOUBLE_EQ(mahalanobis_sq(Vector{1, 2, 3}, Vector{0, 0, 1}, id), 1.0 + 4.0 + 4.0);
}

TEST(Bounds, Chebyshev)
{
    EXPECT_DOUBLE_EQ(chebyshev_bound(2, 20).raw, 0.1);
    const auto vacuous = chebyshev_bound(2, 1);
    EXPECT_DOUBLE_EQ(vacuous.raw, 2.0);
    EXPECT_DOUBLE_EQ(vacuous.clamped, 1.0);
    EXPECT_EQ(kind_of([] { chebyshev_bound(2, 0.0); }), ErrorKind::NonPositiveEpsilon);
}

TEST(Bounds, Classical)
{
    EXPECT_NEAR(classical_bound(27, std::sqrt(270.0)).raw, 0.1, 1e-15);
    EXPECT_DOUBLE_EQ(classical_bound(1, 1).raw, 1.0);
    EXPECT_DOUBLE_EQ(classical_bound(4, 4).raw, 0.25);
    EXPECT_EQ(kind_of([] { classical_bound(1, -1); }), ErrorKind::NonPositiveEpsilon);
    EXPECT_EQ(kind_of([] { classical_bound(0, 1); }), ErrorKind::NonPositiveVariance);
}

// For n = 1 the new bound at eps^2/var reproduces var/eps^2.
TEST(Bounds, ScalarReduction)
{
    for (double var : {0.01, 0.5, 1.0, 3.0, 27.0, 1e4})
        for (double eps : {0.05, 0.3, 1.0, 2.0, 16.43, 500.0}) {
            const double lhs = chebyshev_bound(1, eps * eps / var).raw;
            const double rhs = classical_bound(var, eps).raw;
            EXPECT_LE(oracle::relative_error(lhs, rhs), 1e-12) << var << " " << eps;
        }
}

TEST(MakeRegions, Thresholds)
{
    EXPECT_DOUBLE_EQ(make_ellipsoid(Vector{0, 0}, example_cov(), 0.1).threshold, 20.0);
    EXPECT_DOUBLE_EQ(make_ellipsoid(Vector{0}, CovarianceMatrix{{1}}, 0.5).threshold, 2.0);
    EXPECT_DOUBLE_EQ(make_ellipsoid(Vector(3), CovarianceMatrix(SquareMatrix::identity(3)), 0.25).threshold, 12.0);

    EXPECT_NEAR(make_sphere(Vector{0, 0}, example_cov(), 0.1).radius_sq, 270.0, 1e-12);
    EXPECT_DOUBLE_EQ(make_sphere(Vector{0, 0}, CovarianceMatrix(SquareMatrix::identity(2)), 0.5).radius_sq, 4.0);
    EXPECT_NEAR(make_sphere(Vector{0}, CovarianceMatrix{{4}}, 0.1).radius_sq, 40.0, 1e-12);
}

TEST(MakeRegions, DeltaOutOfRange)
{
    for (double delta : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
        EXPECT_EQ(kind_of([&] { make_ellipsoid(Vector{0, 0}, example_cov(), delta); }), ErrorKind::DeltaOutOfRange);
        EXPECT_EQ(kind_of([&] { make_sphere(Vector{0, 0}, example_cov(), delta); }), ErrorKind::DeltaOutOfRange);
    }
}

TEST(MakeRegions, DimensionMismatch)
{
    EXPECT_EQ(kind_of([] { make_ellipsoid(Vector{0, 0, 0}, example_cov(), 0.1); }), ErrorKind::DimensionMismatch);
}

TEST(Contains, CenterIsMember)
{
    const Vector mu{1, -1};
    EXPECT_TRUE(contains(make_ellipsoid(mu, example_cov(), 0.1), mu));
    EXPECT_TRUE(contains(make_sphere(mu, example_cov(), 0.1), mu));
}

TEST(Contains, ClosedBoundary)
{
    const auto e = make_ellipsoid(Vector{0, 0}, example_cov(), 0.1);
    // (2, 22): (26*4 - 2*44 + 484) / 25 = 20.
    const Vector on_shell{2, 22};
    const double d2 = mahalanobis_sq(on_shell, e.center, e.precision);
    EXPECT_NEAR(d2, 20.0, 1e-12);
    // Boundary points are members: a region whose threshold is exactly d2.
    EllipsoidRegion tight = e;
    tight.threshold = d2;
    EXPECT_TRUE(contains(tight, on_shell));

    // A point with d2 = 20.5 is outside.
    const double scale = std::sqrt(20.5 / 20.0);
    EXPECT_FALSE(contains(e, Vector{2 * scale, 22 * scale}));

    const auto s = make_sphere(Vector{0, 0}, CovarianceMatrix(SquareMatrix::identity(2)), 0.5);
    EXPECT_TRUE(contains(s, Vector{2, 0}));
    EXPECT_TRUE(contains(s, Vector{0, -2}));
    EXPECT_FALSE(contains(s, Vector{2, 1e-7}));
}

TEST(Contains, VariantDispatchAndMismatch)
{
    const Region r = make_sphere(Vector{0, 0}, example_cov(), 0.1);
    EXPECT_TRUE(contains(r, Vector{1, 1}));
    EXPECT_EQ(kind_of([&] { contains(r, Vector{1}); }), ErrorKind::DimensionMismatch);
}

TEST(Volume, Examples)
{
    const auto s = make_sphere(Vector{0, 0}, example_cov(), 0.1);
    EXPECT_LE(oracle::relative_error(volume(s), 270.0 * std::numbers::pi), 1e-12);

    const auto e = make_ellipsoid(Vector{0, 0}, example_cov(), 0.1);
    EXPECT_LE(oracle::relative_error(volume(e, example_cov()), 100.0 * std::numbers::pi), 1e-12);

    const SphereRegion unit{Vector(3), 1.0, 0.0};
    EXPECT_LE(oracle::relative_error(volume(unit), 4.0 * std::numbers::pi / 3.0), 1e-12);
}

TEST(Volume, UnitBallAgainstRecurrence)
{
    for (std::size_t n = 1; n <= 12; ++n) EXPECT_LE(oracle::relative_error(unit_ball_volume(n), oracle::unit_ball_volume(n)), 1e-13) << n;
}

TEST(VolumeRatio, Examples)
{
    EXPECT_LE(oracle::relative_error(volume_ratio(example_cov()), 2.7), 1e-12);
    EXPECT_LE(oracle::relative_error(volume_ratio(CovarianceMatrix(SquareMatrix::diagonal({1, 4}))), 1.25), 1e-12);
    for (std::size_t n = 1; n <= 6; ++n)
        for (double c : {1e-3, 0.7, 1.0, 42.0}) {
            EXPECT_NEAR(volume_ratio(CovarianceMatrix(SquareMatrix::identity(n, c))), 1.0, 1e-12) << n << " " << c;
        }
}

TEST(ExampleRatio, Examples)
{
    EXPECT_LE(oracle::relative_error(example_ratio(25.0), 2.7), 1e-12);
    EXPECT_LE(oracle::relative_error(example_ratio(2.0), std::numbers::sqrt2), 1e-12);
    for (double sigma : {0.1, 1.0, 3.0, 11.0}) {
        EXPECT_LE(oracle::relative_error(volume_ratio(example_covariance(sigma, 0.08)), example_ratio(0.08)), 1e-12);
    }
    EXPECT_EQ(kind_of([] { example_ratio(0.0); }), ErrorKind::NonPositiveParameter);
}

TEST(ExampleRatio, MinimumAtTwoAndMonotone)
{
    const double at_two = example_ratio(2.0);
    EXPECT_GE(at_two, std::numbers::sqrt2 - 1e-12);
    auto grid = [](int i) { return std::pow(10.0, -2.0 + 4.0 * i / 400.0); };
    for (int i = 0; i <= 400; ++i) {
        const double k = grid(i);
        EXPECT_GE(example_ratio(k), at_two - 1e-15) << k;
        if (i == 0) continue;
        const double k_prev = grid(i - 1);
        if (k <= 2.0) {
            EXPECT_LT(example_ratio(k), example_ratio(k_prev)) << "not decreasing at k = " << k;
        }
        if (k_prev >= 2.0) {
            EXPECT_GT(example_ratio(k), example_ratio(k_prev)) << "not increasing at k = " << k;
        }
    }
}

TEST(RegionProperties, DominanceScaleAndDeltaInvariance)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
        const CovarianceMatrix cov(SquareMatrix::from_flat(n, oracle::random_spd(n, rng)));
        const double ratio = volume_ratio(cov);
        EXPECT_GE(ratio, 1.0 - 1e-12);

        const CovarianceMatrix scaled(3.7 * cov.matrix());
        EXPECT_LE(oracle::relative_error(volume_ratio(scaled), ratio), 1e-12);

        for (double delta : {0.01, 0.1, 0.5}) {
            const Vector mu(n);
            const double vb = volume(make_sphere(mu, cov, delta));
            const double ve = volume(make_ellipsoid(mu, cov, delta), cov);
            EXPECT_GE(vb, ve * (1.0 - 1e-12));
            EXPECT_LE(oracle::relative_error(vb / ve, ratio), 1e-12);
        }
    }
}

TEST(RegionProperties, WhiteningMatchesMahalanobis)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
        const CovarianceMatrix cov(SquareMatrix::from_flat(n, oracle::random_spd(n, rng)));
        Vector mu(n);
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) {
            mu[i] = normal(rng);
            x[i] = normal(rng);
        }
        const double d2 = mahalanobis_sq(x, mu, invert_spd(cov));
        EXPECT_NEAR(squared_norm(whiten(x, mu, cov)), d2, 1e-9 * std::max(1.0, d2));
    }
}

TEST(EllipseBoundary, UnitCircle)
{
    const CovarianceMatrix id(SquareMatrix::identity(2));
    const EllipsoidRegion r{Vector{0, 0}, invert_spd(id), 1.0, 0.0};
    const auto pts = ellipse_boundary(r, id, 4);
    const Point2 want[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    ASSERT_EQ(pts.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(pts[i][0], want[i][0], 1e-15);
        EXPECT_NEAR(pts[i][1], want[i][1], 1e-15);
    }
}

TEST(EllipseBoundary, ExampleFirstPointAndShell)
{
    const Vector mu{0.5, -2};
    const auto e = make_ellipsoid(mu, example_cov(), 0.1);
    const auto pts = ellipse_boundary(e, example_cov(), 256);
    ASSERT_EQ(pts.size(), 256u);
    EXPECT_NEAR(pts[0][0], mu[0] + std::sqrt(20.0), 1e-12);
    EXPECT_NEAR(pts[0][1], mu[1] + std::sqrt(20.0), 1e-12);
    for (const auto& p : pts) {
        const Vector x{p[0], p[1]};
        EXPECT_NEAR(mahalanobis_sq(x, mu, e.precision), 20.0, 1e-9);
        // Nudge outwards by 0.1%: outside.
        const Vector out{mu[0] + 1.001 * (p[0] - mu[0]), mu[1] + 1.001 * (p[1] - mu[1])};
        EXPECT_FALSE(contains(e, out));
        // Nudge inwards: inside.
        const Vector in{mu[0] + 0.999 * (p[0] - mu[0]), mu[1] + 0.999 * (p[1] - mu[1])};
        EXPECT_TRUE(contains(e, in));
    }
}

TEST(EllipseBoundary, OnlyTwoDimensional)
{
    const CovarianceMatrix id(SquareMatrix::identity(3));
    const auto e = make_ellipsoid(Vector(3), id, 0.1);
    EXPECT_EQ(kind_of([&] { ellipse_boundary(e, id, 16); }), ErrorKind::UnsupportedDimension);
}

TEST(CircleBoundary, RadiusAndQuartet)
{
    const auto s = make_sphere(Vector{0, 0}, CovarianceMatrix(SquareMatrix::identity(2)), 0.5);
    const auto quartet = circle_boundary(s, 4);
    EXPECT_NEAR(quartet[0][0], 2.0, 1e-15);
    EXPECT_NEAR(quartet[1][1], 2.0, 1e-15);
    EXPECT_NEAR(quartet[2][0], -2.0, 1e-15);
    EXPECT_NEAR(quartet[3][1], -2.0, 1e-15);
    const auto big = circle_boundary(make_sphere(Vector{0, 0}, example_cov(), 0.1), 256);
    for (const auto& p : big) EXPECT_NEAR(p[0] * p[0] + p[1] * p[1], 270.0, 1e-9);
}
