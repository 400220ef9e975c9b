#include "mvcheb/experiments.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

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

SamplerSpec gaussian2(std::uint64_t seed)
{
    return SamplerSpec::gaussian(Vector{1, -1}, CovarianceMatrix{{2, 0.6}, {0.6, 1}}, seed);
}

} // namespace

TEST(Coverage, ExampleFigureSetting)
{
    const auto spec = SamplerSpec::paper_example(1.0, 25.0, 0);
    const auto r = run_coverage(spec, 0.1, 1000);
    EXPECT_EQ(r.true_moments.ellipsoid.region, "ellipsoid");
    EXPECT_EQ(r.true_moments.sphere.region, "sphere");
    EXPECT_GE(r.true_moments.ellipsoid.empirical_coverage, 0.9);
    EXPECT_GE(r.true_moments.sphere.empirical_coverage, 0.9);
    // Pr{chi^2_2 >= 20} = e^-10: a miss among 1000 draws has probability ~4.5%.
    EXPECT_GE(r.true_moments.ellipsoid.hits, 998u);
    EXPECT_DOUBLE_EQ(r.true_moments.ellipsoid.guaranteed_coverage, 0.9);
    EXPECT_FALSE(r.estimated.has_value());
}

TEST(Coverage, StandardErrorAtFullCoverageIsZero)
{
    const auto rep = make_coverage_report("ellipsoid", 0.1, 1000, 1000);
    EXPECT_EQ(rep.standard_error, 0.0);
    EXPECT_TRUE(rep.meets_guarantee());
    const auto low = make_coverage_report("ellipsoid", 0.1, 1000, 800);
    EXPECT_NEAR(low.standard_error, std::sqrt(0.8 * 0.2 / 1000), 1e-15);
    EXPECT_FALSE(low.meets_guarantee());
}

TEST(Coverage, TightRadialAttainsLevel)
{
    constexpr std::size_t kN = 100000;
    const auto spec = SamplerSpec::tight_radial(Vector{0, 0}, CovarianceMatrix(SquareMatrix::identity(2)), 20.0, 3);
    const auto r = run_coverage(spec, 0.1, kN);
    const double se = std::sqrt(0.9 * 0.1 / kN);
    EXPECT_LE(std::abs(r.true_moments.ellipsoid.empirical_coverage - 0.9), 5.0 * se);
    EXPECT_TRUE(r.true_moments.ellipsoid.meets_guarantee());
    EXPECT_TRUE(r.true_moments.sphere.meets_guarantee());
}

TEST(Coverage, DeltaNearOneStillReports)
{
    const auto r = run_coverage(SamplerSpec::paper_example(1, 25, 1), 0.999999, 2000);
    EXPECT_LE(r.true_moments.ellipsoid.empirical_coverage, 1.0);
    EXPECT_GE(r.true_moments.ellipsoid.empirical_coverage, 0.0);
    EXPECT_EQ(kind_of([] { run_coverage(SamplerSpec::paper_example(1, 25), 1.0, 10); }), ErrorKind::DeltaOutOfRange);
    EXPECT_EQ(kind_of([] { run_coverage(SamplerSpec::paper_example(-1, 25), 0.1, 10); }), ErrorKind::InvalidSpec);
}

TEST(Coverage, WorkerCountInvariance)
{
    const auto spec = SamplerSpec::tight_radial(Vector{0, 0, 0}, CovarianceMatrix(SquareMatrix::diagonal({1, 2, 3})), 9.0, 17);
    const auto serial = run_coverage(spec, 0.3, 30001, RunOptions{0, 1});
    for (std::size_t w : {2u, 3u, 4u, 16u}) EXPECT_EQ(run_coverage(spec, 0.3, 30001, RunOptions{0, w}), serial) << w;
}

TEST(Coverage, EstimatedMode)
{
    const auto r = run_coverage(gaussian2(5), 0.1, 20000, RunOptions{}, true);
    ASSERT_TRUE(r.estimated.has_value());
    EXPECT_GE(r.estimated->ellipsoid.empirical_coverage, 0.9);
    EXPECT_GE(r.estimated->sphere.empirical_coverage, 0.9);
}

TEST(TraceIdentity, Gaussian2)
{
    constexpr std::size_t kN = 100000;
    const auto r = trace_identity_check(gaussian2(6), kN);
    // Var(chi^2_2) = 4.
    EXPECT_LE(std::abs(r.mean_d2 - 2.0), 5.0 * std::sqrt(4.0 / kN));
    EXPECT_NEAR(r.var_d2, 4.0, 0.2);
}

TEST(TraceIdentity, TightRadial)
{
    constexpr std::size_t kN = 100000;
    const auto r = trace_identity_check(SamplerSpec::tight_radial(Vector{0, 0}, CovarianceMatrix{{1, 1}, {1, 26}}, 8.0, 7), kN);
    // d^2 is 8 w.p. 1/4 else 0: Var = n eps - n^2 = 12.
    EXPECT_LE(std::abs(r.mean_d2 - 2.0), 5.0 * std::sqrt(12.0 / kN));
}

TEST(TraceIdentity, Scalar)
{
    constexpr std::size_t kN = 100000;
    const auto r = trace_identity_check(SamplerSpec::gaussian(Vector{4}, CovarianceMatrix{{9}}, 8), kN);
    EXPECT_LE(std::abs(r.mean_d2 - 1.0), 5.0 * std::sqrt(2.0 / kN));
}

TEST(TraceIdentity, WorkerCountInvariance)
{
    const auto spec = gaussian2(9);
    const auto a = trace_identity_check(spec, 20000, RunOptions{0, 1});
    const auto b = trace_identity_check(spec, 20000, RunOptions{0, 5});
    EXPECT_EQ(a.mean_d2, b.mean_d2);
    EXPECT_EQ(a.var_d2, b.var_d2);
}

TEST(TailCurve, GaussianAgainstChiSquare)
{
    constexpr std::size_t kN = 100000;
    const auto curve = run_tail_curve(gaussian2(10), {1.0, 2.0, 4.0, 10.0, 20.0}, kN);
    for (std::size_t g = 0; g < curve.eps_grid.size(); ++g) {
        const double p = oracle::chi2_tail(2, curve.eps_grid[g]);
        const double se = std::sqrt(p * (1 - p) / kN);
        EXPECT_LE(std::abs(curve.empirical_tail[g] - p), 5.0 * se + 1.0 / kN) << curve.eps_grid[g];
        EXPECT_LE(curve.empirical_tail[g], curve.new_bound[g] + 5.0 * curve.standard_error(g));
        EXPECT_LE(curve.classical_tail[g], curve.classical_bound[g] + 5.0 * curve.classical_standard_error(g));
        if (g > 0) {
            EXPECT_LE(curve.empirical_tail[g], curve.empirical_tail[g - 1]);
        }
    }
    EXPECT_DOUBLE_EQ(curve.new_bound[0], 1.0); // eps <= n: vacuous
    EXPECT_DOUBLE_EQ(curve.new_bound[4], 0.1);
    // The classical radius is matched so both bounds agree.
    for (std::size_t g = 0; g < curve.eps_grid.size(); ++g) EXPECT_NEAR(curve.classical_bound[g], curve.new_bound[g], 1e-15);
}

TEST(TailCurve, TightRadialMeetsBound)
{
    constexpr std::size_t kN = 100000;
    const auto curve = run_tail_curve(SamplerSpec::tight_radial(Vector{0, 0}, CovarianceMatrix{{1, 1}, {1, 26}}, 8.0, 11), {8.0}, kN);
    EXPECT_DOUBLE_EQ(curve.new_bound[0], 0.25);
    EXPECT_LE(std::abs(curve.empirical_tail[0] - 0.25), 5.0 * std::sqrt(0.25 * 0.75 / kN));
}

TEST(TailCurve, GridValidation)
{
    const auto spec = gaussian2(1);
    EXPECT_EQ(kind_of([&] { run_tail_curve(spec, {}, 10); }), ErrorKind::EmptyGrid);
    EXPECT_EQ(kind_of([&] { run_tail_curve(spec, {2.0, 1.0}, 10); }), ErrorKind::InvalidSpec);
    EXPECT_EQ(kind_of([&] { run_tail_curve(spec, {0.0, 1.0}, 10); }), ErrorKind::NonPositiveEpsilon);
}

TEST(Figure, ParametersAndBoundaries)
{
    FigureParams params;
    params.seed = 2007;
    const auto fig = export_figure(params);
    EXPECT_DOUBLE_EQ(fig.threshold, 20.0);
    EXPECT_NEAR(fig.radius_sq, 270.0, 1e-12);
    EXPECT_NEAR(fig.volume_ratio, 2.7, 1e-12);
    ASSERT_EQ(fig.samples.size(), 1000u);
    ASSERT_EQ(fig.ellipse_boundary.size(), 256u);
    ASSERT_EQ(fig.circle_boundary.size(), 256u);

    const auto p = invert_spd(example_covariance(1, 25));
    for (const auto& pt : fig.ellipse_boundary) EXPECT_NEAR(mahalanobis_sq(Vector{pt[0], pt[1]}, Vector{0, 0}, p), 20.0, 1e-9);
    for (const auto& pt : fig.circle_boundary) EXPECT_NEAR(pt[0] * pt[0] + pt[1] * pt[1], 270.0, 1e-9);
    EXPECT_GE(fig.ellipsoid_coverage.empirical_coverage, 0.9);
}

TEST(Figure, Deterministic)
{
    FigureParams params;
    params.seed = 5;
    params.n_samples = 300;
    const auto a = export_figure(params);
    const auto b = export_figure(params);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.ellipse_boundary, b.ellipse_boundary);
    params.seed = 6;
    EXPECT_NE(export_figure(params).samples, a.samples);
}
