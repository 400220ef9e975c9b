// Builds both confidence regions for a covariance matrix, compares their
// volumes and checks their coverage on Gaussian samples.

#include "mvcheb/mvcheb.hpp"

#include <cstdio>

int main()
{
    using namespace mvcheb;

    const CovarianceMatrix cov = example_covariance(1.0, 25.0);
    const Vector mean{0.0, 0.0};
    const double delta = 0.1;

    const auto ellipsoid = make_ellipsoid(mean, cov, delta);
    const auto sphere = make_sphere(mean, cov, delta);
    std::printf("ellipsoid: d^2 <= %g\n", ellipsoid.threshold);
    std::printf("sphere:    |x|^2 <= %g\n", sphere.radius_sq);
    std::printf("volume ratio sphere/ellipsoid: %.6f\n", volume_ratio(cov));

    const Vector x{1.0, 10.0};
    std::printf("x = (1, 10): d^2 = %.4f, in ellipsoid: %s, in sphere: %s\n",
                mahalanobis_sq(x, mean, ellipsoid.precision), contains(ellipsoid, x) ? "yes" : "no",
                contains(sphere, x) ? "yes" : "no");

    const auto spec = SamplerSpec::gaussian(mean, cov, 7);
    const auto result = run_coverage(spec, delta, 100000, RunOptions{0, 4});
    std::printf("coverage over %zu samples: ellipsoid %.4f, sphere %.4f (guaranteed >= %.2f)\n",
                result.true_moments.ellipsoid.n_samples, result.true_moments.ellipsoid.empirical_coverage,
                result.true_moments.sphere.empirical_coverage, 1.0 - delta);
    return 0;
}
