#ifndef MVCHEB_EXPERIMENTS_HPP
#define MVCHEB_EXPERIMENTS_HPP

// Monte Carlo checks of both Chebyshev bounds.
//
// Work is split into fixed-size chunks of sample indices. Sample i is a pure
// function of (seed, stream_index, i) and per-chunk partial results are
// reduced in chunk order, so every report is bit-identical for any number of
// worker threads.

#include "mvcheb/error.hpp"
#include "mvcheb/linalg.hpp"
#include "mvcheb/moments.hpp"
#include "mvcheb/regions.hpp"
#include "mvcheb/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace mvcheb
{

inline constexpr std::size_t kChunkSize = 4096;

/// Statistical checks use this many standard errors.
inline constexpr double kSigmaBand = 5.0;

struct RunOptions
{
    std::uint32_t stream_index = 0;
    std::size_t workers = 1;
};

namespace detail
{

/// Runs body(begin, end, acc) over chunks of [0, n) on `workers` threads and
/// returns the per-chunk accumulators in index order.
template <typename Acc, typename Body>
std::vector<Acc> run_chunked(std::size_t n, std::size_t workers, const Acc& init, Body body)
{
    const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
    std::vector<Acc> partial(n_chunks, init);
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n_chunks, 1));

    auto work = [&](std::size_t worker) {
        for (std::size_t c = worker; c < n_chunks; c += workers) {
            const std::size_t begin = c * kChunkSize;
            body(begin, std::min(n, begin + kChunkSize), partial[c]);
        }
    };

    if (workers == 1) {
        work(0);
        return partial;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return partial;
}

inline void require_samples(std::size_t n)
{
    if (n == 0) throw Error(ErrorKind::InvalidSpec, "n_samples must be >= 1");
}

} // namespace detail

/// sqrt(p (1 - p) / N) with p the empirical proportion; 0 when p is 0 or 1.
inline double binomial_standard_error(std::size_t hits, std::size_t n)
{
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

struct CoverageReport
{
    std::string region;
    double delta = 0.0;
    std::size_t n_samples = 0;
    std::size_t hits = 0;
    double empirical_coverage = 0.0;
    double guaranteed_coverage = 0.0;
    double standard_error = 0.0;

    /// empirical >= 1 - delta - 5 SE; with SE = 0 this is hits/N >= 1 - delta.
    bool meets_guarantee() const { return empirical_coverage >= guaranteed_coverage - kSigmaBand * standard_error; }

    friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

inline CoverageReport make_coverage_report(std::string region, double delta, std::size_t n, std::size_t hits)
{
    return CoverageReport{std::move(region),
                          delta,
                          n,
                          hits,
                          static_cast<double>(hits) / static_cast<double>(n),
                          1.0 - delta,
                          binomial_standard_error(hits, n)};
}

struct CoveragePair
{
    CoverageReport ellipsoid;
    CoverageReport sphere;

    friend bool operator==(const CoveragePair&, const CoveragePair&) = default;
};

struct CoverageResult
{
    CoveragePair true_moments;
    /// Regions re-fitted from the same samples (ddof = 1); present only when
    /// requested.
    std::optional<CoveragePair> estimated;

    friend bool operator==(const CoverageResult&, const CoverageResult&) = default;
};

namespace detail
{

inline CoveragePair count_coverage(const Sampler& sampler, const EllipsoidRegion& ellipsoid,
                                   const SphereRegion& sphere, double delta, std::size_t n_samples,
                                   const RunOptions& options)
{
    struct Hits
    {
        std::size_t ellipsoid = 0;
        std::size_t sphere = 0;
    };
    const auto partial = run_chunked(n_samples, options.workers, Hits{},
                                     [&](std::size_t begin, std::size_t end, Hits& acc) {
                                         Vector x(sampler.dim());
                                         for (std::size_t i = begin; i < end; ++i) {
                                             sampler.sample_at(options.stream_index, i, x);
                                             acc.ellipsoid += contains(ellipsoid, x) ? 1 : 0;
                                             acc.sphere += contains(sphere, x) ? 1 : 0;
                                         }
                                     });
    Hits total;
    for (const auto& h : partial) {
        total.ellipsoid += h.ellipsoid;
        total.sphere += h.sphere;
    }
    return {make_coverage_report("ellipsoid", delta, n_samples, total.ellipsoid),
            make_coverage_report("sphere", delta, n_samples, total.sphere)};
}

} // namespace detail

/// Draws one shared sample set and counts membership in the ellipsoid and
/// sphere built from the supplied (true) moments at level delta.
inline CoverageResult run_coverage(const SamplerSpec& spec, double delta, std::size_t n_samples,
                                   const Vector& true_mean, const CovarianceMatrix& true_cov,
                                   const RunOptions& options = {}, bool estimated = false)
{
    validate(spec);
    detail::require_delta(delta);
    detail::require_samples(n_samples);
    const Sampler sampler(spec);
    if (true_mean.size() != sampler.dim() || true_cov.dim() != sampler.dim()) {
        throw Error(ErrorKind::InvalidSpec, "true moments do not match the sampler dimension");
    }

    CoverageResult result{detail::count_coverage(sampler, make_ellipsoid(true_mean, true_cov, delta),
                                                 make_sphere(true_mean, true_cov, delta), delta, n_samples,
                                                 options),
                          std::nullopt};
    if (estimated) {
        const SampleSet samples = draw(spec, n_samples, options.stream_index);
        const MomentEstimate fit = estimate_moments(samples, 1);
        const auto e = make_ellipsoid(fit.mean, fit.cov, delta);
        const auto s = make_sphere(fit.mean, fit.cov, delta);
        std::size_t e_hits = 0;
        std::size_t s_hits = 0;
        for (std::size_t r = 0; r < samples.count(); ++r) {
            const Vector x = samples.row_vector(r);
            e_hits += contains(e, x) ? 1 : 0;
            s_hits += contains(s, x) ? 1 : 0;
        }
        result.estimated = CoveragePair{make_coverage_report("ellipsoid", delta, n_samples, e_hits),
                                        make_coverage_report("sphere", delta, n_samples, s_hits)};
    }
    return result;
}

inline CoverageResult run_coverage(const SamplerSpec& spec, double delta, std::size_t n_samples,
                                   const RunOptions& options = {}, bool estimated = false)
{
    const TrueMoments m = true_moments(spec);
    return run_coverage(spec, delta, n_samples, m.mean, m.cov, options, estimated);
}

struct TraceIdentityReport
{
    std::size_t dim = 0;
    std::size_t n_samples = 0;
    double mean_d2 = 0.0;
    /// Unbiased sample variance of d^2.
    double var_d2 = 0.0;
    /// sqrt(var_d2 / N).
    double standard_error = 0.0;
};

/// Sample mean of the squared Mahalanobis distance under the true moments;
/// its expectation is tr(Sigma^-1 Sigma) = n.
inline TraceIdentityReport trace_identity_check(const SamplerSpec& spec, std::size_t n_samples,
                                                const RunOptions& options = {})
{
    detail::require_samples(n_samples);
    const Sampler sampler(spec);
    const PrecisionMatrix precision = invert_spd(sampler.moments().cov);

    struct Sums
    {
        double d2 = 0.0;
        double d4 = 0.0;
    };
    const auto partial = detail::run_chunked(n_samples, options.workers, Sums{},
                                             [&](std::size_t begin, std::size_t end, Sums& acc) {
                                                 Vector x(sampler.dim());
                                                 for (std::size_t i = begin; i < end; ++i) {
                                                     sampler.sample_at(options.stream_index, i, x);
                                                     const double d2 =
                                                         mahalanobis_sq(x, sampler.moments().mean, precision);
                                                     acc.d2 += d2;
                                                     acc.d4 += d2 * d2;
                                                 }
                                             });
    Sums total;
    for (const auto& s : partial) {
        total.d2 += s.d2;
        total.d4 += s.d4;
    }
    const double n = static_cast<double>(n_samples);
    TraceIdentityReport r;
    r.dim = sampler.dim();
    r.n_samples = n_samples;
    r.mean_d2 = total.d2 / n;
    r.var_d2 = n_samples > 1 ? std::max(0.0, (total.d4 - n * r.mean_d2 * r.mean_d2) / (n - 1.0)) : 0.0;
    r.standard_error = std::sqrt(r.var_d2 / n);
    return r;
}

/// Empirical tails of both distance statistics against their bounds.
///
/// At grid value eps the Mahalanobis tail is Pr{d^2 >= eps} with bound
/// min(1, n/eps). The Euclidean tail is taken at the matching squared radius
/// eps * tr(Sigma) / n, where the classical bound tr(Sigma) / radius^2 takes
/// the same value n/eps (for n = 1 this is the usual eps -> eps^2/Var
/// substitution). So both curves guard the same probability level and differ
/// only in the shape of the region they carve out.
struct TailCurve
{
    std::vector<double> eps_grid;
    std::vector<double> empirical_tail;
    std::vector<double> new_bound;
    std::vector<double> classical_radius_sq;
    std::vector<double> classical_tail;
    std::vector<double> classical_bound;
    std::size_t n_samples = 0;

    double standard_error(std::size_t i) const
    {
        const double p = empirical_tail[i];
        return std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    }

    double classical_standard_error(std::size_t i) const
    {
        const double p = classical_tail[i];
        return std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    }
};

inline TailCurve run_tail_curve(const SamplerSpec& spec, const std::vector<double>& eps_grid, std::size_t n_samples,
                                const RunOptions& options = {})
{
    if (eps_grid.empty()) throw Error(ErrorKind::EmptyGrid, "eps grid is empty");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0) || !std::isfinite(eps_grid[i])) {
            throw Error(ErrorKind::NonPositiveEpsilon, "eps grid values must be positive");
        }
        if (i > 0 && !(eps_grid[i] > eps_grid[i - 1])) {
            throw Error(ErrorKind::InvalidSpec, "eps grid must be strictly ascending");
        }
    }
    detail::require_samples(n_samples);
    const Sampler sampler(spec);
    const auto& mom = sampler.moments();
    const PrecisionMatrix precision = invert_spd(mom.cov);
    const double n = static_cast<double>(sampler.dim());
    const double tr = mom.cov.trace();

    TailCurve curve;
    curve.eps_grid = eps_grid;
    curve.n_samples = n_samples;
    for (double eps : eps_grid) {
        curve.new_bound.push_back(chebyshev_bound(sampler.dim(), eps).clamped);
        const double radius_sq = eps * tr / n;
        curve.classical_radius_sq.push_back(radius_sq);
        curve.classical_bound.push_back(classical_bound(tr, std::sqrt(radius_sq)).clamped);
    }

    struct Counts
    {
        std::vector<std::size_t> mahalanobis;
        std::vector<std::size_t> euclidean;
    };
    const Counts init{std::vector<std::size_t>(eps_grid.size()), std::vector<std::size_t>(eps_grid.size())};
    const auto partial = detail::run_chunked(n_samples, options.workers, init,
                                             [&](std::size_t begin, std::size_t end, Counts& acc) {
                                                 Vector x(sampler.dim());
                                                 for (std::size_t i = begin; i < end; ++i) {
                                                     sampler.sample_at(options.stream_index, i, x);
                                                     const double d2 = mahalanobis_sq(x, mom.mean, precision);
                                                     const double e2 = squared_norm(x - mom.mean);
                                                     for (std::size_t g = 0; g < eps_grid.size(); ++g) {
                                                         acc.mahalanobis[g] += d2 >= eps_grid[g] ? 1 : 0;
                                                         acc.euclidean[g] +=
                                                             e2 >= curve.classical_radius_sq[g] ? 1 : 0;
                                                     }
                                                 }
                                             });
    std::vector<std::size_t> m_total(eps_grid.size());
    std::vector<std::size_t> e_total(eps_grid.size());
    for (const auto& c : partial)
        for (std::size_t g = 0; g < eps_grid.size(); ++g) {
            m_total[g] += c.mahalanobis[g];
            e_total[g] += c.euclidean[g];
        }
    for (std::size_t g = 0; g < eps_grid.size(); ++g) {
        curve.empirical_tail.push_back(static_cast<double>(m_total[g]) / static_cast<double>(n_samples));
        curve.classical_tail.push_back(static_cast<double>(e_total[g]) / static_cast<double>(n_samples));
    }
    return curve;
}

struct FigureParams
{
    double sigma = 1.0;
    double k = 25.0;
    double delta = 0.1;
    std::size_t n_samples = 1000;
    std::uint64_t seed = 0;
    std::size_t boundary_points = 256;
};

struct FigureData
{
    FigureParams params;
    std::vector<Point2> samples;
    std::vector<Point2> ellipse_boundary;
    std::vector<Point2> circle_boundary;
    double threshold = 0.0;
    double radius_sq = 0.0;
    double volume_ratio = 0.0;
    CoverageReport ellipsoid_coverage;
    CoverageReport sphere_coverage;
};

/// Samples from the two-dimensional example plus both region boundaries.
inline FigureData export_figure(const FigureParams& params, const RunOptions& options = {})
{
    const SamplerSpec spec = SamplerSpec::paper_example(params.sigma, params.k, params.seed);
    validate(spec);
    detail::require_delta(params.delta);
    detail::require_samples(params.n_samples);
    if (params.boundary_points < 3) throw Error(ErrorKind::InvalidSpec, "need at least 3 boundary points");

    const TrueMoments mom = true_moments(spec);
    const auto ellipsoid = make_ellipsoid(mom.mean, mom.cov, params.delta);
    const auto sphere = make_sphere(mom.mean, mom.cov, params.delta);

    FigureData fig;
    fig.params = params;
    fig.threshold = ellipsoid.threshold;
    fig.radius_sq = sphere.radius_sq;
    fig.volume_ratio = volume_ratio(mom.cov);
    fig.ellipse_boundary = ellipse_boundary(ellipsoid, mom.cov, params.boundary_points);
    fig.circle_boundary = circle_boundary(sphere, params.boundary_points);

    const SampleSet samples = draw(spec, params.n_samples, options.stream_index);
    fig.samples.reserve(samples.count());
    std::size_t e_hits = 0;
    std::size_t s_hits = 0;
    for (std::size_t r = 0; r < samples.count(); ++r) {
        const Vector x = samples.row_vector(r);
        fig.samples.push_back({x[0], x[1]});
        e_hits += contains(ellipsoid, x) ? 1 : 0;
        s_hits += contains(sphere, x) ? 1 : 0;
    }
    fig.ellipsoid_coverage = make_coverage_report("ellipsoid", params.delta, params.n_samples, e_hits);
    fig.sphere_coverage = make_coverage_report("sphere", params.delta, params.n_samples, s_hits);
    return fig;
}

} // namespace mvcheb

#endif // MVCHEB_EXPERIMENTS_HPP
