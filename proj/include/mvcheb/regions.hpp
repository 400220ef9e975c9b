#ifndef MVCHEB_REGIONS_HPP
#define MVCHEB_REGIONS_HPP

// Chebyshev-type tail bounds and the confidence regions they induce:
//
//   sphere     B = { v : ||v - mu||^2          <= tr(Sigma) / delta }
//   ellipsoid  E = { v : (v-mu)^T Sigma^-1 (v-mu) <= n / delta }
//
// Both regions are closed. Each has probability at least 1 - delta for any
// distribution with mean mu and covariance Sigma.

#include "mvcheb/error.hpp"
#include "mvcheb/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace mvcheb
{

struct BoundValue
{
    double raw = 0.0;
    double clamped = 0.0;

    static BoundValue from_raw(double raw) { return {raw, std::min(1.0, raw)}; }
};

/// Pr{ (X-mu)^T Sigma^-1 (X-mu) >= eps } <= n / eps.
inline BoundValue chebyshev_bound(std::size_t dim, double eps)
{
    if (dim == 0) throw Error(ErrorKind::NonPositiveParameter, "dimension must be >= 1");
    if (!(eps > 0.0)) throw Error(ErrorKind::NonPositiveEpsilon, "eps must be > 0");
    return BoundValue::from_raw(static_cast<double>(dim) / eps);
}

/// Pr{ ||X-mu|| >= eps } <= Var(X) / eps^2, Var(X) = tr(Sigma).
inline BoundValue classical_bound(double var_total, double eps)
{
    if (!(var_total > 0.0)) throw Error(ErrorKind::NonPositiveVariance, "total variance must be > 0");
    if (!(eps > 0.0)) throw Error(ErrorKind::NonPositiveEpsilon, "eps must be > 0");
    return BoundValue::from_raw(var_total / (eps * eps));
}

inline double mahalanobis_sq(const Vector& x, const Vector& center, const PrecisionMatrix& p)
{
    return quad_form(x - center, p);
}

struct EllipsoidRegion
{
    Vector center;
    PrecisionMatrix precision;
    double threshold = 0.0;
    double delta = 0.0;

    std::size_t dim() const noexcept { return center.size(); }
};

struct SphereRegion
{
    Vector center;
    double radius_sq = 0.0;
    double delta = 0.0;

    std::size_t dim() const noexcept { return center.size(); }
};

using Region = std::variant<EllipsoidRegion, SphereRegion>;

namespace detail
{

inline void require_delta(double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) {
        throw Error(ErrorKind::DeltaOutOfRange, "delta must lie in (0, 1), got " + std::to_string(delta));
    }
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(what) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

} // namespace detail

inline EllipsoidRegion make_ellipsoid(const Vector& mean, const CovarianceMatrix& cov, double delta)
{
    detail::require_delta(delta);
    detail::require_same_dim(mean.size(), cov.dim(), "make_ellipsoid");
    return EllipsoidRegion{mean, invert_spd(cov), static_cast<double>(cov.dim()) / delta, delta};
}

inline SphereRegion make_sphere(const Vector& mean, const CovarianceMatrix& cov, double delta)
{
    detail::require_delta(delta);
    detail::require_same_dim(mean.size(), cov.dim(), "make_sphere");
    return SphereRegion{mean, cov.trace() / delta, delta};
}

inline bool contains(const EllipsoidRegion& r, const Vector& x)
{
    return mahalanobis_sq(x, r.center, r.precision) <= r.threshold;
}

inline bool contains(const SphereRegion& r, const Vector& x)
{
    detail::require_same_dim(x.size(), r.center.size(), "contains");
    return squared_norm(x - r.center) <= r.radius_sq;
}

inline bool contains(const Region& r, const Vector& x)
{
    return std::visit([&](const auto& region) { return contains(region, x); }, r);
}

/// Volume of the unit n-ball, pi^(n/2) / Gamma(n/2 + 1).
inline double unit_ball_volume(std::size_t dim)
{
    const double half = 0.5 * static_cast<double>(dim);
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

inline double volume(const SphereRegion& r)
{
    return unit_ball_volume(r.dim()) * std::pow(r.radius_sq, 0.5 * static_cast<double>(r.dim()));
}

inline double volume(const SphereRegion& r, const CovarianceMatrix&) { return volume(r); }

/// sqrt(det Sigma) * V_n * threshold^(n/2).
inline double volume(const EllipsoidRegion& r, const CovarianceMatrix& cov)
{
    detail::require_same_dim(r.dim(), cov.dim(), "volume");
    const double half = 0.5 * static_cast<double>(r.dim());
    return std::sqrt(cov.det()) * unit_ball_volume(r.dim()) * std::pow(r.threshold, half);
}

/// vol(sphere) / vol(ellipsoid) = (tr(Sigma)/n)^(n/2) / sqrt(det Sigma).
/// Independent of delta; >= 1 by AM-GM on the diagonal plus Hadamard.
inline double volume_ratio(const CovarianceMatrix& cov)
{
    const double n = static_cast<double>(cov.dim());
    return std::pow(cov.trace() / n, 0.5 * n) / std::sqrt(cov.det());
}

/// Closed form of volume_ratio(example_covariance(sigma, k)) = (k+2) / (2 sqrt k).
inline double example_ratio(double k)
{
    if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorKind::NonPositiveParameter, "k must be > 0");
    return (k + 2.0) / (2.0 * std::sqrt(k));
}

using Point2 = std::array<double, 2>;

/// m points on the boundary of a 2-D ellipsoid, center + sqrt(t) L (cos, sin).
inline std::vector<Point2> ellipse_boundary(const EllipsoidRegion& r, const CovarianceMatrix& cov, std::size_t m)
{
    if (r.dim() != 2 || cov.dim() != 2) {
        throw Error(ErrorKind::UnsupportedDimension, "ellipse_boundary needs n = 2, got " + std::to_string(r.dim()));
    }
    if (m < 3) throw Error(ErrorKind::NonPositiveParameter, "need at least 3 boundary points");
    const SquareMatrix& l = cov.chol();
    const double scale = std::sqrt(r.threshold);
    std::vector<Point2> pts;
    pts.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        pts.push_back({r.center[0] + scale * l(0, 0) * c, r.center[1] + scale * (l(1, 0) * c + l(1, 1) * s)});
    }
    return pts;
}

inline std::vector<Point2> circle_boundary(const SphereRegion& r, std::size_t m)
{
    if (r.dim() != 2) {
        throw Error(ErrorKind::UnsupportedDimension, "circle_boundary needs n = 2, got " + std::to_string(r.dim()));
    }
    if (m < 3) throw Error(ErrorKind::NonPositiveParameter, "need at least 3 boundary points");
    const double radius = std::sqrt(r.radius_sq);
    std::vector<Point2> pts;
    pts.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
        pts.push_back({r.center[0] + radius * std::cos(theta), r.center[1] + radius * std::sin(theta)});
    }
    return pts;
}

/// L^-1 (x - mu); its squared norm equals the Mahalanobis distance.
inline Vector whiten(const Vector& x, const Vector& center, const CovarianceMatrix& cov)
{
    return solve_lower(cov.chol(), x - center);
}

} // namespace mvcheb

#endif // MVCHEB_REGIONS_HPP
