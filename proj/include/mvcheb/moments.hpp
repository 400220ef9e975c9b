#ifndef MVCHEB_MOMENTS_HPP
#define MVCHEB_MOMENTS_HPP

#include "mvcheb/error.hpp"
#include "mvcheb/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mvcheb
{

/// N samples of dimension n, stored row-major in one buffer.
class SampleSet
{
public:
    SampleSet() = default;
    explicit SampleSet(std::size_t dim) : dim_(dim)
    {
        if (dim == 0) throw Error(ErrorKind::DimensionMismatch, "sample dimension must be >= 1");
    }

    SampleSet(std::size_t dim, std::vector<double> flat) : dim_(dim), data_(std::move(flat))
    {
        if (dim == 0) throw Error(ErrorKind::DimensionMismatch, "sample dimension must be >= 1");
        if (data_.size() % dim != 0) throw Error(ErrorKind::DimensionMismatch, "flat buffer is not a multiple of dim");
        for (double v : data_)
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "sample entries must be finite");
    }

    static SampleSet from_rows(const std::vector<std::vector<double>>& rows)
    {
        if (rows.empty()) throw Error(ErrorKind::EmptySampleSet, "no rows");
        SampleSet s(rows.front().size());
        for (const auto& r : rows) s.push_back(r);
        return s;
    }

    void push_back(std::span<const double> row)
    {
        if (row.size() != dim_) {
            throw Error(ErrorKind::DimensionMismatch,
                        "row " + std::to_string(count()) + " has " + std::to_string(row.size())
                            + " entries, expected " + std::to_string(dim_));
        }
        for (double v : row)
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NonFinite, "row " + std::to_string(count()) + " has a non-finite entry");
            }
        data_.insert(data_.end(), row.begin(), row.end());
    }

    void push_back(const Vector& v) { push_back(v.values()); }

    void reserve(std::size_t rows) { data_.reserve(rows * dim_); }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t count() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
    Vector row_vector(std::size_t r) const
    {
        auto s = row(r);
        return Vector(std::vector<double>(s.begin(), s.end()));
    }
    const std::vector<double>& flat() const noexcept { return data_; }

    friend bool operator==(const SampleSet&, const SampleSet&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

inline Vector sample_mean(const SampleSet& s)
{
    if (s.count() == 0) throw Error(ErrorKind::EmptySampleSet, "cannot take the mean of zero samples");
    Vector mean(s.dim());
    for (std::size_t r = 0; r < s.count(); ++r) {
        auto x = s.row(r);
        for (std::size_t i = 0; i < s.dim(); ++i) mean[i] += x[i];
    }
    for (std::size_t i = 0; i < s.dim(); ++i) mean[i] /= static_cast<double>(s.count());
    return mean;
}

/// Centered second moments divided by N - ddof, plus `ridge` on the diagonal.
/// Only the lower triangle is accumulated, so the result is exactly symmetric.
inline CovarianceMatrix sample_covariance(const SampleSet& s, int ddof = 1, double ridge = 0.0)
{
    if (ddof != 0 && ddof != 1) throw Error(ErrorKind::InvalidSpec, "ddof must be 0 or 1");
    if (!(ridge >= 0.0)) throw Error(ErrorKind::NonPositiveParameter, "ridge must be >= 0");
    const std::size_t need = ddof == 1 ? 2 : 1;
    if (s.count() < need) {
        throw Error(ErrorKind::InsufficientSamples,
                    "ddof=" + std::to_string(ddof) + " needs at least " + std::to_string(need) + " samples, got "
                        + std::to_string(s.count()));
    }
    const Vector mean = sample_mean(s);
    const std::size_t n = s.dim();
    SquareMatrix acc(n);
    for (std::size_t r = 0; r < s.count(); ++r) {
        auto x = s.row(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double di = x[i] - mean[i];
            for (std::size_t j = 0; j <= i; ++j) acc(i, j) += di * (x[j] - mean[j]);
        }
    }
    const double denom = static_cast<double>(s.count() - static_cast<std::size_t>(ddof));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            acc(i, j) /= denom;
            acc(j, i) = acc(i, j);
        }
        acc(i, i) = acc(i, i) / denom + ridge;
    }
    return CovarianceMatrix(acc);
}

struct MomentEstimate
{
    Vector mean;
    CovarianceMatrix cov;
    int ddof = 1;
};

inline MomentEstimate estimate_moments(const SampleSet& s, int ddof = 1, double ridge = 0.0)
{
    return MomentEstimate{sample_mean(s), sample_covariance(s, ddof, ridge), ddof};
}

/// Covariance of X = (y, y + z) with y ~ N(0, sigma^2), z ~ N(0, k sigma^2).
inline CovarianceMatrix example_covariance(double sigma, double k)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::NonPositiveParameter, "sigma must be > 0");
    if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorKind::NonPositiveParameter, "k must be > 0");
    const double s2 = sigma * sigma;
    return CovarianceMatrix({{s2, s2}, {s2, (k + 1.0) * s2}});
}

} // namespace mvcheb

#endif // MVCHEB_MOMENTS_HPP
