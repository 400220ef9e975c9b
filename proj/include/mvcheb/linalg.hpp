#ifndef MVCHEB_LINALG_HPP
#define MVCHEB_LINALG_HPP

// Small dense symmetric positive definite linear algebra. Dimensions are
// expected to be tiny (n <= ~10), so everything is row-major std::vector
// storage with naive loops.

#include "mvcheb/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mvcheb
{

/// Relative pivot threshold: a Cholesky pivot <= this times the largest
/// diagonal entry rejects the matrix as not positive definite.
inline constexpr double kPivotRelTol = 1e-12;

/// Relative asymmetry below which an input is symmetrized as (M + M^T) / 2.
inline constexpr double kSymmetryRelTol = 1e-9;

class Vector
{
public:
    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
    Vector(std::initializer_list<double> values) : values_(values) {}
    explicit Vector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const std::vector<double>& raw() const noexcept { return values_; }

    bool all_finite() const
    {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> values_;
};

inline Vector operator-(const Vector& a, const Vector& b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "vector sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline double squared_norm(const Vector& v)
{
    double s = 0.0;
    for (double x : v.values()) s += x * x;
    return s;
}

class SquareMatrix
{
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t dim, double fill = 0.0) : dim_(dim), entries_(dim * dim, fill) {}

    /// Row-major nested initializer, e.g. {{1, 1}, {1, 26}}.
    SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : dim_(rows.size())
    {
        entries_.reserve(dim_ * dim_);
        for (const auto& row : rows) {
            if (row.size() != dim_) {
                throw Error(ErrorKind::DimensionMismatch, "matrix rows must all have length " + std::to_string(dim_));
            }
            entries_.insert(entries_.end(), row.begin(), row.end());
        }
    }

    static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows)
    {
        SquareMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) {
                throw Error(ErrorKind::DimensionMismatch,
                            "row " + std::to_string(i) + " has " + std::to_string(rows[i].size())
                                + " entries, expected " + std::to_string(rows.size()));
            }
            for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    static SquareMatrix from_flat(std::size_t dim, std::vector<double> entries)
    {
        if (entries.size() != dim * dim) {
            throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(dim * dim) + " entries");
        }
        SquareMatrix m;
        m.dim_ = dim;
        m.entries_ = std::move(entries);
        return m;
    }

    static SquareMatrix identity(std::size_t dim, double scale = 1.0)
    {
        SquareMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = scale;
        return m;
    }

    static SquareMatrix diagonal(std::initializer_list<double> diag)
    {
        SquareMatrix m(diag.size());
        std::size_t i = 0;
        for (double d : diag) {
            m(i, i) = d;
            ++i;
        }
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }
    double& operator()(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
    std::span<const double> entries() const noexcept { return entries_; }

    std::vector<std::vector<double>> rows() const
    {
        std::vector<std::vector<double>> out(dim_, std::vector<double>(dim_));
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) out[i][j] = (*this)(i, j);
        return out;
    }

    SquareMatrix transposed() const
    {
        SquareMatrix t(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : entries_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const
    {
        return std::all_of(entries_.begin(), entries_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> entries_;
};

inline SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b)
{
    if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "matrix product of different dimensions");
    const std::size_t n = a.dim();
    SquareMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline SquareMatrix operator*(double s, SquareMatrix m)
{
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) m(i, j) *= s;
    return m;
}

inline Vector operator*(const SquareMatrix& m, const Vector& v)
{
    if (m.dim() != v.size()) throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
    Vector out(v.size());
    for (std::size_t i = 0; i < m.dim(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

inline double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b)
{
    if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "max_abs_diff of different dimensions");
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i) m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
    return m;
}

namespace detail
{

inline void require_square_nonempty(const SquareMatrix& m)
{
    if (m.dim() == 0) throw Error(ErrorKind::DimensionMismatch, "matrix must have dimension >= 1");
    if (!m.all_finite()) throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
}

/// Returns the symmetrized copy of `m`, or throws NotSymmetric when the
/// asymmetry exceeds `rel_tol` times the largest entry.
inline SquareMatrix symmetrized(const SquareMatrix& m, double rel_tol = kSymmetryRelTol)
{
    const double scale = m.max_abs();
    SquareMatrix s(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i) {
        s(i, i) = m(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            const double asym = std::abs(m(i, j) - m(j, i));
            if (asym > rel_tol * scale) {
                throw Error(ErrorKind::NotSymmetric,
                            "entries (" + std::to_string(i) + "," + std::to_string(j) + ") and ("
                                + std::to_string(j) + "," + std::to_string(i) + ") differ by "
                                + std::to_string(asym));
            }
            const double avg = m(i, j) == m(j, i) ? m(i, j) : 0.5 * (m(i, j) + m(j, i));
            s(i, j) = avg;
            s(j, i) = avg;
        }
    }
    return s;
}

} // namespace detail

/// Lower-triangular L with L * L^T = m. Rejects the matrix when any pivot is
/// <= pivot_rel_tol * max_i m_ii.
inline SquareMatrix cholesky(const SquareMatrix& m, double pivot_rel_tol = kPivotRelTol)
{
    detail::require_square_nonempty(m);
    const SquareMatrix a = detail::symmetrized(m);
    const std::size_t n = a.dim();

    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    if (!(max_diag > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "no positive diagonal entry");
    const double threshold = pivot_rel_tol * max_diag;

    SquareMatrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = a(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > threshold)) {
            throw Error(ErrorKind::NotPositiveDefinite,
                        "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

/// Solves L * y = b for lower-triangular L.
inline Vector solve_lower(const SquareMatrix& l, const Vector& b)
{
    if (l.dim() != b.size()) throw Error(ErrorKind::DimensionMismatch, "solve_lower");
    Vector y(b.size());
    for (std::size_t i = 0; i < l.dim(); ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

/// Solves L^T * x = y for lower-triangular L.
inline Vector solve_upper_transposed(const SquareMatrix& l, const Vector& y)
{
    if (l.dim() != y.size()) throw Error(ErrorKind::DimensionMismatch, "solve_upper_transposed");
    const std::size_t n = l.dim();
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

/// Symmetric positive definite covariance matrix with its Cholesky factor,
/// determinant and trace computed once at construction.
class CovarianceMatrix
{
public:
    explicit CovarianceMatrix(const SquareMatrix& m)
        : entries_(init_entries(m))
        , chol_(cholesky(entries_))
    {
        double diag_prod = 1.0;
        trace_ = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) {
            diag_prod *= chol_(i, i);
            trace_ += entries_(i, i);
        }
        det_ = diag_prod * diag_prod;
    }

    CovarianceMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : CovarianceMatrix(SquareMatrix(rows))
    {
    }

    std::size_t dim() const noexcept { return entries_.dim(); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const SquareMatrix& matrix() const noexcept { return entries_; }
    const SquareMatrix& chol() const noexcept { return chol_; }
    double det() const noexcept { return det_; }
    double trace() const noexcept { return trace_; }

    /// log det computed from the Cholesky diagonal, exact for any dimension
    /// where det() itself might under/overflow.
    double log_det() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) s += std::log(chol_(i, i));
        return 2.0 * s;
    }

    double diagonal_product() const
    {
        double p = 1.0;
        for (std::size_t i = 0; i < dim(); ++i) p *= entries_(i, i);
        return p;
    }

private:
    static SquareMatrix init_entries(const SquareMatrix& m)
    {
        detail::require_square_nonempty(m);
        return detail::symmetrized(m);
    }

    SquareMatrix entries_;
    SquareMatrix chol_;
    double det_ = 0.0;
    double trace_ = 0.0;
};

class PrecisionMatrix
{
public:
    std::size_t dim() const noexcept { return entries_.dim(); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const SquareMatrix& matrix() const noexcept { return entries_; }

private:
    friend PrecisionMatrix invert_spd(const CovarianceMatrix& c);
    explicit PrecisionMatrix(SquareMatrix m) : entries_(std::move(m)) {}

    SquareMatrix entries_;
};

/// Inverse through the cached Cholesky factor, symmetrized on output.
inline PrecisionMatrix invert_spd(const CovarianceMatrix& c)
{
    const std::size_t n = c.dim();
    SquareMatrix inv(n);
    for (std::size_t col = 0; col < n; ++col) {
        Vector e(n);
        e[col] = 1.0;
        const Vector x = solve_upper_transposed(c.chol(), solve_lower(c.chol(), e));
        for (std::size_t row = 0; row < n; ++row) inv(row, col) = x[row];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double avg = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = avg;
            inv(j, i) = avg;
        }
    return PrecisionMatrix(std::move(inv));
}

inline double det_spd(const CovarianceMatrix& c) { return c.det(); }

inline double trace(const CovarianceMatrix& c) { return c.trace(); }

/// d^T * p * d.
inline double quad_form(const Vector& d, const PrecisionMatrix& p)
{
    if (d.size() != p.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "vector of size " + std::to_string(d.size()) + " against " + std::to_string(p.dim()) + "x"
                        + std::to_string(p.dim()) + " precision");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double row = 0.0;
        for (std::size_t k = 0; k < d.size(); ++k) row += p(i, k) * d[k];
        s += d[i] * row;
    }
    // Rounding can push an SPD form a hair below zero near d = 0.
    return std::max(0.0, s);
}

} // namespace mvcheb

#endif // MVCHEB_LINALG_HPP
