#ifndef MVCHEB_SAMPLER_HPP
#define MVCHEB_SAMPLER_HPP

#include "mvcheb/error.hpp"
#include "mvcheb/linalg.hpp"
#include "mvcheb/moments.hpp"
#include "mvcheb/random.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mvcheb
{

enum class SamplerKind
{
    Gaussian,
    PaperExample,
    TightRadial,
};

inline std::string_view to_string(SamplerKind kind) noexcept
{
    switch (kind) {
        case SamplerKind::Gaussian: return "gaussian";
        case SamplerKind::PaperExample: return "paper_example";
        case SamplerKind::TightRadial: return "tight_radial";
    }
    return "unknown";
}

inline std::optional<SamplerKind> parse_sampler_kind(std::string_view name) noexcept
{
    if (name == "gaussian") return SamplerKind::Gaussian;
    if (name == "paper_example") return SamplerKind::PaperExample;
    if (name == "tight_radial") return SamplerKind::TightRadial;
    return std::nullopt;
}

/// The tight radial atom sits at d^2 = eps * (1 + kShellMargin) instead of
/// exactly eps. Evaluating d^2 in floating point lands on either side of the
/// nominal shell; the margin keeps every shell point strictly outside the
/// closed region at eps and inside the tail event {d^2 >= eps}.
inline constexpr double kShellMargin = 1e-9;

/// Parameters of one generator kind.
///   gaussian:       mean, cov
///   paper_example:  sigma, k        (X = (y, y + z), y ~ N(0, s^2), z ~ N(0, k s^2))
///   tight_radial:   mean, cov, eps  (mean + R L u, R^2 = eps w.p. n/eps, else 0)
struct SamplerSpec
{
    SamplerKind kind = SamplerKind::Gaussian;
    std::optional<Vector> mean;
    std::optional<CovarianceMatrix> cov;
    double sigma = 1.0;
    double k = 1.0;
    double eps = 0.0;
    std::uint64_t seed = 0;

    static SamplerSpec gaussian(Vector mean, CovarianceMatrix cov, std::uint64_t seed = 0)
    {
        SamplerSpec s;
        s.kind = SamplerKind::Gaussian;
        s.mean = std::move(mean);
        s.cov = std::move(cov);
        s.seed = seed;
        return s;
    }

    static SamplerSpec paper_example(double sigma, double k, std::uint64_t seed = 0)
    {
        SamplerSpec s;
        s.kind = SamplerKind::PaperExample;
        s.sigma = sigma;
        s.k = k;
        s.seed = seed;
        return s;
    }

    static SamplerSpec tight_radial(Vector mean, CovarianceMatrix cov, double eps, std::uint64_t seed = 0)
    {
        SamplerSpec s;
        s.kind = SamplerKind::TightRadial;
        s.mean = std::move(mean);
        s.cov = std::move(cov);
        s.eps = eps;
        s.seed = seed;
        return s;
    }

    std::size_t dim() const { return kind == SamplerKind::PaperExample ? 2 : (mean ? mean->size() : 0); }
};

inline void validate(const SamplerSpec& spec)
{
    switch (spec.kind) {
        case SamplerKind::PaperExample:
            if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma) || !(spec.k > 0.0) || !std::isfinite(spec.k)) {
                throw Error(ErrorKind::InvalidSpec, "paper_example needs sigma > 0 and k > 0");
            }
            return;
        case SamplerKind::Gaussian:
        case SamplerKind::TightRadial:
            if (!spec.mean || !spec.cov) {
                throw Error(ErrorKind::InvalidSpec, std::string(to_string(spec.kind)) + " needs mean and cov");
            }
            if (spec.mean->size() != spec.cov->dim()) {
                throw Error(ErrorKind::InvalidSpec, "mean and cov dimensions differ");
            }
            if (!spec.mean->all_finite()) throw Error(ErrorKind::InvalidSpec, "mean must be finite");
            if (spec.kind == SamplerKind::TightRadial) {
                const double n = static_cast<double>(spec.mean->size());
                if (!(spec.eps >= n) || !std::isfinite(spec.eps)) {
                    throw Error(ErrorKind::InvalidSpec, "tight_radial needs eps >= n so that n/eps is a probability");
                }
            }
            return;
    }
    throw Error(ErrorKind::InvalidSpec, "unknown sampler kind");
}

struct TrueMoments
{
    Vector mean;
    CovarianceMatrix cov;
};

/// Population mean and covariance of the distribution described by `spec`.
inline TrueMoments true_moments(const SamplerSpec& spec)
{
    validate(spec);
    if (spec.kind == SamplerKind::PaperExample) return {Vector(2), example_covariance(spec.sigma, spec.k)};
    return {*spec.mean, *spec.cov};
}

/// Compiled form of a spec: draws one vector per call from a caller-owned
/// stream. Immutable and shareable across threads.
class Sampler
{
public:
    explicit Sampler(const SamplerSpec& spec)
        : spec_(spec)
        , moments_(true_moments(spec))
    {
    }

    std::size_t dim() const noexcept { return moments_.mean.size(); }
    const SamplerSpec& spec() const noexcept { return spec_; }
    const TrueMoments& moments() const noexcept { return moments_; }

    /// Writes one draw into `out` (size dim()).
    void sample(RandomStream& stream, Vector& out) const
    {
        const std::size_t n = dim();
        switch (spec_.kind) {
            case SamplerKind::PaperExample: {
                const double y = spec_.sigma * stream.standard_normal();
                const double z = std::sqrt(spec_.k) * spec_.sigma * stream.standard_normal();
                out[0] = y;
                out[1] = y + z;
                return;
            }
            case SamplerKind::Gaussian: {
                Vector z(n);
                for (std::size_t i = 0; i < n; ++i) z[i] = stream.standard_normal();
                apply_factor(z, 1.0, out);
                return;
            }
            case SamplerKind::TightRadial: {
                const double p_shell = static_cast<double>(n) / spec_.eps;
                if (!(stream.uniform() < p_shell)) {
                    for (std::size_t i = 0; i < n; ++i) out[i] = moments_.mean[i];
                    return;
                }
                Vector g(n);
                double norm_sq = 0.0;
                do {
                    norm_sq = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        g[i] = stream.standard_normal();
                        norm_sq += g[i] * g[i];
                    }
                } while (norm_sq == 0.0);
                const double radius = std::sqrt(spec_.eps * (1.0 + kShellMargin));
                apply_factor(g, radius / std::sqrt(norm_sq), out);
                return;
            }
        }
    }

    Vector sample(RandomStream& stream) const
    {
        Vector out(dim());
        sample(stream, out);
        return out;
    }

    /// Sample `index` of stream `stream_index`: a pure function of
    /// (seed, stream_index, index).
    void sample_at(std::uint32_t stream_index, std::uint64_t index, Vector& out) const
    {
        RandomStream stream(spec_.seed, stream_index, index);
        sample(stream, out);
    }

private:
    /// out = mean + scale * L z
    void apply_factor(const Vector& z, double scale, Vector& out) const
    {
        const SquareMatrix& l = moments_.cov.chol();
        const std::size_t n = dim();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * z[j];
            out[i] = moments_.mean[i] + scale * s;
        }
    }

    SamplerSpec spec_;
    TrueMoments moments_;
};

inline SampleSet draw(const SamplerSpec& spec, std::size_t n_samples, std::uint32_t stream_index = 0)
{
    if (n_samples == 0) throw Error(ErrorKind::InvalidSpec, "n_samples must be >= 1");
    const Sampler sampler(spec);
    SampleSet out(sampler.dim());
    out.reserve(n_samples);
    Vector x(sampler.dim());
    for (std::size_t i = 0; i < n_samples; ++i) {
        sampler.sample_at(stream_index, i, x);
        out.push_back(x);
    }
    return out;
}

} // namespace mvcheb

#endif // MVCHEB_SAMPLER_HPP
