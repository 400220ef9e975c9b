#ifndef MVCHEB_CLI_HPP
#define MVCHEB_CLI_HPP

// Command-line front end. `run` takes the argument list and output streams
// explicitly so the whole CLI can be exercised in-process.
//
// Exit codes: 0 success, 2 usage/parse error, 3 numeric/domain error,
// 4 I/O error.

#include "mvcheb/error.hpp"
#include "mvcheb/experiments.hpp"
#include "mvcheb/io.hpp"
#include "mvcheb/linalg.hpp"
#include "mvcheb/moments.hpp"
#include "mvcheb/regions.hpp"
#include "mvcheb/sampler.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mvcheb::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitIo = 4;

inline int exit_code_for(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::ParseError:
        case ErrorKind::InvalidSpec:
        case ErrorKind::EmptySampleSet:
        case ErrorKind::EmptyGrid:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::NonFinite:
        case ErrorKind::NonPositiveEpsilon:
        case ErrorKind::NonPositiveVariance:
            return kExitUsage;
        case ErrorKind::NotSymmetric:
        case ErrorKind::NotPositiveDefinite:
        case ErrorKind::InsufficientSamples:
        case ErrorKind::NonPositiveParameter:
        case ErrorKind::DeltaOutOfRange:
        case ErrorKind::UnsupportedDimension:
            return kExitDomain;
        case ErrorKind::IoError:
            return kExitIo;
    }
    return kExitUsage;
}

namespace detail
{

struct Shared
{
    std::string out;
    std::uint64_t seed = 0;
    std::size_t streams = 1;
};

/// Writes `text` to --out (atomically) or to the given stream.
inline void emit(const std::string& text, const std::string& out_path, std::ostream& out)
{
    if (out_path.empty() || out_path == "-") {
        out << text;
        out.flush();
        return;
    }
    io::atomic_write(out_path, text);
}

inline std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

/// Parses "1,2,3" or "[1,2,3]" into a list of numbers.
inline std::vector<double> parse_number_list(const std::string& text, const char* what)
{
    const auto first = text.find_first_not_of(" \t");
    if (first != std::string::npos && text[first] == '[') {
        return io::detail::number_array(io::parse_json(text, what), what);
    }
    std::vector<double> out;
    for (auto field : io::split_commas(text)) out.push_back(io::parse_double(field, what));
    return out;
}

/// The spec seed unless --seed was given explicitly.
inline SamplerSpec load_spec(const std::string& arg, const CLI::App& sub, const Shared& shared)
{
    SamplerSpec spec = io::sampler_spec_from_json(io::load_json_argument(arg, "sampler spec"));
    if (sub.count("--seed") > 0) spec.seed = shared.seed;
    return spec;
}

} // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multivariate Chebyshev bounds, confidence regions and Monte Carlo checks", "mvcheb"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    detail::Shared shared;
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", shared.out, "Output path (default: stdout)"); };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", shared.seed, "Random seed (default 0)"); };
    auto add_streams = [&](CLI::App* sub) {
        sub->add_option("--streams", shared.streams, "Worker threads (default 1)")->check(CLI::Range(1, 1024));
    };

    // estimate
    std::string estimate_input;
    int ddof = 1;
    double ridge = 0.0;
    auto* estimate = app.add_subcommand("estimate", "Sample mean and covariance of a CSV file");
    estimate->add_option("input", estimate_input, "CSV with header x1,...,xn ('-' for stdin)")->required();
    estimate->add_option("--ddof", ddof, "Divisor N - ddof (0 or 1)")->check(CLI::IsMember({0, 1}));
    estimate->add_option("--ridge", ridge, "Add ridge * I before factorization")->check(CLI::NonNegativeNumber);
    add_out(estimate);

    // ratio
    std::string ratio_cov;
    auto* ratio = app.add_subcommand("ratio", "Sphere/ellipsoid volume ratio for a covariance matrix");
    ratio->add_option("--cov", ratio_cov, "Matrix JSON, inline or a file path")->required();
    add_out(ratio);

    // bound
    std::size_t bound_dim = 0;
    double bound_eps = 0.0;
    double bound_var = 0.0;
    bool bound_classical = false;
    auto* bound = app.add_subcommand("bound", "Evaluate n/eps or, with --classical, Var/eps^2");
    bound->add_option("--eps", bound_eps, "Threshold eps > 0")->required()->check(CLI::PositiveNumber);
    auto* dim_opt = bound->add_option("--dim", bound_dim, "Dimension n")->check(CLI::PositiveNumber);
    auto* classical_flag = bound->add_flag("--classical", bound_classical, "Classical bound Var(X)/eps^2");
    auto* var_opt = bound->add_option("--var", bound_var, "Total variance tr(Sigma)")->check(CLI::PositiveNumber);
    var_opt->needs(classical_flag);
    dim_opt->excludes(classical_flag);
    add_out(bound);

    // region
    std::string region_kind = "both";
    std::string region_cov;
    std::string region_mean;
    std::string region_file;
    std::string region_point;
    double region_delta = 0.1;
    auto* region = app.add_subcommand("region", "Build the ellipsoid/sphere regions or test a point");
    region->add_option("--kind", region_kind, "ellipsoid, sphere or both")
        ->check(CLI::IsMember({"ellipsoid", "sphere", "both"}));
    auto* cov_opt = region->add_option("--cov", region_cov, "Covariance matrix JSON");
    region->add_option("--mean", region_mean, "Center as JSON array or comma list (default 0)");
    region->add_option("--delta", region_delta, "Miss probability delta in (0,1)");
    auto* region_opt = region->add_option("--region", region_file, "Existing region JSON to test --point against");
    region->add_option("--point", region_point, "Point to test for membership");
    cov_opt->excludes(region_opt);
    add_out(region);

    // coverage
    std::string coverage_spec;
    double coverage_delta = 0.1;
    std::size_t coverage_n = 1000;
    std::uint32_t coverage_stream = 0;
    bool coverage_estimated = false;
    auto* coverage = app.add_subcommand("coverage", "Monte Carlo coverage of both regions");
    coverage->add_option("--spec", coverage_spec, "Sampler spec JSON, inline or a file path")->required();
    coverage->add_option("--delta", coverage_delta, "Miss probability delta in (0,1)");
    coverage->add_option("--n", coverage_n, "Number of samples")->check(CLI::PositiveNumber);
    coverage->add_option("--stream-index", coverage_stream, "Independent replication index");
    coverage->add_flag("--estimated", coverage_estimated, "Also report regions fitted from the samples");
    add_seed(coverage);
    add_streams(coverage);
    add_out(coverage);

    // tail
    std::string tail_spec;
    std::string tail_eps;
    std::size_t tail_n = 100000;
    std::uint32_t tail_stream = 0;
    auto* tail = app.add_subcommand("tail", "Empirical tail curves against both bounds");
    tail->add_option("--spec", tail_spec, "Sampler spec JSON, inline or a file path")->required();
    tail->add_option("--eps", tail_eps, "Ascending eps grid (default n,2n,5n,10n,20n)");
    tail->add_option("--n", tail_n, "Number of samples")->check(CLI::PositiveNumber);
    tail->add_option("--stream-index", tail_stream, "Independent replication index");
    add_seed(tail);
    add_streams(tail);
    add_out(tail);

    // figure
    FigureParams fig;
    std::string figure_out = "figure";
    auto* figure = app.add_subcommand("figure", "Export samples and region boundaries of the 2-D example");
    figure->add_option("--sigma", fig.sigma, "sigma (default 1)")->check(CLI::PositiveNumber);
    figure->add_option("--k", fig.k, "k (default 25)")->check(CLI::PositiveNumber);
    figure->add_option("--delta", fig.delta, "delta (default 0.1)");
    figure->add_option("--n", fig.n_samples, "Number of samples (default 1000)")->check(CLI::PositiveNumber);
    figure->add_option("--seed", fig.seed, "Random seed (default 0)");
    figure->add_option("--points", fig.boundary_points, "Boundary points per curve (default 256)")
        ->check(CLI::Range(std::size_t{3}, std::size_t{1} << 24));
    figure->add_option("--out", figure_out, "Output directory (default ./figure)");

    // sample
    std::string sample_spec;
    std::size_t sample_n = 1000;
    std::uint32_t sample_stream = 0;
    auto* sample = app.add_subcommand("sample", "Draw samples from a spec as CSV");
    sample->add_option("--spec", sample_spec, "Sampler spec JSON, inline or a file path")->required();
    sample->add_option("--n", sample_n, "Number of samples")->check(CLI::PositiveNumber);
    sample->add_option("--stream-index", sample_stream, "Independent replication index");
    add_seed(sample);
    add_out(sample);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*estimate) {
            SampleSet samples;
            if (estimate_input == "-") {
                samples = io::read_samples_csv(std::cin);
            } else {
                samples = io::read_samples_csv(std::filesystem::path(estimate_input));
            }
            detail::emit(detail::dump(io::to_json(estimate_moments(samples, ddof, ridge))), shared.out, out);
        } else if (*ratio) {
            const CovarianceMatrix cov(io::matrix_from_json(io::load_json_argument(ratio_cov, "covariance")));
            const io::json j{{"n_dim", cov.dim()},
                             {"trace", cov.trace()},
                             {"det", cov.det()},
                             {"ratio", volume_ratio(cov)}};
            detail::emit(detail::dump(j), shared.out, out);
        } else if (*bound) {
            BoundValue b;
            if (bound_classical) {
                if (var_opt->count() == 0) throw Error(ErrorKind::ParseError, "--classical needs --var");
                b = classical_bound(bound_var, bound_eps);
            } else {
                if (dim_opt->count() == 0) throw Error(ErrorKind::ParseError, "--dim is required without --classical");
                b = chebyshev_bound(bound_dim, bound_eps);
            }
            detail::emit(detail::dump(io::to_json(b)), shared.out, out);
        } else if (*region) {
            io::json j;
            if (!region_file.empty()) {
                if (region_point.empty()) throw Error(ErrorKind::ParseError, "--region needs --point");
                const Region r = io::region_from_json(io::load_json_argument(region_file, "region"));
                const Vector x(detail::parse_number_list(region_point, "--point"));
                const bool inside = contains(r, x);
                double dist = 0.0;
                if (const auto* e = std::get_if<EllipsoidRegion>(&r)) {
                    dist = mahalanobis_sq(x, e->center, e->precision);
                } else {
                    dist = squared_norm(x - std::get<SphereRegion>(r).center);
                }
                j = io::json{{"contains", inside}, {"distance_sq", dist}};
            } else {
                if (region_cov.empty()) throw Error(ErrorKind::ParseError, "region needs --cov or --region");
                const CovarianceMatrix cov(io::matrix_from_json(io::load_json_argument(region_cov, "covariance")));
                const Vector center =
                    region_mean.empty() ? Vector(cov.dim()) : Vector(detail::parse_number_list(region_mean, "--mean"));
                std::optional<Vector> point;
                if (!region_point.empty()) point = Vector(detail::parse_number_list(region_point, "--point"));

                auto describe_ellipsoid = [&] {
                    const auto e = make_ellipsoid(center, cov, region_delta);
                    io::json r = io::to_json(e, cov);
                    r["volume"] = volume(e, cov);
                    if (point) r["contains"] = contains(e, *point);
                    return r;
                };
                auto describe_sphere = [&] {
                    const auto s = make_sphere(center, cov, region_delta);
                    io::json r = io::to_json(s);
                    r["volume"] = volume(s);
                    if (point) r["contains"] = contains(s, *point);
                    return r;
                };
                if (region_kind == "ellipsoid") {
                    j = describe_ellipsoid();
                } else if (region_kind == "sphere") {
                    j = describe_sphere();
                } else {
                    j = io::json{{"ellipsoid", describe_ellipsoid()},
                                 {"sphere", describe_sphere()},
                                 {"volume_ratio", volume_ratio(cov)}};
                }
            }
            detail::emit(detail::dump(j), shared.out, out);
        } else if (*coverage) {
            const SamplerSpec spec = detail::load_spec(coverage_spec, *coverage, shared);
            const RunOptions options{coverage_stream, shared.streams};
            const auto result = run_coverage(spec, coverage_delta, coverage_n, options, coverage_estimated);
            detail::emit(detail::dump(io::to_json(result)), shared.out, out);
        } else if (*tail) {
            const SamplerSpec spec = detail::load_spec(tail_spec, *tail, shared);
            std::vector<double> grid;
            if (tail_eps.empty()) {
                const double n = static_cast<double>(Sampler(spec).dim());
                grid = {n, 2 * n, 5 * n, 10 * n, 20 * n};
            } else {
                grid = detail::parse_number_list(tail_eps, "--eps");
            }
            const auto curve = run_tail_curve(spec, grid, tail_n, RunOptions{tail_stream, shared.streams});
            detail::emit(detail::dump(io::to_json(curve)), shared.out, out);
        } else if (*figure) {
            const FigureData data = export_figure(fig);
            const std::filesystem::path dir(figure_out);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

            std::ostringstream samples_csv;
            std::ostringstream ellipse_csv;
            std::ostringstream circle_csv;
            io::write_points_csv(samples_csv, data.samples);
            io::write_points_csv(ellipse_csv, data.ellipse_boundary);
            io::write_points_csv(circle_csv, data.circle_boundary);
            const std::string manifest = detail::dump(io::manifest_json(data));
            io::atomic_write(dir / "samples.csv", samples_csv.str());
            io::atomic_write(dir / "ellipse.csv", ellipse_csv.str());
            io::atomic_write(dir / "circle.csv", circle_csv.str());
            io::atomic_write(dir / "manifest.json", manifest);
            out << manifest;
        } else if (*sample) {
            const SamplerSpec spec = detail::load_spec(sample_spec, *sample, shared);
            std::ostringstream csv;
            io::write_samples_csv(csv, draw(spec, sample_n, sample_stream));
            detail::emit(csv.str(), shared.out, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

} // namespace mvcheb::cli

#endif // MVCHEB_CLI_HPP
