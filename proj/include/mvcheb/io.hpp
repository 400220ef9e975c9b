#ifndef MVCHEB_IO_HPP
#define MVCHEB_IO_HPP

// Text formats: JSON matrices / sampler specs / regions / reports, and the
// sample CSV ("x1,...,xn" header, one sample per line). Doubles are written
// in shortest round-trip form, so a parse of the output recovers the exact
// value.

#include "mvcheb/error.hpp"
#include "mvcheb/experiments.hpp"
#include "mvcheb/linalg.hpp"
#include "mvcheb/moments.hpp"
#include "mvcheb/regions.hpp"
#include "mvcheb/sampler.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mvcheb::io
{

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// files

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return ss.str();
}

/// Writes to "<path>.tmp" and renames over `path`, so a failed write never
/// leaves a partial file behind.
inline void atomic_write(const std::filesystem::path& path, std::string_view content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorKind::IoError, "write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error(ErrorKind::IoError, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

inline json parse_json(std::string_view text, std::string_view what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
    }
}

/// Arguments that start with '[' or '{' are inline JSON; anything else is a
/// path to a JSON file.
inline json load_json_argument(std::string_view arg, std::string_view what)
{
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && (arg[first] == '[' || arg[first] == '{')) return parse_json(arg, what);
    return parse_json(read_text_file(std::filesystem::path(std::string(arg))), what);
}

// ---------------------------------------------------------------------------
// numbers

inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::string_view context)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorKind::ParseError, std::string(context) + ": '" + std::string(text) + "' is not a number");
    }
    if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, std::string(context) + ": non-finite value");
    return v;
}

namespace detail
{

inline double number_field(const json& j, const char* key, std::string_view what)
{
    if (!j.contains(key)) throw Error(ErrorKind::ParseError, std::string(what) + ": missing \"" + key + "\"");
    if (!j.at(key).is_number()) throw Error(ErrorKind::ParseError, std::string(what) + ": \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

inline std::vector<double> number_array(const json& j, std::string_view what)
{
    if (!j.is_array()) throw Error(ErrorKind::ParseError, std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string(what) + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// matrices and vectors: [[1,1],[1,26]] and [0,0]

inline SquareMatrix matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "matrix must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        rows.push_back(detail::number_array(j[i], "matrix row " + std::to_string(i)));
        if (rows.back().size() != j.size()) {
            throw Error(ErrorKind::ParseError, "matrix row " + std::to_string(i) + " has " +
                                                   std::to_string(rows.back().size()) + " entries, expected " +
                                                   std::to_string(j.size()));
        }
    }
    return SquareMatrix::from_rows(rows);
}

inline json to_json(const SquareMatrix& m) { return json(m.rows()); }

inline Vector vector_from_json(const json& j, std::string_view what = "vector")
{
    return Vector(detail::number_array(j, what));
}

inline json to_json(const Vector& v) { return json(v.raw()); }

// ---------------------------------------------------------------------------
// sample CSV

inline std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Parses the header to fix the dimension, then one sample per line. Blank
/// lines are skipped; ragged rows are rejected with their line number.
inline SampleSet read_samples_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        dim = split_commas(line).size();
        break;
    }
    if (dim == 0) throw Error(ErrorKind::ParseError, "CSV is empty (expected header x1,...,xn)");

    SampleSet samples(dim);
    std::vector<double> row(dim);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_commas(line);
        if (fields.size() != dim) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + " has " +
                                                   std::to_string(fields.size()) + " fields, expected " +
                                                   std::to_string(dim));
        }
        for (std::size_t i = 0; i < dim; ++i) {
            row[i] = parse_double(fields[i], "line " + std::to_string(line_no) + " field " + std::to_string(i + 1));
        }
        samples.push_back(row);
    }
    if (samples.count() == 0) throw Error(ErrorKind::EmptySampleSet, "CSV has a header but no data rows");
    return samples;
}

inline SampleSet read_samples_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return read_samples_csv(in);
}

inline void write_samples_csv(std::ostream& out, const SampleSet& s)
{
    for (std::size_t i = 0; i < s.dim(); ++i) out << (i ? ",x" : "x") << (i + 1);
    out << '\n';
    for (std::size_t r = 0; r < s.count(); ++r) {
        auto x = s.row(r);
        for (std::size_t i = 0; i < x.size(); ++i) out << (i ? "," : "") << format_double(x[i]);
        out << '\n';
    }
}

inline void write_points_csv(std::ostream& out, const std::vector<Point2>& pts)
{
    out << "x,y\n";
    for (const auto& p : pts) out << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
}

// ---------------------------------------------------------------------------
// sampler specs
//   {"kind":"paper_example","sigma":1.0,"k":25.0,"seed":42}
//   {"kind":"gaussian","mean":[0,0],"cov":[[1,0],[0,1]],"seed":7}
//   {"kind":"tight_radial","mean":[0,0],"cov":[[1,0],[0,1]],"eps":8,"seed":7}

inline SamplerSpec sampler_spec_from_json(const json& j)
{
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "sampler spec must be a JSON object");
    if (!j.contains("kind") || !j.at("kind").is_string()) throw Error(ErrorKind::ParseError, "sampler spec: missing \"kind\"");
    const auto kind = parse_sampler_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::InvalidSpec, "unknown sampler kind \"" + j.at("kind").get<std::string>() + "\"");

    SamplerSpec spec;
    spec.kind = *kind;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw Error(ErrorKind::ParseError, "sampler spec: seed must be an unsigned integer");
        spec.seed = j.at("seed").get<std::uint64_t>();
    }
    switch (spec.kind) {
        case SamplerKind::PaperExample:
            spec.sigma = detail::number_field(j, "sigma", "paper_example");
            spec.k = detail::number_field(j, "k", "paper_example");
            break;
        case SamplerKind::TightRadial:
            spec.eps = detail::number_field(j, "eps", "tight_radial");
            [[fallthrough]];
        case SamplerKind::Gaussian: {
            if (!j.contains("cov")) throw Error(ErrorKind::ParseError, std::string(to_string(spec.kind)) + ": missing \"cov\"");
            spec.cov = CovarianceMatrix(matrix_from_json(j.at("cov")));
            spec.mean = j.contains("mean") ? vector_from_json(j.at("mean"), "mean") : Vector(spec.cov->dim());
            break;
        }
    }
    validate(spec);
    return spec;
}

inline json to_json(const SamplerSpec& spec)
{
    json j;
    j["kind"] = std::string(to_string(spec.kind));
    switch (spec.kind) {
        case SamplerKind::PaperExample:
            j["sigma"] = spec.sigma;
            j["k"] = spec.k;
            break;
        case SamplerKind::TightRadial:
        case SamplerKind::Gaussian:
            if (spec.mean) j["mean"] = to_json(*spec.mean);
            if (spec.cov) j["cov"] = to_json(spec.cov->matrix());
            if (spec.kind == SamplerKind::TightRadial) j["eps"] = spec.eps;
            break;
    }
    j["seed"] = spec.seed;
    return j;
}

// ---------------------------------------------------------------------------
// regions
//   {"kind":"ellipsoid","center":[...],"cov":[[...]],"delta":0.1,"threshold":20.0}
//   {"kind":"sphere","center":[...],"radius_sq":270.0}

inline json to_json(const EllipsoidRegion& r, const CovarianceMatrix& cov)
{
    return json{{"kind", "ellipsoid"},
                {"center", to_json(r.center)},
                {"cov", to_json(cov.matrix())},
                {"delta", r.delta},
                {"threshold", r.threshold}};
}

inline json to_json(const SphereRegion& r)
{
    return json{{"kind", "sphere"}, {"center", to_json(r.center)}, {"radius_sq", r.radius_sq}};
}

/// An ellipsoid is rebuilt from (center, cov, delta); a stored threshold
/// must agree with n/delta.
inline Region region_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw Error(ErrorKind::ParseError, "region must be an object with a \"kind\"");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (!j.contains("center")) throw Error(ErrorKind::ParseError, "region: missing \"center\"");
    const Vector center = vector_from_json(j.at("center"), "center");
    if (kind == "ellipsoid") {
        if (!j.contains("cov")) throw Error(ErrorKind::ParseError, "ellipsoid: missing \"cov\"");
        const CovarianceMatrix cov(matrix_from_json(j.at("cov")));
        auto r = make_ellipsoid(center, cov, detail::number_field(j, "delta", "ellipsoid"));
        if (j.contains("threshold")) {
            const double t = detail::number_field(j, "threshold", "ellipsoid");
            if (std::abs(t - r.threshold) > 1e-12 * r.threshold) {
                throw Error(ErrorKind::ParseError, "ellipsoid: threshold " + format_double(t) + " != n/delta = " +
                                                       format_double(r.threshold));
            }
        }
        return r;
    }
    if (kind == "sphere") {
        const double radius_sq = detail::number_field(j, "radius_sq", "sphere");
        if (!(radius_sq > 0.0)) throw Error(ErrorKind::NonPositiveParameter, "sphere: radius_sq must be > 0");
        SphereRegion r{center, radius_sq, 0.0};
        if (j.contains("delta")) r.delta = detail::number_field(j, "delta", "sphere");
        return r;
    }
    throw Error(ErrorKind::ParseError, "unknown region kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// reports

inline json to_json(const BoundValue& b) { return json{{"raw", b.raw}, {"clamped", b.clamped}}; }

inline json to_json(const MomentEstimate& m)
{
    return json{{"mean", to_json(m.mean)},
                {"covariance", to_json(m.cov.matrix())},
                {"trace", m.cov.trace()},
                {"det", m.cov.det()},
                {"ddof", m.ddof},
                {"n_dim", m.cov.dim()}};
}

inline json to_json(const CoverageReport& r)
{
    return json{{"region", r.region},
                {"delta", r.delta},
                {"n_samples", r.n_samples},
                {"hits", r.hits},
                {"empirical_coverage", r.empirical_coverage},
                {"guaranteed_coverage", r.guaranteed_coverage},
                {"standard_error", r.standard_error}};
}

inline json to_json(const CoveragePair& p) { return json{{"ellipsoid", to_json(p.ellipsoid)}, {"sphere", to_json(p.sphere)}}; }

inline json to_json(const CoverageResult& r)
{
    json j = to_json(r.true_moments);
    if (r.estimated) j["estimated"] = to_json(*r.estimated);
    return j;
}

inline json to_json(const TraceIdentityReport& r)
{
    return json{{"n_dim", r.dim},
                {"n_samples", r.n_samples},
                {"mean_d2", r.mean_d2},
                {"var_d2", r.var_d2},
                {"standard_error", r.standard_error}};
}

inline json to_json(const TailCurve& c)
{
    return json{{"n_samples", c.n_samples},
                {"eps_grid", c.eps_grid},
                {"empirical_tail", c.empirical_tail},
                {"new_bound", c.new_bound},
                {"classical_radius_sq", c.classical_radius_sq},
                {"classical_tail", c.classical_tail},
                {"classical_bound", c.classical_bound}};
}

inline json to_json(const FigureParams& p)
{
    return json{{"sigma", p.sigma},
                {"k", p.k},
                {"delta", p.delta},
                {"seed", p.seed},
                {"N", p.n_samples},
                {"points", p.boundary_points}};
}

/// Manifest for the figure export; the point series go to CSV files.
inline json manifest_json(const FigureData& f)
{
    return json{{"params", to_json(f.params)},
                {"threshold", f.threshold},
                {"radius_sq", f.radius_sq},
                {"volume_ratio", f.volume_ratio},
                {"ellipsoid_coverage", to_json(f.ellipsoid_coverage)},
                {"sphere_coverage", to_json(f.sphere_coverage)},
                {"files", {{"samples", "samples.csv"}, {"ellipse", "ellipse.csv"}, {"circle", "circle.csv"}}}};
}

} // namespace mvcheb::io

#endif // MVCHEB_IO_HPP
