#pragma once

// Artifact writers: round-trip CSV, JSON report arrays, a plain-text table and
// self-contained log-log SVG plots. Files are written to a temporary sibling
// and renamed into place.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "fmx/estimates.hpp"

namespace fmx {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::span<const double> values)
    {
        if (values.size() != header_.size()) throw DomainError("CsvTable: row width does not match header");
        rows_.emplace_back(values.begin(), values.end());
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }

    [[nodiscard]] std::string str() const
    {
        std::string s;
        for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
        s += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) s += ',';
                s += format_double(r[i]);
            }
            s += '\n';
        }
        return s;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

inline nlohmann::json to_json(const EstimateReport& r)
{
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return format_double(v);
    };
    nlohmann::json j{{"name", r.name},
                     {"empirical_M", num(r.empirical_M)},
                     {"arg_sup", {{"t", num(r.arg_sup_t)}, {"k", r.arg_sup_k}}},
                     {"refinement_drift", num(r.refinement_drift)},
                     {"verdict", r.passed ? "pass" : "fail"}};
    if (r.density_drift) j["density_drift"] = num(*r.density_drift);
    if (r.slope_fit)
        j["slope_fit"] = {{"fitted", num(r.slope_fit->fitted)}, {"predicted", num(r.slope_fit->predicted)}, {"r2", num(r.slope_fit->r2)}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

/// Reports sorted by name, so the array is independent of evaluation order.
inline std::string reports_json(std::vector<EstimateReport> reports)
{
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

inline std::string reports_table(const std::vector<EstimateReport>& reports)
{
    std::size_t w = 4;
    for (const auto& r : reports) w = std::max(w, r.name.size());
    std::string s;
    char line[512];
    std::snprintf(line, sizeof line, "%-*s %12s %10s %5s %10s %7s  %s\n", static_cast<int>(w), "case", "M", "t*", "k*",
                  "drift", "verdict", "note");
    s += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-*s %12.5g %10.3g %5zu %10.3g %7s  %s\n", static_cast<int>(w), r.name.c_str(),
                      r.empirical_M, r.arg_sup_t, r.arg_sup_k, r.refinement_drift, r.passed ? "pass" : "FAIL",
                      r.note.c_str());
        s += line;
    }
    return s;
}

/// Log-log scatter of (x, y) with the least-squares line and, when
/// `predicted` is finite, a reference line of that slope through the data mean.
inline std::string svg_loglog(const std::string& title, std::span<const double> x, std::span<const double> y,
                              double predicted = std::numeric_limits<double>::quiet_NaN())
{
    if (x.size() != y.size() || x.size() < 2) throw DomainError("svg_loglog: need matching series of length >= 2");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("svg_loglog: values must be positive");
        lx.push_back(std::log10(x[i]));
        ly.push_back(std::log10(y[i]));
    }
    const SlopeFit fit = fit_loglog(x, y, predicted);
    const auto [xmin, xmax] = std::minmax_element(lx.begin(), lx.end());
    const auto [ymin, ymax] = std::minmax_element(ly.begin(), ly.end());
    const double x0 = *xmin, x1 = *xmax;
    const double y0 = *ymin - 0.05 * (*ymax - *ymin + 1e-12), y1 = *ymax + 0.05 * (*ymax - *ymin + 1e-12);
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d)
        s << "<text x=\"" << px(d) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
    for (int d = static_cast<int>(std::ceil(y0)); d <= static_cast<int>(std::floor(y1)); ++d)
        s << "<text x=\"" << L - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    auto line = [&](double slope, double ax, double ay, const char* colour, const char* dash) {
        s << "<line x1=\"" << px(x0) << "\" y1=\"" << py(ay + slope * (x0 - ax)) << "\" x2=\"" << px(x1) << "\" y2=\""
          << py(ay + slope * (x1 - ax)) << "\" stroke=\"" << colour << "\"" << dash << "/>\n";
    };
    s << "<clipPath id=\"plot\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
      << H - T - B << "\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n";
    line(fit.fitted, mx, my, "steelblue", "");
    if (std::isfinite(predicted)) line(predicted, mx, my, "firebrick", " stroke-dasharray=\"6,4\"");
    for (std::size_t i = 0; i < lx.size(); ++i)
        s << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"3\" fill=\"black\"/>\n";
    s << "</g>\n";
    s << "<text x=\"" << L + 8 << "\" y=\"" << T + 16 << "\" fill=\"steelblue\">fitted slope " << format_double(fit.fitted)
      << "</text>\n";
    if (std::isfinite(predicted))
        s << "<text x=\"" << L + 8 << "\" y=\"" << T + 32 << "\" fill=\"firebrick\">predicted slope "
          << format_double(predicted) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace fmx
