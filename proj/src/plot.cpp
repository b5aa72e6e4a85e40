#include "rscore/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "rscore/errors.hpp"
#include "rscore/io.hpp"

namespace rscore {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * span; t += step) {
    out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return out;
}

std::string methods_in(const std::vector<ResultRow>& rows) {
  std::set<std::string> m;
  for (const auto& r : rows) m.insert(r.method);
  std::string out;
  for (const auto& s : m) out += (out.empty() ? "" : ", ") + s;
  return out.empty() ? "(none)" : out;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "error-vs-iteration") return PlotKind::error_vs_iteration;
  if (name == "error-vs-beta2") return PlotKind::error_vs_beta2;
  if (name == "rate-curves") return PlotKind::rate_curves;
  throw ConfigError(fmt::format("unknown plot kind '{}' (error-vs-iteration, error-vs-beta2, rate-curves)", name));
}

void write_svg(std::ostream& out, const PlotFrame& frame) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : frame.series) {
    for (const auto& p : s.points) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.mean - p.se);
      yhi = std::max(yhi, p.mean + p.se);
    }
  }
  if (!std::isfinite(xlo)) throw ConfigError("nothing to plot");
  ylo = std::min(ylo, 0.0);
  if (xhi - xlo < 1e-12) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi - ylo < 1e-12) yhi = ylo + 1.0;
  yhi += 0.05 * (yhi - ylo);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  const auto sy = [&](double y) { return kTop + (1.0 - (y - ylo) / (yhi - ylo)) * ph; };

  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">)",
                     kWidth, kHeight, kWidth, kHeight)
      << '\n';
  out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", kWidth, kHeight) << '\n';
  out << fmt::format(R"(<text x="{:.1f}" y="22" text-anchor="middle" font-size="14">{}</text>)", kLeft + pw / 2,
                     escape(frame.title))
      << '\n';

  // axes and ticks
  out << fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="black"/>)",
                     kLeft, kTop, pw, ph)
      << '\n';
  for (const double t : ticks(xlo, xhi)) {
    out << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="black"/>)", sx(t),
                       kTop + ph, kTop + ph + 5)
        << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle">{:.4g}</text>)", sx(t), kTop + ph + 18, t)
        << '\n';
  }
  for (const double t : ticks(ylo, yhi)) {
    out << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{2:.2f}" y2="{1:.2f}" stroke="#ddd"/>)", kLeft, sy(t),
                       kLeft + pw)
        << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="end">{:.4g}</text>)", kLeft - 6, sy(t) + 4, t)
        << '\n';
  }
  out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)", kLeft + pw / 2, kHeight - 15,
                     escape(frame.xlabel))
      << '\n';
  out << fmt::format(R"svg(<text x="18" y="{0:.1f}" text-anchor="middle" transform="rotate(-90 18 {0:.1f})">{1}</text>)svg",
                     kTop + ph / 2, escape(frame.ylabel))
      << '\n';

  for (std::size_t s = 0; s < frame.series.size(); ++s) {
    const auto& series = frame.series[s];
    const char* color = kColors[s % std::size(kColors)];
    std::string band, line;
    for (const auto& p : series.points) band += fmt::format("{:.2f},{:.2f} ", sx(p.x), sy(p.mean + p.se));
    for (auto it = series.points.rbegin(); it != series.points.rend(); ++it) {
      band += fmt::format("{:.2f},{:.2f} ", sx(it->x), sy(it->mean - it->se));
    }
    for (const auto& p : series.points) line += fmt::format("{:.2f},{:.2f} ", sx(p.x), sy(p.mean));
    const bool has_band = std::any_of(series.points.begin(), series.points.end(), [](const SeriesPoint& p) { return p.se > 0; });
    if (has_band) out << fmt::format(R"(<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>)", band, color) << '\n';
    out << fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>)", line, color) << '\n';
    if (series.points.size() < 60) {
      for (const auto& p : series.points) {
        out << fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)", sx(p.x), sy(p.mean), color);
      }
      out << '\n';
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
    out << fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{2:.1f}" y2="{1:.1f}" stroke="{3}" stroke-width="2"/>)",
                       kLeft + pw + 10, ly, kLeft + pw + 30, color)
        << fmt::format(R"(<text x="{:.1f}" y="{:.1f}">{}</text>)", kLeft + pw + 36, ly + 4, escape(series.label))
        << '\n';
  }
  out << "</svg>\n";
}

PlotFrame results_frame(const std::vector<ResultRow>& rows, PlotKind kind) {
  if (kind == PlotKind::rate_curves) return rates_frame(rate_curve_grid());
  std::set<std::string> methods;
  bool any_param = false;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    methods.insert(r.method);
    any_param = any_param || r.param.has_value();
  }
  PlotFrame f;
  f.ylabel = "Hamming error";
  if (kind == PlotKind::error_vs_iteration) {
    f.title = rows.empty() ? "error vs iteration" : rows.front().experiment;
    f.xlabel = "iteration m";
  } else {
    if (!any_param) {
      throw ConfigError(fmt::format("error-vs-beta2 needs rows with a param value; methods present: {}", methods_in(rows)));
    }
    f.title = rows.front().experiment;
    f.xlabel = "beta2";
  }
  for (const auto& m : methods) {
    auto pts = summarize(rows, m, kind == PlotKind::error_vs_beta2);
    if (!pts.empty()) f.series.push_back(PlotSeries{m, std::move(pts)});
  }
  if (f.series.empty()) throw ConfigError(fmt::format("no successful rows to plot; methods present: {}", methods_in(rows)));
  return f;
}

std::vector<RatePoint> rate_curve_grid(int count) {
  if (count < 2) throw ConfigError("rate curve grid needs at least 2 points");
  std::vector<RatePoint> out;
  for (int i = 0; i < count; ++i) {
    const double beta = 0.01 + 0.48 * i / (count - 1);
    const auto [a0, a1] = rate_curves(beta);
    out.push_back({beta, a0, a1});
  }
  return out;
}

void write_rates_csv(std::ostream& out, const std::vector<RatePoint>& grid) {
  out << "beta,a0,a1\n";
  for (const auto& p : grid) {
    out << io::format_double(p.beta) << ',' << io::format_double(p.a0) << ',' << io::format_double(p.a1) << '\n';
  }
}

PlotFrame rates_frame(const std::vector<RatePoint>& grid) {
  PlotFrame f{"Error rate exponents", "beta", "exponent", {{"a0 (SCORE)", {}}, {"a1 (R-SCORE)", {}}}};
  for (const auto& p : grid) {
    f.series[0].points.push_back({p.beta, p.a0, 0.0, 1});
    f.series[1].points.push_back({p.beta, p.a1, 0.0, 1});
  }
  return f;
}

void plot_results(const std::vector<ResultRow>& rows, PlotKind kind, const std::filesystem::path& svg) {
  const PlotFrame f = results_frame(rows, kind);
  auto out = io::open_output(svg);
  write_svg(out, f);
  if (!out) throw IoError(fmt::format("failed writing {}", svg.string()));
}

}  // namespace rscore
