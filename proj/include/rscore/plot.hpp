#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rscore/experiment.hpp"

namespace rscore {

enum class PlotKind { error_vs_iteration, error_vs_beta2, rate_curves };

/// "error-vs-iteration", "error-vs-beta2" or "rate-curves".
PlotKind parse_plot_kind(const std::string& name);

struct PlotSeries {
  std::string label;
  std::vector<SeriesPoint> points;
};

struct PlotFrame {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
};

/// Static SVG: one line per series with a shaded mean +/- SE band.
void write_svg(std::ostream& out, const PlotFrame& frame);

/// Series for `kind`, one per method found in `rows`. Throws ConfigError
/// naming the available methods / parameters when the selection is empty.
PlotFrame results_frame(const std::vector<ResultRow>& rows, PlotKind kind);

struct RatePoint {
  double beta;
  double a0;
  double a1;
};

/// `count` equally spaced values of beta over [0.01, 0.49].
std::vector<RatePoint> rate_curve_grid(int count = 481);
void write_rates_csv(std::ostream& out, const std::vector<RatePoint>& grid);
PlotFrame rates_frame(const std::vector<RatePoint>& grid);

void plot_results(const std::vector<ResultRow>& rows, PlotKind kind, const std::filesystem::path& svg);

}  // namespace rscore
