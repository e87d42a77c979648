#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <lrp/estimation.hpp>

namespace lrp::cli {

struct SeriesPoint {
  Site n = 0;
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double std_error = 0.0;
  std::string series;
  std::size_t line = 0;  // 1-based line in the source CSV
};

/// Reads a series CSV. Required columns: n, mean, ci_lo, ci_hi. Optional:
/// std_error (otherwise taken from the CI half-width) and series. Errors
/// name the offending line.
std::vector<SeriesPoint> parse_series_csv(std::string_view text);

struct SeriesFit {
  std::string series;
  std::size_t points = 0;
  std::optional<ExponentFit> fit;  // absent for single-point series
};

struct Plot {
  std::string svg;
  std::vector<SeriesFit> fits;
};

/// Log-log scatter with error bars and one fitted power law per series,
/// annotated with the fitted exponent to four decimals.
Plot render_plot(std::span<const SeriesPoint> points, std::string_view title = {});

/// The four-decimal label used in the annotation.
std::string format_exponent(double delta_hat);

}  // namespace lrp::cli
