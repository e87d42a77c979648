#include "lrp_cli/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <lrp/error.hpp>

namespace lrp::cli {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 40.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;
constexpr double kZ95 = 1.959963984540054;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view field, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(value)) {
    parse_error(line, "column " + std::string(column) + " is not a finite number: '" +
                          std::string(field) + "'");
  }
  return value;
}

Site to_site(std::string_view field, std::size_t line) {
  Site value = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || value < 1) {
    parse_error(line, "column n is not a positive integer: '" + std::string(field) + "'");
  }
  return value;
}

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  if (v >= 1e-3 && v < 1e5) {
    std::snprintf(buf, sizeof buf, "%g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.0e", v);
  }
  return buf;
}

struct Axis {
  double lo = 0.0;  // log10 bounds
  double hi = 0.0;
  double from = 0.0;  // pixel bounds
  double to = 0.0;

  double map(double value) const {
    return from + (std::log10(value) - lo) / (hi - lo) * (to - from);
  }
};

Axis make_axis(double min, double max, double from, double to) {
  double lo = std::log10(min);
  double hi = std::log10(max);
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad, from, to};
}

std::vector<double> y_ticks(const Axis& axis) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::ceil(axis.lo)); e <= static_cast<int>(std::floor(axis.hi)); ++e) {
    for (const double m : {1.0, 2.0, 5.0}) {
      const double v = m * std::pow(10.0, e);
      if (std::log10(v) <= axis.hi) ticks.push_back(v);
    }
  }
  if (ticks.size() < 2) {
    ticks.clear();
    for (int k = 0; k <= 4; ++k) {
      ticks.push_back(std::pow(10.0, axis.lo + (axis.hi - axis.lo) * (0.1 + 0.2 * k)));
    }
  }
  return ticks;
}

}  // namespace

std::vector<SeriesPoint> parse_series_csv(std::string_view text) {
  std::vector<SeriesPoint> points;
  std::map<std::string, std::size_t, std::less<>> columns;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end == text.npos ? text.npos : end - start);
    start = end == text.npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == line.npos) continue;
    const auto fields = split(line);
    if (!have_header) {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        if (!columns.emplace(std::string(fields[k]), k).second) {
          parse_error(line_no, "duplicate column '" + std::string(fields[k]) + "'");
        }
      }
      for (const char* required : {"n", "mean", "ci_lo", "ci_hi"}) {
        if (!columns.contains(required)) {
          parse_error(line_no, std::string("header lacks required column '") + required + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != columns.size()) {
      parse_error(line_no, "expected " + std::to_string(columns.size()) + " fields, found " +
                               std::to_string(fields.size()));
    }
    SeriesPoint p;
    p.line = line_no;
    p.n = to_site(fields[columns.at("n")], line_no);
    p.mean = to_double(fields[columns.at("mean")], line_no, "mean");
    p.ci_lo = to_double(fields[columns.at("ci_lo")], line_no, "ci_lo");
    p.ci_hi = to_double(fields[columns.at("ci_hi")], line_no, "ci_hi");
    if (p.ci_lo > p.mean || p.mean > p.ci_hi) parse_error(line_no, "mean lies outside its CI");
    if (const auto it = columns.find("std_error"); it != columns.end()) {
      p.std_error = to_double(fields[it->second], line_no, "std_error");
      if (p.std_error < 0.0) parse_error(line_no, "std_error is negative");
    } else {
      p.std_error = (p.ci_hi - p.ci_lo) / (2.0 * kZ95);
    }
    if (const auto it = columns.find("series"); it != columns.end()) {
      p.series = std::string(fields[it->second]);
    }
    points.push_back(std::move(p));
  }
  if (!have_header) parse_error(line_no == 0 ? 1 : line_no, "missing header");
  return points;
}

std::string format_exponent(double delta_hat) { return fixed(delta_hat, 4); }

Plot render_plot(std::span<const SeriesPoint> points, std::string_view title) {
  if (points.empty()) fail(ErrorCode::plot_refused, "series is empty; nothing to plot");

  std::vector<std::string> order;
  std::map<std::string, std::vector<SeriesPoint>> by_series;
  for (const auto& p : points) {
    if (!(p.mean > 0.0)) {
      fail(ErrorCode::plot_refused,
           "line " + std::to_string(p.line) + ": nonpositive mean cannot be drawn on a log axis");
    }
    if (!by_series.contains(p.series)) order.push_back(p.series);
    by_series[p.series].push_back(p);
  }

  Plot plot;
  double xmin = points.front().n, xmax = xmin;
  double ymin = points.front().mean, ymax = ymin;
  for (const auto& p : points) {
    xmin = std::min(xmin, static_cast<double>(p.n));
    xmax = std::max(xmax, static_cast<double>(p.n));
    ymin = std::min(ymin, p.ci_lo > 0.0 ? p.ci_lo : p.mean);
    ymax = std::max(ymax, p.ci_hi);
  }
  for (const auto& name : order) {
    auto& series = by_series[name];
    std::sort(series.begin(), series.end(),
              [](const SeriesPoint& a, const SeriesPoint& b) { return a.n < b.n; });
    SeriesFit sf{name, series.size(), std::nullopt};
    std::set<Site> distinct;
    for (const auto& p : series) distinct.insert(p.n);
    if (distinct.size() >= 2) {
      std::vector<Estimate> estimates;
      for (const auto& p : series) {
        Estimate e;
        e.n = p.n;
        e.mean = p.mean;
        e.std_error = p.std_error;
        estimates.push_back(e);
      }
      sf.fit = estimates.size() >= 4 ? fit_exponent(estimates) : fit_power_law(estimates);
      for (const double n : {static_cast<double>(series.front().n),
                             static_cast<double>(series.back().n)}) {
        const double y = std::exp(sf.fit->intercept + sf.fit->delta_hat * std::log(n));
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
    plot.fits.push_back(std::move(sf));
  }

  const Axis xa = make_axis(xmin, xmax, kLeft, kWidth - kRight);
  const Axis ya = make_axis(ymin, ymax, kHeight - kBottom, kTop);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << fixed(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(title) << "</text>\n";
  }
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  os << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
     << "<rect x=\"" << fixed(x0) << "\" y=\"" << fixed(y1) << "\" width=\"" << fixed(x1 - x0)
     << "\" height=\"" << fixed(y0 - y1) << "\"/>\n</g>\n";

  std::set<Site> xs;
  for (const auto& p : points) xs.insert(p.n);
  os << "<g class=\"ticks\">\n";
  for (const Site n : xs) {
    const double x = xa.map(static_cast<double>(n));
    os << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y0) << "\" x2=\"" << fixed(x) << "\" y2=\""
       << fixed(y0 + 5) << "\" stroke=\"black\"/>"
       << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(y0 + 18) << "\" text-anchor=\"middle\">" << n
       << "</text>\n";
  }
  for (const double v : y_ticks(ya)) {
    const double y = ya.map(v);
    os << "<line x1=\"" << fixed(x0 - 5) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(x0)
       << "\" y2=\"" << fixed(y) << "\" stroke=\"black\"/>"
       << "<text x=\"" << fixed(x0 - 8) << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">"
       << tick_label(v) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << fixed((x0 + x1) / 2) << "\" y=\"" << fixed(kHeight - 15)
     << "\" text-anchor=\"middle\">n</text>\n";
  os << "<text x=\"18\" y=\"" << fixed((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << fixed((y0 + y1) / 2) << ")\">mean resistance</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    const auto& series = by_series[order[s]];
    const char* color = kPalette[s % std::size(kPalette)];
    os << "<g class=\"series\" data-series=\"" << escape(order[s]) << "\">\n";
    for (const auto& p : series) {
      const double x = xa.map(static_cast<double>(p.n));
      const double lo = ya.map(p.ci_lo > 0.0 ? p.ci_lo : std::pow(10.0, ya.lo));
      const double hi = ya.map(p.ci_hi);
      os << "<line class=\"errorbar\" x1=\"" << fixed(x) << "\" y1=\"" << fixed(lo) << "\" x2=\""
         << fixed(x) << "\" y2=\"" << fixed(hi) << "\" stroke=\"" << color << "\"/>\n";
      os << "<circle class=\"marker\" cx=\"" << fixed(x) << "\" cy=\"" << fixed(ya.map(p.mean))
         << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    const auto& sf = plot.fits[s];
    if (sf.fit) {
      const double na = static_cast<double>(series.front().n);
      const double nb = static_cast<double>(series.back().n);
      const auto at = [&](double n) {
        return ya.map(std::exp(sf.fit->intercept + sf.fit->delta_hat * std::log(n)));
      };
      os << "<line class=\"fit\" x1=\"" << fixed(xa.map(na)) << "\" y1=\"" << fixed(at(na))
         << "\" x2=\"" << fixed(xa.map(nb)) << "\" y2=\"" << fixed(at(nb)) << "\" stroke=\"" << color
         << "\" stroke-dasharray=\"6 3\"/>\n";
    }
    os << "<text class=\"annotation\" x=\"" << fixed(x0 + 12) << "\" y=\"" << fixed(y1 + 18 + 16.0 * s)
       << "\" fill=\"" << color << "\">" << escape(order[s].empty() ? "series" : order[s]);
    if (sf.fit) {
      os << ": δ̂ = " << format_exponent(sf.fit->delta_hat) << " ± "
         << format_exponent(sf.fit->std_error);
    }
    os << "</text>\n</g>\n";
  }
  os << "</svg>\n";
  plot.svg = os.str();
  return plot;
}

}  // namespace lrp::cli
