#pragma once

// Log-slope fits, relaxation curves and the dynamical-exponent collapse scan.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "mipt/errors.hpp"

namespace mipt {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t n_points = 0;
};

struct Window {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Ordinary least squares y = slope * x + intercept.
inline FitResult fit_linear(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) throw FitError(fmt::format("linear fit needs at least 2 points, got {}", n));
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double scale = std::max(1.0, std::abs(mx));
  if (sxx <= 1e-24 * scale * scale * static_cast<double>(n)) throw FitError("singular design: all abscissae equal");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0.0;
  for (const auto& p : pts) {
    const double e = p.y - (r.slope * p.x + r.intercept);
    ss += e * e;
  }
  r.residual = std::sqrt(ss / static_cast<double>(n));
  r.n_points = n;
  return r;
}

// y = slope * log x + intercept over x in `window`.
inline FitResult fit_log_slope(const std::vector<Point>& series, Window window = {}) {
  std::vector<Point> pts;
  for (const auto& p : series) {
    if (!window.contains(p.x)) continue;
    if (!(p.x > 0.0)) throw FitError(fmt::format("log fit needs x > 0, got {}", p.x));
    pts.push_back({std::log(p.x), p.y});
  }
  if (pts.size() < 4) throw FitError(fmt::format("log fit needs at least 4 points in window, got {}", pts.size()));
  FitResult r = fit_linear(pts);
  r.window_lo = window.lo;
  r.window_hi = window.hi;
  return r;
}

// x = (L / pi) sin(pi l / L).
inline double chord_length(std::size_t L, std::size_t cut) {
  const double l = static_cast<double>(L);
  return l / std::numbers::pi * std::sin(std::numbers::pi * static_cast<double>(cut) / l);
}

// Temporal window: t >= 4, final quarter of the recorded range excluded.
inline Window temporal_window(const std::vector<Point>& series) {
  if (series.empty()) return {};
  double t_max = series.front().x;
  for (const auto& p : series) t_max = std::max(t_max, p.x);
  return {4.0, 0.75 * t_max};
}

// Spatial window on chord length for cuts l in [4, L/2].
inline Window spatial_window(std::size_t L) { return {chord_length(L, 4) - 1e-12, chord_length(L, L / 2) + 1e-12}; }

struct SpatialPoint {
  std::size_t cut = 0;
  double value = 0.0;
};

inline FitResult fit_spatial_log_slope(std::size_t L, const std::vector<SpatialPoint>& profile,
                                       std::optional<Window> window = std::nullopt) {
  std::vector<Point> pts;
  for (const auto& s : profile) pts.push_back({chord_length(L, s.cut), s.value});
  return fit_log_slope(pts, window.value_or(spatial_window(L)));
}

struct RelaxationCurve {
  double L = 0.0;
  double z = 1.0;
  double s_inf = 0.0;
  std::vector<Point> points;  // (tau, |S(t) - S_inf|)
  bool warning = false;
  std::string note;
};

// S_inf fixed, or "auto" (nullopt) = mean over the final 10% of recorded times.
inline RelaxationCurve relaxation_curve(const std::vector<Point>& series, double L, double z,
                                        std::optional<double> s_inf = std::nullopt) {
  if (series.empty()) throw FitError("empty series");
  if (!(L > 0.0)) throw FitError("system size must be positive");
  RelaxationCurve c;
  c.L = L;
  c.z = z;
  const double scale = std::pow(L, z);
  if (s_inf) {
    if (!std::isfinite(*s_inf)) throw FitError("S_inf must be finite");
    c.s_inf = *s_inf;
  } else {
    std::vector<Point> sorted = series;
    std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    const double t_lo = sorted.front().x;
    const double t_hi = sorted.back().x;
    const double cut = t_hi - 0.1 * (t_hi - t_lo);
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t n = 0;
    for (const auto& p : sorted) {
      if (p.x < cut) continue;
      sum += p.y;
      lo = std::min(lo, p.y);
      hi = std::max(hi, p.y);
      ++n;
    }
    c.s_inf = sum / static_cast<double>(n);
    if (std::abs(c.s_inf) > 0.0 && (hi - lo) / std::abs(c.s_inf) > 0.1) {
      c.warning = true;
      c.note = "tail spread above 10%";
    }
    if (t_hi < 4.0 * scale) {
      c.warning = true;
      c.note += c.note.empty() ? "" : "; ";
      c.note += fmt::format("largest t = {} below 4 L^z = {}", t_hi, 4.0 * scale);
    }
  }
  for (const auto& p : series) c.points.push_back({p.x / scale, std::abs(p.y - c.s_inf)});
  return c;
}

// log dS = -alpha tau + b; slope reported as alpha.
inline FitResult fit_exponential_tail(const std::vector<Point>& curve, Window window = {}) {
  std::vector<Point> pts;
  for (const auto& p : curve) {
    if (window.contains(p.x) && p.y > 0.0) pts.push_back({p.x, std::log(p.y)});
  }
  if (pts.size() < 4) throw FitError(fmt::format("exponential tail fit needs 4 positive points, got {}", pts.size()));
  FitResult r = fit_linear(pts);
  r.slope = -r.slope;
  r.window_lo = window.lo;
  r.window_hi = window.hi;
  return r;
}

// log dS = slope log tau + b.
inline FitResult fit_power_law(const std::vector<Point>& curve, Window window = {}) {
  std::vector<Point> pts;
  for (const auto& p : curve) {
    if (window.contains(p.x) && p.x > 0.0 && p.y > 0.0) pts.push_back({std::log(p.x), std::log(p.y)});
  }
  if (pts.size() < 4) throw FitError(fmt::format("power-law fit needs 4 positive points, got {}", pts.size()));
  FitResult r = fit_linear(pts);
  r.window_lo = window.lo;
  r.window_hi = window.hi;
  return r;
}

struct CollapseScan {
  double best_z = 0.0;
  double best_quality = std::numeric_limits<double>::infinity();
  std::vector<Point> quality;  // (z, quality)
};

namespace collapse {

// Piecewise-linear interpolation in (log tau, log dS); points sorted by x.
inline double interpolate(const std::vector<Point>& pts, double x) {
  auto it = std::lower_bound(pts.begin(), pts.end(), x, [](const Point& p, double v) { return p.x < v; });
  if (it == pts.begin()) return it->y;
  if (it == pts.end()) return pts.back().y;
  const Point& b = *it;
  const Point& a = *(it - 1);
  if (b.x == a.x) return b.y;
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

inline std::vector<Point> log_log(const std::vector<Point>& curve, double scale, Window tau_window) {
  std::vector<Point> out;
  for (const auto& p : curve) {
    const double tau = p.x / scale;
    if (p.x > 0.0 && p.y > 0.0 && tau_window.contains(tau)) out.push_back({std::log(tau), std::log(p.y)});
  }
  std::sort(out.begin(), out.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
  return out;
}

}  // namespace collapse

// Curves are raw (t, dS) per system size. quality(z) is the mean squared
// vertical distance between every pair of log-log curves, evaluated at the
// union of their abscissae inside the overlap. No overlap gives infinity.
inline CollapseScan scan_collapse_z(const std::map<double, std::vector<Point>>& curves_by_L,
                                    const std::vector<double>& z_grid, Window tau_window = {}) {
  if (curves_by_L.size() < 2) throw FitError("collapse needs at least 2 system sizes");
  if (z_grid.empty()) throw FitError("empty z grid");
  CollapseScan scan;
  for (double z : z_grid) {
    std::vector<std::vector<Point>> lls;
    for (const auto& [L, curve] : curves_by_L) lls.push_back(collapse::log_log(curve, std::pow(L, z), tau_window));
    double sum = 0.0;
    std::size_t count = 0;
    bool overlap_everywhere = true;
    for (std::size_t i = 0; i < lls.size() && overlap_everywhere; ++i) {
      for (std::size_t j = i + 1; j < lls.size(); ++j) {
        const auto& a = lls[i];
        const auto& b = lls[j];
        if (a.size() < 2 || b.size() < 2) {
          overlap_everywhere = false;
          break;
        }
        const double lo = std::max(a.front().x, b.front().x);
        const double hi = std::min(a.back().x, b.back().x);
        if (!(hi > lo)) {
          overlap_everywhere = false;
          break;
        }
        std::size_t pair_count = 0;
        for (const auto* src : {&a, &b}) {
          for (const auto& p : *src) {
            if (p.x < lo || p.x > hi) continue;
            const double d = collapse::interpolate(a, p.x) - collapse::interpolate(b, p.x);
            sum += d * d;
            ++pair_count;
          }
        }
        if (pair_count == 0) {
          overlap_everywhere = false;
          break;
        }
        count += pair_count;
      }
    }
    const double q = overlap_everywhere ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
    scan.quality.push_back({z, q});
    if (q < scan.best_quality) {
      scan.best_quality = q;
      scan.best_z = z;
    }
  }
  if (!std::isfinite(scan.best_quality)) throw FitError("no z in the grid gives overlapping curves");
  return scan;
}

// "a:b:step" inclusive of b up to rounding.
inline std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t colon = std::min(text.find(':', pos), text.size());
    const std::string item(text.substr(pos, colon - pos));
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("bad grid component '{}'", item));
    }
    pos = colon + 1;
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw ConfigError(fmt::format("grid must be a:b:step with a <= b and step > 0, got '{}'", text));
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  return out;
}

}  // namespace mipt
