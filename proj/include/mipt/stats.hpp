#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace mipt::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Standard error of the mean with the unbiased variance; zero for n < 2.
inline double sem(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

inline double log_sum_exp(std::span<const double> logs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double l : logs) mx = std::max(mx, l);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - mx);
  return mx + std::log(acc);
}

// Jackknife for an estimator f(mean_1, ..., mean_k) of k per-sample series.
// Series are given in scaled form: value_j[i] = x_j[i] * exp(-shift_j), so
// that f sees means in the scaled domain.
struct JackknifeResult {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline JackknifeResult jackknife(const std::vector<std::vector<double>>& series,
                                 const std::function<double(std::span<const double>)>& f) {
  const std::size_t k = series.size();
  const std::size_t n = series.empty() ? 0 : series[0].size();
  std::vector<double> totals(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (double v : series[j]) totals[j] += v;
  }
  std::vector<double> means(k);
  for (std::size_t j = 0; j < k; ++j) means[j] = totals[j] / static_cast<double>(n);
  JackknifeResult r;
  r.value = f(means);
  if (n < 2) return r;
  std::vector<double> loo(n);
  std::vector<double> m(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[j] = (totals[j] - series[j][i]) / static_cast<double>(n - 1);
    loo[i] = f(m);
  }
  const double lm = mean(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - lm) * (v - lm);
  r.stderr_ = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
  return r;
}

}  // namespace mipt::stats
