#pragma once

// Probability distributions and Renyi entropies. All entropies are in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "mipt/errors.hpp"

namespace mipt {

inline constexpr double kLn2 = 0.69314718055993530942;

class ProbDist {
 public:
  static constexpr double kTolerance = 1e-10;
  static constexpr double kRenormalizeLimit = 1e-8;

  ProbDist() = default;

  // Drift up to kRenormalizeLimit is absorbed by rescaling; anything larger
  // is a bug upstream.
  explicit ProbDist(std::vector<double> weights) : weights_(std::move(weights)) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double w = weights_[i];
      if (!(w >= 0.0)) {
        throw DomainError(fmt::format("probability weight {} at index {} is negative or NaN", w, i));
      }
      total += w;
    }
    const double deviation = std::abs(total - 1.0);
    if (deviation > kRenormalizeLimit) {
      throw NormalizationError(fmt::format("weights sum to {} (deviation {:.3e})", total, deviation));
    }
    if (deviation > kTolerance) {
      for (double& w : weights_) w /= total;
    }
  }

  static ProbDist uniform(std::size_t m) { return ProbDist(std::vector<double>(m, 1.0 / static_cast<double>(m))); }

  std::span<const double> weights() const { return weights_; }
  std::size_t label_space() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
};

struct RenyiOrder {
  double n = 1.0;

  constexpr RenyiOrder() = default;
  constexpr RenyiOrder(double order) : n(order) {}  // NOLINT(google-explicit-constructor)

  bool is_shannon() const { return n == 1.0; }
};

struct EntropyValue {
  static constexpr const char* kUnit = "nats";
  double value = 0.0;

  constexpr EntropyValue() = default;
  constexpr explicit EntropyValue(double v) : value(v) {}

  friend constexpr bool operator==(EntropyValue, EntropyValue) = default;
};

inline EntropyValue renyi_entropy(const ProbDist& dist, RenyiOrder order) {
  if (!(order.n >= 0.0)) {
    throw DomainError(fmt::format("Renyi order must be non-negative, got {}", order.n));
  }
  const auto w = dist.weights();
  if (order.is_shannon()) {
    double s = 0.0;
    for (double q : w) {
      if (q > 0.0) s -= q * std::log(q);
    }
    return EntropyValue(s);
  }
  if (order.n == 0.0) {
    const auto support = std::count_if(w.begin(), w.end(), [](double q) { return q > 0.0; });
    return EntropyValue(std::log(static_cast<double>(support)));
  }
  if (std::isinf(order.n)) {
    double m = 0.0;
    for (double q : w) m = std::max(m, q);
    return EntropyValue(-std::log(m));
  }
  double acc = 0.0;
  for (double q : w) {
    if (q > 0.0) acc += std::pow(q, order.n);
  }
  const double s = std::log(acc) / (1.0 - order.n);
  // The n -> 1 and n -> 0 limits are approached from both sides; tiny negative
  // round-off on delta distributions is clipped.
  return EntropyValue(s < 0.0 && s > -1e-14 ? 0.0 : s);
}

inline EntropyValue mutual_information(EntropyValue s_a, EntropyValue s_b, EntropyValue s_ab) {
  return EntropyValue(s_a.value + s_b.value - s_ab.value);
}

}  // namespace mipt
