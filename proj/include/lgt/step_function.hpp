#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lgt/grid.hpp"

namespace lgt {

/// Right-continuous step function on [0, oo) with finite support:
/// value values[i] on [knots[i-1], knots[i]) (knots[-1] = 0), zero beyond knots.back().
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() != values_.size()) {
      throw Error(ErrorCode::InvalidArgument, "step function needs one value per knot");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!(knots_[i] > prev) || !std::isfinite(knots_[i])) {
        throw Error(ErrorCode::InvalidArgument, "knots must be finite, positive and strictly increasing");
      }
      if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
        throw Error(ErrorCode::InvalidArgument, "values must be finite and non-negative");
      }
      prev = knots_[i];
    }
  }

  /// value on [0, length)
  static StepFunction indicator(double length, double value = 1.0) { return StepFunction({length}, {value}); }

  /// Blocks laid out from 0 with the given measures.
  static StepFunction from_blocks(std::span<const double> values, std::span<const double> measures) {
    std::vector<double> knots(measures.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < measures.size(); ++i) knots[i] = (acc += measures[i]);
    return StepFunction(std::move(knots), std::vector<double>(values.begin(), values.end()));
  }

  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return knots_.size(); }
  bool empty() const noexcept { return knots_.empty(); }
  double support_end() const noexcept { return knots_.empty() ? 0.0 : knots_.back(); }
  double left(std::size_t i) const { return i == 0 ? 0.0 : knots_[i - 1]; }
  double measure(std::size_t i) const { return knots_[i] - left(i); }

  std::vector<double> measures() const {
    std::vector<double> m(size());
    for (std::size_t i = 0; i < size(); ++i) m[i] = measure(i);
    return m;
  }

  double operator()(double t) const {
    if (t < 0.0) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.end()) return 0.0;
    return values_[static_cast<std::size_t>(it - knots_.begin())];
  }

  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += values_[i] * measure(i);
    return s;
  }

  /// int_a^b f, summed over the overlapping blocks only.
  double integral_between(double a, double b) const {
    a = std::max(a, 0.0);
    if (!(b > a)) return 0.0;
    auto i = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), a) - knots_.begin());
    double s = 0.0;
    for (; i < size(); ++i) {
      const double lo = std::max(a, left(i));
      const double hi = std::min(b, knots_[i]);
      if (hi > lo) s += values_[i] * (hi - lo);
      if (knots_[i] >= b) break;
    }
    return s;
  }

  /// Equal adjacent values merged and trailing zero blocks removed.
  StepFunction canonical() const {
    std::vector<double> k, v;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!v.empty() && v.back() == values_[i]) {
        k.back() = knots_[i];
      } else {
        k.push_back(knots_[i]);
        v.push_back(values_[i]);
      }
    }
    while (!v.empty() && v.back() == 0.0) {
      v.pop_back();
      k.pop_back();
    }
    StepFunction out;
    out.knots_ = std::move(k);
    out.values_ = std::move(v);
    return out;
  }

  bool is_nonincreasing() const {
    return std::is_sorted(values_.begin(), values_.end(), std::greater<>());
  }

  StepFunction scaled(double lambda) const {
    StepFunction out = *this;
    for (double& v : out.values_) v *= lambda;
    return out;
  }

  /// f restricted to [0, T).
  StepFunction truncated(double T) const {
    std::vector<double> k, v;
    for (std::size_t i = 0; i < size() && left(i) < T; ++i) {
      k.push_back(std::min(knots_[i], T));
      v.push_back(values_[i]);
    }
    return StepFunction(std::move(k), std::move(v));
  }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace lgt
