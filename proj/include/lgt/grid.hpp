#pragma once

// Log-uniform grids on the half line, tail declarations and the error type
// shared by every module.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgt {

enum class ErrorCode {
  NonIntegrableAtZero,
  NonIntegrableAtInfinity,
  NonIntegrableTail,
  NonFinite,
  UnknownTail,
  AdmissibilityFailed,
  GrowthConditionViolated,
  InvalidArgument,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonIntegrableAtZero: return "NonIntegrableAtZero";
    case ErrorCode::NonIntegrableAtInfinity: return "NonIntegrableAtInfinity";
    case ErrorCode::NonIntegrableTail: return "NonIntegrableTail";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::UnknownTail: return "UnknownTail";
    case ErrorCode::AdmissibilityFailed: return "AdmissibilityFailed";
    case ErrorCode::GrowthConditionViolated: return "GrowthConditionViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Power-law behaviour of an integrand: ~ C t^a as t -> 0+ and ~ C t^b as t -> oo.
/// Either end may be unknown; integrals that need an unknown end throw UnknownTail.
struct TailSpec {
  std::optional<double> exponent_at_zero;
  std::optional<double> exponent_at_infinity;

  static TailSpec power(double a0, double ainf) { return TailSpec{a0, ainf}; }
};

/// Log-uniform nodes t_min = t_0 < t_1 < ... < t_n = t_max with constant ratio.
class GeometricGrid {
 public:
  GeometricGrid(double t_min, double t_max, int points_per_decade)
      : t_min_(t_min), t_max_(t_max), points_per_decade_(points_per_decade) {
    if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max) || points_per_decade < 1) {
      throw Error(ErrorCode::InvalidArgument, "grid needs 0 < t_min < t_max < inf and points_per_decade >= 1");
    }
    const double decades = std::log10(t_max / t_min);
    const auto cells = static_cast<std::size_t>(std::max(1.0, std::ceil(decades * points_per_decade - 1e-9)));
    log_step_ = std::log(t_max / t_min) / static_cast<double>(cells);
    nodes_.resize(cells + 1);
    const double log_min = std::log(t_min);
    for (std::size_t i = 0; i <= cells; ++i) {
      nodes_[i] = std::exp(log_min + static_cast<double>(i) * log_step_);
    }
    nodes_.front() = t_min;
    nodes_.back() = t_max;
  }

  /// 1e-8 .. 1e8 at 32 points per decade (513 nodes).
  static GeometricGrid standard() { return GeometricGrid(1e-8, 1e8, 32); }

  /// Default grid, overridable through LGT_GRID="t_min,t_max,points_per_decade".
  static GeometricGrid from_environment() {
    const char* env = std::getenv("LGT_GRID");
    if (env == nullptr || *env == '\0') return standard();
    return parse(env);
  }

  static GeometricGrid parse(const std::string& text) {
    std::istringstream in(text);
    double lo = 0, hi = 0;
    int ppd = 0;
    char c1 = 0, c2 = 0;
    if (!(in >> lo >> c1 >> hi >> c2 >> ppd) || c1 != ',' || c2 != ',') {
      throw Error(ErrorCode::InvalidArgument, "grid literal must be 't_min,t_max,points_per_decade', got '" + text + "'");
    }
    return GeometricGrid(lo, hi, ppd);
  }

  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  int points_per_decade() const noexcept { return points_per_decade_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t cells() const noexcept { return nodes_.size() - 1; }
  double operator[](std::size_t i) const { return nodes_[i]; }

  /// Width of one cell in log t.
  double log_step() const noexcept { return log_step_; }
  double ratio() const noexcept { return std::exp(log_step_); }

  /// Index of the cell containing t, clamped to [0, cells()-1].
  std::size_t cell_of(double t) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    const auto i = static_cast<std::ptrdiff_t>(it - nodes_.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(cells()) - 1));
  }

  /// Node indices spanning the first and last decade; used for boundary slopes.
  std::size_t nodes_per_decade_span() const {
    const auto n = static_cast<std::size_t>(std::lround(std::log(10.0) / log_step_));
    return std::max<std::size_t>(1, std::min(n, cells()));
  }

 private:
  double t_min_;
  double t_max_;
  int points_per_decade_;
  double log_step_ = 0.0;
  std::vector<double> nodes_;
};

}  // namespace lgt
