#pragma once

// Quadrature on (0, oo) for integrands with power tails.
//
// Every finite piece is integrated with an 8-point Gauss-Legendre rule in the
// variable log t, on sub-cells whose log-width matches the grid spacing.  The
// piece below the lowest node and the piece above the highest node are
// integrated analytically from a law C t^a |ln t|^c fitted at the three
// outermost nodes; the caller's declared exponent is the fallback whenever
// the fitted one is not integrable (or not measurable, e.g. a zero sample).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "lgt/grid.hpp"

namespace lgt::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// 8-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::array<double, 8> x{};
  std::array<double, 8> w{};
};

inline const GaussRule& gauss8() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 8>;
    GaussRule r;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    // boost stores the non-negative half
    for (std::size_t i = 0; i < 4; ++i) {
      r.x[i] = -a[3 - i];
      r.w[i] = wt[3 - i];
      r.x[7 - i] = a[3 - i];
      r.w[7 - i] = wt[3 - i];
    }
    return r;
  }();
  return rule;
}

namespace detail {

inline double checked(double v, double t) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFinite, "integrand is not finite at t=" + std::to_string(t));
  }
  return v;
}

}  // namespace detail

/// One Gauss cell in log coordinates: int_a^b f(t) dt with t = e^u.
template <class F>
double gauss_log_cell(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto& g = gauss8();
  const double la = std::log(a), lb = std::log(b);
  const double half = 0.5 * (lb - la), mid = 0.5 * (lb + la);
  double sum = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double t = std::exp(mid + half * g.x[i]);
    sum += g.w[i] * detail::checked(f(t), t) * t;
  }
  return sum * half;
}

/// int_a^b f with 0 < a < b, cut at `breaks` and sub-divided to log-width <= log_step.
template <class F>
double integrate_interval(const F& f, double a, double b, double log_step, std::span<const double> breaks = {}) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double x : breaks) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (!(hi > lo)) continue;
    const double width = std::log(hi / lo);
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(width / log_step - 1e-9)));
    const double step = width / static_cast<double>(n);
    double left = lo;
    for (std::size_t j = 0; j < n; ++j) {
      const double right = (j + 1 == n) ? hi : lo * std::exp(step * static_cast<double>(j + 1));
      total += gauss_log_cell(f, left, right);
      left = right;
    }
  }
  return total;
}

/// Fitted law f ~ value (t/anchor)^exponent |ln t / ln anchor|^clog at one
/// end of the range.
struct PowerFit {
  double value = 0.0;     // f at the anchor node
  double anchor = 0.0;    // anchor node
  double exponent = 0.0;  // exponent actually used
  bool zero = false;      // integrand vanishes at the anchor
  double clog = 0.0;      // power of |ln t|, 0 for a pure power
};

namespace detail {

/// int_0^oo e^{-s v} (1 + v/L)^c dv for s > 0, L > 0.
inline double log_factor_laplace(double s, double L, double c) {
  if (c == 0.0) return 1.0 / s;
  static thread_local boost::math::quadrature::exp_sinh<double> es;
  return es.integrate([=](double v) { return std::exp(-s * v + c * std::log1p(v / L)); }, 0.0, kInf);
}

/// Curvature of ln f against ln|ln t| from three equally log-spaced nodes
/// t0 < t1 < t2, all on one side of 1 and away from it.
inline double fit_log_power(double t0, double f0, double t1, double f1, double t2, double f2) {
  if (!(f0 > 0.0 && f1 > 0.0 && f2 > 0.0)) return 0.0;
  const double l0 = std::log(std::abs(std::log(t0))), l1 = std::log(std::abs(std::log(t1)));
  const double l2 = std::log(std::abs(std::log(t2)));
  const double d2 = l0 - 2.0 * l1 + l2;
  if (!(std::abs(d2) > 0.0)) return 0.0;
  const double c = (std::log(f0) - 2.0 * std::log(f1) + std::log(f2)) / d2;
  if (!std::isfinite(c) || std::abs(c) < 1e-3 || std::abs(c) > 8.0) return 0.0;
  return c;
}

}  // namespace detail

/// Fit near zero from f(t0), f(t1) with t0 < t1.  The declared exponent wins
/// when the fit is within 1e-3 of it, or when the fitted one is not > -1.  Returns exponent <= -1 only when
/// nothing integrable is available.  With a third node t2 (same log step)
/// below 1/e, a |ln t| power is fitted as well.
inline PowerFit fit_at_zero(double t0, double f0, double t1, double f1, std::optional<double> declared,
                            double t2 = 0.0, double f2 = 0.0) {
  PowerFit fit{f0, t0, 0.0, !(f0 > 0.0)};
  if (fit.zero) return fit;
  double c = 0.0;
  if (t2 > 0.0 && t2 < std::exp(-1.0)) c = detail::fit_log_power(t0, f0, t1, f1, t2, f2);
  const double lr = std::log(t1 / t0);
  double a = (f1 > 0.0) ? (std::log(f1 / f0) - c * std::log(std::log(t1) / std::log(t0))) / lr
                        : std::numeric_limits<double>::quiet_NaN();
  if (!(std::isfinite(a) && a > -1.0 + 1e-9) || (c == 0.0 && declared && std::abs(a - *declared) < 1e-3)) {
    a = declared.value_or(a);
    c = 0.0;
  }
  fit.exponent = a;
  fit.clog = c;
  return fit;
}

/// Fit at infinity from f(t0), f(t1) with t0 < t1 (t1 the anchor); with a
/// node tm < t0 (same log step) above e, a |ln t| power is fitted as well.
inline PowerFit fit_at_infinity(double t0, double f0, double t1, double f1, std::optional<double> declared,
                                double tm = 0.0, double fm = 0.0) {
  PowerFit fit{f1, t1, 0.0, !(f1 > 0.0)};
  if (fit.zero) return fit;
  double c = 0.0;
  if (tm > std::exp(1.0)) c = detail::fit_log_power(tm, fm, t0, f0, t1, f1);
  double b = (f0 > 0.0) ? (std::log(f1 / f0) - c * std::log(std::log(t1) / std::log(t0))) / std::log(t1 / t0)
                        : std::numeric_limits<double>::quiet_NaN();
  if (!(std::isfinite(b) && b < -1.0 - 1e-9) || (c == 0.0 && declared && std::abs(b - *declared) < 1e-3)) {
    b = declared.value_or(b);
    c = 0.0;
  }
  fit.exponent = b;
  fit.clog = c;
  return fit;
}

/// int_0^t of the fitted law at zero (t <= anchor); +inf if not integrable.
inline double fit_head(const PowerFit& fit, double t) {
  if (fit.zero) return 0.0;
  if (!(fit.exponent > -1.0)) return kInf;
  const double e = fit.exponent + 1.0;
  const double ft = fit.value * std::pow(t / fit.anchor, fit.exponent) *
                    (fit.clog == 0.0 ? 1.0 : std::pow(std::log(t) / std::log(fit.anchor), fit.clog));
  // t = e^{-v} t_0: int = f(t0) t0 int_0^oo e^{-(a+1) v} (1 + v/|ln t0|)^c dv
  return ft * t * detail::log_factor_laplace(e, std::abs(std::log(t)), fit.clog);
}

/// int_t^oo of the fitted law at infinity (t >= anchor); +inf if not integrable.
inline double fit_tail(const PowerFit& fit, double t) {
  if (fit.zero) return 0.0;
  if (!(fit.exponent < -1.0)) return kInf;
  const double e = -(fit.exponent + 1.0);
  const double ft = fit.value * std::pow(t / fit.anchor, fit.exponent) *
                    (fit.clog == 0.0 ? 1.0 : std::pow(std::log(t) / std::log(fit.anchor), fit.clog));
  return ft * t * detail::log_factor_laplace(e, std::log(t), fit.clog);
}

inline double integrate_fit_at_zero(const PowerFit& fit) { return fit_head(fit, fit.anchor); }
inline double integrate_fit_at_infinity(const PowerFit& fit) { return fit_tail(fit, fit.anchor); }

/// int_0^T f.  The Gauss part starts at min(t_min, T 1e-8) (lowered further
/// below any break) and the rest is the analytic power cell.
template <class F>
double integrate_0_to_T(const F& f, double T, const TailSpec& tail0, const GeometricGrid& grid,
                        std::span<const double> breaks = {}) {
  if (!tail0.exponent_at_zero) throw Error(ErrorCode::UnknownTail, "integrate_0_to_T needs exponent_at_zero");
  if (!(*tail0.exponent_at_zero > -1.0)) {
    throw Error(ErrorCode::NonIntegrableAtZero, "declared exponent at zero must exceed -1");
  }
  if (!(T > 0.0)) return 0.0;
  const double r = grid.ratio();
  double lower = std::min(grid.t_min(), T * 1e-8);
  for (double x : breaks) {
    if (x > 0.0 && x < T) lower = std::min(lower, x / (r * r));
  }
  const double t1 = lower * r, t2 = t1 * r;
  const auto fit = fit_at_zero(lower, detail::checked(f(lower), lower), t1, detail::checked(f(t1), t1),
                               tail0.exponent_at_zero, t2, t2 < T ? detail::checked(f(t2), t2) : 0.0);
  return integrate_fit_at_zero(fit) + integrate_interval(f, lower, T, grid.log_step(), breaks);
}

/// int_T^oo f.  Splits at max(T, t_max) (raised above any break); T = 0 means
/// the whole half line.
template <class F>
double integrate_T_to_inf(const F& f, double T, const TailSpec& tail_inf, const GeometricGrid& grid,
                          std::span<const double> breaks = {}) {
  if (!tail_inf.exponent_at_infinity) throw Error(ErrorCode::UnknownTail, "integrate_T_to_inf needs exponent_at_infinity");
  if (!(*tail_inf.exponent_at_infinity < -1.0)) {
    throw Error(ErrorCode::NonIntegrableAtInfinity, "declared exponent at infinity must be below -1");
  }
  const double r = grid.ratio();
  double upper = std::max(grid.t_max(), T * 1e8);
  for (double x : breaks) {
    if (x > T) upper = std::max(upper, x * r * r);
  }
  const double t0 = upper / r, tm = t0 / r;
  const auto fit = fit_at_infinity(t0, detail::checked(f(t0), t0), upper, detail::checked(f(upper), upper),
                                   tail_inf.exponent_at_infinity, tm, tm > T ? detail::checked(f(tm), tm) : 0.0);
  double total = integrate_fit_at_infinity(fit);
  double start = T;
  if (!(T > 0.0)) {
    start = grid.t_min();
    const double s1 = start * r;
    const double s2 = s1 * r;
    const auto zfit = fit_at_zero(start, detail::checked(f(start), start), s1, detail::checked(f(s1), s1),
                                  tail_inf.exponent_at_zero, s2, detail::checked(f(s2), s2));
    if (!zfit.zero && !(zfit.exponent > -1.0)) {
      throw Error(ErrorCode::NonIntegrableAtZero, "integrand over the whole half line is not integrable at zero");
    }
    total += integrate_fit_at_zero(zfit);
  }
  return total + integrate_interval(f, start, upper, grid.log_step(), breaks);
}

/// int_0^T f and int_T^oo f by exp-sinh in v, with y = T e^-v or y = T e^v.
/// For integrands like log(x/y)^r u(y) whose end behaviour is not a power law
/// in |ln y|.  Points that under- or overflow contribute nothing.
template <class F>
double integrate_0_to_T_exp_sinh(const F& f, double T) {
  static thread_local boost::math::quadrature::exp_sinh<double> es;
  auto g = [&](double v) {
    const double y = T * std::exp(-v);
    if (!(y > 0.0)) return 0.0;
    return detail::checked(f(y), y) * y;
  };
  return es.integrate(g, 0.0, kInf);
}

template <class F>
double integrate_T_to_inf_exp_sinh(const F& f, double T) {
  static thread_local boost::math::quadrature::exp_sinh<double> es;
  auto g = [&](double v) {
    const double y = T * std::exp(v);
    if (!std::isfinite(y)) return 0.0;
    const double fy = detail::checked(f(y), y);
    return fy == 0.0 ? 0.0 : fy * y;
  };
  return es.integrate(g, 0.0, kInf);
}

/// int_0^oo f, cut at 1 (or the first break).
template <class F>
double integrate_0_to_inf(const F& f, const TailSpec& tails, const GeometricGrid& grid,
                          std::span<const double> breaks = {}) {
  double cut = 1.0;
  for (double x : breaks) {
    if (x > 0.0) {
      cut = x;
      break;
    }
  }
  return integrate_0_to_T(f, cut, tails, grid, breaks) + integrate_T_to_inf(f, cut, tails, grid, breaks);
}

enum class LogKernelMode { Inner, Outer };

/// Inner: (1/t) int_0^t f(s) log(t/s) ds.  Outer: int_t^oo f(s) log(s/t) ds/s.
/// In log coordinates these are the substitutions s = t e^{-u} and s = t e^{u},
/// under which the kernels become u e^{-u} du and u du.
template <class F>
double integrate_log_kernel(const F& f, double t, LogKernelMode mode, const TailSpec& tails,
                            const GeometricGrid& grid, std::span<const double> breaks = {}) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "log kernel needs t > 0");
  if (mode == LogKernelMode::Inner) {
    auto g = [&](double s) { return f(s) * std::log(t / s); };
    return integrate_0_to_T(g, t, tails, grid, breaks) / t;
  }
  TailSpec shifted = tails;
  if (shifted.exponent_at_infinity) *shifted.exponent_at_infinity -= 1.0;
  auto g = [&](double s) { return f(s) * std::log(s / t) / s; };
  return integrate_T_to_inf(g, t, shifted, grid, breaks);
}

/// Behaviour at the ends when an integral over (0, t) or (t, oo) diverges.
enum class TailPolicy {
  Strict,  // throw NonIntegrableAtZero / NonIntegrableAtInfinity
  Detect,  // report +inf
};

/// An integrand sampled at every Gauss point of every grid cell, with
/// cumulative integrals from 0 and to oo at every node.  Queries at arbitrary t
/// add a partial Gauss cell evaluated through the stored function.
class GridIntegrand {
 public:
  GridIntegrand(std::function<double(double)> f, const GeometricGrid& grid, TailSpec declared = {},
                TailPolicy policy = TailPolicy::Strict)
      : f_(std::move(f)), grid_(grid) {
    const auto& g = gauss8();
    const std::size_t cells = grid_.cells();
    points_.resize(cells * 8);
    weights_.resize(cells * 8);
    values_.resize(cells * 8);
    std::vector<double> cell_sum(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      const double la = std::log(grid_[c]), lb = std::log(grid_[c + 1]);
      const double half = 0.5 * (lb - la), mid = 0.5 * (lb + la);
      for (std::size_t k = 0; k < 8; ++k) {
        const double t = std::exp(mid + half * g.x[k]);
        const std::size_t j = c * 8 + k;
        points_[j] = t;
        weights_[j] = g.w[k] * half * t;
        values_[j] = detail::checked(f_(t), t);
        cell_sum[c] += weights_[j] * values_[j];
      }
    }
    node_values_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) node_values_[i] = detail::checked(f_(grid_[i]), grid_[i]);

    zero_fit_ = fit_at_zero(grid_[0], node_values_[0], grid_[1], node_values_[1], declared.exponent_at_zero,
                            grid_[2], node_values_[2]);
    const std::size_t n = grid_.size();
    inf_fit_ = fit_at_infinity(grid_[n - 2], node_values_[n - 2], grid_[n - 1], node_values_[n - 1],
                               declared.exponent_at_infinity, grid_[n - 3], node_values_[n - 3]);
    double head = integrate_fit_at_zero(zero_fit_);
    double tail = integrate_fit_at_infinity(inf_fit_);
    if (policy == TailPolicy::Strict) {
      if (!std::isfinite(head)) throw Error(ErrorCode::NonIntegrableAtZero, "integrand is not integrable at zero");
      if (!std::isfinite(tail)) throw Error(ErrorCode::NonIntegrableAtInfinity, "integrand is not integrable at infinity");
    }
    below_.assign(n, 0.0);
    above_.assign(n, 0.0);
    below_[0] = head;
    for (std::size_t c = 0; c < cells; ++c) below_[c + 1] = below_[c] + cell_sum[c];
    above_[n - 1] = tail;
    for (std::size_t c = cells; c-- > 0;) above_[c] = above_[c + 1] + cell_sum[c];
  }

  const GeometricGrid& grid() const noexcept { return grid_; }

  /// int_0^{t_i} f and int_{t_i}^oo f at node i.
  double below(std::size_t node) const { return below_[node]; }
  double above(std::size_t node) const { return above_[node]; }

  double below(double t) const {
    if (t <= grid_.t_min()) return power_head(t);
    if (t >= grid_.t_max()) return below_.back() + power_integral(inf_fit_, grid_.t_max(), t);
    const std::size_t c = grid_.cell_of(t);
    return below_[c] + gauss_log_cell(f_, grid_[c], t);
  }

  double above(double t) const {
    if (t >= grid_.t_max()) return power_tail(t);
    if (t <= grid_.t_min()) return above_.front() + power_integral(zero_fit_, t, grid_.t_min());
    const std::size_t c = grid_.cell_of(t);
    return above_[c + 1] + gauss_log_cell(f_, t, grid_[c + 1]);
  }

  double operator()(double t) const { return f_(t); }

  /// Gauss points, combined weights (dt included) and values, cell-major.
  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> node_values() const noexcept { return node_values_; }
  const PowerFit& zero_fit() const noexcept { return zero_fit_; }
  const PowerFit& inf_fit() const noexcept { return inf_fit_; }

 private:
  double power_head(double t) const { return fit_head(zero_fit_, t); }
  double power_tail(double t) const { return fit_tail(inf_fit_, t); }

  /// int_a^b of a fitted end law, for a, b on the fitted side.
  static double power_integral(const PowerFit& fit, double a, double b) {
    if (fit.zero || !(b > a)) return 0.0;
    if (fit.anchor <= a && fit.exponent < -1.0) return fit_tail(fit, a) - fit_tail(fit, b);
    if (fit.anchor >= b && fit.exponent > -1.0) return fit_head(fit, b) - fit_head(fit, a);
    const double e = fit.exponent + 1.0;
    if (std::abs(e) < 1e-12) return fit.value * fit.anchor * std::log(b / a);
    return fit.value * fit.anchor / e * (std::pow(b / fit.anchor, e) - std::pow(a / fit.anchor, e));
  }

  std::function<double(double)> f_;
  GeometricGrid grid_;
  std::vector<double> points_, weights_, values_, node_values_;
  std::vector<double> below_, above_;
  PowerFit zero_fit_, inf_fit_;
};

}  // namespace lgt::quad
