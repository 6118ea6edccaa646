#pragma once

// The Stieltjes transform S, kernel operators T_K and T_L, the composition
// T_L S with kernel M(t,s), and the two forms of S^2.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <gsl/gsl_sf_dilog.h>

#include "lgt/grid.hpp"
#include "lgt/quadrature.hpp"
#include "lgt/rearrangement.hpp"
#include "lgt/step_function.hpp"
#include "lgt/weights.hpp"

namespace lgt {

/// A non-negative function on (0, oo) as seen by the norm routines: point
/// values, optionally an exact primitive int_0^t, kink locations and tails.
/// Step functions keep their exact representation in `step`.
/// c s^e on [lo, hi).
struct TruncatedPower {
  double e, lo, hi, c;
};

struct Profile {
  std::function<double(double)> value;
  std::function<double(double)> primitive;  // empty when not known in closed form
  std::vector<double> breaks;
  TailSpec tails{0.0, -1.0};
  bool nonincreasing = false;
  double support_begin = 0.0;
  double support_end = quad::kInf;
  std::optional<StepFunction> step;
  std::optional<TruncatedPower> power;

  double operator()(double t) const { return value(t); }

  static Profile from_step(StepFunction f) {
    Profile p;
    auto shared = std::make_shared<const StepFunction>(f);
    p.value = [shared](double t) { return (*shared)(t); };
    p.primitive = [shared](double t) { return shared->integral_between(0.0, t); };
    p.breaks = f.knots();
    p.tails = TailSpec{0.0, std::nullopt};
    p.nonincreasing = f.is_nonincreasing();
    p.support_end = f.support_end();
    p.step = std::move(f);
    return p;
  }

  /// c s^e on [lo, hi), zero elsewhere.
  static Profile truncated_power(double e, double lo, double hi, double c = 1.0) {
    Profile p;
    p.value = [=](double s) { return (s >= lo && s < hi) ? c * std::pow(s, e) : 0.0; };
    p.breaks = {lo, hi};
    p.tails = TailSpec{0.0, -2.0};
    p.nonincreasing = e <= 0.0 && lo == 0.0;
    p.support_begin = lo;
    p.support_end = hi;
    p.power = TruncatedPower{e, lo, hi, c};
    return p;
  }

  bool is_zero() const { return step && step->canonical().empty(); }
};

namespace detail {

inline std::vector<double> merged_breaks(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

/// int g over the support of `h`, where g vanishes wherever h does.
template <class G>
double integrate_over_support(const G& g, const Profile& h, const TailSpec& tails, const GeometricGrid& grid,
                              const std::vector<double>& breaks) {
  if (std::isfinite(h.support_end)) {
    if (h.support_begin > 0.0) return quad::integrate_interval(g, h.support_begin, h.support_end, grid.log_step(), breaks);
    return quad::integrate_0_to_T(g, h.support_end, tails, grid, breaks);
  }
  return quad::integrate_0_to_inf(g, tails, grid, breaks);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stieltjes transform

/// (Sf)(t) = sum_k v_k log((t+b_k)/(t+a_k)).
inline double stieltjes(const StepFunction& f, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "stieltjes needs t > 0");
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double a = f.left(k), b = f.knots()[k];
    s += f.values()[k] * std::log1p((b - a) / (t + a));
  }
  return s;
}

/// int_0^T (Sf)(t) dt in closed form.
inline double stieltjes_primitive(const StepFunction& f, double T) {
  if (!(T > 0.0)) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double a = f.left(k), b = f.knots()[k];
    double piece = T * std::log1p((b - a) / (T + a)) + b * std::log1p(T / b);
    if (a > 0.0) piece -= a * std::log1p(T / a);
    s += f.values()[k] * piece;
  }
  return s;
}

/// int_0^oo f(s)/(t+s) ds by quadrature; f ~ s^a0 at 0 and s^ainf at oo with
/// a0 > -1 and ainf < 0.
template <class F>
double stieltjes(const F& f, const TailSpec& tails, double t, const GeometricGrid& grid,
                 std::vector<double> breaks = {}) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "stieltjes needs t > 0");
  if (!tails.exponent_at_zero || !tails.exponent_at_infinity) {
    throw Error(ErrorCode::UnknownTail, "stieltjes of a tabulated function needs both tail exponents");
  }
  if (!(*tails.exponent_at_zero > -1.0)) throw Error(ErrorCode::NonIntegrableAtZero, "input blows up too fast at 0");
  if (!(*tails.exponent_at_infinity < 0.0)) throw Error(ErrorCode::NonIntegrableAtInfinity, "input does not decay at infinity");
  breaks.push_back(t);
  std::sort(breaks.begin(), breaks.end());
  auto g = [&](double s) { return f(s) / (t + s); };
  return quad::integrate_0_to_inf(g, TailSpec{*tails.exponent_at_zero, *tails.exponent_at_infinity - 1.0}, grid,
                                  breaks);
}

inline double stieltjes(const Weight& w, double t, const GeometricGrid& grid = GeometricGrid::standard()) {
  return stieltjes(w, w.tails(), t, grid);
}

/// S of c s^e 1_[lo,hi) for -1 < e < 0: with v = s/(t+s) the integral is
/// c t^e times an incomplete beta B(v; e+1, -e) between the two ends.
inline double stieltjes(const TruncatedPower& f, double t) {
  if (!(f.e > -1.0 && f.e < 0.0)) throw Error(ErrorCode::InvalidArgument, "closed form needs -1 < e < 0");
  const double a = f.e + 1.0, b = -f.e;
  const double x0 = f.lo / (t + f.lo), x1 = f.hi / (t + f.hi);
  double d;
  if (x0 < 0.5) {
    d = boost::math::beta(a, b, x1) - boost::math::beta(a, b, x0);
  } else {
    d = boost::math::betac(a, b, x0) - boost::math::betac(a, b, x1);
  }
  return f.c * std::pow(t, f.e) * d;
}

inline double stieltjes(const Profile& h, double t, const GeometricGrid& grid = GeometricGrid::standard()) {
  if (h.step) return stieltjes(*h.step, t);
  if (h.power && h.power->e > -1.0 && h.power->e < 0.0) return stieltjes(*h.power, t);
  if (!std::isfinite(h.support_end)) return stieltjes(h.value, h.tails, t, grid, h.breaks);
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "stieltjes needs t > 0");
  auto g = [&](double s) { return h(s) / (t + s); };
  return detail::integrate_over_support(g, h, h.tails, grid, detail::merged_breaks(h.breaks, {t}));
}

/// (S f**)(t) from the blocks of f*: on the first block f** = v_1, on block k
/// f** = A_k/s + v_k with A_k = P_{k-1} - v_k t_{k-1}, and total/s beyond.
inline double stieltjes_double_star(const LevelAverage& F, double t) {
  const StepFunction& g = F.rearranged();
  if (g.empty()) return 0.0;
  double s = g.values()[0] * std::log1p(g.knots()[0] / t);
  double prefix = g.values()[0] * g.knots()[0];
  for (std::size_t k = 1; k < g.size(); ++k) {
    const double a = g.left(k), b = g.knots()[k], v = g.values()[k];
    const double A = prefix - v * a;
    s += (A / t) * std::log1p(t * (b - a) / (a * (t + b))) + v * std::log1p((b - a) / (t + a));
    prefix += v * (b - a);
  }
  return s + (F.total() / t) * std::log1p(t / g.support_end());
}

// ---------------------------------------------------------------------------
// S^2

/// int_0^oo dy / ((t+y)(y+s)) = log(t/s)/(t-s), with 1/t on the diagonal.
/// Near the diagonal log(t/s) = 2 atanh(u), u = (t-s)/(t+s).
inline double s2_exact_kernel(double t, double s) {
  if (!(t > 0.0) || !(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "S^2 kernel needs t, s > 0");
  const double u = (t - s) / (t + s);
  if (u == 0.0) return 2.0 / (t + s);
  if (std::abs(u) < 0.5) return 2.0 * (std::atanh(u) / u) / (t + s);
  const double hi = std::max(t, s), lo = std::min(t, s);
  return std::log(hi / lo) / (hi - lo);
}

namespace detail {

/// int_a^b log(t/s)/(t-s) ds = Li2(1 - a/t) - Li2(1 - b/t).
inline double s2_block(double a, double b, double t) {
  const double la = (a == 0.0) ? std::numbers::pi * std::numbers::pi / 6.0 : gsl_sf_dilog(1.0 - a / t);
  return la - gsl_sf_dilog(1.0 - b / t);
}

}  // namespace detail

/// (S^2 f)(t) for a step function via the dilogarithm.
inline double s2_apply(const StepFunction& f, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "S^2 needs t > 0");
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f.values()[k] * detail::s2_block(f.left(k), f.knots()[k], t);
  return s;
}

inline double s2_apply(const Profile& h, double t, const GeometricGrid& grid = GeometricGrid::standard()) {
  if (h.step) return s2_apply(*h.step, t);
  auto breaks = detail::merged_breaks(h.breaks, {t});
  auto g = [&](double s) { return s2_exact_kernel(t, s) * h(s); };
  TailSpec tl = h.tails;
  if (tl.exponent_at_infinity) *tl.exponent_at_infinity -= 1.0;
  return detail::integrate_over_support(g, h, tl, grid, breaks);
}

/// (1/t) int_0^t f(s) log(t/s) ds + int_t^oo f(s) log(s/t) ds/s, summed block by block:
///   int_a^b log(t/s) ds = [s (1 + log(t/s))]_a^b,  int_a^b log(s/t) ds/s = [log^2(s/t)/2]_a^b.
inline double s2_logform(const StepFunction& f, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "log form needs t > 0");
  double inner = 0.0, outer = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double a = f.left(k), b = f.knots()[k], v = f.values()[k];
    if (a < t) {
      const double hi = std::min(b, t);
      double piece = hi * (1.0 + std::log(t / hi));
      if (a > 0.0) piece -= a * (1.0 + std::log(t / a));
      inner += v * piece;
    }
    if (b > t) {
      const double lo = std::max(a, t);
      const double lb = std::log(b / t), la = std::log(lo / t);
      outer += v * 0.5 * (lb - la) * (lb + la);
    }
  }
  return inner / t + outer;
}

/// s2_logform for many t: prefix sums over blocks make each query one
/// binary search plus O(1) work.
class S2LogForm {
 public:
  explicit S2LogForm(StepFunction f) : f_(std::move(f)) {
    const std::size_t n = f_.size();
    mass_.assign(n + 1, 0.0);
    slog_.assign(n + 1, 0.0);
    lin_.assign(n + 1, 0.0);
    quad_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = f_.left(k), b = f_.knots()[k], v = f_.values()[k];
      mass_[k + 1] = mass_[k] + v * (b - a);
      const double alog = (a > 0.0) ? a * std::log(a) : 0.0;
      slog_[k + 1] = slog_[k] + v * (b * std::log(b) - alog);
    }
    // suffix sums for the outer term, measured from log(s) directly
    for (std::size_t k = n; k-- > 0;) {
      const double a = f_.left(k), b = f_.knots()[k], v = f_.values()[k];
      if (a > 0.0) {
        const double la = std::log(a), lb = std::log(b);
        lin_[k] = lin_[k + 1] + v * (lb - la);
        quad_[k] = quad_[k + 1] + v * (lb * lb - la * la);
      } else {
        lin_[k] = lin_[k + 1];
        quad_[k] = quad_[k + 1];
      }
    }
  }

  double operator()(double t) const {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "log form needs t > 0");
    const auto& kn = f_.knots();
    const auto k = static_cast<std::size_t>(std::upper_bound(kn.begin(), kn.end(), t) - kn.begin());
    const double lt = std::log(t);
    // blocks entirely below t
    double inner = (1.0 + lt) * mass_[k] - slog_[k];
    double outer = 0.0;
    std::size_t first_full = k;
    if (k < f_.size()) {
      const double a = f_.left(k), b = kn[k], v = f_.values()[k];
      // block containing t
      double piece = t;
      if (a > 0.0) piece -= a * (1.0 + std::log(t / a));
      inner += v * piece;
      const double lb = std::log(b / t);
      outer += v * 0.5 * lb * lb;
      first_full = k + 1;
    }
    if (first_full < f_.size()) {
      outer += 0.5 * (quad_[first_full] - 2.0 * lt * lin_[first_full]);
    }
    return inner / t + outer;
  }

 private:
  StepFunction f_;
  std::vector<double> mass_, slog_, lin_, quad_;
};

/// The log form for a general profile, through integrate_log_kernel.
inline double s2_logform(const Profile& f, double t, const GeometricGrid& grid = GeometricGrid::standard()) {
  if (f.step) return s2_logform(*f.step, t);
  if (!std::isfinite(f.support_end) && f.support_begin == 0.0) {
    return quad::integrate_log_kernel(f.value, t, quad::LogKernelMode::Inner, f.tails, grid, f.breaks) +
           quad::integrate_log_kernel(f.value, t, quad::LogKernelMode::Outer, f.tails, grid, f.breaks);
  }
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "log form needs t > 0");
  double inner = 0.0, outer = 0.0;
  const double a = f.support_begin, b = f.support_end;
  if (a < t) {
    auto g = [&](double s) { return f(s) * std::log(t / s); };
    const double hi = std::min(t, b);
    inner = a > 0.0 ? quad::integrate_interval(g, a, hi, grid.log_step(), f.breaks)
                    : quad::integrate_0_to_T(g, hi, f.tails, grid, f.breaks);
  }
  if (b > t) {
    auto g = [&](double s) { return f(s) * std::log(s / t) / s; };
    const double lo = std::max(t, a);
    if (std::isfinite(b)) {
      outer = quad::integrate_interval(g, lo, b, grid.log_step(), f.breaks);
    } else {
      TailSpec tl = f.tails;
      if (tl.exponent_at_infinity) *tl.exponent_at_infinity -= 1.0;
      outer = quad::integrate_T_to_inf(g, lo, tl, grid, f.breaks);
    }
  }
  return inner / t + outer;
}

// ---------------------------------------------------------------------------
// Iterated kernels L(t,s), nonincreasing in each variable

class IteratedKernel {
 public:
  using Fn = std::function<double(double, double)>;
  enum class Kind { General, Sampled, Stieltjes };

  /// `y_tails` describes y -> L(t,y) at 0 and oo.  With `certify`, monotonicity
  /// is spot-checked on a coarse subgrid and InvalidArgument thrown on failure.
  IteratedKernel(Fn f, TailSpec y_tails, std::vector<double> y_breaks = {}, bool certify = false,
                 const GeometricGrid& grid = GeometricGrid::standard())
      : f_(std::move(f)), y_tails_(y_tails), y_breaks_(std::move(y_breaks)) {
    if (certify) {
      if (!check_monotone(grid)) throw Error(ErrorCode::InvalidArgument, "kernel is not nonincreasing in each variable");
      certified_ = true;
    }
  }

  static IteratedKernel stieltjes() {
    IteratedKernel L([](double t, double s) { return 1.0 / (t + s); }, TailSpec{0.0, -1.0});
    L.kind_ = Kind::Stieltjes;
    L.certified_ = true;
    return L;
  }

  /// A step kernel; must already be nonincreasing along rows and columns
  /// (e.g. the output of iterated_rearrangement).
  static IteratedKernel from_sampled(const SampledKernel& K) {
    for (std::size_t i = 0; i < K.rows(); ++i) {
      for (std::size_t j = 0; j < K.cols(); ++j) {
        if ((j + 1 < K.cols() && K.at(i, j + 1) > K.at(i, j)) || (i + 1 < K.rows() && K.at(i + 1, j) > K.at(i, j))) {
          throw Error(ErrorCode::InvalidArgument, "sampled kernel is not nonincreasing in each variable");
        }
      }
    }
    auto shared = std::make_shared<const SampledKernel>(K);
    IteratedKernel L([shared](double t, double s) { return (*shared)(t, s); }, TailSpec{0.0, std::nullopt},
                     K.y_edges());
    L.kind_ = Kind::Sampled;
    L.sampled_ = shared;
    L.certified_ = true;
    return L;
  }

  static IteratedKernel zero() { return from_sampled(SampledKernel::constant(0.0)); }

  double operator()(double t, double s) const { return f_(t, s); }
  Kind kind() const noexcept { return kind_; }
  const SampledKernel* sampled() const noexcept { return sampled_.get(); }
  const TailSpec& y_tails() const noexcept { return y_tails_; }
  const std::vector<double>& y_breaks() const noexcept { return y_breaks_; }
  bool monotone_certified() const noexcept { return certified_; }

  /// Nonincreasing in t for each s and in s for each t on every 4th grid node.
  bool check_monotone(const GeometricGrid& grid) const {
    std::vector<double> pts;
    for (std::size_t i = 0; i < grid.size(); i += 4) pts.push_back(grid[i]);
    for (double a : pts) {
      double prev_t = quad::kInf, prev_s = quad::kInf;
      for (double b : pts) {
        const double vt = f_(b, a), vs = f_(a, b);
        if (vt > prev_t * (1.0 + 1e-12) || vs > prev_s * (1.0 + 1e-12)) return false;
        prev_t = vt;
        prev_s = vs;
      }
    }
    return true;
  }

 private:
  Fn f_;
  TailSpec y_tails_;
  std::vector<double> y_breaks_;
  bool certified_ = false;
  Kind kind_ = Kind::General;
  std::shared_ptr<const SampledKernel> sampled_;
};

enum class MKernelMode { Exact, Split };

/// M(t,s) = int L(t,y)/(s+y) dy (Exact) or (1/s) int_0^s L(t,y) dy + int_s^oo L(t,y) dy/y (Split).
/// The split form lies between M and 2M.
inline double m_kernel(const IteratedKernel& L, double t, double s, MKernelMode mode,
                       const GeometricGrid& grid = GeometricGrid::standard()) {
  if (!(t > 0.0) || !(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "m_kernel needs t, s > 0");
  if (const SampledKernel* K = L.sampled()) {
    const auto& ye = K->y_edges();
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(K->x_edges().begin(), K->x_edges().end(), t) -
                                                   K->x_edges().begin());
    if (i >= K->rows()) return 0.0;
    double m = 0.0;
    for (std::size_t j = 0; j < K->cols(); ++j) {
      const double a = K->y_left(j), b = ye[j], v = K->at(i, j);
      if (v == 0.0) continue;
      if (mode == MKernelMode::Exact) {
        m += v * std::log1p((b - a) / (s + a));
      } else {
        if (a < s) m += v * (std::min(b, s) - a) / s;
        if (b > s) m += v * std::log(b / std::max(a, s));
      }
    }
    return m;
  }
  if (mode == MKernelMode::Exact && L.kind() == IteratedKernel::Kind::Stieltjes) return s2_exact_kernel(t, s);
  const TailSpec& yt = L.y_tails();
  if (!yt.exponent_at_infinity) throw Error(ErrorCode::UnknownTail, "m_kernel needs the kernel's tail in y");
  TailSpec shifted{yt.exponent_at_zero, *yt.exponent_at_infinity - 1.0};
  auto breaks = detail::merged_breaks(L.y_breaks(), {s});
  if (mode == MKernelMode::Exact) {
    auto g = [&](double y) { return L(t, y) / (s + y); };
    return quad::integrate_0_to_inf(g, shifted, grid, breaks);
  }
  auto head = [&](double y) { return L(t, y); };
  auto tail = [&](double y) { return L(t, y) / y; };
  return quad::integrate_0_to_T(head, s, yt, grid, breaks) / s + quad::integrate_T_to_inf(tail, s, shifted, grid, breaks);
}

/// (T_L f)(t) = int L(t,s) f(s) ds.
inline double apply_TL(const IteratedKernel& L, const Profile& f, double t,
                       const GeometricGrid& grid = GeometricGrid::standard()) {
  if (L.kind() == IteratedKernel::Kind::Stieltjes) return stieltjes(f, t, grid);
  if (const SampledKernel* K = L.sampled(); K && f.step) {
    const auto& xe = K->x_edges();
    const auto i = static_cast<std::size_t>(std::upper_bound(xe.begin(), xe.end(), t) - xe.begin());
    if (i >= K->rows()) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < K->cols(); ++j) s += K->at(i, j) * f.step->integral_between(K->y_left(j), K->y_edges()[j]);
    return s;
  }
  TailSpec tl{L.y_tails().exponent_at_zero.value_or(0.0) + f.tails.exponent_at_zero.value_or(0.0),
              L.y_tails().exponent_at_infinity.value_or(0.0) + f.tails.exponent_at_infinity.value_or(-2.0)};
  auto g = [&](double s) { return L(t, s) * f(s); };
  return detail::integrate_over_support(g, f, tl, grid, detail::merged_breaks(L.y_breaks(), f.breaks));
}

/// (T_L S)h(t) = int h(y) M(t,y) dy, the order with the inner integral in the kernel.
inline double apply_TLS(const IteratedKernel& L, const Profile& h, double t,
                        const GeometricGrid& grid = GeometricGrid::standard()) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "T_L S needs t > 0");
  if (h.is_zero()) return 0.0;
  if (L.kind() == IteratedKernel::Kind::Stieltjes) return s2_apply(h, t, grid);
  auto g = [&](double y) { return h(y) * m_kernel(L, t, y, MKernelMode::Exact, grid); };
  TailSpec tl{h.tails.exponent_at_zero.value_or(0.0), h.tails.exponent_at_infinity.value_or(-2.0) - 1.0};
  auto breaks = detail::merged_breaks(h.breaks, L.y_breaks());
  breaks = detail::merged_breaks(breaks, {t});
  return detail::integrate_over_support(g, h, tl, grid, breaks);
}

/// (T_L S)h(t) = int L(t,s) (Sh)(s) ds, the order with S applied first.
inline double apply_TLS_direct(const IteratedKernel& L, const Profile& h, double t,
                               const GeometricGrid& grid = GeometricGrid::standard()) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "T_L S needs t > 0");
  if (h.is_zero()) return 0.0;
  if (const SampledKernel* K = L.sampled(); K && h.step) {
    const auto& xe = K->x_edges();
    const auto i = static_cast<std::size_t>(std::upper_bound(xe.begin(), xe.end(), t) - xe.begin());
    if (i >= K->rows()) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < K->cols(); ++j) {
      s += K->at(i, j) * (stieltjes_primitive(*h.step, K->y_edges()[j]) - stieltjes_primitive(*h.step, K->y_left(j)));
    }
    return s;
  }
  auto g = [&](double s) { return L(t, s) * stieltjes(h, s, grid); };
  TailSpec tl{L.y_tails().exponent_at_zero.value_or(0.0), L.y_tails().exponent_at_infinity.value_or(0.0) - 1.0};
  auto breaks = detail::merged_breaks(h.breaks, L.y_breaks());
  breaks = detail::merged_breaks(breaks, {t});
  return quad::integrate_0_to_inf(g, tl, grid, breaks);
}

// ---------------------------------------------------------------------------
// Operator specifications

struct SampledOp { SampledKernel K; };
struct IteratedOp { IteratedKernel L; };
struct StieltjesOp {};
struct S2ExactOp {};
struct S2LogformOp {};
struct ComposedOp { IteratedKernel L; };

using OperatorSpec = std::variant<SampledOp, IteratedOp, StieltjesOp, S2ExactOp, S2LogformOp, ComposedOp>;

inline std::string operator_name(const OperatorSpec& op) {
  switch (op.index()) {
    case 0: return "sampled_kernel";
    case 1: return "iterated";
    case 2: return "stieltjes";
    case 3: return "s2_exact";
    case 4: return "s2_logform";
    default: return "composed";
  }
}

/// The image of f under `op`.  Step inputs stay exact wherever a closed form
/// exists; other inputs go through quadrature.
inline Profile apply(const OperatorSpec& op, const Profile& f, const GeometricGrid& grid = GeometricGrid::standard()) {
  auto src = std::make_shared<const Profile>(f);
  Profile out;
  out.nonincreasing = true;
  out.tails = TailSpec{0.0, -1.0};
  out.breaks = f.breaks;
  if (const auto* s = std::get_if<SampledOp>(&op)) {
    if (!f.step) throw Error(ErrorCode::InvalidArgument, "sampled kernels act on step functions only");
    return Profile::from_step(apply_TK(s->K, *f.step));
  }
  if (const auto* it = std::get_if<IteratedOp>(&op)) {
    if (it->L.sampled() && f.step) return Profile::from_step(apply_TK(*it->L.sampled(), *f.step));
    auto L = std::make_shared<const IteratedKernel>(it->L);
    out.value = [L, src, grid](double t) { return apply_TL(*L, *src, t, grid); };
    out.breaks = detail::merged_breaks(out.breaks, it->L.y_breaks());
    return out;
  }
  if (std::holds_alternative<StieltjesOp>(op)) {
    if (f.step) {
      auto st = std::make_shared<const StepFunction>(*f.step);
      out.value = [st](double t) { return stieltjes(*st, t); };
      out.primitive = [st](double t) { return stieltjes_primitive(*st, t); };
    } else {
      out.value = [src, grid](double t) { return stieltjes(*src, t, grid); };
    }
    return out;
  }
  if (std::holds_alternative<S2ExactOp>(op)) {
    out.value = [src, grid](double t) { return s2_apply(*src, t, grid); };
    return out;
  }
  if (std::holds_alternative<S2LogformOp>(op)) {
    if (f.step) {
      auto lf = std::make_shared<const S2LogForm>(*f.step);
      out.value = [lf](double t) { return (*lf)(t); };
    } else {
      out.value = [src, grid](double t) { return s2_logform(*src, t, grid); };
    }
    return out;
  }
  const auto& c = std::get<ComposedOp>(op);
  auto L = std::make_shared<const IteratedKernel>(c.L);
  out.value = [L, src, grid](double t) { return apply_TLS(*L, *src, t, grid); };
  return out;
}

}  // namespace lgt
