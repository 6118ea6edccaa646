#pragma once

// Nonincreasing rearrangement f*, the level average f**, the
// Hardy-Littlewood-Polya comparison, and the iterated rearrangement of
// piecewise-constant kernels.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "lgt/grid.hpp"
#include "lgt/step_function.hpp"

namespace lgt {

/// f*: blocks sorted by value (descending, stable), laid out from 0.
/// Monotone input is returned in canonical form without re-summing its knots.
inline StepFunction rearrange(const StepFunction& f) {
  StepFunction g = f.canonical();
  if (g.is_nonincreasing()) return g;
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.values()[a] > g.values()[b]; });
  std::vector<double> values, measures;
  for (std::size_t i : order) {
    const double v = g.values()[i];
    if (v == 0.0) break;
    if (!values.empty() && values.back() == v) {
      measures.back() += g.measure(i);
    } else {
      values.push_back(v);
      measures.push_back(g.measure(i));
    }
  }
  return StepFunction::from_blocks(values, measures);
}

/// f** and the primitive of f*, evaluated from prefix sums of f*.
class LevelAverage {
 public:
  explicit LevelAverage(const StepFunction& f) : star_(rearrange(f)), prefix_(star_.size() + 1, 0.0) {
    for (std::size_t i = 0; i < star_.size(); ++i) prefix_[i + 1] = prefix_[i] + star_.values()[i] * star_.measure(i);
  }

  const StepFunction& rearranged() const noexcept { return star_; }
  double total() const noexcept { return prefix_.back(); }

  /// int_0^t f*
  double primitive(double t) const {
    if (!(t > 0.0) || star_.empty()) return 0.0;
    const auto& k = star_.knots();
    const auto i = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), t) - k.begin());
    if (i >= star_.size()) return total();
    return prefix_[i] + star_.values()[i] * (t - star_.left(i));
  }

  /// f**(t) = primitive(t) / t; equals f*(0+) on the first block.
  double operator()(double t) const {
    if (star_.empty()) return 0.0;
    if (t < star_.knots().front()) return star_.values().front();
    return primitive(t) / t;
  }

  /// int_a^b f**(s) ds, in closed form per block of f*.
  double integral_between(double a, double b) const {
    a = std::max(a, 0.0);
    if (!(b > a) || star_.empty()) return 0.0;
    const std::size_t n = star_.size();
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double l = i < n ? star_.left(i) : star_.support_end();
      const double r = i < n ? star_.knots()[i] : std::max(b, l);
      const double lo = std::max(a, l), hi = std::min(b, r);
      if (!(hi > lo)) continue;
      if (i == 0) {
        s += star_.values()[0] * (hi - lo);
      } else if (i < n) {
        // f** = (P_i - v l) / s + v on this block
        const double v = star_.values()[i];
        s += (prefix_[i] - v * l) * std::log(hi / lo) + v * (hi - lo);
      } else {
        s += total() * std::log(hi / lo);
      }
    }
    return s;
  }

 private:
  StepFunction star_;
  std::vector<double> prefix_;
};

inline double double_star(const StepFunction& f, double t) { return LevelAverage(f)(t); }

/// int_0^t f* <= int_0^t g* for every t.  Both primitives are piecewise linear,
/// so the knots of f* and g* decide it; grid nodes are checked as well.
inline bool hlp_dominates(const StepFunction& f, const StepFunction& g, const GeometricGrid& grid,
                          double rel_slack = 1e-12) {
  const LevelAverage F(f), G(g);
  auto ok = [&](double t) {
    const double a = F.primitive(t), b = G.primitive(t);
    return a <= b + rel_slack * std::max(a, b);
  };
  for (double t : F.rearranged().knots()) if (!ok(t)) return false;
  for (double t : G.rearranged().knots()) if (!ok(t)) return false;
  for (double t : grid.nodes()) if (!ok(t)) return false;
  return true;
}

/// Non-negative kernel, constant on the product cells; x and y cells are laid
/// out consecutively from 0.  values is row-major (x index first).
class SampledKernel {
 public:
  SampledKernel() = default;

  SampledKernel(std::vector<double> x_measures, std::vector<double> y_measures, std::vector<double> values)
      : x_(std::move(x_measures)), y_(std::move(y_measures)), values_(std::move(values)) {
    if (x_.empty() || y_.empty() || values_.size() != x_.size() * y_.size()) {
      throw Error(ErrorCode::InvalidArgument, "kernel needs rows*cols values and non-empty cell lists");
    }
    for (double m : x_) if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "x-cell measures must be positive");
    for (double m : y_) if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "y-cell measures must be positive");
    for (double v : values_) if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "kernel values must be non-negative");
    x_edges_ = edges(x_);
    y_edges_ = edges(y_);
  }

  static SampledKernel constant(double c, double x_length = 1.0, double y_length = 1.0) {
    return SampledKernel({x_length}, {y_length}, {c});
  }

  /// K(x,y) = g(x) h(y) on the cells of g and h.
  static SampledKernel product(const StepFunction& g, const StepFunction& h) {
    std::vector<double> v;
    for (double gx : g.values()) for (double hy : h.values()) v.push_back(gx * hy);
    return SampledKernel(g.measures(), h.measures(), std::move(v));
  }

  std::size_t rows() const noexcept { return x_.size(); }
  std::size_t cols() const noexcept { return y_.size(); }
  const std::vector<double>& x_measures() const noexcept { return x_; }
  const std::vector<double>& y_measures() const noexcept { return y_; }
  const std::vector<double>& values() const noexcept { return values_; }
  /// Right edges of the cells (cumulative measures).
  const std::vector<double>& x_edges() const noexcept { return x_edges_; }
  const std::vector<double>& y_edges() const noexcept { return y_edges_; }
  double y_left(std::size_t j) const { return j == 0 ? 0.0 : y_edges_[j - 1]; }
  double x_left(std::size_t i) const { return i == 0 ? 0.0 : x_edges_[i - 1]; }

  double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }

  /// Point evaluation; zero outside the support.
  double operator()(double x, double y) const {
    const auto i = std::upper_bound(x_edges_.begin(), x_edges_.end(), x) - x_edges_.begin();
    const auto j = std::upper_bound(y_edges_.begin(), y_edges_.end(), y) - y_edges_.begin();
    if (x < 0.0 || y < 0.0 || i >= static_cast<std::ptrdiff_t>(rows()) || j >= static_cast<std::ptrdiff_t>(cols())) return 0.0;
    return at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }

 private:
  static std::vector<double> edges(const std::vector<double>& m) {
    std::vector<double> e(m.size());
    std::partial_sum(m.begin(), m.end(), e.begin());
    return e;
  }

  std::vector<double> x_, y_, values_;
  std::vector<double> x_edges_, y_edges_;
};

/// (T_K f)(x) = int K(x,y) f(y) dy by block summation: a step function on the x-cells.
inline StepFunction apply_TK(const SampledKernel& K, const StepFunction& f) {
  std::vector<double> mass(K.cols());
  for (std::size_t j = 0; j < K.cols(); ++j) mass[j] = f.integral_between(K.y_left(j), K.y_edges()[j]);
  std::vector<double> out(K.rows(), 0.0);
  for (std::size_t i = 0; i < K.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < K.cols(); ++j) s += K.at(i, j) * mass[j];
    out[i] = s;
  }
  return StepFunction::from_blocks(out, K.x_measures());
}

namespace detail {

/// Union of several sorted breakpoint lists; points closer than rel_tol * scale merge.
inline std::vector<double> refine(const std::vector<std::vector<double>>& lists, double rel_tol = 1e-12) {
  std::vector<double> all;
  for (const auto& l : lists) all.insert(all.end(), l.begin(), l.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  const double scale = all.empty() ? 0.0 : all.back();
  for (double x : all) {
    if (out.empty() || x - out.back() > rel_tol * scale) {
      out.push_back(x);
    } else {
      out.back() = std::max(out.back(), x);
    }
  }
  return out;
}

/// Sorted (value, measure) pairs of one line of a kernel, as a step function.
inline StepFunction line_rearrangement(std::span<const double> values, std::span<const double> measures) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> v, m;
  for (std::size_t i : order) {
    v.push_back(values[i]);
    m.push_back(measures[i]);
  }
  return StepFunction::from_blocks(v, m);
}

inline std::vector<double> measures_of(const std::vector<double>& edges) {
  std::vector<double> m(edges.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    m[i] = edges[i] - prev;
    prev = edges[i];
  }
  return m;
}

}  // namespace detail

/// L = (K^{*2})^{*1}: rearrange every row in y, refine the y-partition to the
/// common refinement, then rearrange every refined column in x and refine the
/// x-partition the same way.  The result is nonincreasing along rows and columns.
inline SampledKernel iterated_rearrangement(const SampledKernel& K) {
  const std::size_t nx = K.rows(), ny = K.cols();
  // stage 1: rows in y
  std::vector<StepFunction> rows(nx);
  std::vector<std::vector<double>> row_breaks(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    rows[i] = detail::line_rearrangement(std::span(K.values()).subspan(i * ny, ny), K.y_measures());
    row_breaks[i] = rows[i].knots();
  }
  const auto s_edges = detail::refine(row_breaks);
  const auto s_meas = detail::measures_of(s_edges);
  const std::size_t ns = s_edges.size();
  std::vector<double> stage1(nx * ns);
  for (std::size_t i = 0; i < nx; ++i) {
    double prev = 0.0;
    for (std::size_t c = 0; c < ns; ++c) {
      stage1[i * ns + c] = rows[i](0.5 * (prev + s_edges[c]));
      prev = s_edges[c];
    }
  }
  // stage 2: refined columns in x
  std::vector<StepFunction> cols(ns);
  std::vector<std::vector<double>> col_breaks(ns);
  std::vector<double> column(nx);
  for (std::size_t c = 0; c < ns; ++c) {
    for (std::size_t i = 0; i < nx; ++i) column[i] = stage1[i * ns + c];
    cols[c] = detail::line_rearrangement(column, K.x_measures());
    col_breaks[c] = cols[c].knots();
  }
  const auto t_edges = detail::refine(col_breaks);
  const auto t_meas = detail::measures_of(t_edges);
  const std::size_t nt = t_edges.size();
  std::vector<double> out(nt * ns);
  double prev = 0.0;
  for (std::size_t r = 0; r < nt; ++r) {
    const double mid = 0.5 * (prev + t_edges[r]);
    for (std::size_t c = 0; c < ns; ++c) out[r * ns + c] = cols[c](mid);
    prev = t_edges[r];
  }
  return SampledKernel(t_meas, s_meas, std::move(out));
}

/// int_0^t (T_K f)* <= int_0^t (T_L f*) at every grid node and every knot of
/// both sides, within relative slack.
inline bool verify_reduction(const SampledKernel& K, const StepFunction& f, const GeometricGrid& grid,
                             double rel_slack = 1e-9) {
  const SampledKernel L = iterated_rearrangement(K);
  const LevelAverage lhs(apply_TK(K, f));
  const StepFunction rhs_fn = apply_TK(L, rearrange(f));
  auto ok = [&](double t) {
    const double a = lhs.primitive(t), b = rhs_fn.integral_between(0.0, t);
    return a <= b + rel_slack * std::max(a, b);
  };
  for (double t : grid.nodes()) if (!ok(t)) return false;
  for (double t : lhs.rearranged().knots()) if (!ok(t)) return false;
  for (double t : rhs_fn.knots()) if (!ok(t)) return false;
  return true;
}

}  // namespace lgt
