#pragma once

// Weights on (0, oo): the closed-form family
//   w(t) = C t^a0 (1+t)^(ainf-a0) (log(e+t))^clog
// and tabulated weights sampled on a grid, together with admissibility for an
// LG norm, the associated weight phi^(q) and the Koethe-dual weight psi.

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lgt/grid.hpp"
#include "lgt/quadrature.hpp"

namespace lgt {

struct SymbolicWeight {
  double C = 1.0;
  double a0 = 0.0;
  double ainf = 0.0;
  double clog = 0.0;

  double operator()(double t) const {
    double w = C * std::pow(t, a0);
    if (ainf != a0) w *= std::pow(1.0 + t, ainf - a0);
    if (clog != 0.0) w *= std::pow(std::log(std::numbers::e + t), clog);
    return w;
  }

  bool is_pure_power() const { return a0 == ainf && clog == 0.0; }
};

/// log w sampled at both ends and the 8 Gauss points of every grid cell;
/// evaluated by barycentric interpolation of log w in log t within a cell and
/// by power laws outside [t_min, t_max].
class TabulatedWeight {
 public:
  static constexpr std::size_t kPerCell = 10;

  template <class F>
  static TabulatedWeight sample(const F& fn, const GeometricGrid& grid, TailSpec tails) {
    TabulatedWeight w(grid, tails);
    const auto& nodes = local_nodes();
    w.log_values_.resize(grid.cells() * kPerCell);
    for (std::size_t c = 0; c < grid.cells(); ++c) {
      const double la = std::log(grid[c]), lb = std::log(grid[c + 1]);
      for (std::size_t k = 0; k < kPerCell; ++k) {
        double t = std::exp(0.5 * (la + lb) + 0.5 * (lb - la) * nodes[k]);
        if (k == 0) t = grid[c];
        if (k + 1 == kPerCell) t = grid[c + 1];
        const double v = fn(t);
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw Error(ErrorCode::NonFinite, "tabulated weight must be positive and finite, t=" + std::to_string(t));
        }
        w.log_values_[c * kPerCell + k] = std::log(v);
      }
    }
    return w;
  }

  double operator()(double t) const { return std::exp(log_value(t)); }

  double log_value(double t) const {
    const auto& g = grid_;
    if (t <= g.t_min()) return log_values_.front() + edge_slope(true) * std::log(t / g.t_min());
    if (t >= g.t_max()) return log_values_.back() + edge_slope(false) * std::log(t / g.t_max());
    const std::size_t c = g.cell_of(t);
    const double la = std::log(g[c]), lb = std::log(g[c + 1]);
    const double u = (2.0 * std::log(t) - la - lb) / (lb - la);
    const auto& x = local_nodes();
    const auto& bw = barycentric_weights();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < kPerCell; ++k) {
      const double d = u - x[k];
      if (d == 0.0) return log_values_[c * kPerCell + k];
      const double q = bw[k] / d;
      num += q * log_values_[c * kPerCell + k];
      den += q;
    }
    return num / den;
  }

  const TailSpec& tails() const noexcept { return tails_; }
  const GeometricGrid& grid() const noexcept { return grid_; }

  TabulatedWeight scaled(double lambda) const {
    TabulatedWeight w = *this;
    const double l = std::log(lambda);
    for (double& v : w.log_values_) v += l;
    return w;
  }

  TabulatedWeight pow(double e) const {
    TabulatedWeight w = *this;
    for (double& v : w.log_values_) v *= e;
    if (w.tails_.exponent_at_zero) *w.tails_.exponent_at_zero *= e;
    if (w.tails_.exponent_at_infinity) *w.tails_.exponent_at_infinity *= e;
    return w;
  }

 private:
  TabulatedWeight(const GeometricGrid& grid, TailSpec tails) : grid_(grid), tails_(tails) {}

  /// Interpolation nodes on [-1, 1]: the two ends and the Gauss points.
  static const std::array<double, kPerCell>& local_nodes() {
    static const std::array<double, kPerCell> x = [] {
      std::array<double, kPerCell> r{};
      r[0] = -1.0;
      const auto& g = quad::gauss8();
      for (std::size_t k = 0; k < 8; ++k) r[k + 1] = g.x[k];
      r[kPerCell - 1] = 1.0;
      return r;
    }();
    return x;
  }

  static const std::array<double, kPerCell>& barycentric_weights() {
    static const std::array<double, kPerCell> w = [] {
      std::array<double, kPerCell> r{};
      const auto& x = local_nodes();
      for (std::size_t j = 0; j < kPerCell; ++j) {
        double p = 1.0;
        for (std::size_t k = 0; k < kPerCell; ++k) if (k != j) p *= (x[j] - x[k]);
        r[j] = 1.0 / p;
      }
      return r;
    }();
    return w;
  }

  double edge_slope(bool at_zero) const {
    const auto& d = at_zero ? tails_.exponent_at_zero : tails_.exponent_at_infinity;
    if (d) return *d;
    const auto& g = grid_;
    if (at_zero) return (log_values_[kPerCell - 1] - log_values_[0]) / std::log(g[1] / g[0]);
    const std::size_t n = log_values_.size();
    return (log_values_[n - 1] - log_values_[n - kPerCell]) / std::log(g[g.size() - 1] / g[g.size() - 2]);
  }

  GeometricGrid grid_;
  TailSpec tails_;
  std::vector<double> log_values_;
};

/// A positive weight in closed form or tabulated form.
class Weight {
 public:
  Weight() : rep_(SymbolicWeight{}) {}
  Weight(SymbolicWeight s) : rep_(s) {}
  Weight(TabulatedWeight t) : rep_(std::move(t)) {}

  static Weight power(double a, double C = 1.0) { return SymbolicWeight{C, a, a, 0.0}; }
  static Weight one() { return power(0.0); }

  double operator()(double t) const {
    return std::visit([t](const auto& w) { return w(t); }, rep_);
  }

  bool is_symbolic() const { return std::holds_alternative<SymbolicWeight>(rep_); }
  const SymbolicWeight& symbolic() const { return std::get<SymbolicWeight>(rep_); }
  const TabulatedWeight& tabulated() const { return std::get<TabulatedWeight>(rep_); }
  bool is_pure_power() const { return is_symbolic() && symbolic().is_pure_power(); }

  /// Exponents at 0 and oo; symbolic weights always know them.
  TailSpec tails() const {
    if (is_symbolic()) return TailSpec::power(symbolic().a0, symbolic().ainf);
    return tabulated().tails();
  }

  Weight scaled(double lambda) const {
    if (is_symbolic()) {
      auto s = symbolic();
      s.C *= lambda;
      return s;
    }
    return tabulated().scaled(lambda);
  }

  /// w^e; the closed-form family is closed under powers.
  Weight pow(double e) const {
    if (is_symbolic()) {
      const auto& s = symbolic();
      return SymbolicWeight{std::pow(s.C, e), s.a0 * e, s.ainf * e, s.clog * e};
    }
    return tabulated().pow(e);
  }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    if (is_symbolic()) {
      const auto& s = symbolic();
      out << "pow(a0=" << s.a0 << ",ainf=" << s.ainf << ",log=" << s.clog << ",C=" << s.C << ")";
    } else {
      const auto& tl = tabulated().tails();
      out << "tabulated(a0=";
      if (tl.exponent_at_zero) out << *tl.exponent_at_zero; else out << "?";
      out << ",ainf=";
      if (tl.exponent_at_infinity) out << *tl.exponent_at_infinity; else out << "?";
      out << ")";
    }
    return out.str();
  }

 private:
  std::variant<SymbolicWeight, TabulatedWeight> rep_;
};

/// u * v.  Closed form when both factors are; otherwise sampled on `grid`.
inline Weight multiply(const Weight& u, const Weight& v, const GeometricGrid& grid) {
  if (u.is_symbolic() && v.is_symbolic()) {
    const auto& a = u.symbolic();
    const auto& b = v.symbolic();
    return SymbolicWeight{a.C * b.C, a.a0 + b.a0, a.ainf + b.ainf, a.clog + b.clog};
  }
  const TailSpec tu = u.tails(), tv = v.tails();
  TailSpec t;
  if (tu.exponent_at_zero && tv.exponent_at_zero) t.exponent_at_zero = *tu.exponent_at_zero + *tv.exponent_at_zero;
  if (tu.exponent_at_infinity && tv.exponent_at_infinity) {
    t.exponent_at_infinity = *tu.exponent_at_infinity + *tv.exponent_at_infinity;
  }
  return TabulatedWeight::sample([&](double x) { return u(x) * v(x); }, grid, t);
}

/// The pair (p, phi) of an LG norm.
struct LGSpaceSpec {
  double p = 2.0;
  Weight weight;
};

/// Weighted Lebesgue space L^p(w): norm (int |g|^p w)^(1/p).
struct WeightedLpSpec {
  double p = 2.0;
  Weight weight;
};

inline double conjugate_exponent(double p) { return p / (p - 1.0); }

namespace detail {

inline constexpr double kExponentTol = 1e-12;

inline bool exp_eq(double a, double b) { return std::abs(a - b) <= kExponentTol * std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Reason the pair (w, p) violates  int w/(1+t^p) < oo  and  int w = oo,
/// or nullopt when admissible.  Symbolic weights are decided by exponent
/// arithmetic with the log factor breaking ties at the critical exponents.
inline std::optional<std::string> admissibility_violation(const Weight& w, double p) {
  if (!(p > 1.0)) throw Error(ErrorCode::InvalidArgument, "admissibility needs p > 1");
  double a0 = 0, ainf = 0, clog = 0;
  bool have_log = false;
  if (w.is_symbolic()) {
    const auto& s = w.symbolic();
    if (!(s.C > 0.0)) return "weight constant C must be positive";
    a0 = s.a0;
    ainf = s.ainf;
    clog = s.clog;
    have_log = true;
  } else {
    const auto t = w.tails();
    if (!t.exponent_at_zero || !t.exponent_at_infinity) {
      throw Error(ErrorCode::UnknownTail, "tabulated weight needs tail exponents at both ends");
    }
    a0 = *t.exponent_at_zero;
    ainf = *t.exponent_at_infinity;
  }
  if (!(a0 > -1.0)) return "int_0 w/(1+t^p) diverges at 0 (a0 <= -1)";
  const double e = ainf - p;
  const bool tail_finite = e < -1.0 && !detail::exp_eq(e, -1.0);
  const bool tail_critical_ok = have_log && detail::exp_eq(e, -1.0) && clog < -1.0;
  if (!(tail_finite || tail_critical_ok)) return "int w/(1+t^p) diverges at infinity (ainf >= p-1)";
  const bool mass_infinite = (ainf > -1.0 && !detail::exp_eq(ainf, -1.0)) ||
                             (detail::exp_eq(ainf, -1.0) && (!have_log || clog >= -1.0));
  if (!mass_infinite) return "int w is finite (ainf < -1)";
  return std::nullopt;
}

inline bool check_admissible(const Weight& w, double p) { return !admissibility_violation(w, p).has_value(); }

/// phi^(q)(t) = q t^(q-1) int_t^oo s^-q phi(s) ds.
/// Pure powers t^a stay closed-form: (q/(q-1-a)) t^a.
inline Weight associated_weight_q(const Weight& w, double q, const GeometricGrid& grid = GeometricGrid::standard()) {
  if (!(q > 1.0)) throw Error(ErrorCode::InvalidArgument, "associated weight needs q > 1");
  const TailSpec tw = w.tails();
  if (!tw.exponent_at_infinity || !tw.exponent_at_zero) {
    throw Error(ErrorCode::UnknownTail, "associated weight needs both tail exponents");
  }
  const double ainf = *tw.exponent_at_infinity, a0 = *tw.exponent_at_zero;
  const double e = ainf - q;
  const bool critical_ok = w.is_symbolic() && detail::exp_eq(e, -1.0) && w.symbolic().clog < -1.0;
  if (!((e < -1.0 && !detail::exp_eq(e, -1.0)) || critical_ok)) {
    throw Error(ErrorCode::NonIntegrableTail, "int_t^oo s^-q phi diverges (ainf >= q-1)");
  }
  if (w.is_pure_power()) {
    const auto& s = w.symbolic();
    return Weight::power(s.a0, s.C * q / (q - 1.0 - s.a0));
  }
  const auto integrand = quad::GridIntegrand([w, q](double s) { return std::pow(s, -q) * w(s); }, grid,
                                             TailSpec::power(a0 - q, ainf - q), quad::TailPolicy::Detect);
  TailSpec out;
  out.exponent_at_zero = std::min(a0, q - 1.0);
  out.exponent_at_infinity = ainf;
  return TabulatedWeight::sample([&](double t) { return q * std::pow(t, q - 1.0) * integrand.above(t); }, grid, out);
}

/// Koethe-dual weight of rho_{p,phi}:
///   psi(t) = t^(p'+p-1) A B / (A + t^p B)^(p'+1),
///   A = int_0^t phi,  B = int_t^oo s^-p phi,  p' = p/(p-1).
/// Always tabulated; both cumulative integrals are built once on the grid.
inline Weight dual_weight(const Weight& w, double p, const GeometricGrid& grid = GeometricGrid::standard()) {
  if (auto why = admissibility_violation(w, p)) throw Error(ErrorCode::AdmissibilityFailed, *why);
  const double pp = conjugate_exponent(p);
  const TailSpec tw = w.tails();
  const double a0 = *tw.exponent_at_zero, ainf = *tw.exponent_at_infinity;
  const quad::GridIntegrand mass([w](double s) { return w(s); }, grid, TailSpec{a0, std::nullopt},
                                 quad::TailPolicy::Detect);
  const quad::GridIntegrand tail([w, p](double s) { return std::pow(s, -p) * w(s); }, grid,
                                 TailSpec{std::nullopt, ainf - p}, quad::TailPolicy::Detect);
  auto psi = [&](double t) {
    const double A = mass.below(t);
    const double B = tail.above(t);
    const double tpB = std::pow(t, p) * B;
    // t^(p'+p-1) A B / (A + t^p B)^(p'+1), arranged to avoid overflow
    const double denom = A + tpB;
    return (A / denom) * (tpB / denom) * std::pow(t / denom, pp - 1.0);
  };
  TailSpec out;
  out.exponent_at_zero = -a0 / (p - 1.0);
  out.exponent_at_infinity = -ainf / (p - 1.0);
  return TabulatedWeight::sample(psi, grid, out);
}

}  // namespace lgt
