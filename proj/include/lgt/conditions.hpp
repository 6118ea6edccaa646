#pragma once

// Decision procedures for two-weight inequalities: Neugebauer's condition for
// the level average, the Bloom-Kerman pair for monotone kernels, and the four
// log-kernel conditions for S^2 between LG spaces.
//
// Every condition function is a product of an integral over (0, x) and one
// over (x, oo), evaluated at all grid nodes.  A verdict is read off the sup
// and the log-log slopes over the first and last decade of the grid.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "json.hpp"
#include "lgt/grid.hpp"
#include "lgt/quadrature.hpp"
#include "lgt/weights.hpp"

namespace lgt {

enum class Verdict { Bounded, Unbounded, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return "bounded";
    case Verdict::Unbounded: return "unbounded";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct ConditionEntry {
  std::string name;
  double sup = 0.0;
  double argmax_t = 0.0;
  double slope_lo = 0.0;  // outward slope at t_min: d log F / d log(1/t)
  double slope_hi = 0.0;  // outward slope at t_max: d log F / d log t
  Verdict verdict = Verdict::Bounded;
  std::vector<double> values;  // F at every grid node
};

struct ConditionReport {
  Verdict verdict = Verdict::Bounded;
  std::vector<ConditionEntry> conditions;
  nlohmann::json params = nlohmann::json::object();

  const ConditionEntry& at(const std::string& name) const {
    for (const auto& c : conditions) if (c.name == name) return c;
    throw Error(ErrorCode::InvalidArgument, "no condition named " + name);
  }
};

struct ConditionOptions {
  double slope_tol = 0.02;
  double overflow = 1e12;
  double neugebauer_tol = 1e-6;
};

/// Non-finite numbers become null.
inline nlohmann::json json_number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["conditions"] = nlohmann::json::array();
  for (const auto& c : r.conditions) {
    j["conditions"].push_back({{"name", c.name},
                               {"sup", json_number(c.sup)},
                               {"argmax_t", json_number(c.argmax_t)},
                               {"slope_lo", json_number(c.slope_lo)},
                               {"slope_hi", json_number(c.slope_hi)},
                               {"verdict", to_string(c.verdict)}});
  }
  j["params"] = r.params;
  return j;
}

namespace detail {

/// e^z Gamma(s, z), with the large-z asymptotic series where e^z overflows.
inline double scaled_upper_gamma(double s, double z) {
  if (z < 600.0) return std::exp(z) * boost::math::tgamma(s, z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= (s - k) / z;
    sum += term;
  }
  return std::pow(z, s - 1.0) * sum;
}

/// Log-derivative of F between two nodes; zero when F vanishes at both.
inline double log_slope(double f_from, double f_to, double t_from, double t_to) {
  if (f_from == 0.0 && f_to == 0.0) return 0.0;
  if (f_to == 0.0) return -std::numeric_limits<double>::infinity();
  if (f_from == 0.0 || !std::isfinite(f_to)) return std::numeric_limits<double>::infinity();
  return std::log(f_to / f_from) / std::abs(std::log(t_to / t_from));
}

}  // namespace detail

/// Kernel of a one-sided weighted integral: constant, a power of the log
/// ratio, or a general monotone function K(larger, smaller).
struct ConditionKernel {
  enum class Kind { Constant, LogRatio, General };
  Kind kind = Kind::Constant;
  double c = 1.0;
  std::function<double(double, double)> fn;

  static ConditionKernel constant(double c = 1.0) { return {Kind::Constant, c, {}}; }
  static ConditionKernel log_ratio() { return {Kind::LogRatio, 1.0, {}}; }
  static ConditionKernel general(std::function<double(double, double)> f) { return {Kind::General, 1.0, std::move(f)}; }

  double operator()(double big, double small) const {
    switch (kind) {
      case Kind::Constant: return c;
      case Kind::LogRatio: return std::log(big / small);
      case Kind::General: return fn(big, small);
    }
    return 0.0;
  }
};

namespace detail {

inline std::function<double(double)> weight_fn(const Weight& w) {
  return [w](double t) { return w(t); };
}

/// int_0^{x_i} k(x_i, y)^r U(y) dy at every node x_i.
inline std::vector<double> inner_integrals(const ConditionKernel& k, double r, const std::function<double(double)>& U,
                                           const TailSpec& tails, const GeometricGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> out(n, 0.0);
  if (k.kind == ConditionKernel::Kind::Constant && k.c == 0.0) return out;
  const quad::GridIntegrand G(U, grid, tails, quad::TailPolicy::Detect);
  if (k.kind == ConditionKernel::Kind::Constant) {
    const double cr = std::pow(k.c, r);
    for (std::size_t i = 0; i < n; ++i) out[i] = cr * G.below(i);
    return out;
  }
  const auto pts = G.points();
  const auto wts = G.weights();
  const auto vals = G.values();
  const auto& fit = G.zero_fit();
  const double t0 = grid.t_min();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid[i];
    double head = 0.0;
    if (k.kind == ConditionKernel::Kind::LogRatio) {
      if (!fit.zero) {
        if (!(fit.exponent > -1.0)) {
          head = quad::kInf;
        } else {
          const double a1 = fit.exponent + 1.0, L0 = std::log(x / t0);
          head = fit.value * t0 * scaled_upper_gamma(r + 1.0, a1 * L0) * std::pow(a1, -(r + 1.0));
        }
      }
    } else {
      if (!fit.zero) {
        if (!(fit.exponent > -1.0)) {
          head = quad::kInf;
        } else {
          auto g = [&](double y) { return std::pow(k(x, y), r) * U(y); };
          head = quad::integrate_0_to_T_exp_sinh(g, t0);
        }
      }
    }
    double s = head;
    for (std::size_t j = 0; j < 8 * i; ++j) s += wts[j] * vals[j] * std::pow(k(x, pts[j]), r);
    out[i] = s;
  }
  return out;
}

/// int_{x_i}^oo k(y, x_i)^r W(y) dy at every node x_i.
inline std::vector<double> outer_integrals(const ConditionKernel& k, double r, const std::function<double(double)>& W,
                                           const TailSpec& tails, const GeometricGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> out(n, 0.0);
  if (k.kind == ConditionKernel::Kind::Constant && k.c == 0.0) return out;
  const quad::GridIntegrand G(W, grid, tails, quad::TailPolicy::Detect);
  if (k.kind == ConditionKernel::Kind::Constant) {
    const double cr = std::pow(k.c, r);
    for (std::size_t i = 0; i < n; ++i) out[i] = cr * G.above(i);
    return out;
  }
  const auto pts = G.points();
  const auto wts = G.weights();
  const auto vals = G.values();
  const auto& fit = G.inf_fit();
  const double T = grid.t_max();
  const std::size_t m = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid[i];
    double tail = 0.0;
    if (!fit.zero) {
      if (!(fit.exponent < -1.0)) {
        tail = quad::kInf;
      } else if (k.kind == ConditionKernel::Kind::LogRatio) {
        const double c = -(fit.exponent + 1.0), L1 = std::log(T / x);
        tail = fit.value * T * scaled_upper_gamma(r + 1.0, c * L1) * std::pow(c, -(r + 1.0));
      } else {
        auto g = [&](double y) { return std::pow(k(y, x), r) * W(y); };
        tail = quad::integrate_T_to_inf_exp_sinh(g, T);
      }
    }
    double s = tail;
    for (std::size_t j = 8 * i; j < m; ++j) s += wts[j] * vals[j] * std::pow(k(pts[j], x), r);
    out[i] = s;
  }
  return out;
}

/// F_i = I_i^e1 * J_i^e2, with a vanishing factor winning over a divergent one.
inline std::vector<double> combine(const std::vector<double>& I, double e1, const std::vector<double>& J, double e2) {
  std::vector<double> F(I.size());
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (I[i] == 0.0 || J[i] == 0.0) {
      F[i] = 0.0;
    } else {
      F[i] = std::pow(I[i], e1) * std::pow(J[i], e2);
    }
  }
  return F;
}

/// Fills sup, argmax, slopes and the entry's verdict.
inline ConditionEntry classify(std::string name, std::vector<double> F, const GeometricGrid& grid,
                               const ConditionOptions& opt) {
  ConditionEntry e;
  e.name = std::move(name);
  const std::size_t n = F.size(), span = grid.nodes_per_decade_span();
  bool overflow = false;
  e.sup = 0.0;
  e.argmax_t = grid[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(F[i])) {
      overflow = true;
      e.sup = quad::kInf;
      e.argmax_t = grid[i];
      break;
    }
    if (F[i] > e.sup) {
      e.sup = F[i];
      e.argmax_t = grid[i];
    }
  }
  if (e.sup > opt.overflow) overflow = true;
  e.slope_lo = detail::log_slope(F[span], F[0], grid[span], grid[0]);
  e.slope_hi = detail::log_slope(F[n - 1 - span], F[n - 1], grid[n - 1 - span], grid[n - 1]);
  if (overflow || e.slope_lo > opt.slope_tol || e.slope_hi > opt.slope_tol) {
    e.verdict = Verdict::Unbounded;
  } else {
    // growth toward a boundary too slow for a power law: logarithmic divergence
    auto creeping = [&](bool low) {
      if (4 * span >= n) return false;
      double prev = -1.0;
      for (int d = 4; d >= 0; --d) {
        const std::size_t i = low ? static_cast<std::size_t>(d) * span : n - 1 - static_cast<std::size_t>(d) * span;
        if (!(F[i] > prev)) return false;
        prev = F[i];
      }
      const std::size_t far = low ? 4 * span : n - 1 - 4 * span;
      const std::size_t edge = low ? 0 : n - 1;
      return F[edge] > F[far] * (1.0 + 1e-3);
    };
    e.verdict = (creeping(true) || creeping(false)) ? Verdict::Inconclusive : Verdict::Bounded;
  }
  e.values = std::move(F);
  return e;
}

inline Verdict combine_verdicts(const std::vector<ConditionEntry>& es) {
  bool inconclusive = false;
  for (const auto& e : es) {
    if (e.verdict == Verdict::Unbounded) return Verdict::Unbounded;
    if (e.verdict == Verdict::Inconclusive) inconclusive = true;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Bounded;
}

inline TailSpec shifted(const TailSpec& t, double scale, double shift) {
  TailSpec out;
  if (t.exponent_at_zero) out.exponent_at_zero = scale * *t.exponent_at_zero + shift;
  if (t.exponent_at_infinity) out.exponent_at_infinity = scale * *t.exponent_at_infinity + shift;
  return out;
}

inline TailSpec sum_tails(const TailSpec& a, const TailSpec& b) {
  TailSpec out;
  if (a.exponent_at_zero && b.exponent_at_zero) out.exponent_at_zero = *a.exponent_at_zero + *b.exponent_at_zero;
  if (a.exponent_at_infinity && b.exponent_at_infinity) {
    out.exponent_at_infinity = *a.exponent_at_infinity + *b.exponent_at_infinity;
  }
  return out;
}

}  // namespace detail

/// A condition of the form
///   F(x) = ( int_0^x k_in(x,y)^r_in U(y) dy )^e_in ( int_x^oo k_out(y,x)^r_out W(y) dy )^e_out.
struct ProductCondition {
  std::string name;
  ConditionKernel inner_kernel;
  double inner_power = 1.0;
  std::function<double(double)> U;
  TailSpec U_tails;
  double inner_exponent = 1.0;
  ConditionKernel outer_kernel;
  double outer_power = 1.0;
  std::function<double(double)> W;
  TailSpec W_tails;
  double outer_exponent = 1.0;
};

inline ConditionEntry evaluate_condition(const ProductCondition& c, const GeometricGrid& grid,
                                         const ConditionOptions& opt = {}) {
  const auto I = detail::inner_integrals(c.inner_kernel, c.inner_power, c.U, c.U_tails, grid);
  const auto J = detail::outer_integrals(c.outer_kernel, c.outer_power, c.W, c.W_tails, grid);
  return detail::classify(c.name, detail::combine(I, c.inner_exponent, J, c.outer_exponent), grid, opt);
}

// ---------------------------------------------------------------------------
// Neugebauer

/// B(t) = [int_0^t u + t^q int_t^oo s^-q u(s) ds] / int_0^t v at every node.
/// Bounded iff sup B <= 1 + tol; the raw sup is reported either way.
inline ConditionReport neugebauer_check(const Weight& u, const Weight& v, double q,
                                        const GeometricGrid& grid = GeometricGrid::standard(),
                                        const ConditionOptions& opt = {}) {
  if (!(q > 1.0)) throw Error(ErrorCode::InvalidArgument, "neugebauer_check needs q > 1");
  const TailSpec tu = u.tails(), tv = v.tails();
  const quad::GridIntegrand U(detail::weight_fn(u), grid, tu, quad::TailPolicy::Detect);
  const quad::GridIntegrand V(detail::weight_fn(v), grid, tv, quad::TailPolicy::Detect);
  const quad::GridIntegrand Uq([u, q](double s) { return std::pow(s, -q) * u(s); }, grid, detail::shifted(tu, 1.0, -q),
                               quad::TailPolicy::Detect);
  if (!std::isfinite(Uq.above(grid.size() - 1))) {
    throw Error(ErrorCode::NonIntegrableTail, "int_t^oo s^-q u(s) ds diverges");
  }
  std::vector<double> B(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    B[i] = (U.below(i) + std::pow(t, q) * Uq.above(i)) / V.below(i);
  }
  ConditionReport r;
  auto e = detail::classify("N", std::move(B), grid, opt);
  e.verdict = (e.sup <= 1.0 + opt.neugebauer_tol) ? Verdict::Bounded : Verdict::Unbounded;
  r.verdict = e.verdict;
  r.conditions.push_back(std::move(e));
  r.params = {{"check", "neugebauer"}, {"q", q}, {"u", u.describe()}, {"v", v.describe()}, {"tol", opt.neugebauer_tol}};
  return r;
}

// ---------------------------------------------------------------------------
// Bloom-Kerman

/// Largest K(x,y) / (K(x,z) + K(z,y)) over `triples` random y < z < x,
/// log-uniform in the grid range; throws GrowthConditionViolated with a
/// witness when it exceeds `max_D` or the denominator vanishes alone.
inline double check_growth_condition(const ConditionKernel& K, const GeometricGrid& grid, std::size_t triples = 10000,
                                     double max_D = 1e3, std::uint64_t seed = 0x5eedULL) {
  std::mt19937_64 rng(seed);
  const double lo = std::log(grid.t_min()), hi = std::log(grid.t_max());
  auto draw = [&] { return std::exp(lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  double D = 0.0;
  for (std::size_t n = 0; n < triples; ++n) {
    double a[3] = {draw(), draw(), draw()};
    std::sort(a, a + 3);
    const double y = a[0], z = a[1], x = a[2];
    const double num = K(x, y), den = K(x, z) + K(z, y);
    const bool bad = (den == 0.0) ? num > 0.0 : num > max_D * den;
    if (bad) {
      std::ostringstream w;
      w.precision(17);
      w << "growth condition fails at (x,y,z)=(" << x << "," << y << "," << z << "): K(x,y)=" << num
        << ", K(x,z)+K(z,y)=" << den;
      throw Error(ErrorCode::GrowthConditionViolated, w.str());
    }
    if (den > 0.0) D = std::max(D, num / den);
  }
  return D;
}

/// The two conditions for the Hardy-type operator with kernel K, between
/// L^p(v) and L^q(t) with the inner weight u and outer weight w:
///   BK-1: ( int_0^x K(x,y)^p' U )^(1/p') ( int_x^oo w^q t )^(1/q)
///   BK-2: ( int_0^x U )^(1/p') ( int_x^oo K(y,x)^q w^q t )^(1/q)
/// with U = u^-p' v^(1-p').
inline ConditionReport bloom_kerman_check(const ConditionKernel& K, const Weight& t, const Weight& u, const Weight& v,
                                          const Weight& w, double p, double q,
                                          const GeometricGrid& grid = GeometricGrid::standard(),
                                          const ConditionOptions& opt = {}) {
  if (!(p > 1.0) || !(q >= p)) throw Error(ErrorCode::InvalidArgument, "bloom_kerman_check needs 1 < p <= q");
  const double D = check_growth_condition(K, grid);
  const double pp = conjugate_exponent(p);
  auto U = [u, v, pp](double y) { return std::pow(u(y), -pp) * std::pow(v(y), 1.0 - pp); };
  auto W = [w, t, q](double y) { return std::pow(w(y), q) * t(y); };
  const TailSpec tU = detail::sum_tails(detail::shifted(u.tails(), -pp, 0.0), detail::shifted(v.tails(), 1.0 - pp, 0.0));
  const TailSpec tW = detail::sum_tails(detail::shifted(w.tails(), q, 0.0), t.tails());
  const ProductCondition bk1{"BK-1", K, pp, U, tU, 1.0 / pp, ConditionKernel::constant(), 1.0, W, tW, 1.0 / q};
  const ProductCondition bk2{"BK-2", ConditionKernel::constant(), 1.0, U, tU, 1.0 / pp, K, q, W, tW, 1.0 / q};
  ConditionReport r;
  r.conditions.push_back(evaluate_condition(bk1, grid, opt));
  r.conditions.push_back(evaluate_condition(bk2, grid, opt));
  r.verdict = detail::combine_verdicts(r.conditions);
  r.params = {{"check", "bloom-kerman"}, {"p", p}, {"q", q}, {"t", t.describe()}, {"u", u.describe()},
              {"v", v.describe()}, {"w", w.describe()}, {"growth_D", D}};
  return r;
}

// ---------------------------------------------------------------------------
// S^2 between LG spaces

/// The four conditions with Phi = phi1^(q) and psi2 the dual weight of (phi2, p):
///   C1: ( int_0^x log(x/y)^p' psi2 )^(1/p') ( int_x^oo y^-q Phi )^(1/q)
///   C2: ( int_0^x psi2 )^(1/p') ( int_x^oo log(y/x)^q y^-q Phi )^(1/q)
///   C3: ( int_0^x log(x/y)^q Phi )^(1/q) ( int_x^oo y^-p' psi2 )^(1/p')
///   C4: ( int_0^x Phi )^(1/q) ( int_x^oo log(y/x)^p' y^-p' psi2 )^(1/p')
inline ConditionReport corollary_s2_conditions(const Weight& Phi, const Weight& psi2, double p, double q,
                                               const GeometricGrid& grid = GeometricGrid::standard(),
                                               const ConditionOptions& opt = {}) {
  const double pp = conjugate_exponent(p);
  const auto phi = detail::weight_fn(Phi);
  const auto psi = detail::weight_fn(psi2);
  auto phi_q = [Phi, q](double y) { return std::pow(y, -q) * Phi(y); };
  auto psi_p = [psi2, pp](double y) { return std::pow(y, -pp) * psi2(y); };
  const TailSpec tPhi = Phi.tails(), tPsi = psi2.tails();
  const TailSpec tPhiq = detail::shifted(tPhi, 1.0, -q), tPsip = detail::shifted(tPsi, 1.0, -pp);
  const auto L = ConditionKernel::log_ratio();
  const auto one = ConditionKernel::constant();
  const ProductCondition conds[4] = {
      {"C1", L, pp, psi, tPsi, 1.0 / pp, one, 1.0, phi_q, tPhiq, 1.0 / q},
      {"C2", one, 1.0, psi, tPsi, 1.0 / pp, L, q, phi_q, tPhiq, 1.0 / q},
      {"C3", L, q, phi, tPhi, 1.0 / q, one, 1.0, psi_p, tPsip, 1.0 / pp},
      {"C4", one, 1.0, phi, tPhi, 1.0 / q, L, pp, psi_p, tPsip, 1.0 / pp},
  };
  ConditionReport r;
  for (const auto& c : conds) r.conditions.push_back(evaluate_condition(c, grid, opt));
  r.verdict = detail::combine_verdicts(r.conditions);
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN(); };
  r.params = {{"check", "s2-corollary"},
              {"p", p},
              {"q", q},
              {"symmetry", {{"C1_over_C4", ratio(r.conditions[0].sup, r.conditions[3].sup)},
                            {"C2_over_C3", ratio(r.conditions[1].sup, r.conditions[2].sup)}}}};
  return r;
}

/// Checks the hypotheses on phi1 (exponent q) and phi2 (exponent p), builds
/// phi1^(q) and the dual weight of phi2, and evaluates C1..C4.
inline ConditionReport corollary_s2_check(const Weight& phi1, const Weight& phi2, double p, double q,
                                          const GeometricGrid& grid = GeometricGrid::standard(),
                                          const ConditionOptions& opt = {}) {
  if (!(p > 1.0) || !(q >= p)) throw Error(ErrorCode::InvalidArgument, "corollary_s2_check needs 1 < p <= q");
  if (auto why = admissibility_violation(phi2, p)) throw Error(ErrorCode::AdmissibilityFailed, "phi2 with p: " + *why);
  if (auto why = admissibility_violation(phi1, q)) throw Error(ErrorCode::AdmissibilityFailed, "phi1 with q: " + *why);
  const Weight Phi = associated_weight_q(phi1, q, grid);
  if (auto why = admissibility_violation(Phi, q)) {
    throw Error(ErrorCode::AdmissibilityFailed, "phi1^(q) with q: " + *why);
  }
  const Weight psi2 = dual_weight(phi2, p, grid);
  ConditionReport r = corollary_s2_conditions(Phi, psi2, p, q, grid, opt);
  r.params["phi1"] = phi1.describe();
  r.params["phi2"] = phi2.describe();
  return r;
}

}  // namespace lgt
