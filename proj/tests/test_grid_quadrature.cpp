#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "lgt/grid.hpp"
#include "lgt/quadrature.hpp"

using namespace lgt;

namespace {

const GeometricGrid& G() {
  static const GeometricGrid g = GeometricGrid::standard();
  return g;
}

// independent oracles: double-exponential rules from Boost
template <class F>
double oracle_0_T(F f, double T) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, 0.0, T);
}

template <class F>
double oracle_T_inf(F f, double T) {
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate([&](double u) { return f(T + u); }, 0.0, std::numeric_limits<double>::infinity());
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Grid, StandardLayout) {
  const auto& g = G();
  EXPECT_EQ(g.size(), 513u);
  EXPECT_EQ(g[0], 1e-8);
  EXPECT_EQ(g[g.size() - 1], 1e8);
  const double r = g[1] / g[0];
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    EXPECT_GT(g[i + 1], g[i]);
    EXPECT_NEAR(g[i + 1] / g[i], r, 1e-12 * r);
  }
  EXPECT_EQ(g.nodes_per_decade_span(), 32u);
}

TEST(Grid, ParseAndEnvironment) {
  const auto g = GeometricGrid::parse("1e-4,1e4,8");
  EXPECT_EQ(g.size(), 65u);
  EXPECT_THROW(GeometricGrid::parse("1,2"), Error);
  EXPECT_THROW(GeometricGrid(1.0, 0.5, 4), Error);
  ::setenv("LGT_GRID", "1e-2,1e2,4", 1);
  EXPECT_EQ(GeometricGrid::from_environment().size(), 17u);
  ::unsetenv("LGT_GRID");
  EXPECT_EQ(GeometricGrid::from_environment().size(), 513u);
}

TEST(Grid, CellOf) {
  const auto& g = G();
  EXPECT_EQ(g.cell_of(1e-9), 0u);
  EXPECT_EQ(g.cell_of(g[10]), 10u);
  EXPECT_EQ(g.cell_of(1e9), g.cells() - 1);
  EXPECT_EQ(g.cell_of(std::sqrt(g[3] * g[4])), 3u);
}

TEST(Quadrature, ZeroToTExamples) {
  EXPECT_NEAR(quad::integrate_0_to_T([](double) { return 1.0; }, 2.0, TailSpec{0.0, {}}, G()), 2.0, 2e-8);
  EXPECT_NEAR(quad::integrate_0_to_T([](double t) { return 1.0 / std::sqrt(t); }, 1.0, TailSpec{-0.5, {}}, G()), 2.0,
              2e-8);
  EXPECT_NEAR(quad::integrate_0_to_T([](double t) { return std::log(1.0 / t); }, 1.0, TailSpec{0.0, {}}, G()), 1.0,
              1e-8);
}

TEST(Quadrature, ZeroToTErrors) {
  auto f = [](double t) { return 1.0 / t; };
  try {
    quad::integrate_0_to_T(f, 1.0, TailSpec{-1.0, {}}, G());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegrableAtZero);
  }
  try {
    quad::integrate_0_to_T([](double t) { return t > 0.5 ? std::nan("") : 1.0; }, 1.0, TailSpec{0.0, {}}, G());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
  try {
    quad::integrate_0_to_T(f, 1.0, TailSpec{}, G());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownTail);
  }
}

TEST(Quadrature, TToInfExamples) {
  auto f = [](double t) { return 1.0 / (t * t); };
  EXPECT_NEAR(quad::integrate_T_to_inf(f, 1.0, TailSpec{{}, -2.0}, G()), 1.0, 1e-8);
  EXPECT_NEAR(quad::integrate_T_to_inf(f, 4.0, TailSpec{{}, -2.0}, G()), 0.25, 1e-8 * 0.25);
  EXPECT_NEAR(quad::integrate_T_to_inf([](double t) { return std::exp(-t); }, 0.0, TailSpec{0.0, -3.0}, G()), 1.0,
              1e-8);
  try {
    quad::integrate_T_to_inf([](double t) { return 1.0 / t; }, 1.0, TailSpec{{}, -1.0}, G());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegrableAtInfinity);
  }
}

TEST(Quadrature, LogKernelExamples) {
  auto one = [](double) { return 1.0; };
  for (double t : {1e-3, 1.0, 7.0, 1e4}) {
    EXPECT_NEAR(quad::integrate_log_kernel(one, t, quad::LogKernelMode::Inner, TailSpec{0.0, {}}, G()), 1.0, 1e-9);
  }
  EXPECT_NEAR(quad::integrate_log_kernel([](double s) { return s; }, 1.0, quad::LogKernelMode::Inner,
                                         TailSpec{1.0, {}}, G()),
              0.25, 1e-10);
  EXPECT_NEAR(quad::integrate_log_kernel([](double s) { return 1.0 / (s * s); }, 1.0, quad::LogKernelMode::Outer,
                                         TailSpec{{}, -2.0}, G()),
              0.25, 1e-10);
}

TEST(Quadrature, PowerLogFamilyAgainstDoubleExponentialOracle) {
  struct Case {
    double a, b, c;
  };
  for (const Case k : {Case{-0.5, -2.0, 0.0}, Case{0.0, -1.5, 0.0}, Case{0.7, -3.0, 1.0}, Case{-0.9, -1.2, -1.0},
                       Case{2.0, -4.0, 2.0}}) {
    auto f = [k](double t) {
      return std::pow(t, k.a) * std::pow(1.0 + t, k.b - k.a) * std::pow(std::log(std::numbers::e + t), k.c);
    };
    for (double T : {1e-2, 1.0, 30.0}) {
      const double head = quad::integrate_0_to_T(f, T, TailSpec{k.a, {}}, G());
      EXPECT_LT(rel(head, oracle_0_T(f, T)), 1e-8) << k.a << " " << k.b << " T=" << T;
      const double tail = quad::integrate_T_to_inf(f, T, TailSpec{{}, k.b}, G());
      EXPECT_LT(rel(tail, oracle_T_inf(f, T)), 1e-8) << k.a << " " << k.b << " T=" << T;
    }
  }
}

TEST(Quadrature, LinearityAndAdditivity) {
  auto f = [](double t) { return std::pow(t, -0.3) / (1.0 + t * t); };
  auto g = [](double t) { return std::exp(-t) * std::sqrt(t); };
  const TailSpec tl{-0.3, -2.3};
  const double T = 3.0;
  const double If = quad::integrate_0_to_T(f, T, tl, G());
  const double Ig = quad::integrate_0_to_T(g, T, TailSpec{0.5, {}}, G());
  const double Ifg = quad::integrate_0_to_T([&](double t) { return 2.0 * f(t) - 0.5 * g(t); }, T, tl, G());
  EXPECT_LT(rel(Ifg, 2.0 * If - 0.5 * Ig), 1e-10);
  const double half = quad::integrate_0_to_T(f, T / 2, tl, G());
  const double rest = quad::integrate_interval(f, T / 2, T, G().log_step());
  EXPECT_LT(rel(half + rest, If), 1e-10);
}

TEST(Quadrature, RefiningTheGridReducesError) {
  // cell rule only: the end cells are exact up to a floor far below 1e-8
  struct Case {
    double a, b;
  };
  for (const Case k : {Case{-0.5, -1.5}, Case{0.5, -3.0}, Case{-0.9, -1.1}}) {
    auto f = [k](double t) { return std::pow(t, k.a) * std::pow(1.0 + t, k.b - k.a); };
    const double truth = oracle_0_T(f, 1e3) - oracle_0_T(f, 1e-3);
    const double e1 = std::abs(quad::integrate_interval(f, 1e-3, 1e3, GeometricGrid(1e-8, 1e8, 1).log_step()) - truth);
    const double e2 = std::abs(quad::integrate_interval(f, 1e-3, 1e3, GeometricGrid(1e-8, 1e8, 2).log_step()) - truth);
    EXPECT_TRUE(e2 <= e1 / 4.0 || e2 < 1e-14 * truth) << k.a << " " << k.b << " e1=" << e1 << " e2=" << e2;
  }
  const double whole = quad::integrate_0_to_inf([](double t) { return std::pow(t, -0.5) * std::pow(1.0 + t, -1.5); },
                                                TailSpec{-0.5, -2.0}, G());
  EXPECT_NEAR(whole, 2.0, 2e-8);  // B(1/2, 1)
}

TEST(Quadrature, GridIntegrandCumulativeTables) {
  auto f = [](double t) { return std::pow(t, 0.3) / (1.0 + t * t); };
  const quad::GridIntegrand I(f, G(), TailSpec{0.3, -1.7});
  for (double t : {3e-9, 1e-4, 0.37, 1.0, 55.0, 3e7, 2e8}) {
    EXPECT_LT(rel(I.below(t), oracle_0_T(f, t)), 1e-8) << t;
    EXPECT_LT(rel(I.above(t), oracle_T_inf(f, t)), 1e-8) << t;
  }
  for (std::size_t i = 0; i < G().size(); i += 37) {
    EXPECT_LT(rel(I.below(i) + I.above(i), I.below(G().size() - 1) + I.above(G().size() - 1)), 1e-12);
  }
}

TEST(Quadrature, GridIntegrandDetectsDivergence) {
  const quad::GridIntegrand I([](double) { return 1.0; }, G(), TailSpec{0.0, 0.0}, quad::TailPolicy::Detect);
  EXPECT_TRUE(std::isinf(I.above(std::size_t{0})));
  EXPECT_NEAR(I.below(5.0), 5.0, 1e-12);
  EXPECT_THROW(quad::GridIntegrand([](double) { return 1.0; }, G(), TailSpec{0.0, 0.0}), Error);
}
