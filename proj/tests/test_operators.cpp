#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "lgt/operators.hpp"

using namespace lgt;

namespace {

const GeometricGrid& G() {
  static const GeometricGrid g = GeometricGrid::standard();
  return g;
}

constexpr double kInfD = std::numeric_limits<double>::infinity();

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

StepFunction random_step(std::mt19937_64& rng, int blocks) {
  std::uniform_real_distribution<double> lm(-2.0, 1.0), v(0.0, 3.0);
  std::vector<double> vals, meas;
  for (int i = 0; i < blocks; ++i) {
    vals.push_back(v(rng));
    meas.push_back(std::pow(10.0, lm(rng)));
  }
  return StepFunction::from_blocks(vals, meas);
}

// int over (0, oo) of g, block by block on the knots of f and a tail piece
template <class F>
double oracle_over_blocks(const F& g, const StepFunction& f, double extra_break) {
  boost::math::quadrature::tanh_sinh<double> ts;
  std::vector<double> pts{0.0};
  for (double k : f.knots()) pts.push_back(k);
  if (extra_break > 0.0 && extra_break < f.support_end()) pts.push_back(extra_break);
  std::sort(pts.begin(), pts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += ts.integrate(g, pts[i], pts[i + 1]);
  return s;
}

Profile without_step(const Profile& p) {
  Profile q = p;
  q.step.reset();
  return q;
}

}  // namespace

TEST(ApplyTK, Examples) {
  EXPECT_EQ(apply_TK(SampledKernel::constant(1.0), StepFunction::indicator(1.0)), StepFunction::indicator(1.0));
  const StepFunction g({1, 2}, {2, 3}), h({0.5, 1}, {4, 1}), f({1}, {2});
  const StepFunction out = apply_TK(SampledKernel::product(g, h), f);
  const double hf = 4 * 2 * 0.5 + 1 * 2 * 0.5;
  EXPECT_DOUBLE_EQ(out(0.5), 2 * hf);
  EXPECT_DOUBLE_EQ(out(1.5), 3 * hf);
  const StepFunction m = apply_TK(SampledKernel({1, 1}, {1, 1}, {1, 4, 3, 2}), StepFunction({2}, {1}));
  EXPECT_EQ(m(0.5), 5.0);
  EXPECT_EQ(m(1.5), 5.0);
}

TEST(Stieltjes, Examples) {
  EXPECT_DOUBLE_EQ(stieltjes(StepFunction::indicator(1.0), 1.0), std::log(2.0));
  EXPECT_EQ(stieltjes(StepFunction({1}, {0}), 3.0), 0.0);
  const Weight h = TabulatedWeight::sample([](double s) { return 1.0 / std::sqrt(s); }, G(), TailSpec::power(-0.5, -0.5));
  for (double t : {1e-4, 0.3, 1.0, 50.0, 1e5}) {
    EXPECT_LT(rel(stieltjes(h, t), std::numbers::pi / std::sqrt(t)), 1e-8) << t;
  }
  EXPECT_LT(rel(stieltjes(Weight::power(-0.5), 2.0), std::numbers::pi / std::sqrt(2.0)), 1e-8);
}

TEST(Stieltjes, DivergentInputs) {
  try {
    stieltjes(Weight::one(), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegrableAtInfinity);
  }
  try {
    stieltjes(Weight::power(-1.2), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegrableAtZero);
  }
}

TEST(Stieltjes, StepClosedFormAgainstQuadrature) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const StepFunction f = random_step(rng, 6);
    for (double t : {1e-3, 0.2, 1.0, 40.0}) {
      const double q = oracle_over_blocks([&](double s) { return f(s) / (t + s); }, f, 0.0);
      EXPECT_LT(rel(stieltjes(f, t), q), 1e-10);
    }
  }
}

TEST(Stieltjes, TruncatedPowerClosedForm) {
  for (double e : {-0.75, -0.5, -0.25}) {
    const Profile f = Profile::truncated_power(e, 1e-4, 1e3, 2.0);
    Profile q = f;
    q.power.reset();
    for (double t : {1e-7, 1e-4, 0.3, 1.0, 50.0, 1e3, 1e6}) {
      const double exact = stieltjes(f, t);
      boost::math::quadrature::tanh_sinh<double> ts;
      const double oracle = ts.integrate([&](double s) { return 2.0 * std::pow(s, e) / (t + s); }, 1e-4, 1e3);
      EXPECT_LT(rel(exact, oracle), 1e-9) << e << " " << t;
      EXPECT_LT(rel(exact, stieltjes(q, t)), 1e-8) << e << " " << t;
    }
  }
}

TEST(Stieltjes, PrimitiveAndDoubleStar) {
  std::mt19937_64 rng(2);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (int k = 0; k < 10; ++k) {
    const StepFunction f = random_step(rng, 5);
    for (double T : {0.01, 0.7, 12.0}) {
      const double q = ts.integrate([&](double t) { return stieltjes(f, t); }, 0.0, T);
      EXPECT_LT(rel(stieltjes_primitive(f, T), q), 1e-10);
    }
    const LevelAverage F(f);
    for (double t : {0.05, 1.0, 9.0}) {
      const StepFunction& g = F.rearranged();
      double q = 0.0;
      double prev = 0.0;
      for (double x : g.knots()) {
        q += ts.integrate([&](double s) { return F(s) / (t + s); }, prev, x);
        prev = x;
      }
      boost::math::quadrature::exp_sinh<double> es;
      q += es.integrate([&](double u) { return F(prev + u) / (t + prev + u); }, 0.0, kInfD);
      EXPECT_LT(rel(stieltjes_double_star(F, t), q), 1e-9) << t;
    }
  }
}

TEST(S2Kernel, Examples) {
  EXPECT_DOUBLE_EQ(s2_exact_kernel(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(s2_exact_kernel(2.0, 1.0), std::log(2.0));
  EXPECT_DOUBLE_EQ(s2_exact_kernel(1.0, 2.0), std::log(2.0));
}

TEST(S2Kernel, SymmetricAndMonotoneOnGrid) {
  for (std::size_t i = 0; i < G().size(); i += 8) {
    double prev = kInfD;
    for (std::size_t j = 0; j < G().size(); j += 8) {
      const double t = G()[i], s = G()[j];
      const double k = s2_exact_kernel(t, s);
      EXPECT_EQ(k, s2_exact_kernel(s, t));
      EXPECT_LE(k, prev);
      prev = k;
    }
  }
}

TEST(S2Kernel, AgreesWithDoubleQuadrature) {
  boost::math::quadrature::exp_sinh<double> es;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double t = std::pow(10.0, -6.0 + 12.0 * i / 19.0), s = std::pow(10.0, -6.0 + 12.0 * j / 19.0);
      const double q = es.integrate([&](double y) { return 1.0 / ((t + y) * (y + s)); }, 0.0, kInfD);
      EXPECT_LT(rel(s2_exact_kernel(t, s), q), 1e-6) << t << " " << s;
    }
  }
}

TEST(S2Kernel, StableNearDiagonal) {
  for (double t : {1e-5, 1.0, 3e4}) {
    for (double d = 1e-1; d >= 1e-12; d /= 10.0) {
      const double s = t * (1.0 + d);
      const double exact = std::log1p((s - t) / t) / (s - t);
      EXPECT_LT(rel(s2_exact_kernel(t, s), exact), 1e-14) << t << " " << d;
    }
  }
}

TEST(S2Apply, DilogMatchesQuadratureAndIteratedStieltjes) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const StepFunction f = random_step(rng, 5);
    for (double t : {1e-3, 0.5, 20.0}) {
      const double q = oracle_over_blocks([&](double s) { return s2_exact_kernel(t, s) * f(s); }, f, t);
      EXPECT_LT(rel(s2_apply(f, t), q), 1e-9) << t;
    }
  }
  const StepFunction h = StepFunction::indicator(1.0);
  const Profile Sh = apply(StieltjesOp{}, Profile::from_step(h));
  EXPECT_LT(rel(s2_apply(h, 1.0), stieltjes(without_step(Sh), 1.0)), 1e-6);
}

TEST(S2Logform, Examples) {
  const StepFunction one = StepFunction::indicator(1.0);
  EXPECT_NEAR(s2_logform(one, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(s2_logform(one, std::numbers::e), 2.0 / std::numbers::e, 1e-15);
  EXPECT_EQ(s2_logform(StepFunction({1}, {0}), 2.0), 0.0);
}

TEST(S2Logform, ThreeEvaluationPathsAgree) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 10; ++k) {
    const StepFunction f = random_step(rng, 7);
    const S2LogForm fast(f);
    const Profile pq = without_step(Profile::from_step(f));
    for (double t : {1e-4, 0.03, 0.9, 2.0, 100.0}) {
      const double direct = s2_logform(f, t);
      EXPECT_LT(rel(fast(t), direct), 1e-12) << t;
      EXPECT_LT(rel(s2_logform(pq, t), direct), 1e-8) << t;
    }
  }
}

TEST(S2Logform, EquivalentToExactUpToConstants) {
  std::mt19937_64 rng(8);
  double lo = kInfD, hi = 0.0;
  for (int k = 0; k < 40; ++k) {
    const StepFunction f = random_step(rng, 6);
    for (std::size_t i = 0; i < G().size(); i += 13) {
      const double r = s2_logform(f, G()[i]) / s2_apply(f, G()[i]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 10.0) << lo << " " << hi;
}

TEST(MKernel, Examples) {
  const IteratedKernel ind = IteratedKernel::from_sampled(SampledKernel::constant(1.0, 10.0, 1.0));
  EXPECT_DOUBLE_EQ(m_kernel(ind, 1.0, 1.0, MKernelMode::Exact), std::log(2.0));
  EXPECT_EQ(m_kernel(IteratedKernel::zero(), 0.5, 0.5, MKernelMode::Exact), 0.0);
  EXPECT_EQ(m_kernel(IteratedKernel::zero(), 0.5, 0.5, MKernelMode::Split), 0.0);
}

TEST(MKernel, SplitBracketsExact) {
  const IteratedKernel st = IteratedKernel::stieltjes();
  for (std::size_t i = 0; i < G().size(); i += 32) {
    for (std::size_t j = 0; j < G().size(); j += 32) {
      const double t = G()[i], s = G()[j];
      const double r = m_kernel(st, t, s, MKernelMode::Split) / m_kernel(st, t, s, MKernelMode::Exact);
      EXPECT_GE(r, 1.0 - 1e-8) << t << " " << s;
      EXPECT_LE(r, 2.0 + 1e-8) << t << " " << s;
    }
  }
}

TEST(MKernel, GeneralQuadratureMatchesClosedForm) {
  const IteratedKernel gen([](double t, double s) { return 1.0 / (t + s); }, TailSpec{0.0, -1.0});
  for (double t : {1e-3, 1.0, 300.0}) {
    for (double s : {1e-2, 1.0, 5e3}) {
      EXPECT_LT(rel(m_kernel(gen, t, s, MKernelMode::Exact), s2_exact_kernel(t, s)), 1e-8);
    }
  }
}

TEST(MKernel, NonincreasingInEachVariable) {
  std::mt19937_64 rng(10);
  std::vector<double> xm, ym, v;
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 5; ++i) xm.push_back(u(rng));
  for (int j = 0; j < 6; ++j) ym.push_back(u(rng));
  for (int k = 0; k < 30; ++k) v.push_back(u(rng));
  const IteratedKernel L = IteratedKernel::from_sampled(iterated_rearrangement(SampledKernel(xm, ym, v)));
  for (const IteratedKernel* k : {&L}) {
    for (std::size_t i = 0; i < G().size(); i += 16) {
      double ps = kInfD, pt = kInfD;
      for (std::size_t j = 0; j < G().size(); j += 16) {
        const double ms = m_kernel(*k, G()[i], G()[j], MKernelMode::Exact);
        const double mt = m_kernel(*k, G()[j], G()[i], MKernelMode::Exact);
        EXPECT_LE(ms, ps * (1.0 + 1e-14));
        EXPECT_LE(mt, pt * (1.0 + 1e-14));
        ps = ms;
        pt = mt;
      }
    }
  }
}

TEST(ApplyTLS, StieltjesKernelCrossCheck) {
  const Profile h = Profile::from_step(StepFunction::indicator(1.0));
  const Profile Sh = apply(StieltjesOp{}, h);
  const double viaS = stieltjes(without_step(Sh), 1.0);
  EXPECT_LT(rel(apply_TLS(IteratedKernel::stieltjes(), h, 1.0), viaS), 1e-6);
  const IteratedKernel gen([](double t, double s) { return 1.0 / (t + s); }, TailSpec{0.0, -1.0});
  EXPECT_LT(rel(apply_TLS(gen, h, 1.0), viaS), 1e-6);
  EXPECT_EQ(apply_TLS(IteratedKernel::stieltjes(), Profile::from_step(StepFunction({1}, {0})), 1.0), 0.0);
}

TEST(ApplyTLS, SeparableKernel) {
  const StepFunction g({0.5, 2, 3}, {5, 2, 1});
  const SampledKernel K({0.5, 1.5, 1.0}, {1.0}, {5, 2, 1});
  const IteratedKernel L = IteratedKernel::from_sampled(K);
  const StepFunction h({0.3, 2.0}, {2.0, 0.5});
  const double mass = stieltjes_primitive(h, 1.0);
  for (double t : {0.1, 1.0, 2.5}) {
    EXPECT_LT(rel(apply_TLS_direct(L, Profile::from_step(h), t), g(t) * mass), 1e-13);
    EXPECT_LT(rel(apply_TLS(L, Profile::from_step(h), t), g(t) * mass), 1e-8);
  }
}

TEST(ApplyTLS, FubiniOrdersAgree) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> xm, ym, v;
    for (int i = 0; i < 4; ++i) xm.push_back(u(rng));
    for (int j = 0; j < 5; ++j) ym.push_back(u(rng));
    for (int k = 0; k < 20; ++k) v.push_back(u(rng));
    const IteratedKernel L = IteratedKernel::from_sampled(iterated_rearrangement(SampledKernel(xm, ym, v)));
    const Profile h = Profile::from_step(random_step(rng, 5));
    for (double t : {0.05, 1.0, 3.0}) {
      const double a = apply_TLS(L, h, t), b = apply_TLS_direct(L, h, t);
      if (b == 0.0) {
        EXPECT_EQ(a, 0.0);
      } else {
        EXPECT_LT(rel(a, b), 1e-8) << trial << " " << t;
      }
    }
  }
}

TEST(IteratedKernel, Certification) {
  EXPECT_THROW(IteratedKernel::from_sampled(SampledKernel({1, 1}, {1}, {1, 2})), Error);
  EXPECT_THROW(IteratedKernel([](double t, double s) { return t + s; }, TailSpec{0.0, 0.0}, {}, true), Error);
  EXPECT_TRUE(IteratedKernel([](double t, double s) { return 1.0 / (1.0 + t + s); }, TailSpec{0.0, -1.0}, {}, true)
                  .monotone_certified());
}

TEST(Apply, ProfilesOfEachOperator) {
  const StepFunction f({0.5, 1.0}, {2.0, 1.0});
  const Profile pf = Profile::from_step(f);
  EXPECT_DOUBLE_EQ(apply(StieltjesOp{}, pf)(0.7), stieltjes(f, 0.7));
  EXPECT_DOUBLE_EQ(apply(S2ExactOp{}, pf)(0.7), s2_apply(f, 0.7));
  EXPECT_DOUBLE_EQ(apply(S2LogformOp{}, pf)(0.7), s2_logform(f, 0.7));
  EXPECT_DOUBLE_EQ(apply(ComposedOp{IteratedKernel::stieltjes()}, pf)(0.7), s2_apply(f, 0.7));
  const SampledKernel K({1, 1}, {1, 1}, {1, 4, 3, 2});
  EXPECT_EQ(apply(SampledOp{K}, pf)(0.2), 1 * 1.5 + 4 * 0.0 + 0.0);
  EXPECT_EQ(operator_name(S2LogformOp{}), "s2_logform");
}
