#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lgt/verification.hpp"

using namespace lgt;

namespace {

const GeometricGrid& G() {
  static const GeometricGrid g = GeometricGrid::standard();
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ( int |f|^p )^(1/p) block by block
double lp(const StepFunction& f, double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += std::pow(f.values()[k], p) * f.measure(k);
  return std::pow(s, 1.0 / p);
}

}  // namespace

TEST(LgNorm, Examples) {
  EXPECT_LT(rel(lg_norm(StepFunction({1.0}, {1.0}), {2.0, Weight::one()}), std::sqrt(2.0)), 1e-12);
  EXPECT_EQ(lg_norm(StepFunction({1.0}, {0.0}), {2.0, Weight::one()}), 0.0);
  EXPECT_THROW(lg_norm(StepFunction({1.0}, {1.0}), {2.0, Weight::power(1.0)}), Error);
}

TEST(LgNorm, LebesgueAgainstClosedForm) {
  // f = 1 on [0,a) and 1/2 on [a,b): f** = 1, then (a/2 + t/2)/t, then (a+b)/(2t)
  const double a = 0.5, b = 2.0, p = 3.0;
  const StepFunction f({a, b}, {1.0, 0.5});
  const double mid = [&] {
    // int_a^b (a/(2t) + 1/2)^3 dt
    auto F = [&](double t) {
      return a * a * a / 8.0 * (-1.0 / (2.0 * t * t)) + 3.0 * a * a / 8.0 * (-1.0 / t) + 3.0 * a / 8.0 * std::log(t) +
             t / 8.0;
    };
    return F(b) - F(a);
  }();
  const double total = a + 0.5 * (b - a);
  const double expect = a + mid + std::pow(total, p) * std::pow(b, 1.0 - p) / (p - 1.0);
  EXPECT_LT(rel(lg_norm(f, {p, Weight::one()}), std::pow(expect, 1.0 / p)), 1e-12);
}

TEST(LgNorm, HomogeneityAndHardyEquivalence) {
  std::mt19937_64 rng(4);
  for (double p : {1.5, 2.0, 4.0}) {
    const double pp = p / (p - 1.0);
    for (int k = 0; k < 20; ++k) {
      const StepFunction f = shuffle_blocks(random_test_function(rng(), 10.0, 9), rng());
      const double n = lg_norm(f, {p, Weight::one()});
      EXPECT_LT(rel(lg_norm(f.scaled(3.0), {p, Weight::one()}), 3.0 * n), 1e-12);
      EXPECT_GE(n, lp(f, p) * (1.0 - 1e-12));
      EXPECT_LE(n, pp * lp(f, p));
    }
  }
}

TEST(LgNorm, TruncationsIncrease) {
  const StepFunction f = random_test_function(12, 1.0, 10);
  const LGSpaceSpec spec{2.0, Weight::power(0.4)};
  double prev = 0.0;
  for (double T : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0}) {
    const double n = lg_norm(f.truncated(T), spec);
    EXPECT_GE(n, prev * (1.0 - 1e-12)) << T;
    prev = n;
  }
  EXPECT_LT(rel(prev, lg_norm(f, spec)), 1e-12);
}

TEST(LgNorm, HlpMonotone) {
  std::mt19937_64 rng(8);
  const std::vector<LGSpaceSpec> specs{{2.0, Weight::one()}, {1.5, Weight::power(0.2)}, {3.0, Weight::power(-0.5)}};
  int pairs = 0;
  for (int k = 0; k < 200 && pairs < 60; ++k) {
    const StepFunction f = random_test_function(rng(), 1.0, 5);
    const StepFunction g = random_test_function(rng(), 1.0, 5);
    if (!hlp_dominates(f, g, G())) continue;
    ++pairs;
    for (const auto& s : specs) EXPECT_LE(lg_norm(f, s), lg_norm(g, s) * (1.0 + 1e-9));
  }
  EXPECT_GT(pairs, 10);
}

TEST(LgNorm, ProfilePathMatchesStepPath) {
  const StepFunction f = random_test_function(21, 2.0, 7);
  Profile pf;
  pf.value = [f](double t) { return f(t); };
  pf.tails = TailSpec{0.0, -2.0};
  pf.breaks = f.knots();
  pf.nonincreasing = true;
  pf.support_end = f.support_end();
  for (const LGSpaceSpec& s : {LGSpaceSpec{2.0, Weight::one()}, LGSpaceSpec{3.0, Weight::power(0.5)}}) {
    EXPECT_LT(rel(lg_norm(pf, s), lg_norm(f, s)), 1e-7);
  }
}

TEST(RandomTestFunction, Properties) {
  EXPECT_EQ(random_test_function(5, 1.0, 8), random_test_function(5, 1.0, 8));
  EXPECT_NE(random_test_function(5, 1.0, 8), random_test_function(6, 1.0, 8));
  EXPECT_EQ(random_test_function(5, 1.0, 1).size(), 1u);
  EXPECT_THROW(random_test_function(5, 1.0, 0), Error);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const StepFunction f = random_test_function(s, 100.0, 12);
    EXPECT_EQ(rearrange(f), f);
    EXPECT_GE(f.knots().front(), 100.0 * 1e-4);
    EXPECT_LE(f.support_end(), 100.0);
  }
}

TEST(Estimate, ClassifyRatios) {
  EXPECT_EQ(classify_ratios({0.0, 0.0, 0.0}), RatioVerdict::Saturating);
  EXPECT_EQ(classify_ratios({1.0, 1.05, 1.02}), RatioVerdict::Saturating);
  EXPECT_EQ(classify_ratios({1.0, 30.0, 900.0}), RatioVerdict::Growing);
  EXPECT_EQ(classify_ratios({900.0, 30.0, 1.0}), RatioVerdict::Growing);
  EXPECT_EQ(classify_ratios({1.0, 3.0, 2.0}), RatioVerdict::Inconclusive);
  EXPECT_EQ(classify_ratios({1.0, 2.0, 4.0}), RatioVerdict::Inconclusive);
}

TEST(Estimate, ZeroOperatorSaturates) {
  const WeightedLpSpec l2{2.0, Weight::one()};
  const auto e = estimate_norm_ratio(SampledOp{SampledKernel::constant(0.0)}, l2, l2, InequalityId::I11, 5);
  EXPECT_EQ(e.max_ratio, 0.0);
  EXPECT_EQ(e.verdict, RatioVerdict::Saturating);
  EXPECT_EQ(e.ratio_by_scale.size(), 3u);
}

TEST(Estimate, HilbertConstant) {
  const WeightedLpSpec l2{2.0, Weight::one()};
  EstimateOptions opt;
  opt.family = TestFamily::Extremal;
  const auto e = estimate_norm_ratio(StieltjesOp{}, l2, l2, InequalityId::I34, 6, G(), opt);
  EXPECT_GE(e.max_ratio, 0.9 * std::numbers::pi);
  EXPECT_LE(e.max_ratio, std::numbers::pi * (1.0 + 1e-3));
  EXPECT_EQ(e.verdict, RatioVerdict::Saturating);
}

TEST(Estimate, RandomInputsStayBelowHilbertConstant) {
  const WeightedLpSpec l2{2.0, Weight::one()};
  EstimateOptions opt;
  opt.seed = 3;
  const auto e = estimate_norm_ratio(StieltjesOp{}, l2, l2, InequalityId::I34, 10, G(), opt);
  EXPECT_GT(e.max_ratio, 0.0);
  EXPECT_LE(e.max_ratio, std::numbers::pi * (1.0 + 1e-3));
  EXPECT_EQ(e.verdict, RatioVerdict::Saturating);
}

TEST(Estimate, SquaredStieltjesIsSubmultiplicative) {
  const WeightedLpSpec l2{2.0, Weight::one()};
  EstimateOptions opt;
  opt.family = TestFamily::Extremal;
  opt.epsilon = 1e-4;
  const auto e = estimate_norm_ratio(S2ExactOp{}, l2, l2, InequalityId::I34, 4, G(), opt);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_LE(e.max_ratio, pi2 * (1.0 + 1e-3));
  EXPECT_GT(e.max_ratio, 0.5 * pi2);
  EXPECT_EQ(e.verdict, RatioVerdict::Saturating);
}

TEST(Estimate, PowerWeightGapGrows) {
  // S^2 from L^2 to L^2(t^0.7): the ratio scales like scale^0.35
  const WeightedLpSpec src{2.0, Weight::one()}, dst{2.0, Weight::power(0.7)};
  EstimateOptions opt;
  opt.family = TestFamily::Extremal;
  opt.epsilon = 1e-3;
  const auto e = estimate_norm_ratio(S2ExactOp{}, src, dst, InequalityId::I34, 2, G(), opt);
  EXPECT_EQ(e.verdict, RatioVerdict::Growing);
}

TEST(Estimate, JsonSchema) {
  const WeightedLpSpec l2{2.0, Weight::one()};
  const auto j = to_json(estimate_norm_ratio(StieltjesOp{}, l2, l2, InequalityId::I11, 2));
  for (const char* key : {"inequality_id", "samples", "max_ratio", "ratio_by_scale", "verdict"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["inequality_id"], "I11");
  EXPECT_EQ(j["ratio_by_scale"].size(), 3u);
}

TEST(Chain, ZeroInput) {
  const StepFunction zero({1.0}, {0.0});
  const SampledKernel K = SampledKernel::product(StepFunction({1, 2}, {2, 1}), StepFunction({1, 3}, {1, 4}));
  const ChainSides s = chain_sides(SampledOp{K}, zero, Weight::one(), Weight::one(), 2.0, 2.0);
  EXPECT_EQ(s.lhs, 0.0);
  EXPECT_EQ(s.mid1, 0.0);
  EXPECT_EQ(s.mid_neug, 0.0);
  EXPECT_EQ(s.mid2, 0.0);
  EXPECT_EQ(s.rhs, 0.0);
}

TEST(Chain, ProductKernelLebesgue) {
  const SampledKernel K = SampledKernel::product(StepFunction({0.5, 1, 3}, {1, 4, 2}), StepFunction({1, 2, 4}, {3, 1, 2}));
  const ChainReport r = verify_theorem_chain(SampledOp{K}, Weight::one(), Weight::one(), 2.0, 2.0, 20);
  EXPECT_EQ(r.violations, 0u) << (r.witnesses.empty() ? "" : r.witnesses.front());
  EXPECT_GT(r.max_constant, 0.0);
  EXPECT_LE(r.max_link_ratio[0], 1.0 + 1e-7);
  EXPECT_LE(r.max_link_ratio[2], 1.0 + 1e-7);
  // the Neugebauer link is not a constant-1 inequality
  EXPECT_GT(r.max_link_ratio[1], 1.0);
  EXPECT_LT(r.max_link_ratio[1], std::sqrt(2.0));
}

TEST(Chain, NeugebauerLinkNeedsAConstant) {
  // f = t^-a on [0,1), a near 1/2: int f**^2 / int f^2 u^(2) with u = 1 tends to 2
  const double a = 0.49;
  Profile f;
  f.value = [a](double t) { return t < 1.0 ? std::pow(t, -a) : 0.0; };
  f.primitive = [a](double t) { return std::pow(std::min(t, 1.0), 1.0 - a) / (1.0 - a); };
  f.breaks = {1.0};
  f.tails = TailSpec{-a, -2.0};
  f.nonincreasing = true;
  f.support_end = 1.0;
  const double lhs = lg_norm(f, {2.0, Weight::one()});
  const double rhs = weighted_lp_norm(f, {2.0, associated_weight_q(Weight::one(), 2.0)});
  const double expect = std::sqrt((1.0 / (1.0 - 2.0 * a) + 1.0) / ((1.0 - a) * (1.0 - a)) / (2.0 / (1.0 - 2.0 * a)));
  EXPECT_LT(rel(lhs / rhs, expect), 1e-7);
  EXPECT_GT(lhs / rhs, 1.3);
}

TEST(Chain, StieltjesLorentz) {
  const double p = 2.0, q = 3.0;
  const ChainReport r = verify_theorem_chain(StieltjesOp{}, Weight::power(q / p - 1.0), Weight::power(q / p - 1.0), p,
                                             q, 10);
  EXPECT_EQ(r.violations, 0u) << (r.witnesses.empty() ? "" : r.witnesses.front());
  const auto j = to_json(r);
  EXPECT_EQ(j["kernel"], "stieltjes");
}
