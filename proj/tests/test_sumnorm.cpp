#include <gtest/gtest.h>

#include <cmath>

#include "pancake/sumnorm.hpp"

using namespace pancake;

namespace {

SignedPointSet random_set(std::size_t n, std::size_t d, CounterRng& rng) {
  SignedPointSet v(n, Vec(d));
  for (auto& x : v) {
    for (double& c : x) c = 2.0 * rng.uniform() - 1.0;
    if (norm(x) > 1.0) x = normalized(x);
  }
  return v;
}

}  // namespace

TEST(HerExact, SingleAxis) {
  const auto r = her_sum_norm_exact({{1, 0, 0}});
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_EQ(r.witness, (Vec{1}));
  EXPECT_TRUE(r.exact);
}

TEST(HerExact, OppositePairPicksSingleton) {
  const auto r = her_sum_norm_exact({{0.6, 0.8}, {-0.6, -0.8}});
  EXPECT_NEAR(r.value, 1.0, 1e-15);
  EXPECT_EQ(r.witness[0] + r.witness[1], 1.0);
}

TEST(HerExact, ThreeVectorExample) {
  const auto r = her_sum_norm_exact({{1, 0}, {0, 1}, {-1, 0}});
  EXPECT_NEAR(r.value, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(r.witness, (Vec{1, 1, 0}));
}

TEST(HerExact, IdenticalVectorsAddUp) {
  for (std::size_t k : {1u, 7u, 20u}) {
    EXPECT_DOUBLE_EQ(her_sum_norm_exact(SignedPointSet(k, Vec{0, 1, 0})).value, static_cast<double>(k));
  }
}

TEST(HerExact, EmptySetIsZero) {
  EXPECT_EQ(her_sum_norm_exact({}).value, 0.0);
}

TEST(HerExact, SizeGuard) {
  try {
    her_sum_norm_exact(SignedPointSet(26, Vec{1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeGuard);
  }
  EXPECT_THROW(lin_sum_norm(SignedPointSet(30, Vec{1.0}), CoefficientBox::ZeroOne), Error);
}

TEST(HerExact, MismatchedDimensions) {
  EXPECT_THROW(her_sum_norm_exact({{1, 0}, {1}}), Error);
}

TEST(HerHeuristic, Examples) {
  EXPECT_DOUBLE_EQ(her_sum_norm_heuristic(SignedPointSet(9, Vec{0, 1}), 1, 0).value, 9.0);
  EXPECT_NEAR(her_sum_norm_heuristic({{0.6, 0.8}, {-0.6, -0.8}}, 3, 0).value, 1.0, 1e-15);
  EXPECT_FALSE(her_sum_norm_heuristic({{1.0}}, 1, 0).exact);
}

TEST(HerHeuristic, LowerBoundAndUsuallyTight) {
  CounterRng rng(3);
  int tight = 0;
  for (int k = 0; k < 100; ++k) {
    const auto v = random_set(1 + rng.below(12), 1 + rng.below(5), rng);
    const double exact = her_sum_norm_exact(v).value;
    const double heur = her_sum_norm_heuristic(v, 10, rng.next_u64()).value;
    EXPECT_LE(heur, exact + 1e-12);
    if (heur >= exact - 1e-9) ++tight;
  }
  EXPECT_GE(tight, 90);
}

TEST(LinSumNorm, ZeroOneMatchesHereditaryExample) {
  const SignedPointSet v = {{1, 0}, {0, 1}, {-1, 0}};
  EXPECT_NEAR(lin_sum_norm(v, CoefficientBox::ZeroOne).value, std::sqrt(2.0), 1e-15);
}

TEST(LinSumNorm, SymmetricUncancels) {
  const auto r = lin_sum_norm({{0.6, 0.8}, {-0.6, -0.8}}, CoefficientBox::SymmetricOne);
  EXPECT_NEAR(r.value, 2.0, 1e-15);
  EXPECT_EQ(r.witness[0], -r.witness[1]);
}

TEST(LinSumNorm, RandomEquivalence) {
  CounterRng rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto v = random_set(1 + rng.below(12), 1 + rng.below(6), rng);
    ASSERT_NEAR(her_sum_norm_exact(v).value, lin_sum_norm(v, CoefficientBox::ZeroOne).value, 1e-9);
  }
}

TEST(LinSumNorm, ProjectedGradientNearExact) {
  CounterRng rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto v = random_set(1 + rng.below(10), 1 + rng.below(4), rng);
    for (auto box : {CoefficientBox::ZeroOne, CoefficientBox::SymmetricOne}) {
      const double exact = lin_sum_norm(v, box).value;
      const auto pg = lin_sum_norm_projected_gradient(v, box, 20, 50, rng.next_u64());
      EXPECT_LE(pg.value, exact + 1e-9);
      EXPECT_LE(pg.rounded_value, exact + 1e-9);
      EXPECT_GE(pg.value, 0.95 * exact);
    }
  }
}

TEST(Rounding, ZeroCoefficients) {
  const auto r = rounding_check({{1, 0}, {0, 1}}, Vec{0, 0}, 100, 1);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Rounding, UnitCoefficientsAreDeterministic) {
  const SignedPointSet v = {{0.3, 0.1}, {0.2, -0.5}};
  const auto r = rounding_check(v, Vec{1, 1}, 100, 1);
  EXPECT_EQ(r.lhs, r.rhs);
  EXPECT_EQ(r.stderr_, 0.0);
}

TEST(Rounding, BernoulliMoment) {
  const auto r = rounding_check({{1, 0}}, Vec{0.5}, 200000, 2);
  EXPECT_DOUBLE_EQ(r.rhs, 0.25);
  EXPECT_NEAR(r.lhs, 0.5, 0.005);
  EXPECT_TRUE(r.pass);
}

TEST(Rounding, RejectsBadInput) {
  EXPECT_THROW(rounding_check({{1, 0}}, Vec{0.5}, 99, 0), Error);
  EXPECT_THROW(rounding_check({{1, 0}}, Vec{1.5}, 100, 0), Error);
  EXPECT_THROW(rounding_check({{1, 0}}, Vec{0.5, 0.5}, 100, 0), Error);
}
