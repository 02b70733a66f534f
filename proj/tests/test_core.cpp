#include <gtest/gtest.h>

#include "pancake/core.hpp"
#include "pancake/rng.hpp"

using namespace pancake;

TEST(ProjectToBall, InsideIsUnchanged) {
  EXPECT_EQ(project_to_ball(Vec{3, 4}, 10), (Vec{3, 4}));
}

TEST(ProjectToBall, RescalesOntoSphere) {
  const Vec p = project_to_ball(Vec{3, 4}, 1);
  EXPECT_DOUBLE_EQ(p[0], 0.6);
  EXPECT_DOUBLE_EQ(p[1], 0.8);
  EXPECT_LE(norm(p), 1.0);
}

TEST(ProjectToBall, ZeroIsFixed) {
  EXPECT_EQ(project_to_ball(Vec{0, 0}, 1), (Vec{0, 0}));
}

TEST(ProjectToBall, NeverExceedsRadius) {
  CounterRng rng(7);
  for (int i = 0; i < 2000; ++i) {
    Vec v(1 + rng.below(20));
    for (double& x : v) x = 100.0 * rng.normal();
    const double r = 0.01 + 10.0 * rng.uniform();
    EXPECT_LE(norm(project_to_ball(v, r)), r);
  }
}

TEST(ProjectToBall, RejectsBadInput) {
  EXPECT_THROW(project_to_ball(Vec{1, 0}, 0.0), Error);
  EXPECT_THROW(project_to_ball(Vec{std::nan(""), 0}, 1.0), Error);
}

TEST(ValidateDataset, CleanDatasetHasNoIssues) {
  const auto ds = make_inlier_dataset({{{0.5, 0}, 1}, {{0, -1}, -1}});
  EXPECT_TRUE(validate_dataset(ds).empty());
}

TEST(ValidateDataset, FlagsLongVector) {
  const auto ds = make_inlier_dataset({{{1.5, 0}, 1}, {{0, 0.5}, -1}});
  const auto issues = validate_dataset(ds);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, Violation::NormExceeded);
  EXPECT_EQ(issues[0].index, 0u);
}

TEST(ValidateDataset, FlagsMixedDimensions) {
  auto ds = make_inlier_dataset({{{0.1, 0.1, 0.1}, 1}, {{0.1, 0.1, 0.1, 0.1}, -1}});
  const auto issues = validate_dataset(ds);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, Violation::DimensionMismatch);
}

TEST(ValidateDataset, FlagsBadLabelAndEmpty) {
  EXPECT_EQ(validate_dataset(make_inlier_dataset({{{0.1}, 0}}))[0].kind, Violation::BadLabel);
  EXPECT_EQ(validate_dataset(Dataset{})[0].kind, Violation::EmptyDataset);
}

TEST(MarginOf, Examples) {
  const MarginCertificate cert{{2, 0}, 0.5};
  EXPECT_DOUBLE_EQ(margin_of(make_inlier_dataset({{{0.5, 0}, 1}}), cert), 1.0);
  EXPECT_DOUBLE_EQ(margin_of(make_inlier_dataset({{{0.5, 0}, 1}, {{-0.5, 0}, -1}}), cert), 1.0);
  EXPECT_DOUBLE_EQ(margin_of(make_inlier_dataset({{{0.5, 0}, -1}}), cert), -1.0);
}

TEST(MarginOf, EmptySelectionThrows) {
  auto ds = make_inlier_dataset({{{0.5, 0}, 1}});
  try {
    margin_of(ds, {{2, 0}, 0.5}, RoleFilter::Outliers);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySelection);
  }
}

TEST(Certificate, HoldsOnlyWithinRadiusAndMargin) {
  const auto ds = make_inlier_dataset({{{0.5, 0}, 1}, {{-0.6, 0}, -1}});
  EXPECT_TRUE(certificate_holds(ds, {{2, 0}, 0.5}));
  EXPECT_FALSE(certificate_holds(ds, {{2, 0}, 0.6}));
  EXPECT_FALSE(certificate_holds(ds, {{1, 0}, 1.0}));
}

TEST(Dataset, RolesDriveCountsAndSelection) {
  auto ds = make_inlier_dataset({{{0.1}, 1}, {{0.2}, -1}, {{0.3}, 1}, {{0.4}, -1}});
  ds.roles[2] = Role::Outlier;
  EXPECT_EQ(ds.count(RoleFilter::Outliers), 1u);
  EXPECT_DOUBLE_EQ(ds.eta(), 0.25);
  const auto o = ds.select(RoleFilter::Outliers);
  ASSERT_EQ(o.size(), 1u);
  EXPECT_EQ(o.points[0].x, (Vec{0.3}));
  const auto sv = signed_vectors(ds, RoleFilter::Inliers);
  ASSERT_EQ(sv.size(), 3u);
  EXPECT_EQ(sv[1], (Vec{-0.2}));
}

TEST(VectorOps, DimensionMismatchThrows) {
  try {
    dot(Vec{1, 2}, Vec{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Rng, DeterministicAndSplit) {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  EXPECT_EQ(split_seed(1, "train"), split_seed(1, "train"));
  EXPECT_NE(split_seed(1, "train"), split_seed(1, "test"));
  EXPECT_NE(split_seed(1, "train"), split_seed(2, "train"));
}

TEST(Rng, UniformAndBelowRanges) {
  CounterRng rng(5);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(rng.below(7), 7u);
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  CounterRng rng(9);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
