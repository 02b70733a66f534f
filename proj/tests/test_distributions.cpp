#include <gtest/gtest.h>

#include <cmath>

#include "pancake/distributions.hpp"

using namespace pancake;

namespace {

Vec mean_of(const std::vector<Vec>& pts) {
  Vec m(pts.front().size(), 0.0);
  for (const auto& p : pts) axpy(1.0 / static_cast<double>(pts.size()), p, m);
  return m;
}

}  // namespace

TEST(SampleComponent, GaussianMeanConcentrates) {
  const auto pts = sample_component({GaussianIsotropic{0.1}, {}, 1.0}, 10, 10000, 1);
  EXPECT_EQ(pts.size(), 10000u);
  EXPECT_LE(norm(mean_of(pts)), 0.01);
}

TEST(SampleComponent, UniformBallRespectsSupport) {
  const auto pts = sample_component({UniformBall{0.5}, {}, 1.0}, 4, 5000, 2);
  for (const auto& p : pts) EXPECT_LE(norm(p), 0.5 + 1e-12);
}

TEST(SampleComponent, TranslatedGaussianMean) {
  Vec mu(5, 0.0);
  mu[0] = 0.3;
  const auto m = mean_of(sample_component({GaussianIsotropic{0.1}, mu, 1.0}, 5, 10000, 3));
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(m[j], mu[j], 0.01);
}

TEST(SampleComponent, RejectsBadSpecs) {
  EXPECT_THROW(sample_component({GaussianIsotropic{0.0}, {}, 1.0}, 2, 10, 1), Error);
  EXPECT_THROW(sample_component({GaussianIsotropic{0.1}, {0.1}, 1.0}, 2, 10, 1), Error);
  EXPECT_THROW(sample_component({GaussianIsotropic{0.1}, {}, 1.0}, 2, 0, 1), Error);
}

TEST(Translate, Examples) {
  const std::vector<Vec> p = {{0.1, 0.0}, {0.5, -0.2}};
  EXPECT_EQ(translate(p, Vec{0, 0}), p);
  const auto t = translate({{0.1, 0.0}}, Vec{0.2, 0.0});
  EXPECT_DOUBLE_EQ(t[0][0], 0.1 + 0.2);
  EXPECT_EQ(translate(translate({{0.5, 0.25}}, Vec{0.25, 0.5}), Vec{-0.25, -0.5}), (std::vector<Vec>{{0.5, 0.25}}));
}

TEST(Mix, SingleComponentMatchesSampleComponent) {
  const ComponentSpec c{GaussianIsotropic{0.2}, {}, 1.0};
  EXPECT_EQ(mix({c}, 3, 100, 11), sample_component(c, 3, 100, 11));
}

TEST(Mix, SymmetricMixtureCentred) {
  const ComponentSpec a{GaussianIsotropic{0.1}, {0.3, 0, 0}, 0.5};
  const ComponentSpec b{GaussianIsotropic{0.1}, {-0.3, 0, 0}, 0.5};
  const auto m = mean_of(mix({a, b}, 3, 20000, 12));
  for (double v : m) EXPECT_NEAR(v, 0.0, 0.01);
}

TEST(Mix, ZeroWeightNeverSelected) {
  const ComponentSpec a{UniformBall{0.1}, {0.5, 0}, 1.0};
  const ComponentSpec b{UniformBall{0.1}, {-0.5, 0}, 0.0};
  for (const auto& p : mix({a, b}, 2, 2000, 13)) EXPECT_GT(p[0], 0.0);
}

TEST(Mix, WeightsMustSumToOne) {
  const ComponentSpec a{UniformBall{0.1}, {}, 0.6};
  EXPECT_THROW(mix({a, a}, 2, 10, 1), Error);
}

TEST(Homogenize, Examples) {
  const auto h = homogenize({{0.0, 0.0}, {1.0, 0.0}});
  ASSERT_EQ(h[0].size(), 3u);
  EXPECT_DOUBLE_EQ(h[0][2], 1.0 / std::sqrt(2.0));
  EXPECT_EQ(h[0][0], 0.0);
  EXPECT_NEAR(norm(h[1]), 1.0, 1e-15);
  EXPECT_THROW(homogenize({{1.5, 0.0}}), Error);
}

TEST(Generate, MarginAndNormEnforced) {
  GeneratorSpec spec;
  spec.d = 2;
  spec.n = 500;
  spec.gamma_star = 0.5;
  spec.class_shift = 0.6;
  spec.positive_mixture = spec.negative_mixture = {{GaussianIsotropic{0.05}, {}, 1.0}};
  spec.seed = 4;
  const auto g = generate_margin_separable(spec);
  ASSERT_EQ(g.data.size(), 500u);
  const Vec u = spec.direction();
  for (const auto& p : g.data.points) {
    EXPECT_GE(p.y * dot(p.x, u), 0.5);
    EXPECT_LE(norm(p.x), 1.0);
  }
  EXPECT_TRUE(certificate_holds(g.data, g.certificate));
  EXPECT_EQ(g.stats.accepted + g.stats.rejected_margin + g.stats.rejected_norm, g.stats.draws);
}

TEST(Generate, LabelsAlternate) {
  GeneratorSpec spec;
  spec.n = 10;
  spec.positive_mixture = spec.negative_mixture = {{GaussianIsotropic{0.05}, {}, 1.0}};
  const auto g = generate_margin_separable(spec);
  for (std::size_t i = 0; i < g.data.size(); ++i) EXPECT_EQ(g.data.points[i].y, i % 2 == 0 ? 1 : -1);
}

TEST(Generate, InfeasibleSpec) {
  GeneratorSpec spec;
  spec.d = 2;
  spec.n = 100;
  spec.gamma_star = 0.99;
  spec.class_shift = 0.1;
  spec.positive_mixture = spec.negative_mixture = {{GaussianIsotropic{0.1}, {}, 1.0}};
  try {
    generate_margin_separable(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleSpec);
  }
}

TEST(Generate, LogMarginRegimeAtD25) {
  GeneratorSpec spec;
  spec.d = 25;
  spec.n = 400;
  spec.gamma_star = log_margin(25);
  EXPECT_NEAR(spec.gamma_star, 0.2575, 1e-4);
  spec.class_shift = 0.3;
  spec.positive_mixture = spec.negative_mixture = {{GaussianIsotropic{0.1}, {}, 1.0}};
  spec.seed = 8;
  const auto g = generate_margin_separable(spec);
  EXPECT_TRUE(validate_dataset(g.data).empty());
  EXPECT_GE(margin_of(g.data, g.certificate), 1.0 - 1e-9);
}

TEST(Generate, Deterministic) {
  GeneratorSpec spec;
  spec.d = 4;
  spec.n = 200;
  spec.positive_mixture = {{GaussianIsotropic{0.1}, {}, 0.5}, {UniformBall{0.3}, {0, 0.1, 0, 0}, 0.5}};
  spec.negative_mixture = {{GaussianIsotropic{0.2}, {}, 1.0}};
  spec.seed = 99;
  EXPECT_EQ(generate_margin_separable(spec).data, generate_margin_separable(spec).data);
  spec.seed = 100;
  const auto other = generate_margin_separable(spec).data;
  spec.seed = 99;
  EXPECT_NE(generate_margin_separable(spec).data, other);
}

TEST(Generate, WarnsOnFarMeans) {
  GeneratorSpec spec;
  spec.d = 2;
  spec.gamma_star = 0.1;
  spec.positive_mixture = {{GaussianIsotropic{0.1}, {0.5, 0}, 1.0}};
  spec.negative_mixture = {{GaussianIsotropic{0.1}, {}, 1.0}};
  EXPECT_EQ(generator_warnings(spec).size(), 1u);
}
