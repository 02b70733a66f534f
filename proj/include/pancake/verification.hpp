#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "pancake/analysis.hpp"
#include "pancake/sumnorm.hpp"

namespace pancake {

/// Outcome of one randomized property suite.
struct PropertyResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // suite-specific worst deviation
  double seconds = 0.0;

  bool pass() const { return failures == 0; }
};

namespace detail {

// Uniform entries in [-1, 1], rescaled into the unit ball when longer than 1.
inline Vec random_ball_entry_vector(std::size_t d, CounterRng& rng) {
  Vec v(d);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  const double n = norm(v);
  if (n > 1.0) v = scaled(v, 1.0 / n);
  return v;
}

inline SignedPointSet random_signed_set(std::size_t count, std::size_t d, CounterRng& rng) {
  SignedPointSet v;
  for (std::size_t i = 0; i < count; ++i) v.push_back(random_ball_entry_vector(d, rng));
  return v;
}

template <typename Fn>
PropertyResult timed(const std::string& name, Fn&& body) {
  PropertyResult r;
  r.name = name;
  const auto start = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

/// Exact hereditary sum norm against the [0,1]-box linear sum norm.
inline PropertyResult hereditary_linear_equivalence_suite(std::size_t instances, std::uint64_t seed) {
  return detail::timed("hereditary_equals_linear", [&](PropertyResult& r) {
    CounterRng rng(seed);
    for (std::size_t k = 0; k < instances; ++k) {
      const std::size_t count = 1 + rng.below(12);
      const std::size_t d = 1 + rng.below(6);
      const auto v = detail::random_signed_set(count, d, rng);
      const double gap = std::abs(her_sum_norm_exact(v).value -
                                  lin_sum_norm(v, CoefficientBox::ZeroOne).value);
      r.worst = std::max(r.worst, gap);
      ++r.instances;
      if (gap > 1e-9) ++r.failures;
    }
  });
}

/// Randomized rounding of fractional coefficients never loses squared norm in
/// expectation (up to 3 standard errors).
inline PropertyResult rounding_suite(std::size_t instances, std::size_t trials, std::uint64_t seed) {
  return detail::timed("randomized_rounding", [&](PropertyResult& r) {
    CounterRng rng(seed);
    for (std::size_t k = 0; k < instances; ++k) {
      const std::size_t count = 1 + rng.below(12);
      const std::size_t d = 1 + rng.below(6);
      const auto v = detail::random_signed_set(count, d, rng);
      Vec a(count);
      for (double& c : a) c = rng.uniform();
      const auto check = rounding_check(v, a, trials, rng.next_u64());
      ++r.instances;
      r.worst = std::max(r.worst, (check.rhs - check.lhs) / std::max(check.stderr_, 1e-300));
      if (!check.pass) ++r.failures;
    }
  });
}

/// ||sum of outlier gradients|| <= L * LinSumNorm over random outliers and
/// random feasible w, for both losses.
inline PropertyResult outlier_gradient_suite(std::size_t instances, std::uint64_t seed) {
  return detail::timed("outlier_gradient_bound", [&](PropertyResult& r) {
    CounterRng rng(seed);
    for (std::size_t k = 0; k < instances; ++k) {
      const std::size_t count = 1 + rng.below(10);
      const std::size_t d = 1 + rng.below(5);
      std::vector<LabeledPoint> outliers;
      for (std::size_t i = 0; i < count; ++i) {
        outliers.push_back({detail::random_ball_entry_vector(d, rng), rng.uniform() < 0.5 ? -1 : 1});
      }
      const double gamma = 0.05 + 0.95 * rng.uniform();
      Vec w(d);
      for (double& x : w) x = rng.normal();
      w = project_to_ball(scaled(w, rng.uniform() * 2.0 / gamma), 1.0 / gamma);
      const SurrogateLoss loss{k % 2 == 0 ? LossKind::Hinge : LossKind::Logistic};
      const auto report = verify_outlier_gradient_bound(outliers, loss, w);
      ++r.instances;
      r.worst = std::max(r.worst, report.lhs - report.rhs);
      if (!report.pass) ++r.failures;
    }
  });
}

/// Grid minimization of the pancake margin bound lands at alpha = tau/gamma*
/// with value sqrt(gamma*^2 - tau^2).
inline PropertyResult margin_bound_minimizer_suite(std::size_t pairs, std::uint64_t seed) {
  return detail::timed("margin_bound_minimizer", [&](PropertyResult& r) {
    CounterRng rng(seed);
    for (std::size_t k = 0; k < pairs; ++k) {
      const double gamma = 0.05 + 0.9 * rng.uniform();
      const double tau = gamma * 0.95 * rng.uniform();
      const auto grid = grid_minimize_bound(gamma, tau, 1e-4, 0.999);
      const double alpha_err = std::abs(grid.alpha - tau / gamma);
      const double value_err = std::abs(grid.value - std::sqrt(gamma * gamma - tau * tau));
      ++r.instances;
      r.worst = std::max(r.worst, value_err);
      if (alpha_err > 2e-4 || value_err > 1e-6) ++r.failures;
    }
  });
}

/// One compliant random instance of the pancake margin lemma: unit separator
/// u*, direction v with alpha in [0, 0.9], a point with y <x,u*> >= gamma* and
/// y <x,v> <= tau.
struct MarginLemmaInstance {
  MarginCertificate cert;
  Vec v;
  double tau = 0.0;
  LabeledPoint point;
};

inline MarginLemmaInstance random_margin_lemma_instance(CounterRng& rng) {
  for (;;) {
    const std::size_t d = 2 + rng.below(5);
    const Vec u = random_unit_vector(d, rng);
    Vec e = random_unit_vector(d, rng);
    axpy(-dot(e, u), u, e);
    if (norm(e) < 1e-6) continue;
    e = normalized(e);
    const double alpha = 0.9 * rng.uniform();
    Vec v = scaled(u, alpha);
    axpy(std::sqrt(1.0 - alpha * alpha), e, v);
    v = normalized(v);
    const double gamma = 0.05 + 0.55 * rng.uniform();
    const double tau = gamma * rng.uniform() * 0.999;
    MarginLemmaInstance inst{{scaled(u, 1.0 / gamma), gamma}, v, tau, {}};
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Label y = rng.uniform() < 0.5 ? -1 : 1;
      Vec x = random_unit_vector(d, rng);
      x = scaled(x, std::pow(rng.uniform(), 1.0 / static_cast<double>(d)));
      if (y * dot(x, u) >= gamma && y * dot(x, v) <= tau) {
        inst.point = {std::move(x), y};
        return inst;
      }
    }
  }
}

inline PropertyResult margin_lemma_point_suite(std::size_t instances, std::uint64_t seed) {
  return detail::timed("margin_lemma_points", [&](PropertyResult& r) {
    CounterRng rng(seed);
    for (std::size_t k = 0; k < instances; ++k) {
      const auto inst = random_margin_lemma_instance(rng);
      const auto report = verify_pancake_margin_lemma(inst.v, inst.cert, inst.tau, {inst.point});
      ++r.instances;
      r.worst = std::max(r.worst, report.bound - report.per_point_margins.front());
      if (!report.pass) ++r.failures;
    }
  });
}

}  // namespace pancake
