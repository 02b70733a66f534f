#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <vector>

#include "pancake/core.hpp"
#include "pancake/rng.hpp"

namespace pancake {

enum class LossKind { Hinge, Logistic };

inline const char* to_string(LossKind k) { return k == LossKind::Hinge ? "hinge" : "logistic"; }

/// f applied to the functional margin t = y <x, w>. Both losses are convex,
/// non-increasing and 1-Lipschitz.
struct SurrogateLoss {
  LossKind kind = LossKind::Hinge;

  double lipschitz() const noexcept { return 1.0; }

  double f(double t) const noexcept {
    if (kind == LossKind::Hinge) return std::max(0.0, 1.0 - t);
    // ln(1 + e^{-t}) without overflow for large negative t.
    return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  }

  /// Derivative; the hinge kink at t = 1 takes the subgradient 0.
  double df(double t) const noexcept {
    if (kind == LossKind::Hinge) return t < 1.0 ? -1.0 : 0.0;
    if (t >= 0.0) {
      const double e = std::exp(-t);
      return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(t));
  }
};

inline double loss_value(const SurrogateLoss& loss, std::span<const double> w, const LabeledPoint& p) {
  return loss.f(p.y * dot(p.x, w));
}

/// f'(y <x, w>) * y * x
inline Vec loss_grad(const SurrogateLoss& loss, std::span<const double> w, const LabeledPoint& p) {
  return scaled(p.x, loss.df(p.y * dot(p.x, w)) * p.y);
}

// ---------------------------------------------------------------------------
// Full-batch objective and gradient with a fixed pairwise reduction tree.
// ---------------------------------------------------------------------------

struct ObjectiveEval {
  double objective = 0.0;  // mean loss
  Vec gradient;            // mean subgradient
};

namespace detail {

inline constexpr std::size_t kLeafSize = 16;

// Sum of loss and gradient terms over [begin, end). The tree layout depends
// only on the range, so splitting subtrees across threads changes nothing.
inline void accumulate(const Dataset& ds, const SurrogateLoss& loss, std::span<const double> w,
                       std::size_t begin, std::size_t end, double& loss_sum, Vec& grad_sum,
                       std::size_t parallel_depth) {
  const std::size_t d = w.size();
  if (end - begin <= kLeafSize) {
    loss_sum = 0.0;
    grad_sum.assign(d, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = ds.points[i];
      const double t = p.y * dot(p.x, w);
      loss_sum += loss.f(t);
      const double c = loss.df(t) * p.y;
      if (c != 0.0) axpy(c, p.x, grad_sum);
    }
    return;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  double left_loss = 0.0, right_loss = 0.0;
  Vec left_grad, right_grad;
  if (parallel_depth > 0) {
    auto right = std::async(std::launch::async, [&] {
      accumulate(ds, loss, w, mid, end, right_loss, right_grad, parallel_depth - 1);
    });
    accumulate(ds, loss, w, begin, mid, left_loss, left_grad, parallel_depth - 1);
    right.get();
  } else {
    accumulate(ds, loss, w, begin, mid, left_loss, left_grad, 0);
    accumulate(ds, loss, w, mid, end, right_loss, right_grad, 0);
  }
  loss_sum = left_loss + right_loss;
  for (std::size_t j = 0; j < d; ++j) left_grad[j] += right_grad[j];
  grad_sum = std::move(left_grad);
}

inline std::size_t depth_for_workers(std::size_t workers, std::size_t n) {
  std::size_t depth = 0;
  while ((std::size_t{1} << (depth + 1)) <= workers && (n >> (depth + 1)) >= 1024) ++depth;
  return depth;
}

}  // namespace detail

inline ObjectiveEval evaluate_objective(const Dataset& ds, const SurrogateLoss& loss,
                                        std::span<const double> w, std::size_t workers = 1) {
  if (ds.size() == 0) throw Error(ErrorKind::EmptySelection, "objective over an empty dataset");
  require_same_dim(ds.d, w.size(), "evaluate_objective");
  ObjectiveEval out;
  double loss_sum = 0.0;
  detail::accumulate(ds, loss, w, 0, ds.size(), loss_sum, out.gradient,
                     detail::depth_for_workers(workers, ds.size()));
  const double inv = 1.0 / static_cast<double>(ds.size());
  out.objective = loss_sum * inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

/// ||w - P(w - s g)|| / s for the ball of radius 1/gamma, with g the mean
/// subgradient at w. Zero at first-order stationary points.
inline double stationarity_gap(const Dataset& ds, const SurrogateLoss& loss,
                               std::span<const double> w, double gamma, double probe_step) {
  if (!(probe_step > 0.0)) throw Error(ErrorKind::InvalidInput, "stationarity_gap: probe_step must be > 0");
  const double radius = 1.0 / gamma;
  if (norm(w) > radius + kTolerance) throw Error(ErrorKind::InvalidInput, "stationarity_gap: w outside the feasible ball");
  const auto eval = evaluate_objective(ds, loss, w);
  Vec trial(w.begin(), w.end());
  axpy(-probe_step, eval.gradient, trial);
  const Vec projected = project_to_ball(trial, radius);
  return norm(subtract(w, projected)) / probe_step;
}

/// Max |central difference - analytic gradient| over coordinates.
inline double grad_fd_check(const SurrogateLoss& loss, std::span<const double> w,
                            const LabeledPoint& p, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw Error(ErrorKind::InvalidInput, "grad_fd_check: h must lie in [1e-7, 1e-3]");
  const Vec g = loss_grad(loss, w, p);
  double worst = 0.0;
  Vec probe(w.begin(), w.end());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double orig = probe[j];
    probe[j] = orig + h;
    const double up = loss_value(loss, probe, p);
    probe[j] = orig - h;
    const double down = loss_value(loss, probe, p);
    probe[j] = orig;
    worst = std::max(worst, std::abs((up - down) / (2.0 * h) - g[j]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class StepKind { Constant, InverseSqrt };

struct StepSchedule {
  StepKind kind = StepKind::InverseSqrt;
  double c = 0.0;  // 0 selects the default 1/gamma

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

struct TrainConfig {
  double gamma = 0.1;
  std::size_t iterations = 1000;
  StepSchedule step;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  bool averaging = true;
  std::size_t workers = 1;

  double radius() const { return 1.0 / gamma; }

  friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.gamma == b.gamma && a.iterations == b.iterations && a.step == b.step &&
           a.restarts == b.restarts && a.seed == b.seed && a.averaging == b.averaging;
  }
};

struct TrainResult {
  Vec w;
  double objective = 0.0;
  double stationarity_gap = 0.0;
  bool trained = false;  // stationarity_gap <= 1e-3 * L
  std::size_t best_restart = 0;
  std::vector<double> restart_objectives;
  double initial_objective = 0.0;
  double final_iterate_objective = 0.0;
  double max_iterate_norm = 0.0;
  std::size_t iterations = 0;
};

inline double step_size(const StepSchedule& s, double default_c, std::size_t t) {
  const double c = s.c > 0.0 ? s.c : default_c;
  return s.kind == StepKind::Constant ? c : c / std::sqrt(static_cast<double>(t + 1));
}

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw Error(ErrorKind::InvalidInput, "train: gamma must lie in (0, 1]");
  if (cfg.iterations < 1) throw Error(ErrorKind::InvalidInput, "train: iterations must be >= 1");
  if (cfg.restarts < 1) throw Error(ErrorKind::InvalidInput, "train: restarts must be >= 1");
}

/// Projected subgradient descent on the mean loss over the ball of radius
/// 1/gamma, full batch. Restart 0 starts at the origin, later restarts at
/// seeded offsets of norm 1e-6. Per restart the result is the uniform
/// average of w_1..w_T unless some iterate has a strictly lower objective
/// (or averaging is off), in which case it is the best-objective iterate;
/// the restart with the lowest objective wins.
inline TrainResult train(const Dataset& ds, const SurrogateLoss& loss, const TrainConfig& cfg) {
  validate(cfg);
  if (ds.size() == 0) throw Error(ErrorKind::EmptySelection, "train: empty dataset");
  const std::size_t d = ds.d;
  const double radius = cfg.radius();
  const double default_c = radius / loss.lipschitz();

  TrainResult result;
  result.objective = std::numeric_limits<double>::infinity();
  result.iterations = cfg.iterations;
  CounterRng rng(cfg.seed);
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Vec w(d, 0.0);
    if (r > 0) {
      Vec offset(d);
      for (double& x : offset) x = rng.normal();
      w = scaled(normalized(offset), 1e-6);
    }
    Vec avg(d, 0.0);
    Vec best_w = w;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
      const auto eval = evaluate_objective(ds, loss, w, cfg.workers);
      if (!all_finite(eval.gradient) || !std::isfinite(eval.objective)) {
        throw Error(ErrorKind::Divergence, "non-finite gradient at iteration " + std::to_string(t));
      }
      if (r == 0 && t == 0) result.initial_objective = eval.objective;
      if (eval.objective < best_obj) {
        best_obj = eval.objective;
        best_w = w;
      }
      axpy(-step_size(cfg.step, default_c, t), eval.gradient, w);
      w = project_to_ball(w, radius);
      result.max_iterate_norm = std::max(result.max_iterate_norm, norm(w));
      // Running mean of w_1..w_{t+1}.
      const double k = static_cast<double>(t + 1);
      for (std::size_t j = 0; j < d; ++j) avg[j] += (w[j] - avg[j]) / k;
    }
    const double last_obj = evaluate_objective(ds, loss, w, cfg.workers).objective;
    if (r == 0) result.final_iterate_objective = last_obj;
    if (last_obj < best_obj) {
      best_obj = last_obj;
      best_w = w;
    }
    Vec candidate = best_w;
    double obj = best_obj;
    if (cfg.averaging) {
      Vec averaged = project_to_ball(avg, radius);
      const double avg_obj = evaluate_objective(ds, loss, averaged, cfg.workers).objective;
      if (avg_obj <= best_obj) {
        candidate = std::move(averaged);
        obj = avg_obj;
      }
    }
    result.restart_objectives.push_back(obj);
    if (obj < result.objective) {
      result.objective = obj;
      result.w = std::move(candidate);
      result.best_restart = r;
    }
  }
  result.stationarity_gap = stationarity_gap(ds, loss, result.w, cfg.gamma, 1e-3);
  result.trained = result.stationarity_gap <= 1e-3 * loss.lipschitz();
  return result;
}

}  // namespace pancake
