#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pancake/adversary.hpp"
#include "pancake/core.hpp"
#include "pancake/distributions.hpp"
#include "pancake/optimizer.hpp"
#include "pancake/pancakes.hpp"
#include "pancake/sumnorm.hpp"

namespace pancake {

// ---------------------------------------------------------------------------
// Margin inside a pancake
// ---------------------------------------------------------------------------

/// (gamma* - alpha tau) / sqrt(1 - alpha^2): margin along the component of
/// the unit separator orthogonal to v, for points whose projection on v is
/// at most tau.
inline double pancake_margin_bound(double gamma_star, double tau, double alpha) {
  return (gamma_star - alpha * tau) / std::sqrt(1.0 - alpha * alpha);
}

/// sqrt(gamma*^2 - tau^2), the value of the bound at alpha = tau / gamma*.
inline double pancake_margin_floor(double gamma_star, double tau) {
  return std::sqrt(std::max(0.0, gamma_star * gamma_star - tau * tau));
}

struct GridMinimum {
  double alpha = 0.0;
  double value = 0.0;
};

/// Minimizes the bound over alpha = 0, step, 2 step, ... <= alpha_max.
inline GridMinimum grid_minimize_bound(double gamma_star, double tau, double step,
                                       double alpha_max) {
  GridMinimum best{0.0, pancake_margin_bound(gamma_star, tau, 0.0)};
  const auto count = static_cast<std::size_t>(std::floor(alpha_max / step + 1e-9));
  for (std::size_t i = 1; i <= count; ++i) {
    const double alpha = static_cast<double>(i) * step;
    const double value = pancake_margin_bound(gamma_star, tau, alpha);
    if (value < best.value) best = {alpha, value};
  }
  return best;
}

struct PancakeMarginReport {
  double alpha = 0.0;
  Vec v_prime;
  double bound = 0.0;        // sqrt(gamma*^2 - tau^2)
  double alpha_bound = 0.0;  // (gamma* - alpha tau) / sqrt(1 - alpha^2)
  std::vector<double> per_point_margins;
  bool pass = false;
};

/// For points with y <x, v*> >= gamma* and y <x, v> <= tau, checks that the
/// margin along v' = normalize(v* - alpha v) is at least the alpha bound and
/// the alpha-minimized bound. v* is the unit direction of the certificate.
inline PancakeMarginReport verify_pancake_margin_lemma(std::span<const double> v,
                                                       const MarginCertificate& cert, double tau,
                                                       const std::vector<LabeledPoint>& points) {
  if (std::abs(norm(v) - 1.0) > kTolerance) throw Error(ErrorKind::InvalidInput, "v must be a unit vector");
  const double gamma = cert.gamma_star;
  if (!(tau >= 0.0 && tau < gamma)) throw Error(ErrorKind::InvalidInput, "requires 0 <= tau < gamma_star");
  const Vec v_star = cert.unit_direction();
  PancakeMarginReport report;
  report.alpha = dot(v, v_star);
  if (std::abs(report.alpha) >= 1.0 - 1e-12) {
    throw Error(ErrorKind::DegenerateDirection, "v is parallel to the separator; v' is undefined");
  }
  if (report.alpha < 0.0) throw Error(ErrorKind::InvalidInput, "requires <v, v*> >= 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.y * dot(p.x, v_star) < gamma - kTolerance || p.y * dot(p.x, v) > tau + kTolerance) {
      throw Error(ErrorKind::InvalidInput,
                  "point " + std::to_string(i) + " violates the margin or pancake precondition");
    }
  }
  Vec direction = v_star;
  axpy(-report.alpha, v, direction);
  report.v_prime = normalized(direction);
  report.alpha_bound = pancake_margin_bound(gamma, tau, report.alpha);
  report.bound = pancake_margin_floor(gamma, tau);
  report.pass = true;
  for (const auto& p : points) {
    const double m = p.y * dot(p.x, report.v_prime);
    report.per_point_margins.push_back(m);
    if (m < report.alpha_bound - kTolerance || m < report.bound - kTolerance) report.pass = false;
  }
  return report;
}

/// Reconstructed activity claim: with |w| <= 1/gamma, a point whose margin
/// along w/|w| is at most gamma/2 has hinge margin <= 1/2, so f' = -1.
struct HingeActivityReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  bool pass = true;
};

inline HingeActivityReport check_hinge_activity(std::span<const double> w, double gamma,
                                                const std::vector<LabeledPoint>& points) {
  HingeActivityReport report;
  const double wn = norm(w);
  if (wn > 1.0 / gamma + kTolerance) throw Error(ErrorKind::InvalidInput, "w outside the feasible ball");
  if (wn == 0.0) return report;
  const SurrogateLoss hinge{LossKind::Hinge};
  for (const auto& p : points) {
    const double t = p.y * dot(p.x, w);
    if (t / wn > gamma / 2.0) continue;
    ++report.checked;
    if (t > 0.5 + kTolerance || hinge.df(t) != -1.0) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Outlier gradient bound
// ---------------------------------------------------------------------------

struct OutlierGradientReport {
  double lhs = 0.0;  // ||sum over O of the loss gradient||
  double rhs = 0.0;  // L * LinSumNorm(signed O, [-1,1] box)
  bool exact_rhs = true;
  bool pass = true;
};

inline OutlierGradientReport verify_outlier_gradient_bound(const std::vector<LabeledPoint>& outliers,
                                                           const SurrogateLoss& loss,
                                                           std::span<const double> w,
                                                           std::size_t restarts = 20,
                                                           std::uint64_t seed = 0) {
  OutlierGradientReport report;
  if (outliers.empty()) return report;
  Vec total(w.size(), 0.0);
  SignedPointSet signed_set;
  for (const auto& p : outliers) {
    axpy(1.0, loss_grad(loss, w, p), total);
    signed_set.push_back(scaled(p.x, p.y));
  }
  report.lhs = norm(total);
  if (signed_set.size() <= kEnumerationLimit) {
    report.rhs = loss.lipschitz() * lin_sum_norm(signed_set, CoefficientBox::SymmetricOne).value;
  } else {
    report.exact_rhs = false;
    report.rhs = loss.lipschitz() *
                 lin_sum_norm_projected_gradient(signed_set, CoefficientBox::SymmetricOne, restarts, 0, seed).value;
  }
  report.pass = report.lhs <= report.rhs + kTolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Main theorem: premises and conclusion
// ---------------------------------------------------------------------------

struct TheoremPremises {
  PancakeParams params;
  double gamma_star = 0.0;
  double eta = 0.0;
  std::size_t n = 0;
  std::size_t n_outliers = 0;
  double her_sum_norm_O = 0.0;
  bool her_sum_norm_exact = true;
  double slack = 0.0;  // (1 - eta) rho gamma* n - 2 HerSumNorm(O)
  bool tau_ok = false;
  bool slack_ok = false;
  bool certificate_valid = false;
  bool pass = false;  // tau_ok && slack_ok
};

inline SumNormReport outlier_sum_norm(const Dataset& ds, std::size_t restarts, std::uint64_t seed) {
  const auto signed_set = signed_vectors(ds, RoleFilter::Outliers);
  return signed_set.size() <= kEnumerationLimit ? her_sum_norm_exact(signed_set)
                                                : her_sum_norm_heuristic(signed_set, restarts, seed);
}

inline TheoremPremises premises_from(const Dataset& ds, const MarginCertificate& cert,
                                     const PancakeParams& params, const SumNormReport& outliers) {
  TheoremPremises t;
  t.params = params;
  t.gamma_star = cert.gamma_star;
  t.n = ds.size();
  t.n_outliers = ds.count(RoleFilter::Outliers);
  t.eta = ds.eta();
  t.her_sum_norm_O = outliers.value;
  t.her_sum_norm_exact = outliers.exact;
  t.slack = (1.0 - t.eta) * params.rho * cert.gamma_star * static_cast<double>(t.n) -
            2.0 * outliers.value;
  t.tau_ok = params.tau <= cert.gamma_star / 2.0;
  t.slack_ok = t.slack > 0.0;
  t.certificate_valid = certificate_holds(ds, cert);
  t.pass = t.tau_ok && t.slack_ok;
  return t;
}

/// Evaluates tau <= gamma*/2 and (1 - eta) rho gamma* n > 2 HerSumNorm(O);
/// HerSumNorm is exact for |O| <= 25 and heuristic (flagged) otherwise.
inline TheoremPremises check_theorem_premises(const Dataset& ds, const MarginCertificate& cert,
                                              const PancakeParams& params,
                                              std::size_t restarts = 50, std::uint64_t seed = 0) {
  return premises_from(ds, cert, params, outlier_sum_norm(ds, restarts, seed));
}

struct Conclusion {
  double error_rate = 0.0;
  std::size_t errors = 0;
  std::size_t n = 0;
  double beta = 0.0;
  bool pass = false;
};

/// Error rate on clean test points; y <x, w> <= 0 counts as an error.
inline Conclusion evaluate_conclusion(std::span<const double> w, const Dataset& test, double beta) {
  if (test.size() == 0) throw Error(ErrorKind::EmptySelection, "evaluate_conclusion: empty test set");
  Conclusion c;
  c.n = test.size();
  c.beta = beta;
  for (const auto& p : test.points) {
    if (p.y * dot(p.x, w) <= 0.0) ++c.errors;
  }
  c.error_rate = static_cast<double>(c.errors) / static_cast<double>(c.n);
  c.pass = c.error_rate <= beta;
  return c;
}

// ---------------------------------------------------------------------------
// End-to-end experiment
// ---------------------------------------------------------------------------

struct PancakeConfig {
  double tau = 0.1;
  std::optional<double> rho;  // absent: use the certified rho
  double beta = 0.05;
  double tau_prime = 0.5;
  double beta_prime = 0.05;
  std::size_t net_cap = 500;
  DensityDenominator denominator = DensityDenominator::All;

  friend bool operator==(const PancakeConfig&, const PancakeConfig&) = default;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  GeneratorSpec generator;
  CorruptionSpec corruption;
  LossKind loss = LossKind::Hinge;
  TrainConfig train;
  PancakeConfig pancake;
  std::size_t test_n = 10000;
  std::size_t sumnorm_restarts = 50;
  std::string output_dir = ".";
  std::size_t workers = 1;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Sub-seeds derived from the master seed, one per stage.
struct StageSeeds {
  std::uint64_t generate, corrupt, train, net, sumnorm, test;

  static StageSeeds from(std::uint64_t master) {
    return {split_seed(master, "generate"), split_seed(master, "corrupt"),
            split_seed(master, "train"),    split_seed(master, "net"),
            split_seed(master, "sumnorm"),  split_seed(master, "test")};
  }
};

struct ExperimentReport {
  StageSeeds seeds{};
  RejectionStats generation;
  std::vector<std::string> warnings;
  std::size_t n = 0;
  std::size_t n_outliers = 0;
  double eta = 0.0;
  double clean_margin = 0.0;  // margin_of over inliers
  TrainResult training;
  double rho_certified = 0.0;
  double rho_used = 0.0;
  CertificationReport certification;
  SumNormReport outlier_sum_norm;
  TheoremPremises premises;
  Conclusion conclusion;
  std::map<std::string, double> stage_seconds;
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto out = fn();
        record(stage, start);
        return out;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "stage " + stage + ": " + e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    sink_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  std::map<std::string, double>& sink_;
};

}  // namespace detail

/// generate -> corrupt -> train -> certify pancakes on D -> sum norm of O ->
/// premises -> error on fresh inliers. Every random stage draws from its
/// own sub-seed of master_seed; seeds inside the nested specs are ignored.
inline ExperimentReport run_experiment(const RunConfig& cfg) {
  ExperimentReport report;
  report.seeds = StageSeeds::from(cfg.master_seed);
  detail::StageTimer timer(report.stage_seconds);

  GeneratorSpec gen = cfg.generator;
  gen.seed = report.seeds.generate;
  const auto generated = timer.run("generate", [&] { return generate_margin_separable(gen); });
  report.generation = generated.stats;
  report.warnings = generated.warnings;
  const MarginCertificate& cert = generated.certificate;

  CorruptionSpec corruption = cfg.corruption;
  corruption.seed = report.seeds.corrupt;
  const Dataset data =
      timer.run("corrupt", [&] { return corrupt(generated.data, corruption, &cert); });
  report.n = data.size();
  report.n_outliers = data.count(RoleFilter::Outliers);
  report.eta = data.eta();
  report.clean_margin = margin_of(data, cert, RoleFilter::Inliers);

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = report.seeds.train;
  train_cfg.workers = cfg.workers;
  report.training =
      timer.run("train", [&] { return train(data, SurrogateLoss{cfg.loss}, train_cfg); });

  timer.run("certify", [&] {
    const auto net = direction_net(data.d, cfg.pancake.tau_prime, report.seeds.net, cfg.pancake.net_cap);
    CertifyOptions options;
    options.denominator = cfg.pancake.denominator;
    options.workers = cfg.workers;
    options.exhaustive_net = net.exhaustive;
    options.max_witnesses = 1000;
    report.rho_certified =
        estimate_rho(data, data, net.directions, cfg.pancake.tau, cfg.pancake.beta, options);
    report.rho_used = cfg.pancake.rho.value_or(report.rho_certified);
    if (report.rho_used <= 0.0) {
      throw Error(ErrorKind::InfeasibleSpec, "certified rho is 0; no (tau, rho, beta) condition holds");
    }
    report.certification = certify_empirical(
        data, data, net.directions,
        PancakeParams{cfg.pancake.tau, report.rho_used, cfg.pancake.beta}, options);
  });

  report.outlier_sum_norm = timer.run(
      "sumnorm", [&] { return outlier_sum_norm(data, cfg.sumnorm_restarts, report.seeds.sumnorm); });
  report.premises = premises_from(
      data, cert, PancakeParams{cfg.pancake.tau, report.rho_used, cfg.pancake.beta},
      report.outlier_sum_norm);

  GeneratorSpec test_gen = cfg.generator;
  test_gen.n = cfg.test_n;
  test_gen.seed = report.seeds.test;
  const auto test = timer.run("test", [&] { return generate_margin_separable(test_gen); });
  report.conclusion = evaluate_conclusion(report.training.w, test.data, cfg.pancake.beta);
  return report;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  double param = 0.0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Signed vectors of |O| points drawn from an isotropic Gaussian and pushed
/// to the unit sphere, with labels from a fair coin.
inline SignedPointSet sphere_signed_points(std::size_t count, std::size_t d, std::uint64_t seed) {
  CounterRng rng(seed);
  SignedPointSet out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec v = random_unit_vector(d, rng);
    if (rng.uniform() < 0.5) v = scaled(v, -1.0);
    out.push_back(std::move(v));
  }
  return out;
}

/// HerSumNorm * sqrt(d) / |O| per (d, seed): label-flip scaling study.
inline std::vector<SweepRow> sumnorm_scaling_sweep(const std::vector<std::size_t>& dims,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   std::size_t outliers, std::size_t restarts) {
  std::vector<SweepRow> rows;
  for (std::size_t d : dims) {
    for (std::uint64_t seed : seeds) {
      const auto points = sphere_signed_points(outliers, d, split_seed(seed, d));
      const auto r = her_sum_norm_heuristic(points, restarts, split_seed(seed, "restarts"));
      const double scaled_value =
          r.value * std::sqrt(static_cast<double>(d)) / static_cast<double>(outliers);
      rows.push_back({static_cast<double>(d), seed, "her_sum_norm", r.value});
      rows.push_back({static_cast<double>(d), seed, "normalized", scaled_value});
    }
  }
  return rows;
}

/// Returns a copy of `base` with one named parameter overridden.
inline RunConfig with_parameter(const RunConfig& base, const std::string& param, double value) {
  RunConfig cfg = base;
  if (param == "eta") {
    cfg.corruption.eta = value;
  } else if (param == "n") {
    cfg.generator.n = static_cast<std::size_t>(value);
  } else if (param == "gamma_star") {
    cfg.generator.gamma_star = value;
    cfg.train.gamma = value;
  } else if (param == "class_shift") {
    cfg.generator.class_shift = value;
  } else if (param == "tau") {
    cfg.pancake.tau = value;
  } else if (param == "d") {
    const auto d = static_cast<std::size_t>(value);
    cfg.generator.d = d;
    for (auto* mixture : {&cfg.generator.positive_mixture, &cfg.generator.negative_mixture}) {
      for (auto& c : *mixture) {
        if (!c.mean.empty()) c.mean.resize(d, 0.0);
      }
    }
    if (cfg.generator.u_star) cfg.generator.u_star->resize(d, 0.0);
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown sweep parameter '" + param + "'");
  }
  return cfg;
}

inline std::vector<SweepRow> experiment_sweep(const RunConfig& base, const std::string& param,
                                              const std::vector<double>& values,
                                              const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (double value : values) {
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = with_parameter(base, param, value);
      cfg.master_seed = seed;
      const auto r = run_experiment(cfg);
      rows.push_back({value, seed, "error_rate", r.conclusion.error_rate});
      rows.push_back({value, seed, "her_sum_norm", r.outlier_sum_norm.value});
      rows.push_back({value, seed, "slack", r.premises.slack});
      rows.push_back({value, seed, "rho", r.rho_used});
      rows.push_back({value, seed, "beta_hat", r.certification.beta_hat});
      rows.push_back({value, seed, "premises_pass", r.premises.pass ? 1.0 : 0.0});
    }
  }
  return rows;
}

}  // namespace pancake
