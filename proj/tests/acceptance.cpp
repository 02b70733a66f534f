// Acceptance suite: one PASS/FAIL line per criterion with its runtime.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pancake/pancake.hpp"

#ifndef PANCAKE_CLI_PATH
#define PANCAKE_CLI_PATH "pancake"
#endif

using namespace pancake;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Largest iterate norm seen, relative to its radius, over every training run.
double g_worst_feasibility = -1.0;

void record_feasibility(const TrainResult& r, const TrainConfig& cfg) {
  g_worst_feasibility = std::max(g_worst_feasibility, r.max_iterate_norm - cfg.radius());
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome c1_equivalence() {
  const auto r = hereditary_linear_equivalence_suite(200, 101);
  return {r.pass() && r.seconds < 10.0,
          std::to_string(r.instances - r.failures) + "/" + std::to_string(r.instances) +
              " instances agree, worst gap " + fmt("%.3g", r.worst)};
}

Outcome c2_rounding() {
  const auto r = rounding_suite(100, 10000, 202);
  return {r.pass() && r.seconds < 30.0,
          std::to_string(r.instances - r.failures) + "/" + std::to_string(r.instances) +
              " instances with lhs >= rhs - 3 stderr"};
}

Outcome c3_outlier_gradient() {
  const auto r = outlier_gradient_suite(1000, 303);
  return {r.pass() && r.seconds < 30.0,
          std::to_string(r.instances - r.failures) + "/" + std::to_string(r.instances) +
              " instances, worst lhs - rhs " + fmt("%.3g", r.worst)};
}

Outcome c4_minimizer() {
  const auto grid = margin_bound_minimizer_suite(50, 404);
  const auto points = margin_lemma_point_suite(10000, 405);
  return {grid.pass() && points.pass() && grid.seconds + points.seconds < 60.0,
          std::to_string(grid.instances - grid.failures) + "/50 grid minima, " +
              std::to_string(points.instances - points.failures) + "/10000 lemma points"};
}

// Gaussian sigma = 0.25 in d = 5 clipped to the unit ball, fair-coin labels.
Dataset clipped_gaussian(std::size_t n, std::size_t d, double sigma, std::uint64_t seed) {
  CounterRng rng(seed);
  Dataset ds;
  ds.d = d;
  for (std::size_t i = 0; i < n; ++i) {
    Vec x(d);
    for (double& v : x) v = sigma * rng.normal();
    ds.points.push_back({project_to_ball(x, 1.0), rng.uniform() < 0.5 ? -1 : 1});
  }
  ds.roles.assign(n, Role::Inlier);
  return ds;
}

Outcome c5_transfer() {
  constexpr std::size_t d = 5;
  const double tau = 0.1, beta = 0.02, tau_prime = 0.5, beta_prime = 0.05;
  const auto net = direction_net(d, tau_prime, 505, 500);
  CertifyOptions options;
  options.max_witnesses = 0;
  const Dataset reference = clipped_gaussian(50000, d, 0.25, 506);
  const double rho = estimate_rho(reference, reference, net.directions, tau, beta, options);
  const std::size_t n = required_sample_size(rho, tau_prime, beta_prime, d);
  int passes = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const Dataset sample = clipped_gaussian(n, d, 0.25, split_seed(507, trial));
    const auto report = certify_empirical(sample, sample, net.directions,
                                          {tau + tau_prime, rho / 2.0, beta + beta_prime}, options);
    if (report.pass) ++passes;
  }
  return {passes >= 19, "rho=" + fmt("%.4f", rho) + ", n=" + std::to_string(n) + ", " +
                            std::to_string(passes) + "/20 trials certified"};
}

Outcome c6_scaling() {
  const std::vector<std::size_t> dims = {5, 10, 20, 40};
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 600);
  const auto rows = sumnorm_scaling_sweep(dims, seeds, 100, 20);
  std::vector<double> means;
  std::ostringstream detail;
  for (std::size_t d : dims) {
    double sum = 0.0;
    for (const auto& r : rows) {
      if (r.metric == "normalized" && r.param == static_cast<double>(d)) sum += r.value;
    }
    means.push_back(sum / static_cast<double>(seeds.size()));
    detail << "d=" << d << ":" << fmt("%.3f", means.back()) << " ";
  }
  const double ratio = *std::max_element(means.begin(), means.end()) /
                       *std::min_element(means.begin(), means.end());
  detail << "max/min=" << fmt("%.3f", ratio);
  return {ratio <= 2.0, detail.str()};
}

Outcome c7_malicious() {
  GeneratorSpec spec;
  spec.d = 3;
  spec.n = 90;
  spec.gamma_star = 0.2;
  spec.positive_mixture = spec.negative_mixture = {{GaussianIsotropic{0.1}, {}, 1.0}};
  spec.class_shift = 0.3;
  spec.seed = 707;
  const auto clean = generate_margin_separable(spec).data;
  const Vec u = unit_axis(3, 0);
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t k : {1, 5, 10, 25}) {
    Dataset base = clean;
    base.points.resize(100 - k);
    base.roles.resize(100 - k);
    const double eta = static_cast<double>(k) / 100.0;
    const Dataset poisoned = inject_malicious(base, eta, u);
    const auto value = her_sum_norm_exact(signed_vectors(poisoned, RoleFilter::Outliers)).value;
    ok = ok && poisoned.count(RoleFilter::Outliers) == k && value == static_cast<double>(k);
    detail << "k=" << k << "->" << value << " ";
  }
  return {ok, detail.str()};
}

// Desk-scale end-to-end configuration shared by criteria 8 and 9.
RunConfig desk_config(std::uint64_t master_seed, double eta) {
  constexpr std::size_t d = 25;
  const double gamma = log_margin(d);
  RunConfig cfg;
  cfg.master_seed = master_seed;
  cfg.generator.d = d;
  cfg.generator.n = 4000;
  cfg.generator.gamma_star = gamma;
  cfg.generator.class_shift = 0.1;
  const double offset = 0.02;
  for (auto* mixture : {&cfg.generator.positive_mixture, &cfg.generator.negative_mixture}) {
    Vec up(d, 0.0), down(d, 0.0);
    up[1] = offset;
    down[1] = -offset;
    *mixture = {{GaussianIsotropic{0.1}, up, 0.5}, {GaussianIsotropic{0.1}, down, 0.5}};
  }
  cfg.corruption = {FlipRandom{}, eta, 0};
  cfg.loss = LossKind::Hinge;
  cfg.train.gamma = gamma;
  cfg.train.iterations = 20000;
  cfg.pancake.tau = gamma / 2.0;
  cfg.pancake.beta = 0.4;
  cfg.pancake.tau_prime = 0.5;
  cfg.pancake.net_cap = 500;
  cfg.test_n = 10000;
  cfg.sumnorm_restarts = 50;
  cfg.workers = 4;
  return cfg;
}

std::vector<ExperimentReport> g_desk_reports;

// Runs the five corrupted desk experiments once; criteria 8 and 9 share them.
void ensure_desk_reports() {
  if (!g_desk_reports.empty()) return;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunConfig cfg = desk_config(seed, 0.10);
    g_desk_reports.push_back(run_experiment(cfg));
    record_feasibility(g_desk_reports.back().training, cfg.train);
  }
}

Outcome c8_end_to_end() {
  ensure_desk_reports();
  bool ok = true;
  std::ostringstream detail;
  detail << "error per seed:";
  for (const auto& report : g_desk_reports) {
    ok = ok && report.conclusion.error_rate <= 0.05;
    detail << " " << fmt("%.4f", report.conclusion.error_rate);
  }
  const RunConfig control = desk_config(1, 0.0);
  const auto clean = run_experiment(control);
  record_feasibility(clean.training, control.train);
  ok = ok && clean.conclusion.error_rate <= 0.001;
  detail << "; eta=0 control " << fmt("%.4f", clean.conclusion.error_rate);
  return {ok, detail.str()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PANCAKE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome c9_premise_gate() {
  std::ostringstream detail;
  bool ok = true;
  ensure_desk_reports();
  for (const auto& r : g_desk_reports) {
    ok = ok && r.premises.pass;
    detail << "slack " << fmt("%.1f", r.premises.slack) << " (rho " << fmt("%.3f", r.rho_used)
           << ", HSN " << fmt("%.1f", r.premises.her_sum_norm_O) << "); ";
  }

  // Tightness construction: k = ceil((1 - eta) rho gamma* n / 2) aligned copies.
  RunConfig cfg = desk_config(1, 0.0);
  const double rho = g_desk_reports.front().rho_used;
  const double gamma = cfg.generator.gamma_star;
  GeneratorSpec gen = cfg.generator;
  gen.seed = 909;
  const auto clean = generate_margin_separable(gen);
  const auto n0 = static_cast<double>(clean.data.size());
  const auto k = static_cast<std::size_t>(std::ceil(rho * gamma * n0 / 2.0));
  const double eta = static_cast<double>(k) / (n0 + static_cast<double>(k));
  const Dataset poisoned = inject_malicious(clean.data, eta, gen.direction());
  const auto malicious =
      check_theorem_premises(poisoned, clean.certificate, {gamma / 2.0, rho, 0.4});
  ok = ok && !malicious.pass && poisoned.count(RoleFilter::Outliers) == k;
  detail << "malicious k=" << k << " slack " << fmt("%.1f", malicious.slack)
         << (malicious.pass ? " pass" : " fail");

  const auto dir = std::filesystem::temp_directory_path() / "pancake_acceptance";
  std::filesystem::create_directories(dir);
  RunConfig good = desk_config(1, 0.10);
  good.output_dir = dir.string();
  save_text((dir / "good.json").string(), json(good).dump(2));
  RunConfig bad = desk_config(1, 0.0);
  bad.corruption = {InjectMalicious{gen.direction()}, eta, 0};
  bad.pancake.rho = rho;
  bad.train.iterations = 2000;
  bad.output_dir = dir.string();
  save_text((dir / "bad.json").string(), json(bad).dump(2));
  const int good_code = run_cli("experiment --config " + (dir / "good.json").string() + " --out " +
                                (dir / "good_report.json").string());
  const int bad_code = run_cli("experiment --config " + (dir / "bad.json").string() + " --out " +
                               (dir / "bad_report.json").string());
  ok = ok && good_code == 0 && bad_code == 2;
  detail << "; cli exit " << good_code << " / " << bad_code;
  return {ok, detail.str()};
}

Outcome c10_hygiene() {
  CounterRng rng(1010);
  const SurrogateLoss logistic{LossKind::Logistic};
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const std::size_t d = 1 + rng.below(10);
    Vec w(d), x(d);
    for (double& v : w) v = 4.0 * rng.normal();
    for (double& v : x) v = rng.normal();
    x = project_to_ball(x, 1.0);
    const LabeledPoint p{x, rng.uniform() < 0.5 ? -1 : 1};
    worst = std::max(worst, grad_fd_check(logistic, w, p, 1e-5));
  }
  // Extra runs with both losses and both step schedules.
  for (int run = 0; run < 8; ++run) {
    GeneratorSpec spec;
    spec.d = 5;
    spec.n = 300;
    spec.gamma_star = 0.2;
    spec.positive_mixture = spec.negative_mixture = {{GaussianIsotropic{0.2}, {}, 1.0}};
    spec.class_shift = 0.3;
    spec.seed = split_seed(1011, static_cast<std::uint64_t>(run));
    const Dataset data = flip_random(generate_margin_separable(spec).data, 0.1, spec.seed);
    TrainConfig cfg;
    cfg.gamma = 0.2;
    cfg.iterations = 2000;
    cfg.step = {run % 2 == 0 ? StepKind::InverseSqrt : StepKind::Constant, run % 2 == 0 ? 0.0 : 0.5};
    cfg.averaging = run % 4 < 2;
    const auto r = train(data, SurrogateLoss{run < 4 ? LossKind::Hinge : LossKind::Logistic}, cfg);
    record_feasibility(r, cfg);
  }
  const bool ok = worst <= 1e-6 && g_worst_feasibility <= 1e-12;
  return {ok, "worst fd deviation " + fmt("%.3g", worst) + ", worst norm excess " +
                  fmt("%.3g", g_worst_feasibility)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

// With no argument every criterion runs in order; `acceptance N` runs only
// criterion N.
int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "hereditary equals linear sum norm", 10, c1_equivalence},
      {2, "randomized rounding (Jensen)", 30, c2_rounding},
      {3, "outlier gradient bound", 30, c3_outlier_gradient},
      {4, "margin bound minimizer and per-point margins", 60, c4_minimizer},
      {5, "transfer from reference to sample", 300, c5_transfer},
      {6, "label-flip sum norm scaling", 120, c6_scaling},
      {7, "malicious injection tightness", 10, c7_malicious},
      {8, "end-to-end robustness", 600, c8_end_to_end},
      {9, "premise gate", 60, c9_premise_gate},
      {10, "numerical hygiene", 30, c10_hygiene},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "usage: acceptance [criterion 1-%zu]\n", criteria.size());
    return 64;
  }
  int failed = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = outcome.pass && seconds <= c.budget_seconds;
    if (!pass) ++failed;
    std::printf("[%s] criterion %d: %s | %s | %.2fs (budget %.0fs)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, outcome.detail.c_str(), seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
