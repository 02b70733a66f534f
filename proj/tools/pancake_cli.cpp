// Command-line front end: one subcommand per library surface.
//
// Exit codes: 0 success, 1 validation failure, 2 premise or property check
// failure, 3 I/O error, 64 unknown subcommand.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "pancake/pancake.hpp"

#ifndef PANCAKE_VERSION
#define PANCAKE_VERSION "0.0.0"
#endif
#ifndef PANCAKE_BUILD_HASH
#define PANCAKE_BUILD_HASH "unknown"
#endif

namespace {

using namespace pancake;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kCheckFailed = 2;
constexpr int kIo = 3;
constexpr int kUsage = 64;

const std::set<std::string> kSubcommands = {"generate", "corrupt",      "train",      "certify-pancakes",
                                            "sumnorm",  "verify-lemmas", "experiment", "sweep"};

std::size_t default_workers() {
  if (const char* env = std::getenv("PANCAKE_WORKERS")) {
    try {
      return std::max<std::size_t>(1, std::stoul(env));
    } catch (...) {
    }
  }
  return 1;
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    save_text(out_path, text);
  }
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::Io ? kIo : kValidation; }

void print_usage(std::ostream& out) {
  out << "usage: pancake <subcommand> [options]\n\nsubcommands:\n";
  for (const auto& s : kSubcommands) out << "  " << s << "\n";
  out << "\nrun `pancake <subcommand> --help` for options; `pancake --version` for the build.\n";
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string config, out, cert_out;
};

int run_generate(const GenerateArgs& a) {
  const json cfg = load_json(a.config);
  GeneratorSpec spec;
  if (cfg.contains("generator")) {
    const auto run = cfg.get<RunConfig>();
    spec = run.generator;
    spec.seed = StageSeeds::from(run.master_seed).generate;
  } else {
    spec = cfg.get<GeneratorSpec>();
  }
  const auto generated = generate_margin_separable(spec);
  save_dataset(a.out, generated.data);
  const std::string cert_path = a.cert_out.empty() ? a.out + ".cert.json" : a.cert_out;
  save_text(cert_path, json(generated.certificate).dump(2) + "\n");
  emit({{"dataset", a.out},
        {"certificate", cert_path},
        {"stats", generated.stats},
        {"warnings", generated.warnings},
        {"margin", margin_of(generated.data, generated.certificate)}},
       "");
  return kOk;
}

// --- corrupt ---------------------------------------------------------------

struct CorruptArgs {
  std::string in, spec, out, cert;
};

int run_corrupt(const CorruptArgs& a) {
  const Dataset data = load_dataset(a.in);
  const json j = load_json(a.spec);
  const CorruptionSpec spec =
      j.contains("corruption") ? j.at("corruption").get<CorruptionSpec>() : j.get<CorruptionSpec>();
  std::optional<MarginCertificate> cert;
  if (!a.cert.empty()) cert = load_json(a.cert).get<MarginCertificate>();
  const Dataset out = corrupt(data, spec, cert ? &*cert : nullptr);
  save_dataset(a.out, out);
  emit({{"dataset", a.out}, {"n", out.size()}, {"n_outliers", out.count(RoleFilter::Outliers)}, {"eta", out.eta()}},
       "");
  return kOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string in, out, loss = "hinge", avg = "on", step = "inverse_sqrt";
  double gamma = 0.1, step_c = 0.0;
  std::size_t iters = 1000, restarts = 1, workers = 1;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  const Dataset data = load_dataset(a.in);
  TrainConfig cfg;
  cfg.gamma = a.gamma;
  cfg.iterations = a.iters;
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.averaging = a.avg == "on";
  cfg.step = {a.step == "constant" ? StepKind::Constant : StepKind::InverseSqrt, a.step_c};
  cfg.workers = a.workers;
  const auto result = train(data, SurrogateLoss{parse_loss(a.loss)}, cfg);
  json j = result;
  j["loss"] = a.loss;
  j["gamma"] = a.gamma;
  emit(j, a.out);
  return kOk;
}

// --- certify-pancakes ------------------------------------------------------

struct CertifyArgs {
  std::string in, anchors, out, denominator = "all";
  double tau = 0.1, rho = 0.1, beta = 0.05, tau_prime = 0.5, beta_prime = 0.05;
  std::size_t net_cap = 500, workers = 1;
  std::uint64_t seed = 0;
};

int run_certify(const CertifyArgs& a) {
  const Dataset data = load_dataset(a.in);
  const Dataset anchors = a.anchors.empty() ? data : load_dataset(a.anchors);
  const auto net = direction_net(data.d, a.tau_prime, a.seed, a.net_cap);
  CertifyOptions options;
  options.denominator = parse_denominator(a.denominator);
  options.workers = a.workers;
  options.exhaustive_net = net.exhaustive;
  const PancakeParams params{a.tau, a.rho, a.beta};
  const auto report = certify_empirical(data, anchors, net.directions, params, options);
  json j = report;
  const auto n_required = required_sample_size(a.rho, a.tau_prime, a.beta_prime, data.d);
  j["transfer"] = {{"tau_prime", a.tau_prime},
                   {"beta_prime", a.beta_prime},
                   {"required_sample_size", n_required},
                   {"n", data.size()},
                   {"chernoff_failure_bound", chernoff_failure_bound(a.rho, static_cast<double>(data.size()))},
                   {"union_failure_bound",
                    transfer_failure_bound(a.rho, a.tau_prime, a.beta_prime, data.d, static_cast<double>(data.size()))}};
  emit(j, a.out);
  return report.pass ? kOk : kCheckFailed;
}

// --- sumnorm ---------------------------------------------------------------

struct SumNormArgs {
  std::string in, out, method = "exact", box = "none", roles = "outlier";
  std::size_t restarts = 20, trials = 0;
  std::uint64_t seed = 0;
};

int run_sumnorm(const SumNormArgs& a) {
  const Dataset data = load_dataset(a.in);
  const auto vectors = signed_vectors(data, a.roles == "all" ? RoleFilter::All : RoleFilter::Outliers);
  SumNormReport report;
  if (a.box == "none") {
    report = a.method == "exact" ? her_sum_norm_exact(vectors)
                                 : her_sum_norm_heuristic(vectors, a.restarts, a.seed);
  } else {
    const auto box = a.box == "zero-one" ? CoefficientBox::ZeroOne : CoefficientBox::SymmetricOne;
    report = a.method == "exact"
                 ? lin_sum_norm(vectors, box)
                 : lin_sum_norm_projected_gradient(vectors, box, a.restarts, a.trials, a.seed);
  }
  json j = report;
  j["box"] = a.box;
  j["count"] = vectors.size();
  emit(j, a.out);
  return kOk;
}

// --- verify-lemmas ---------------------------------------------------------

struct VerifyArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t scale = 1;
};

int run_verify(const VerifyArgs& a) {
  std::vector<PropertyResult> results = {
      hereditary_linear_equivalence_suite(200 * a.scale, split_seed(a.seed, "equivalence")),
      rounding_suite(100 * a.scale, 10000, split_seed(a.seed, "rounding")),
      outlier_gradient_suite(1000 * a.scale, split_seed(a.seed, "outlier-gradient")),
      margin_bound_minimizer_suite(50 * a.scale, split_seed(a.seed, "minimizer")),
      margin_lemma_point_suite(10000 * a.scale, split_seed(a.seed, "points")),
  };
  json j = json::array();
  bool all = true;
  for (const auto& r : results) {
    j.push_back({{"name", r.name},
                 {"instances", r.instances},
                 {"failures", r.failures},
                 {"worst", r.worst},
                 {"seconds", r.seconds},
                 {"pass", r.pass()}});
    all = all && r.pass();
  }
  emit({{"suites", j}, {"pass", all}}, a.out);
  return all ? kOk : kCheckFailed;
}

// --- experiment ------------------------------------------------------------

struct ExperimentArgs {
  std::string config, out, emit_csv;
  std::size_t workers = 0;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  RunConfig cfg = load_json(a.config).get<RunConfig>();
  if (a.workers > 0) cfg.workers = a.workers;
  const auto report = run_experiment(cfg);
  std::string out = a.out;
  if (out.empty()) out = (std::filesystem::path(cfg.output_dir) / "experiment_report.json").string();
  json j = report;
  j["config"] = cfg;
  emit(j, out);
  if (!a.emit_csv.empty()) save_text(a.emit_csv, experiment_csv(report));
  std::cerr << "premises " << (report.premises.pass ? "pass" : "FAIL") << ", error rate "
            << report.conclusion.error_rate << " (beta " << report.conclusion.beta << ")\n";
  return report.premises.pass && report.conclusion.pass ? kOk : kCheckFailed;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string config, out;
};

int run_sweep(const SweepArgs& a) {
  const json cfg = load_json(a.config);
  const auto study = cfg.at("study").get<std::string>();
  const auto seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
  std::vector<SweepRow> rows;
  if (study == "sumnorm-scaling") {
    const auto dims = cfg.at("values").get<std::vector<std::size_t>>();
    rows = sumnorm_scaling_sweep(dims, seeds, cfg.value("outliers", std::size_t{100}),
                                 cfg.value("restarts", std::size_t{20}));
  } else if (study == "experiment") {
    rows = experiment_sweep(cfg.at("base").get<RunConfig>(), cfg.at("param").get<std::string>(),
                            cfg.at("values").get<std::vector<double>>(), seeds);
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown sweep study '" + study + "'");
  }
  emit_plot_data(rows, a.out);
  emit({{"rows", rows.size()}, {"out", a.out}}, "");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return kUsage;
  }
  const std::string first = argv[1];
  if (first == "--version") {
    std::cout << "pancake " << PANCAKE_VERSION << " (" << PANCAKE_BUILD_HASH << ")\n";
    return kOk;
  }
  if (first == "--help" || first == "-h") {
    print_usage(std::cout);
    return kOk;
  }
  if (!kSubcommands.count(first)) {
    std::cerr << "unknown subcommand '" << first << "'\n";
    print_usage(std::cerr);
    return kUsage;
  }

  CLI::App app{"Robust surrogate-loss classification toolkit"};
  app.require_subcommand(1);
  const std::size_t workers = default_workers();
  int code = kOk;

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a margin-separable dataset");
  generate->add_option("--config", gen.config, "GeneratorSpec or run config JSON")->required();
  generate->add_option("--out", gen.out, "Dataset CSV path")->required();
  generate->add_option("--cert-out", gen.cert_out, "Certificate JSON path (default <out>.cert.json)");
  generate->callback([&] { code = run_generate(gen); });

  CorruptArgs cor;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Apply a corruption adversary");
  corrupt_cmd->add_option("--in", cor.in)->required();
  corrupt_cmd->add_option("--spec", cor.spec, "CorruptionSpec or run config JSON")->required();
  corrupt_cmd->add_option("--out", cor.out)->required();
  corrupt_cmd->add_option("--cert", cor.cert, "Margin certificate JSON (FlipBoundary)");
  corrupt_cmd->callback([&] { code = run_corrupt(cor); });

  TrainArgs tr;
  tr.workers = workers;
  auto* train_cmd = app.add_subcommand("train", "Constrained surrogate-loss minimization");
  train_cmd->add_option("--in", tr.in)->required();
  train_cmd->add_option("--loss", tr.loss)->check(CLI::IsMember({"hinge", "logistic"}));
  train_cmd->add_option("--gamma", tr.gamma, "Constraint radius is 1/gamma");
  train_cmd->add_option("--iters", tr.iters);
  train_cmd->add_option("--restarts", tr.restarts);
  train_cmd->add_option("--seed", tr.seed);
  train_cmd->add_option("--avg", tr.avg)->check(CLI::IsMember({"on", "off"}));
  train_cmd->add_option("--step", tr.step)->check(CLI::IsMember({"constant", "inverse_sqrt"}));
  train_cmd->add_option("--step-c", tr.step_c, "Step constant (0 = 1/gamma)");
  train_cmd->add_option("--workers", tr.workers);
  train_cmd->add_option("--out", tr.out);
  train_cmd->callback([&] { code = run_train(tr); });

  CertifyArgs ce;
  ce.workers = workers;
  auto* certify = app.add_subcommand("certify-pancakes", "Empirical dense-pancakes certification");
  certify->add_option("--in", ce.in)->required();
  certify->add_option("--anchors", ce.anchors, "Anchor dataset CSV (default: --in)");
  certify->add_option("--tau", ce.tau);
  certify->add_option("--rho", ce.rho);
  certify->add_option("--beta", ce.beta);
  certify->add_option("--tau-prime", ce.tau_prime);
  certify->add_option("--beta-prime", ce.beta_prime);
  certify->add_option("--net-cap", ce.net_cap);
  certify->add_option("--seed", ce.seed);
  certify->add_option("--density-denominator", ce.denominator)->check(CLI::IsMember({"all", "inliers"}));
  certify->add_option("--workers", ce.workers);
  certify->add_option("--out", ce.out);
  certify->callback([&] { code = run_certify(ce); });

  SumNormArgs sn;
  auto* sumnorm = app.add_subcommand("sumnorm", "Hereditary or linear sum norm of the outliers");
  sumnorm->add_option("--in", sn.in)->required();
  sumnorm->add_option("--method", sn.method)->check(CLI::IsMember({"exact", "heuristic"}));
  sumnorm->add_option("--box", sn.box, "none = hereditary")->check(CLI::IsMember({"none", "zero-one", "sym-one"}));
  sumnorm->add_option("--roles", sn.roles)->check(CLI::IsMember({"outlier", "all"}));
  sumnorm->add_option("--restarts", sn.restarts);
  sumnorm->add_option("--trials", sn.trials, "Rounding draws for the continuous route");
  sumnorm->add_option("--seed", sn.seed);
  sumnorm->add_option("--out", sn.out);
  sumnorm->callback([&] { code = run_sumnorm(sn); });

  VerifyArgs ve;
  auto* verify = app.add_subcommand("verify-lemmas", "Randomized property suites for the lemmas");
  verify->add_option("--seed", ve.seed);
  verify->add_option("--scale", ve.scale, "Multiply every suite's instance count");
  verify->add_option("--out", ve.out);
  verify->callback([&] { code = run_verify(ve); });

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run the end-to-end pipeline");
  experiment->add_option("--config", ex.config)->required();
  experiment->add_option("--out", ex.out, "Report JSON (default <output_dir>/experiment_report.json)");
  experiment->add_option("--emit-csv", ex.emit_csv, "Also write stage,metric,value rows");
  experiment->add_option("--workers", ex.workers);
  experiment->callback([&] {
    if (ex.workers == 0 && std::getenv("PANCAKE_WORKERS")) ex.workers = workers;
    code = run_experiment_cmd(ex);
  });

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep with long-format plot data");
  sweep->add_option("--config", sw.config)->required();
  sweep->add_option("--out", sw.out)->required();
  sweep->callback([&] { code = run_sweep(sw); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kValidation;
  }
  return code;
}
