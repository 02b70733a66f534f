#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pancake/adversary.hpp"
#include "pancake/analysis.hpp"
#include "pancake/core.hpp"
#include "pancake/distributions.hpp"
#include "pancake/optimizer.hpp"
#include "pancake/pancakes.hpp"
#include "pancake/sumnorm.hpp"

namespace pancake {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset CSV: header `y,role,x0,...,x{d-1}`, features with 17 significant
// digits so every double re-parses to the same bits.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << "y,role";
  for (std::size_t j = 0; j < ds.d; ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& p = ds.points[i];
    out << (p.y > 0 ? "1" : "-1") << ',' << (ds.roles[i] == Role::Inlier ? "inlier" : "outlier");
    for (double v : p.x) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "y" || header[1] != "role") {
    throw Error(ErrorKind::InvalidInput, "dataset CSV header must start with y,role");
  }
  Dataset ds;
  ds.d = header.size() - 2;
  for (std::size_t j = 0; j < ds.d; ++j) {
    if (header[j + 2] != "x" + std::to_string(j)) {
      throw Error(ErrorKind::InvalidInput, "dataset CSV header column " + std::to_string(j + 2) +
                                               " must be x" + std::to_string(j));
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != ds.d + 2) {
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(ds.d + 2) + " fields");
    }
    LabeledPoint p;
    if (fields[0] == "1") {
      p.y = 1;
    } else if (fields[0] == "-1") {
      p.y = -1;
    } else {
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": label must be -1 or 1");
    }
    Role role;
    if (fields[1] == "inlier") {
      role = Role::Inlier;
    } else if (fields[1] == "outlier") {
      role = Role::Outlier;
    } else {
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": role must be inlier or outlier");
    }
    p.x.reserve(ds.d);
    for (std::size_t j = 0; j < ds.d; ++j) p.x.push_back(detail::parse_double(fields[j + 2], line_no));
    ds.points.push_back(std::move(p));
    ds.roles.push_back(role);
  }
  if (ds.points.empty()) throw Error(ErrorKind::InvalidInput, "dataset CSV has no rows");
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_dataset_csv(in);
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_dataset_csv(out, ds);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// JSON: specs and configs (both directions)
// ---------------------------------------------------------------------------

inline void to_json(json& j, const ComponentSpec& c) {
  json kind;
  if (const auto* g = std::get_if<GaussianIsotropic>(&c.kind)) {
    kind = {{"type", "GaussianIsotropic"}, {"sigma", g->sigma}};
  } else {
    kind = {{"type", "UniformBall"}, {"radius", std::get<UniformBall>(c.kind).radius}};
  }
  j = {{"kind", kind}, {"mean", c.mean}, {"weight", c.weight}};
}

inline void from_json(const json& j, ComponentSpec& c) {
  const auto& kind = j.at("kind");
  const auto type = kind.at("type").get<std::string>();
  if (type == "GaussianIsotropic") {
    c.kind = GaussianIsotropic{kind.at("sigma").get<double>()};
  } else if (type == "UniformBall") {
    c.kind = UniformBall{kind.at("radius").get<double>()};
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown component kind '" + type + "'");
  }
  c.mean = j.value("mean", Vec{});
  c.weight = j.value("weight", 1.0);
}

inline void to_json(json& j, const GeneratorSpec& g) {
  j = {{"d", g.d},
       {"n", g.n},
       {"gamma_star", g.gamma_star},
       {"u_star", g.u_star ? json(*g.u_star) : json(nullptr)},
       {"positive_mixture", g.positive_mixture},
       {"negative_mixture", g.negative_mixture},
       {"class_shift", g.class_shift},
       {"seed", g.seed}};
}

inline void from_json(const json& j, GeneratorSpec& g) {
  g.d = j.at("d").get<std::size_t>();
  g.n = j.at("n").get<std::size_t>();
  g.gamma_star = j.at("gamma_star").get<double>();
  g.u_star.reset();
  if (j.contains("u_star") && !j.at("u_star").is_null()) g.u_star = j.at("u_star").get<Vec>();
  g.positive_mixture = j.at("positive_mixture").get<std::vector<ComponentSpec>>();
  g.negative_mixture = j.at("negative_mixture").get<std::vector<ComponentSpec>>();
  g.class_shift = j.at("class_shift").get<double>();
  g.seed = j.value("seed", std::uint64_t{0});
}

inline void to_json(json& j, const CorruptionSpec& c) {
  json strategy = std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FlipRandom>) {
          return {{"type", "FlipRandom"}};
        } else if constexpr (std::is_same_v<S, FlipBoundary>) {
          return {{"type", "FlipBoundary"}};
        } else if constexpr (std::is_same_v<S, FlipAligned>) {
          return {{"type", "FlipAligned"}, {"u", s.u}};
        } else {
          return {{"type", "InjectMalicious"}, {"u", s.u}};
        }
      },
      c.strategy);
  j = {{"strategy", strategy}, {"eta", c.eta}, {"seed", c.seed}};
}

inline void from_json(const json& j, CorruptionSpec& c) {
  const auto& s = j.at("strategy");
  const auto type = s.at("type").get<std::string>();
  if (type == "FlipRandom") {
    c.strategy = FlipRandom{};
  } else if (type == "FlipBoundary") {
    c.strategy = FlipBoundary{};
  } else if (type == "FlipAligned") {
    c.strategy = FlipAligned{s.at("u").get<Vec>()};
  } else if (type == "InjectMalicious") {
    c.strategy = InjectMalicious{s.at("u").get<Vec>()};
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown corruption strategy '" + type + "'");
  }
  c.eta = j.at("eta").get<double>();
  c.seed = j.value("seed", std::uint64_t{0});
}

inline void to_json(json& j, const TrainConfig& t) {
  j = {{"gamma", t.gamma},
       {"iterations", t.iterations},
       {"step", {{"kind", t.step.kind == StepKind::Constant ? "constant" : "inverse_sqrt"}, {"c", t.step.c}}},
       {"restarts", t.restarts},
       {"seed", t.seed},
       {"averaging", t.averaging}};
}

inline void from_json(const json& j, TrainConfig& t) {
  t.gamma = j.at("gamma").get<double>();
  t.iterations = j.value("iterations", std::size_t{1000});
  if (j.contains("step")) {
    const auto& s = j.at("step");
    const auto kind = s.value("kind", std::string("inverse_sqrt"));
    if (kind == "constant") {
      t.step.kind = StepKind::Constant;
    } else if (kind == "inverse_sqrt") {
      t.step.kind = StepKind::InverseSqrt;
    } else {
      throw Error(ErrorKind::InvalidInput, "unknown step schedule '" + kind + "'");
    }
    t.step.c = s.value("c", 0.0);
  }
  t.restarts = j.value("restarts", std::size_t{1});
  t.seed = j.value("seed", std::uint64_t{0});
  t.averaging = j.value("averaging", true);
}

inline const char* to_string(DensityDenominator d) {
  return d == DensityDenominator::All ? "all" : "inliers";
}

inline DensityDenominator parse_denominator(const std::string& s) {
  if (s == "all") return DensityDenominator::All;
  if (s == "inliers") return DensityDenominator::Inliers;
  throw Error(ErrorKind::InvalidInput, "density denominator must be all or inliers");
}

inline LossKind parse_loss(const std::string& s) {
  if (s == "hinge") return LossKind::Hinge;
  if (s == "logistic") return LossKind::Logistic;
  throw Error(ErrorKind::InvalidInput, "loss must be hinge or logistic");
}

inline void to_json(json& j, const PancakeConfig& p) {
  j = {{"tau", p.tau},
       {"rho", p.rho ? json(*p.rho) : json(nullptr)},
       {"beta", p.beta},
       {"tau_prime", p.tau_prime},
       {"beta_prime", p.beta_prime},
       {"net_cap", p.net_cap},
       {"density_denominator", to_string(p.denominator)}};
}

inline void from_json(const json& j, PancakeConfig& p) {
  p.tau = j.at("tau").get<double>();
  p.rho.reset();
  if (j.contains("rho") && !j.at("rho").is_null()) p.rho = j.at("rho").get<double>();
  p.beta = j.at("beta").get<double>();
  p.tau_prime = j.value("tau_prime", 0.5);
  p.beta_prime = j.value("beta_prime", 0.05);
  p.net_cap = j.value("net_cap", std::size_t{500});
  p.denominator = parse_denominator(j.value("density_denominator", std::string("all")));
}

inline void to_json(json& j, const RunConfig& r) {
  j = {{"master_seed", r.master_seed},
       {"generator", r.generator},
       {"corruption", r.corruption},
       {"loss", to_string(r.loss)},
       {"train", r.train},
       {"pancake", r.pancake},
       {"test_n", r.test_n},
       {"sumnorm_restarts", r.sumnorm_restarts},
       {"output_dir", r.output_dir},
       {"workers", r.workers}};
}

inline void from_json(const json& j, RunConfig& r) {
  r.master_seed = j.value("master_seed", std::uint64_t{0});
  r.generator = j.at("generator").get<GeneratorSpec>();
  r.corruption = j.contains("corruption") ? j.at("corruption").get<CorruptionSpec>() : CorruptionSpec{};
  r.loss = parse_loss(j.value("loss", std::string("hinge")));
  r.train = j.at("train").get<TrainConfig>();
  r.pancake = j.at("pancake").get<PancakeConfig>();
  r.test_n = j.value("test_n", std::size_t{10000});
  r.sumnorm_restarts = j.value("sumnorm_restarts", std::size_t{50});
  r.output_dir = j.value("output_dir", std::string("."));
  r.workers = j.value("workers", std::size_t{1});
}

// ---------------------------------------------------------------------------
// JSON: reports (write only)
// ---------------------------------------------------------------------------

inline void to_json(json& j, const MarginCertificate& c) {
  j = {{"w_star", c.w_star}, {"gamma_star", c.gamma_star}};
}

inline void from_json(const json& j, MarginCertificate& c) {
  c.w_star = j.at("w_star").get<Vec>();
  c.gamma_star = j.at("gamma_star").get<double>();
}

inline void to_json(json& j, const RejectionStats& s) {
  j = {{"accepted", s.accepted},
       {"draws", s.draws},
       {"rejected_margin", s.rejected_margin},
       {"rejected_norm", s.rejected_norm},
       {"acceptance_rate", s.acceptance_rate()}};
}

inline void to_json(json& j, const ValidationIssue& v) {
  j = {{"kind", to_string(v.kind)}, {"index", v.index}, {"detail", v.detail}};
}

inline void to_json(json& j, const SumNormReport& r) {
  j = {{"value", r.value},          {"witness", r.witness},
       {"method", to_string(r.method)}, {"exact", r.exact},
       {"restarts", r.restarts},    {"trials", r.trials},
       {"iterations", r.iterations}};
  if (r.trials > 0) j["rounded_value"] = r.rounded_value;
}

inline void to_json(json& j, const BadAnchor& b) {
  j = {{"anchor", b.anchor}, {"direction", b.direction}, {"density", b.density}};
}

inline void to_json(json& j, const CertificationReport& r) {
  j = {{"beta_hat", r.beta_hat},
       {"worst_direction", r.worst_direction},
       {"worst_direction_index", r.worst_direction_index},
       {"bad_anchors", r.bad_anchors},
       {"bad_anchor_total", r.bad_anchor_total},
       {"net_size", r.net_size},
       {"exhaustive", r.exhaustive},
       {"tau", r.params.tau},
       {"rho", r.params.rho},
       {"beta", r.params.beta},
       {"pass", r.pass}};
}

inline void to_json(json& j, const TrainResult& r) {
  j = {{"w", r.w},
       {"objective", r.objective},
       {"stationarity_gap", r.stationarity_gap},
       {"trained", r.trained},
       {"trajectory",
        {{"iterations", r.iterations},
         {"initial_objective", r.initial_objective},
         {"final_iterate_objective", r.final_iterate_objective},
         {"max_iterate_norm", r.max_iterate_norm},
         {"best_restart", r.best_restart},
         {"restart_objectives", r.restart_objectives}}}};
}

inline void to_json(json& j, const TheoremPremises& t) {
  j = {{"tau", t.params.tau},
       {"rho", t.params.rho},
       {"beta", t.params.beta},
       {"gamma_star", t.gamma_star},
       {"eta", t.eta},
       {"n", t.n},
       {"n_outliers", t.n_outliers},
       {"her_sum_norm_O", t.her_sum_norm_O},
       {"her_sum_norm_exact", t.her_sum_norm_exact},
       {"slack", t.slack},
       {"tau_ok", t.tau_ok},
       {"slack_ok", t.slack_ok},
       {"certificate_valid", t.certificate_valid},
       {"pass", t.pass}};
}

inline void to_json(json& j, const Conclusion& c) {
  j = {{"error_rate", c.error_rate}, {"errors", c.errors}, {"n", c.n}, {"beta", c.beta}, {"pass", c.pass}};
}

inline void to_json(json& j, const PancakeMarginReport& r) {
  j = {{"alpha", r.alpha},           {"v_prime", r.v_prime},
       {"bound", r.bound},           {"alpha_bound", r.alpha_bound},
       {"per_point_margins", r.per_point_margins}, {"pass", r.pass}};
}

inline void to_json(json& j, const OutlierGradientReport& r) {
  j = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"exact_rhs", r.exact_rhs}, {"pass", r.pass}};
}

inline void to_json(json& j, const RoundingCheck& r) {
  j = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"stderr", r.stderr_}, {"trials", r.trials}, {"pass", r.pass}};
}

inline void to_json(json& j, const ExperimentReport& r) {
  j = {{"seeds",
        {{"generate", r.seeds.generate},
         {"corrupt", r.seeds.corrupt},
         {"train", r.seeds.train},
         {"net", r.seeds.net},
         {"sumnorm", r.seeds.sumnorm},
         {"test", r.seeds.test}}},
       {"generation", r.generation},
       {"warnings", r.warnings},
       {"n", r.n},
       {"n_outliers", r.n_outliers},
       {"eta", r.eta},
       {"clean_margin", r.clean_margin},
       {"training", r.training},
       {"rho_certified", r.rho_certified},
       {"rho_used", r.rho_used},
       {"certification", r.certification},
       {"outlier_sum_norm", r.outlier_sum_norm},
       {"premises", r.premises},
       {"conclusion", r.conclusion},
       {"stage_seconds", r.stage_seconds}};
}

/// `stage,metric,value` rows summarizing an experiment.
inline std::string experiment_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "stage,metric,value\n";
  auto row = [&](const char* stage, const char* metric, double v) {
    out << stage << ',' << metric << ',' << format_double(v) << '\n';
  };
  row("generate", "acceptance_rate", r.generation.acceptance_rate());
  row("corrupt", "n", static_cast<double>(r.n));
  row("corrupt", "n_outliers", static_cast<double>(r.n_outliers));
  row("corrupt", "eta", r.eta);
  row("train", "objective", r.training.objective);
  row("train", "stationarity_gap", r.training.stationarity_gap);
  row("certify", "rho_certified", r.rho_certified);
  row("certify", "rho_used", r.rho_used);
  row("certify", "beta_hat", r.certification.beta_hat);
  row("sumnorm", "her_sum_norm_O", r.outlier_sum_norm.value);
  row("premises", "slack", r.premises.slack);
  row("premises", "pass", r.premises.pass ? 1.0 : 0.0);
  row("test", "error_rate", r.conclusion.error_rate);
  row("test", "pass", r.conclusion.pass ? 1.0 : 0.0);
  return out.str();
}

/// Long-format plot data `sweep_param,seed,metric,value`, rows in input order.
inline std::string plot_data_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "sweep_param,seed,metric,value\n";
  for (const auto& r : rows) {
    out << format_double(r.param) << ',' << r.seed << ',' << r.metric << ',' << format_double(r.value)
        << '\n';
  }
  return out.str();
}

inline void emit_plot_data(const std::vector<SweepRow>& rows, const std::string& path) {
  save_text(path, plot_data_csv(rows));
}

}  // namespace pancake
