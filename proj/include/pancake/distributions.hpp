#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pancake/core.hpp"
#include "pancake/rng.hpp"

namespace pancake {

struct GaussianIsotropic {
  double sigma = 1.0;
  friend bool operator==(const GaussianIsotropic&, const GaussianIsotropic&) = default;
};

struct UniformBall {
  double radius = 1.0;
  friend bool operator==(const UniformBall&, const UniformBall&) = default;
};

using ComponentKind = std::variant<GaussianIsotropic, UniformBall>;

/// One isotropic log-concave component translated by `mean`. An empty mean is
/// the origin.
struct ComponentSpec {
  ComponentKind kind = GaussianIsotropic{};
  Vec mean;
  double weight = 1.0;

  friend bool operator==(const ComponentSpec&, const ComponentSpec&) = default;
};

struct GeneratorSpec {
  std::size_t d = 2;
  std::size_t n = 100;
  double gamma_star = 0.1;
  std::optional<Vec> u_star;  // defaults to the first coordinate axis
  std::vector<ComponentSpec> positive_mixture;
  std::vector<ComponentSpec> negative_mixture;
  double class_shift = 0.2;
  std::uint64_t seed = 0;

  Vec direction() const { return u_star ? *u_star : unit_axis(d, 0); }

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

namespace detail {

inline void check_component(const ComponentSpec& spec, std::size_t d) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GaussianIsotropic>) {
          if (!(k.sigma > 0.0)) throw Error(ErrorKind::InvalidInput, "Gaussian sigma must be > 0");
        } else {
          if (!(k.radius > 0.0)) throw Error(ErrorKind::InvalidInput, "ball radius must be > 0");
        }
      },
      spec.kind);
  if (!spec.mean.empty()) require_same_dim(spec.mean.size(), d, "component mean");
  if (!(spec.weight >= 0.0 && spec.weight <= 1.0)) {
    throw Error(ErrorKind::InvalidInput, "component weight must lie in [0, 1]");
  }
}

inline Vec draw_one(const ComponentSpec& spec, std::size_t d, CounterRng& rng) {
  Vec x(d);
  if (const auto* g = std::get_if<GaussianIsotropic>(&spec.kind)) {
    for (double& v : x) v = g->sigma * rng.normal();
  } else {
    const double radius = std::get<UniformBall>(spec.kind).radius;
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (double& v : x) {
        v = rng.normal();
        n2 += v * v;
      }
    } while (n2 == 0.0);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double scale = r / std::sqrt(n2);
    for (double& v : x) v *= scale;
  }
  if (!spec.mean.empty()) {
    for (std::size_t i = 0; i < d; ++i) x[i] += spec.mean[i];
  }
  return x;
}

inline void check_mixture(const std::vector<ComponentSpec>& components, std::size_t d) {
  if (components.empty()) throw Error(ErrorKind::InvalidInput, "mixture has no components");
  double total = 0.0;
  for (const auto& c : components) {
    check_component(c, d);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidInput, "mixture weights sum to " + std::to_string(total));
  }
}

inline std::size_t pick_component(const std::vector<ComponentSpec>& components, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    if (components[j].weight <= 0.0) continue;
    last_positive = j;
    cumulative += components[j].weight;
    if (u < cumulative) return j;
  }
  return last_positive;
}

// Component selection uses its own stream so a one-component mixture consumes
// the sampling stream exactly like sample_component.
inline constexpr std::string_view kSelectStream = "mixture-select";

}  // namespace detail

/// n i.i.d. draws from one (translated) component.
inline std::vector<Vec> sample_component(const ComponentSpec& spec, std::size_t d, std::size_t n,
                                         std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "sample_component: n must be >= 1");
  detail::check_component(spec, d);
  CounterRng rng(seed);
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(detail::draw_one(spec, d, rng));
  return out;
}

inline std::vector<Vec> translate(const std::vector<Vec>& points, std::span<const double> mu) {
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(add(p, mu));
  return out;
}

/// Each draw picks a component by weight and then samples it.
inline std::vector<Vec> mix(const std::vector<ComponentSpec>& components, std::size_t d,
                            std::size_t n, std::uint64_t seed) {
  detail::check_mixture(components, d);
  CounterRng sampler(seed);
  CounterRng selector(split_seed(seed, detail::kSelectStream));
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j =
        components.size() == 1 ? 0 : detail::pick_component(components, selector.uniform());
    out.push_back(detail::draw_one(components[j], d, sampler));
  }
  return out;
}

/// Lift x -> (x, 1) / sqrt(2). Norms <= 1 stay <= 1.
inline std::vector<Vec> homogenize(const std::vector<Vec>& points) {
  const double c = 1.0 / std::sqrt(2.0);
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (norm(p) > 1.0 + kTolerance) {
      throw Error(ErrorKind::InvalidInput, "homogenize: input norm exceeds 1");
    }
    Vec q;
    q.reserve(p.size() + 1);
    for (double v : p) q.push_back(v * c);
    q.push_back(c);
    out.push_back(std::move(q));
  }
  return out;
}

struct RejectionStats {
  std::size_t accepted = 0;
  std::size_t draws = 0;
  std::size_t rejected_margin = 0;
  std::size_t rejected_norm = 0;

  double acceptance_rate() const { return draws == 0 ? 0.0 : static_cast<double>(accepted) / draws; }
};

struct GeneratedData {
  Dataset data;
  MarginCertificate certificate;
  RejectionStats stats;
  std::vector<std::string> warnings;
};

/// Non-fatal findings about a spec: mixture means longer than 2 * gamma_star.
inline std::vector<std::string> generator_warnings(const GeneratorSpec& spec) {
  std::vector<std::string> warnings;
  auto scan = [&](const std::vector<ComponentSpec>& mixture, const char* name) {
    for (std::size_t j = 0; j < mixture.size(); ++j) {
      if (!mixture[j].mean.empty() && norm(mixture[j].mean) > 2.0 * spec.gamma_star) {
        warnings.push_back(std::string(name) + "[" + std::to_string(j) +
                           "] mean norm exceeds 2*gamma_star");
      }
    }
  };
  scan(spec.positive_mixture, "positive_mixture");
  scan(spec.negative_mixture, "negative_mixture");
  return warnings;
}

inline void validate_generator_spec(const GeneratorSpec& spec) {
  if (spec.d < 1) throw Error(ErrorKind::InvalidInput, "generator: d must be >= 1");
  if (spec.n < 1) throw Error(ErrorKind::InvalidInput, "generator: n must be >= 1");
  if (!(spec.gamma_star > 0.0 && spec.gamma_star < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "generator: gamma_star must lie in (0, 1)");
  }
  const Vec u = spec.direction();
  require_same_dim(u.size(), spec.d, "generator u_star");
  if (std::abs(norm(u) - 1.0) > 1e-12) throw Error(ErrorKind::InvalidInput, "generator: u_star must be a unit vector");
  detail::check_mixture(spec.positive_mixture, spec.d);
  detail::check_mixture(spec.negative_mixture, spec.d);
}

/// Shift-plus-rejection construction. Candidates are
///   x = class_shift * y * u_star + (class mixture draw)
/// with labels alternating +1, -1, ... over accepted points. A candidate is
/// kept iff y * <x, u_star> >= gamma_star and |x| <= 1, so w_star =
/// u_star / gamma_star certifies every accepted point.
inline GeneratedData generate_margin_separable(const GeneratorSpec& spec,
                                               std::size_t rejection_cap_factor = 100) {
  validate_generator_spec(spec);
  const Vec u = spec.direction();
  const std::size_t cap = rejection_cap_factor * spec.n;

  CounterRng sampler(spec.seed);
  CounterRng selector(split_seed(spec.seed, detail::kSelectStream));

  GeneratedData out;
  out.warnings = generator_warnings(spec);
  out.data.d = spec.d;
  out.data.points.reserve(spec.n);
  Label next = 1;
  while (out.stats.accepted < spec.n) {
    if (out.stats.draws >= cap) {
      throw Error(ErrorKind::InfeasibleSpec,
                  "rejection cap of " + std::to_string(cap) + " draws exceeded with " +
                      std::to_string(out.stats.accepted) + " of " + std::to_string(spec.n) +
                      " points accepted");
    }
    ++out.stats.draws;
    const auto& mixture = next > 0 ? spec.positive_mixture : spec.negative_mixture;
    const std::size_t j =
        mixture.size() == 1 ? 0 : detail::pick_component(mixture, selector.uniform());
    Vec x = detail::draw_one(mixture[j], spec.d, sampler);
    axpy(spec.class_shift * next, u, x);
    if (next * dot(x, u) < spec.gamma_star) {
      ++out.stats.rejected_margin;
      continue;
    }
    if (norm(x) > 1.0) {
      ++out.stats.rejected_norm;
      continue;
    }
    out.data.points.push_back({std::move(x), next});
    ++out.stats.accepted;
    next = -next;
  }
  out.data.roles.assign(out.data.points.size(), Role::Inlier);
  out.certificate = {scaled(u, 1.0 / spec.gamma_star), spec.gamma_star};
  return out;
}

/// Margin used by the default experiment: gamma = C * ln(d) / sqrt(d). With
/// C = 0.4, d = 25 gives 0.2575.
inline double log_margin(std::size_t d, double c = 0.4) {
  return c * std::log(static_cast<double>(d)) / std::sqrt(static_cast<double>(d));
}

}  // namespace pancake
