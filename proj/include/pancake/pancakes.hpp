#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <vector>

#include "pancake/core.hpp"
#include "pancake/rng.hpp"

namespace pancake {

/// (tau, rho, beta): pancake half-width, density threshold, exceptional mass.
struct PancakeParams {
  double tau = 0.1;
  double rho = 0.1;
  double beta = 0.0;

  friend bool operator==(const PancakeParams&, const PancakeParams&) = default;
};

/// Slack for the distribution-to-sample transfer: net resolution and extra
/// failure mass.
struct TransferParams {
  double tau_prime = 0.5;
  double beta_prime = 0.05;

  friend bool operator==(const TransferParams&, const TransferParams&) = default;
};

inline void validate(const PancakeParams& p) {
  if (!(p.tau > 0.0)) throw Error(ErrorKind::InvalidInput, "tau must be > 0");
  if (!(p.rho > 0.0 && p.rho <= 1.0)) throw Error(ErrorKind::InvalidInput, "rho must lie in (0, 1]");
  if (!(p.beta >= 0.0 && p.beta < 1.0)) throw Error(ErrorKind::InvalidInput, "beta must lie in [0, 1)");
}

inline void validate(const TransferParams& p) {
  if (!(p.tau_prime > 0.0)) throw Error(ErrorKind::InvalidInput, "tau_prime must be > 0");
  if (!(p.beta_prime > 0.0 && p.beta_prime < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "beta_prime must lie in (0, 1)");
  }
}

/// Who counts toward a pancake's density: every point of the reference set,
/// or only its inliers (divided by the inlier count).
enum class DensityDenominator { All, Inliers };

inline constexpr double kSlabSlack = 1e-12;

/// Same-label slab membership: candidate.y == anchor.y and
/// |<w, candidate.x - anchor.x>| <= tau.
inline bool pancake_membership(std::span<const double> w, double tau, const LabeledPoint& anchor,
                               const LabeledPoint& candidate) {
  require_same_dim(anchor.x.size(), w.size(), "pancake_membership anchor");
  require_same_dim(candidate.x.size(), w.size(), "pancake_membership candidate");
  if (std::abs(norm(w) - 1.0) > kTolerance) {
    throw Error(ErrorKind::InvalidInput, "pancake_membership: w must be a unit vector");
  }
  if (candidate.y != anchor.y) return false;
  double gap = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) gap += w[i] * (candidate.x[i] - anchor.x[i]);
  return std::abs(gap) <= tau + kSlabSlack;
}

/// Fraction of `reference` inside the anchor's pancake. Straight scan; the
/// certifier uses a sorted-projection equivalent.
inline double pancake_density(const Dataset& reference, std::span<const double> w, double tau,
                              const LabeledPoint& anchor,
                              DensityDenominator denominator = DensityDenominator::All) {
  const RoleFilter filter =
      denominator == DensityDenominator::All ? RoleFilter::All : RoleFilter::Inliers;
  const std::size_t total = reference.count(filter);
  if (total == 0) throw Error(ErrorKind::EmptySelection, "pancake_density: empty reference set");
  std::size_t members = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (!selected(reference.roles[i], filter)) continue;
    if (pancake_membership(w, tau, anchor, reference.points[i])) ++members;
  }
  return static_cast<double>(members) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Direction nets
// ---------------------------------------------------------------------------

struct DirectionNet {
  std::vector<Vec> directions;
  bool exhaustive = false;
};

inline Vec random_unit_vector(std::size_t d, CounterRng& rng) {
  Vec v(d);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

/// Geodesic angle whose chord is tau_prime (capped at pi).
inline double chord_angle(double tau_prime) {
  return 2.0 * std::asin(std::min(1.0, tau_prime / 2.0));
}

/// For d <= 3, a deterministic grid whose every unit vector lies within chord
/// distance tau_prime of a member. For d > 3 the covering net is replaced by
/// min((1 + 2/tau_prime)^d, max_size) seeded random directions.
inline DirectionNet direction_net(std::size_t d, double tau_prime, std::uint64_t seed,
                                  std::size_t max_size) {
  if (max_size < 1) throw Error(ErrorKind::InvalidInput, "direction_net: max_size must be >= 1");
  if (d < 1) throw Error(ErrorKind::InvalidInput, "direction_net: d must be >= 1");
  if (!(tau_prime > 0.0)) throw Error(ErrorKind::InvalidInput, "direction_net: tau_prime must be > 0");
  DirectionNet net;
  const double theta = chord_angle(tau_prime);
  if (d == 1) {
    net.directions = {{1.0}, {-1.0}};
    net.exhaustive = true;
  } else if (d == 2) {
    const auto m = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / theta));
    for (std::size_t j = 0; j < m; ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
      net.directions.push_back({std::cos(a), std::sin(a)});
    }
    net.exhaustive = true;
  } else if (d == 3) {
    // Polar bands of height <= theta; within a band, azimuth spacing is chosen
    // so the along-latitude arc is <= theta/2 at the band's widest circle.
    // Any point is then within theta/2 + theta/2 (geodesic) of a grid node.
    const auto bands = static_cast<std::size_t>(std::ceil(std::numbers::pi / theta));
    const double band = std::numbers::pi / static_cast<double>(bands);
    for (std::size_t i = 0; i < bands; ++i) {
      const double lo = band * static_cast<double>(i);
      const double hi = lo + band;
      const double widest = (lo <= std::numbers::pi / 2 && hi >= std::numbers::pi / 2)
                                ? 1.0
                                : std::max(std::sin(lo), std::sin(hi));
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * widest / theta)));
      const double polar = lo + band / 2.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double az =
            2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(k);
        net.directions.push_back(
            {std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar)});
      }
    }
    net.exhaustive = true;
  } else {
    const double log_size = static_cast<double>(d) * std::log(1.0 + 2.0 / tau_prime);
    std::size_t count = max_size;
    if (log_size < std::log(static_cast<double>(max_size))) {
      count = static_cast<std::size_t>(std::ceil(std::exp(log_size)));
    }
    CounterRng rng(seed);
    net.directions.reserve(count);
    for (std::size_t j = 0; j < count; ++j) net.directions.push_back(random_unit_vector(d, rng));
    net.exhaustive = false;
  }
  return net;
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

struct BadAnchor {
  std::size_t anchor = 0;
  std::size_t direction = 0;
  double density = 0.0;
};

struct CertificationReport {
  double beta_hat = 0.0;
  Vec worst_direction;
  std::size_t worst_direction_index = 0;
  std::vector<BadAnchor> bad_anchors;  // truncated at CertifyOptions::max_witnesses
  std::size_t bad_anchor_total = 0;
  std::size_t net_size = 0;
  bool exhaustive = false;
  PancakeParams params;
  bool pass = false;
};

struct CertifyOptions {
  DensityDenominator denominator = DensityDenominator::All;
  std::size_t workers = 1;
  std::size_t max_witnesses = 10000;
  bool exhaustive_net = false;
};

namespace detail {

// Sorted projections of the reference set, split by label, for one direction.
struct ProjectedReference {
  std::vector<double> positive;
  std::vector<double> negative;
  double total = 0.0;

  ProjectedReference(const Dataset& reference, std::span<const double> w,
                     DensityDenominator denominator) {
    const RoleFilter filter =
        denominator == DensityDenominator::All ? RoleFilter::All : RoleFilter::Inliers;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (!selected(reference.roles[i], filter)) continue;
      const auto& p = reference.points[i];
      (p.y > 0 ? positive : negative).push_back(dot(w, p.x));
      total += 1.0;
    }
    std::sort(positive.begin(), positive.end());
    std::sort(negative.begin(), negative.end());
  }

  double density(double projection, Label y, double tau) const {
    const auto& side = y > 0 ? positive : negative;
    const auto lo = std::lower_bound(side.begin(), side.end(), projection - tau - kSlabSlack);
    const auto hi = std::upper_bound(side.begin(), side.end(), projection + tau + kSlabSlack);
    return static_cast<double>(hi - lo) / total;
  }
};

inline std::vector<double> anchor_densities(const Dataset& reference, const Dataset& anchors,
                                            std::span<const double> w, double tau,
                                            DensityDenominator denominator) {
  const ProjectedReference projected(reference, w, denominator);
  std::vector<double> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors.points) out.push_back(projected.density(dot(w, a.x), a.y, tau));
  return out;
}

// Runs fn(j) for every direction index, spreading contiguous blocks over
// `workers` threads.
template <typename Fn>
void for_each_direction(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t j = 0; j < count; ++j) fn(j);
    return;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t block = (count + workers - 1) / workers;
  for (std::size_t start = 0; start < count; start += block) {
    const std::size_t stop = std::min(count, start + block);
    jobs.push_back(std::async(std::launch::async, [&fn, start, stop] {
      for (std::size_t j = start; j < stop; ++j) fn(j);
    }));
  }
  for (auto& job : jobs) job.get();
}

}  // namespace detail

/// For every direction, the fraction of anchors whose pancake density w.r.t.
/// `reference` is below rho; beta_hat is the max over directions.
inline CertificationReport certify_empirical(const Dataset& reference, const Dataset& anchors,
                                             const std::vector<Vec>& directions,
                                             const PancakeParams& params,
                                             const CertifyOptions& options = {}) {
  validate(params);
  if (directions.empty()) throw Error(ErrorKind::InvalidInput, "certify_empirical: no directions");
  if (anchors.size() == 0) throw Error(ErrorKind::EmptySelection, "certify_empirical: no anchors");
  require_same_dim(anchors.d, reference.d, "certify_empirical");

  struct PerDirection {
    std::size_t bad = 0;
    std::vector<BadAnchor> witnesses;
  };
  std::vector<PerDirection> results(directions.size());
  detail::for_each_direction(directions.size(), options.workers, [&](std::size_t j) {
    const auto densities =
        detail::anchor_densities(reference, anchors, directions[j], params.tau, options.denominator);
    auto& r = results[j];
    for (std::size_t a = 0; a < densities.size(); ++a) {
      if (densities[a] < params.rho) {
        ++r.bad;
        if (r.witnesses.size() < options.max_witnesses) r.witnesses.push_back({a, j, densities[a]});
      }
    }
  });

  CertificationReport report;
  report.params = params;
  report.net_size = directions.size();
  report.exhaustive = options.exhaustive_net;
  std::size_t worst = 0;
  for (std::size_t j = 0; j < results.size(); ++j) {
    if (results[j].bad > results[worst].bad) worst = j;
    report.bad_anchor_total += results[j].bad;
    for (const auto& w : results[j].witnesses) {
      if (report.bad_anchors.size() >= options.max_witnesses) break;
      report.bad_anchors.push_back(w);
    }
  }
  report.worst_direction_index = worst;
  report.worst_direction = directions[worst];
  report.beta_hat = static_cast<double>(results[worst].bad) / static_cast<double>(anchors.size());
  report.pass = report.beta_hat <= params.beta;
  return report;
}

/// Largest rho for which (tau, rho, beta) certifies over `directions`: per
/// direction, the floor(beta*m)-th smallest anchor density; then the minimum.
inline double estimate_rho(const Dataset& reference, const Dataset& anchors,
                           const std::vector<Vec>& directions, double tau, double beta,
                           const CertifyOptions& options = {}) {
  if (directions.empty()) throw Error(ErrorKind::InvalidInput, "estimate_rho: no directions");
  if (anchors.size() == 0) throw Error(ErrorKind::EmptySelection, "estimate_rho: no anchors");
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorKind::InvalidInput, "beta must lie in [0, 1)");
  const auto rank = static_cast<std::size_t>(
      std::floor(beta * static_cast<double>(anchors.size()) + 1e-9));
  std::vector<double> per_direction(directions.size());
  detail::for_each_direction(directions.size(), options.workers, [&](std::size_t j) {
    auto densities =
        detail::anchor_densities(reference, anchors, directions[j], tau, options.denominator);
    const auto nth = densities.begin() + static_cast<std::ptrdiff_t>(std::min(rank, densities.size() - 1));
    std::nth_element(densities.begin(), nth, densities.end());
    per_direction[j] = *nth;
  });
  return *std::min_element(per_direction.begin(), per_direction.end());
}

// ---------------------------------------------------------------------------
// Sample-size bounds
// ---------------------------------------------------------------------------

/// ceil((8/rho) * (d * ln(1 + 2/tau') + ln(1/beta'))).
inline std::size_t required_sample_size(double rho, double tau_prime, double beta_prime,
                                        std::size_t d) {
  validate(PancakeParams{1.0, rho, 0.0});
  validate(TransferParams{tau_prime, beta_prime});
  const double bound = (8.0 / rho) * (static_cast<double>(d) * std::log1p(2.0 / tau_prime) +
                                      std::log(1.0 / beta_prime));
  return static_cast<std::size_t>(std::ceil(std::max(0.0, bound)));
}

/// exp(-rho * n / 8): chance a rho-dense pancake keeps at most rho*n/2 of an
/// n-point sample.
inline double chernoff_failure_bound(double rho, double n) {
  if (!(n >= 0.0)) throw Error(ErrorKind::InvalidInput, "chernoff_failure_bound: n must be >= 0");
  return std::exp(-rho * n / 8.0);
}

/// Union bound over the net: exp(d ln(1 + 2/tau') + ln(1/beta') - rho n / 8).
inline double transfer_failure_bound(double rho, double tau_prime, double beta_prime,
                                     std::size_t d, double n) {
  return std::exp(static_cast<double>(d) * std::log1p(2.0 / tau_prime) +
                  std::log(1.0 / beta_prime) - rho * n / 8.0);
}

}  // namespace pancake
