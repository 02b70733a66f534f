#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <variant>
#include <vector>

#include "pancake/core.hpp"
#include "pancake/rng.hpp"

namespace pancake {

struct FlipRandom {
  friend bool operator==(const FlipRandom&, const FlipRandom&) = default;
};
struct FlipBoundary {
  friend bool operator==(const FlipBoundary&, const FlipBoundary&) = default;
};
struct FlipAligned {
  Vec u;
  friend bool operator==(const FlipAligned&, const FlipAligned&) = default;
};
struct InjectMalicious {
  Vec u;
  friend bool operator==(const InjectMalicious&, const InjectMalicious&) = default;
};

using CorruptionStrategy = std::variant<FlipRandom, FlipBoundary, FlipAligned, InjectMalicious>;

struct CorruptionSpec {
  CorruptionStrategy strategy = FlipRandom{};
  double eta = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

/// floor(eta * n). The 1e-9 guard keeps products such as 0.29 * 100 from
/// landing one below the intended integer.
inline std::size_t corruption_budget(double eta, std::size_t n) {
  if (!(eta >= 0.0 && eta < 1.0)) throw Error(ErrorKind::InvalidInput, "eta must lie in [0, 1)");
  return static_cast<std::size_t>(std::floor(eta * static_cast<double>(n) + 1e-9));
}

/// Negates labels at `indices` and tags those points as outliers.
inline Dataset flip_indices(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out = ds;
  for (std::size_t i : indices) {
    out.points.at(i).y = -out.points[i].y;
    out.roles[i] = Role::Outlier;
  }
  return out;
}

/// The k indices chosen by flip_random; depends only on (n, k, seed).
inline std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  CounterRng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Dataset flip_random(const Dataset& ds, double eta, std::uint64_t seed) {
  return flip_indices(ds, random_subset(ds.size(), corruption_budget(eta, ds.size()), seed));
}

namespace detail {

// Indices of the k smallest keys, ties by ascending index.
inline std::vector<std::size_t> smallest_k(const std::vector<double>& keys, std::size_t k) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

}  // namespace detail

/// Flips the k points with the smallest margin y * <x, w_star>.
inline Dataset flip_boundary(const Dataset& ds, double eta, const MarginCertificate& cert) {
  std::vector<double> keys;
  keys.reserve(ds.size());
  for (const auto& p : ds.points) keys.push_back(p.y * dot(p.x, cert.w_star));
  return flip_indices(ds, detail::smallest_k(keys, corruption_budget(eta, ds.size())));
}

/// Flips the k points whose signed vector y*x has the most negative
/// projection on u, i.e. the k-subset maximizing <u, sum of flipped -y*x>.
inline Dataset flip_aligned(const Dataset& ds, double eta, std::span<const double> u) {
  if (std::abs(norm(u) - 1.0) > kTolerance) throw Error(ErrorKind::InvalidInput, "flip_aligned: u must be a unit vector");
  std::vector<double> keys;
  keys.reserve(ds.size());
  for (const auto& p : ds.points) keys.push_back(p.y * dot(p.x, u));
  return flip_indices(ds, detail::smallest_k(keys, corruption_budget(eta, ds.size())));
}

/// Number of points inject_malicious appends: floor(eta * n / (1 - eta)).
inline std::size_t injection_count(double eta, std::size_t n) {
  if (!(eta >= 0.0 && eta < 1.0)) throw Error(ErrorKind::InvalidInput, "inject_malicious: eta must lie in [0, 1)");
  return static_cast<std::size_t>(std::floor(eta * static_cast<double>(n) / (1.0 - eta) + 1e-9));
}

/// Appends k copies of (u, +1) tagged as outliers. Their hereditary sum
/// norm is exactly k.
inline Dataset inject_malicious(const Dataset& ds, double eta, std::span<const double> u) {
  if (std::abs(norm(u) - 1.0) > kTolerance) throw Error(ErrorKind::InvalidInput, "inject_malicious: u must be a unit vector");
  require_same_dim(u.size(), ds.d, "inject_malicious");
  const std::size_t k = injection_count(eta, ds.size());
  Dataset out = ds;
  for (std::size_t i = 0; i < k; ++i) {
    out.points.push_back({Vec(u.begin(), u.end()), 1});
    out.roles.push_back(Role::Outlier);
  }
  return out;
}

/// Applies a CorruptionSpec. FlipBoundary needs the certificate.
inline Dataset corrupt(const Dataset& ds, const CorruptionSpec& spec,
                       const MarginCertificate* cert = nullptr) {
  return std::visit(
      [&](const auto& s) -> Dataset {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FlipRandom>) {
          return flip_random(ds, spec.eta, spec.seed);
        } else if constexpr (std::is_same_v<S, FlipBoundary>) {
          if (cert == nullptr) throw Error(ErrorKind::InvalidInput, "FlipBoundary requires a margin certificate");
          return flip_boundary(ds, spec.eta, *cert);
        } else if constexpr (std::is_same_v<S, FlipAligned>) {
          return flip_aligned(ds, spec.eta, s.u);
        } else {
          return inject_malicious(ds, spec.eta, s.u);
        }
      },
      spec.strategy);
}

}  // namespace pancake
