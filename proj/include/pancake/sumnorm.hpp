#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pancake/core.hpp"
#include "pancake/rng.hpp"

namespace pancake {

/// Signed vectors v_i = y_i * x_i.
using SignedPointSet = std::vector<Vec>;

/// Largest set handled by exhaustive enumeration (2^25 ~ 3.4e7 vertices).
inline constexpr std::size_t kEnumerationLimit = 25;

enum class SumNormMethod { ExactSubset, AlternatingMax, ProjectedGradient };

inline const char* to_string(SumNormMethod m) {
  switch (m) {
    case SumNormMethod::ExactSubset: return "ExactSubset";
    case SumNormMethod::AlternatingMax: return "AlternatingMax";
    case SumNormMethod::ProjectedGradient: return "ProjectedGradient";
  }
  return "unknown";
}

/// Coefficient box for the linear sum norm: [0,1]^n or [-1,1]^n.
enum class CoefficientBox { ZeroOne, SymmetricOne };

inline const char* to_string(CoefficientBox b) {
  return b == CoefficientBox::ZeroOne ? "zero-one" : "sym-one";
}

struct SumNormReport {
  double value = 0.0;
  Vec witness;  // coefficients a_i
  SumNormMethod method = SumNormMethod::ExactSubset;
  bool exact = false;
  std::size_t restarts = 0;
  std::size_t trials = 0;
  std::size_t iterations = 0;
  double rounded_value = 0.0;  // best {lo,hi}-rounded value; only set when trials > 0
};

/// ||sum_i a_i v_i|| summed in index order.
inline double combination_norm(const SignedPointSet& v, std::span<const double> a) {
  require_same_dim(v.size(), a.size(), "combination_norm");
  if (v.empty()) return 0.0;
  Vec s(v.front().size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (a[i] != 0.0) axpy(a[i], v[i], s);
  }
  return norm(s);
}

namespace detail {

inline std::size_t common_dim(const SignedPointSet& v) {
  if (v.empty()) return 0;
  for (const auto& x : v) require_same_dim(x.size(), v.front().size(), "signed point set");
  return v.front().size();
}

inline void enumeration_guard(std::size_t n) {
  if (n > kEnumerationLimit) {
    throw Error(ErrorKind::SizeGuard, std::to_string(n) + " vectors exceed the exact-enumeration limit of " +
                                          std::to_string(kEnumerationLimit) +
                                          "; use the heuristic method");
  }
}

// Lexicographic order of the sorted index lists encoded by two masks.
inline bool index_list_less(std::uint32_t a, std::uint32_t b) {
  if (a == b) return false;
  const int first = std::countr_zero(a ^ b);
  const std::uint32_t above = ~((std::uint32_t{2} << first) - 1u);
  if ((a >> first) & 1u) return (b & above) != 0;  // b continues past a's entry
  return (a & above) == 0;                          // a ended before b's entry
}

inline bool improves(double candidate, double best) {
  return candidate > best + 1e-12 * std::max(1.0, best);
}

inline bool ties(double candidate, double best) {
  return std::abs(candidate - best) <= 1e-12 * std::max(1.0, best);
}

}  // namespace detail

/// max over subsets S of ||sum_{i in S} v_i||, by Gray-code enumeration.
/// Ties go to the lexicographically smallest sorted index list.
inline SumNormReport her_sum_norm_exact(const SignedPointSet& v) {
  detail::enumeration_guard(v.size());
  const std::size_t d = detail::common_dim(v);
  const std::size_t n = v.size();
  SumNormReport report;
  report.method = SumNormMethod::ExactSubset;
  report.exact = true;
  report.witness.assign(n, 0.0);
  if (n == 0) return report;

  std::vector<long double> sum(d, 0.0L);
  std::uint32_t mask = 0;
  std::uint32_t best_mask = 0;
  double best = 0.0;
  const std::uint64_t steps = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < steps; ++k) {
    const int flip = std::countr_zero(k);
    const std::uint32_t bit = std::uint32_t{1} << flip;
    const long double sign = (mask & bit) ? -1.0L : 1.0L;
    mask ^= bit;
    long double n2 = 0.0L;
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += sign * v[static_cast<std::size_t>(flip)][j];
      n2 += sum[j] * sum[j];
    }
    const double value = static_cast<double>(std::sqrt(n2));
    if (detail::improves(value, best) ||
        (detail::ties(value, best) && detail::index_list_less(mask, best_mask))) {
      best = std::max(best, value);
      best_mask = mask;
    }
  }
  for (std::size_t i = 0; i < n; ++i) report.witness[i] = (best_mask >> i) & 1u ? 1.0 : 0.0;
  report.value = combination_norm(v, report.witness);
  report.iterations = static_cast<std::size_t>(steps);
  return report;
}

/// Alternating maximization of sum_i max(0, <u, v_i>) over unit u. The first
/// restart starts at the longest vector, later ones at seeded random
/// directions. Always a lower bound on the exact value.
inline SumNormReport her_sum_norm_heuristic(const SignedPointSet& v, std::size_t restarts,
                                            std::uint64_t seed, std::size_t max_iterations = 1000) {
  if (restarts < 1) throw Error(ErrorKind::InvalidInput, "her_sum_norm_heuristic: restarts must be >= 1");
  const std::size_t d = detail::common_dim(v);
  const std::size_t n = v.size();
  SumNormReport report;
  report.method = SumNormMethod::AlternatingMax;
  report.exact = false;
  report.restarts = restarts;
  report.witness.assign(n, 0.0);
  if (n == 0) return report;

  std::size_t longest = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (norm(v[i]) > norm(v[longest])) longest = i;
  }
  if (norm(v[longest]) == 0.0) return report;

  CounterRng rng(seed);
  for (std::size_t r = 0; r < restarts; ++r) {
    Vec u(d);
    if (r == 0) {
      u = normalized(v[longest]);
    } else {
      for (double& x : u) x = rng.normal();
    }
    std::vector<char> in(n, 0);
    auto choose = [&](const Vec& dir) {
      std::vector<char> s(n, 0);
      for (std::size_t i = 0; i < n; ++i) s[i] = dot(dir, v[i]) > 0.0;
      return s;
    };
    in = choose(u);
    if (std::none_of(in.begin(), in.end(), [](char c) { return c != 0; })) {
      for (double& x : u) x = -x;
      in = choose(u);
    }
    Vec coeffs(n, 0.0);
    for (std::size_t it = 0; it < max_iterations; ++it) {
      ++report.iterations;
      for (std::size_t i = 0; i < n; ++i) coeffs[i] = in[i] ? 1.0 : 0.0;
      Vec s(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (in[i]) axpy(1.0, v[i], s);
      }
      const double sn = norm(s);
      if (sn == 0.0) break;
      auto next = choose(scaled(s, 1.0 / sn));
      if (next == in) break;
      in = std::move(next);
    }
    const double value = combination_norm(v, coeffs);
    if (value > report.value) {
      report.value = value;
      report.witness = coeffs;
    }
  }
  return report;
}

inline std::pair<double, double> box_bounds(CoefficientBox box) {
  return box == CoefficientBox::ZeroOne ? std::pair{0.0, 1.0} : std::pair{-1.0, 1.0};
}

namespace detail {

struct VertexSearch {
  const SignedPointSet& v;
  double lo, hi;
  std::size_t d;
  Vec coeffs;
  std::vector<Vec> partial;  // partial[i] = sum_{j < i} coeffs[j] * v[j]
  Vec best_coeffs;
  double best = -1.0;
  std::size_t leaves = 0;

  VertexSearch(const SignedPointSet& vs, double lo_, double hi_)
      : v(vs), lo(lo_), hi(hi_), d(vs.front().size()), coeffs(vs.size(), lo_),
        partial(vs.size() + 1, Vec(d, 0.0)) {}

  // Depth-first over coordinates, lo before hi; the first maximizer found is
  // kept, i.e. the lexicographically smallest coefficient vector.
  void descend(std::size_t i) {
    if (i == v.size()) {
      ++leaves;
      const double value = norm(partial[i]);
      if (best < 0.0 || improves(value, best)) {
        best = value;
        best_coeffs = coeffs;
      }
      return;
    }
    for (double c : {lo, hi}) {
      coeffs[i] = c;
      for (std::size_t j = 0; j < d; ++j) partial[i + 1][j] = partial[i][j] + c * v[i][j];
      descend(i + 1);
    }
  }
};

}  // namespace detail

/// Maximum of ||sum_i a_i v_i|| over the coefficient box. The objective is
/// convex, so the maximum sits at a vertex; all 2^n vertices are visited.
inline SumNormReport lin_sum_norm(const SignedPointSet& v, CoefficientBox box) {
  detail::enumeration_guard(v.size());
  const auto [lo, hi] = box_bounds(box);
  SumNormReport report;
  report.method = SumNormMethod::ExactSubset;
  report.exact = true;
  if (v.empty()) return report;
  detail::common_dim(v);
  detail::VertexSearch search(v, lo, hi);
  search.descend(0);
  report.witness = search.best_coeffs;
  report.value = combination_norm(v, report.witness);
  report.iterations = search.leaves;
  return report;
}

/// Continuous route: projected gradient ascent on the box from seeded random
/// interior starts, followed by `trials` randomized roundings of the best
/// point onto box vertices.
inline SumNormReport lin_sum_norm_projected_gradient(const SignedPointSet& v, CoefficientBox box,
                                                     std::size_t restarts, std::size_t trials,
                                                     std::uint64_t seed, double step = 0.5,
                                                     std::size_t max_iterations = 2000) {
  if (restarts < 1) throw Error(ErrorKind::InvalidInput, "lin_sum_norm: restarts must be >= 1");
  const auto [lo, hi] = box_bounds(box);
  const std::size_t d = detail::common_dim(v);
  const std::size_t n = v.size();
  SumNormReport report;
  report.method = SumNormMethod::ProjectedGradient;
  report.exact = false;
  report.restarts = restarts;
  report.trials = trials;
  report.witness.assign(n, lo < 0.0 ? 0.0 : lo);
  if (n == 0) return report;

  CounterRng rng(seed);
  double best = -1.0;
  for (std::size_t r = 0; r < restarts; ++r) {
    Vec a(n);
    for (double& c : a) c = lo + (hi - lo) * rng.uniform();
    for (std::size_t it = 0; it < max_iterations; ++it) {
      ++report.iterations;
      Vec s(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) axpy(a[i], v[i], s);
      const double sn = norm(s);
      Vec u = sn > 0.0 ? scaled(s, 1.0 / sn) : Vec(d, 0.0);
      if (sn == 0.0) {
        for (double& x : u) x = rng.normal();
      }
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double next = std::clamp(a[i] + step * dot(u, v[i]), lo, hi);
        moved = moved || next != a[i];
        a[i] = next;
      }
      if (!moved) break;
    }
    const double value = combination_norm(v, a);
    if (value > best) {
      best = value;
      report.witness = a;
    }
  }
  report.value = std::max(0.0, best);

  if (trials > 0) {
    Vec rounded(n);
    for (std::size_t t = 0; t < trials; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = (report.witness[i] - lo) / (hi - lo);
        rounded[i] = rng.uniform() < p ? hi : lo;
      }
      report.rounded_value = std::max(report.rounded_value, combination_norm(v, rounded));
    }
  }
  return report;
}

struct RoundingCheck {
  double lhs = 0.0;     // Monte Carlo mean of ||sum A_i v_i||^2
  double rhs = 0.0;     // ||sum a_i v_i||^2
  double stderr_ = 0.0;  // standard error of lhs
  std::size_t trials = 0;
  bool pass = false;  // lhs >= rhs - 3 * stderr
};

/// Independent Bernoulli(a_i) rounding of the coefficients, compared in
/// expectation against the unrounded squared norm.
inline RoundingCheck rounding_check(const SignedPointSet& v, std::span<const double> a,
                                    std::size_t trials, std::uint64_t seed) {
  if (trials < 100) throw Error(ErrorKind::InvalidInput, "rounding_check: trials must be >= 100");
  require_same_dim(v.size(), a.size(), "rounding_check");
  for (double c : a) {
    if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorKind::InvalidInput, "rounding_check: coefficient outside [0, 1]");
  }
  RoundingCheck out;
  out.trials = trials;
  const double base = combination_norm(v, a);
  out.rhs = base * base;

  CounterRng rng(seed);
  Vec draw(a.size());
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 1; t <= trials; ++t) {
    for (std::size_t i = 0; i < a.size(); ++i) draw[i] = rng.uniform() < a[i] ? 1.0 : 0.0;
    const double value = combination_norm(v, draw);
    const double x = value * value;
    const double delta = x - mean;
    mean += delta / static_cast<double>(t);
    m2 += delta * (x - mean);
  }
  out.lhs = mean;
  const double variance = m2 / static_cast<double>(trials - 1);
  out.stderr_ = std::sqrt(variance / static_cast<double>(trials));
  out.pass = out.lhs >= out.rhs - 3.0 * out.stderr_;
  return out;
}

}  // namespace pancake
