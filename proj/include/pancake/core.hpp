#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pancake/error.hpp"

namespace pancake {

using Vec = std::vector<double>;

/// Absolute slack used for every unit-ball and margin invariant check.
inline constexpr double kTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Vector geometry
// ---------------------------------------------------------------------------

inline void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": " + std::to_string(a) +
                                                  " vs " + std::to_string(b));
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline Vec scaled(std::span<const double> a, double c) {
  Vec out(a.begin(), a.end());
  for (double& v : out) v *= c;
  return out;
}

/// y += c * x
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
  require_same_dim(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "add");
  Vec out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Vec subtract(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "subtract");
  Vec out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

/// Unit vector along a; throws on a zero or non-finite input.
inline Vec normalized(std::span<const double> a) {
  const double n = norm(a);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::InvalidInput, "cannot normalize a zero or non-finite vector");
  }
  return scaled(a, 1.0 / n);
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline Vec unit_axis(std::size_t d, std::size_t axis) {
  Vec e(d, 0.0);
  e.at(axis) = 1.0;
  return e;
}

/// Euclidean projection onto the closed ball of radius R. Points already
/// inside are returned unchanged, which makes the map idempotent.
inline Vec project_to_ball(std::span<const double> w, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidInput, "project_to_ball: radius must be > 0");
  if (!all_finite(w)) throw Error(ErrorKind::InvalidInput, "project_to_ball: non-finite entry");
  const double n = norm(w);
  Vec out(w.begin(), w.end());
  if (n <= radius) return out;
  for (double& v : out) v = (v / n) * radius;
  // Rounding can leave the rescaled vector a few ulps outside.
  while (norm(out) > radius) {
    for (double& v : out) v = std::nextafter(v, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class Role { Inlier, Outlier };

enum class RoleFilter { Inliers, Outliers, All };

inline bool selected(Role role, RoleFilter filter) {
  switch (filter) {
    case RoleFilter::Inliers: return role == Role::Inlier;
    case RoleFilter::Outliers: return role == Role::Outlier;
    case RoleFilter::All: return true;
  }
  return false;
}

/// Labels are the integers -1 and +1.
using Label = int;

struct LabeledPoint {
  Vec x;
  Label y = 1;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Ordered points with a parallel role tag per point. Roles live here rather
/// than on the point so adversaries can retag without touching features.
struct Dataset {
  std::vector<LabeledPoint> points;
  std::vector<Role> roles;
  std::size_t d = 0;

  std::size_t size() const noexcept { return points.size(); }

  std::size_t count(RoleFilter filter) const {
    return static_cast<std::size_t>(
        std::count_if(roles.begin(), roles.end(), [&](Role r) { return selected(r, filter); }));
  }

  /// Outlier fraction |O| / n.
  double eta() const {
    return points.empty() ? 0.0 : static_cast<double>(count(RoleFilter::Outliers)) / size();
  }

  Dataset select(RoleFilter filter) const {
    Dataset out;
    out.d = d;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (selected(roles[i], filter)) {
        out.points.push_back(points[i]);
        out.roles.push_back(roles[i]);
      }
    }
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline Dataset make_inlier_dataset(std::vector<LabeledPoint> points) {
  Dataset ds;
  ds.d = points.empty() ? 0 : points.front().x.size();
  ds.roles.assign(points.size(), Role::Inlier);
  ds.points = std::move(points);
  return ds;
}

/// Reference separator w_star with |w_star| <= 1/gamma_star.
struct MarginCertificate {
  Vec w_star;
  double gamma_star = 0.0;

  /// Unit direction along w_star.
  Vec unit_direction() const { return normalized(w_star); }

  friend bool operator==(const MarginCertificate&, const MarginCertificate&) = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Violation { NormExceeded, BadLabel, DimensionMismatch, RoleCountMismatch, EmptyDataset };

inline const char* to_string(Violation v) {
  switch (v) {
    case Violation::NormExceeded: return "norm-exceeded";
    case Violation::BadLabel: return "bad-label";
    case Violation::DimensionMismatch: return "dimension-mismatch";
    case Violation::RoleCountMismatch: return "role-count-mismatch";
    case Violation::EmptyDataset: return "empty-dataset";
  }
  return "unknown";
}

struct ValidationIssue {
  Violation kind;
  std::size_t index;  // point index, or 0 for dataset-level issues
  std::string detail;
};

using ValidationReport = std::vector<ValidationIssue>;

inline ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport report;
  if (ds.points.empty()) report.push_back({Violation::EmptyDataset, 0, "dataset has no points"});
  if (ds.roles.size() != ds.points.size()) {
    report.push_back({Violation::RoleCountMismatch, 0,
                      std::to_string(ds.roles.size()) + " roles for " +
                          std::to_string(ds.points.size()) + " points"});
  }
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const auto& p = ds.points[i];
    if (p.x.size() != ds.d) {
      report.push_back({Violation::DimensionMismatch, i,
                        "dimension " + std::to_string(p.x.size()) + ", expected " +
                            std::to_string(ds.d)});
    }
    const double n = norm(p.x);
    if (!(n <= 1.0 + kTolerance)) {
      report.push_back({Violation::NormExceeded, i, "norm " + std::to_string(n)});
    }
    if (p.y != 1 && p.y != -1) {
      report.push_back({Violation::BadLabel, i, "label " + std::to_string(p.y)});
    }
  }
  return report;
}

/// Minimum functional margin y * <x, w_star> over the selected points.
inline double margin_of(const Dataset& ds, const MarginCertificate& cert,
                        RoleFilter filter = RoleFilter::Inliers) {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    if (!selected(ds.roles.at(i), filter)) continue;
    const auto& p = ds.points[i];
    best = std::min(best, p.y * dot(p.x, cert.w_star));
    any = true;
  }
  if (!any) throw Error(ErrorKind::EmptySelection, "margin_of: no points match the role filter");
  return best;
}

/// True iff |w_star| <= 1/gamma_star and every inlier has margin >= 1, both
/// up to kTolerance.
inline bool certificate_holds(const Dataset& ds, const MarginCertificate& cert) {
  if (!(cert.gamma_star > 0.0)) return false;
  if (norm(cert.w_star) > 1.0 / cert.gamma_star + kTolerance) return false;
  if (ds.count(RoleFilter::Inliers) == 0) return true;
  return margin_of(ds, cert, RoleFilter::Inliers) >= 1.0 - kTolerance;
}

/// Signed vectors y_i * x_i of the selected points.
inline std::vector<Vec> signed_vectors(const Dataset& ds, RoleFilter filter) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    if (!selected(ds.roles.at(i), filter)) continue;
    out.push_back(scaled(ds.points[i].x, ds.points[i].y));
  }
  return out;
}

}  // namespace pancake
