//
// Copyright 2026 The dpmargin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Exact margin computations used as test oracles and by the margin-removal
// experiment.
//
// The geometric margin of S is the distance from the origin to the convex hull
// of the signed points z_i = y_i x_i (zero when the hull contains the origin).
// It is computed with Wolfe's minimum-norm-point algorithm, which terminates
// with a certified bracket: the minimum-norm point x gives an upper bound |x|
// and the direction x/|x| attains min_i <x, z_i>/|x| as a lower bound.

#ifndef DPMARGIN_ORACLE_HPP_
#define DPMARGIN_ORACLE_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"

namespace dpmargin {

inline constexpr double kDefaultOracleTol = 1e-6;
inline constexpr std::size_t kExhaustiveOracleCap = 16;

struct MarginCertificate {
  double margin = 0.0;  // max(lower, 0)
  double lower = 0.0;   // margin attained by `direction`
  double upper = 0.0;   // distance from origin to the hull
  Vector direction;     // unit vector, zero when the origin is in the hull
  std::size_t iterations = 0;
};

namespace detail {

// Minimizes |sum_i a_i p_i| subject to sum_i a_i = 1 over the rows of `corral`.
inline Vector AffineMinimizer(const RowMatrix& corral) {
  const Eigen::Index q = corral.rows();
  Vector alpha(q);
  if (q == 1) {
    alpha(0) = 1.0;
    return alpha;
  }
  // Parametrize as p_0 + sum_{i>0} b_i (p_i - p_0).
  Eigen::MatrixXd diffs(corral.cols(), q - 1);
  for (Eigen::Index i = 1; i < q; ++i) {
    diffs.col(i - 1) = (corral.row(i) - corral.row(0)).transpose();
  }
  const Vector rhs = -corral.row(0).transpose();
  const Vector beta = diffs.completeOrthogonalDecomposition().solve(rhs);
  alpha(0) = 1.0 - beta.sum();
  alpha.tail(q - 1) = beta;
  return alpha;
}

}  // namespace detail

// `signed_points` holds one row z_i = y_i x_i per point. `tol` bounds
// upper - max(lower, 0) at termination.
inline MarginCertificate SolveMaxMargin(const RowMatrix& signed_points,
                                        double tol = kDefaultOracleTol) {
  const Eigen::Index m = signed_points.rows();
  const Eigen::Index k = signed_points.cols();
  if (m == 0) throw DomainError("margin of an empty point set is undefined");
  if (!(tol > 0.0)) throw DomainError("oracle tolerance must be positive");

  Vector sq_norms = signed_points.rowwise().squaredNorm();
  const double scale = std::max(sq_norms.maxCoeff(), 1e-300);
  const double zero_eps = 1e-24 * scale;
  const double weight_eps = 1e-12;

  MarginCertificate cert;
  cert.direction = Vector::Zero(k);

  std::vector<Eigen::Index> support;
  std::vector<double> weights;
  Eigen::Index first = 0;
  sq_norms.minCoeff(&first);
  support.push_back(first);
  weights.push_back(1.0);
  Vector x = signed_points.row(first).transpose();

  const std::size_t cap = 100 * static_cast<std::size_t>(m + k) + 1000;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0;; ++iter) {
    const double xx = x.squaredNorm();
    if (xx <= zero_eps) {
      // The origin is (numerically) inside the hull.
      cert.margin = 0.0;
      cert.lower = 0.0;
      cert.upper = std::sqrt(xx);
      cert.iterations = iter;
      return cert;
    }
    const Vector scores = signed_points * x;
    Eigen::Index j = 0;
    const double min_score = scores.minCoeff(&j);
    const double norm = std::sqrt(xx);
    if (min_score / norm > lower) {
      lower = min_score / norm;
      cert.direction = x / norm;
    }
    upper = std::min(upper, norm);
    const bool gap_closed = upper - std::max(lower, 0.0) <= tol;
    const bool wolfe_optimal = xx - min_score <= 1e-15 * scale;
    const bool stalled =
        std::find(support.begin(), support.end(), j) != support.end();
    if (gap_closed || wolfe_optimal || stalled) {
      if (!gap_closed && upper - std::max(lower, 0.0) > tol) {
        // Stalled by rounding without certifying the tolerance.
        if (upper - std::max(lower, 0.0) > 1e3 * tol) {
          throw OracleError("minimum-norm-point iteration stalled", lower,
                            upper);
        }
      }
      cert.lower = lower;
      cert.upper = upper;
      cert.margin = std::max(lower, 0.0);
      cert.iterations = iter;
      if (cert.margin == 0.0) cert.direction = Vector::Zero(k);
      return cert;
    }
    if (iter >= cap) {
      throw OracleError("minimum-norm-point iteration cap reached", lower,
                        upper);
    }
    support.push_back(j);
    weights.push_back(0.0);

    // Minor cycle: move toward the affine minimizer of the corral until it
    // lies in the relative interior of the corral's hull.
    while (true) {
      RowMatrix corral(static_cast<Eigen::Index>(support.size()), k);
      for (std::size_t r = 0; r < support.size(); ++r) {
        corral.row(static_cast<Eigen::Index>(r)) = signed_points.row(support[r]);
      }
      const Vector alpha = detail::AffineMinimizer(corral);
      if (alpha.minCoeff() > weight_eps) {
        for (std::size_t r = 0; r < support.size(); ++r) {
          weights[r] = alpha(static_cast<Eigen::Index>(r));
        }
        break;
      }
      double theta = 1.0;
      for (std::size_t r = 0; r < support.size(); ++r) {
        const double a = alpha(static_cast<Eigen::Index>(r));
        if (a <= weight_eps && weights[r] - a > 0.0) {
          theta = std::min(theta, weights[r] / (weights[r] - a));
        }
      }
      theta = std::clamp(theta, 0.0, 1.0);
      for (std::size_t r = 0; r < support.size(); ++r) {
        weights[r] = theta * alpha(static_cast<Eigen::Index>(r)) +
                     (1.0 - theta) * weights[r];
      }
      // Drop the points whose weight vanished (at least one does).
      std::size_t smallest = 0;
      for (std::size_t r = 1; r < weights.size(); ++r) {
        if (weights[r] < weights[smallest]) smallest = r;
      }
      std::vector<Eigen::Index> kept_support;
      std::vector<double> kept_weights;
      for (std::size_t r = 0; r < support.size(); ++r) {
        if (weights[r] > weight_eps && r != smallest) {
          kept_support.push_back(support[r]);
          kept_weights.push_back(weights[r]);
        }
      }
      if (kept_support.empty()) {
        kept_support.push_back(support[smallest == 0 ? 1 : 0]);
        kept_weights.push_back(1.0);
      }
      double total = 0.0;
      for (double w : kept_weights) total += w;
      for (double& w : kept_weights) w /= total;
      support = std::move(kept_support);
      weights = std::move(kept_weights);
      if (support.size() == 1) break;
    }
    x.setZero();
    for (std::size_t r = 0; r < support.size(); ++r) {
      x += weights[r] * signed_points.row(support[r]).transpose();
    }
  }
}

// Geometric margin max_w max{min_i y_i <w, x_i> / |w|, 0}, within `tol`.
inline MarginCertificate GeometricMarginCertificate(
    const Dataset& data, double tol = kDefaultOracleTol) {
  return SolveMaxMargin(data.SignedPoints(), tol);
}

inline double GeometricMarginOracle(const Dataset& data,
                                    double tol = kDefaultOracleTol) {
  return GeometricMarginCertificate(data, tol).margin;
}

// Same quantity on the subset `indices`; +infinity for the empty subset (every
// direction separates nothing).
inline double SubsetMargin(const RowMatrix& signed_points,
                           std::span<const std::size_t> indices,
                           double tol = kDefaultOracleTol) {
  if (indices.empty()) return std::numeric_limits<double>::infinity();
  RowMatrix z(static_cast<Eigen::Index>(indices.size()), signed_points.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    z.row(static_cast<Eigen::Index>(r)) =
        signed_points.row(static_cast<Eigen::Index>(indices[r]));
  }
  return SolveMaxMargin(z, tol).margin;
}

// Normalized margin of a fixed direction: min_i y_i <w, x_i> / (|x_i| |w|)
// before clamping at zero. Zero-norm points contribute 0.
inline double RawNormalizedMargin(const Vector& w, const Dataset& data,
                                  std::vector<double>* per_point = nullptr) {
  const double w_norm = w.norm();
  double result = std::numeric_limits<double>::infinity();
  if (per_point) per_point->assign(data.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.features().row(static_cast<Eigen::Index>(i));
    const double x_norm = row.norm();
    double value = 0.0;
    if (x_norm > 0.0 && w_norm > 0.0) {
      value = data.label(i) * row.dot(w) / (x_norm * w_norm);
    }
    if (per_point) (*per_point)[i] = value;
    result = std::min(result, value);
  }
  return result;
}

inline double NormalizedMargin(const Vector& w, const Dataset& data) {
  return std::max(RawNormalizedMargin(w, data), 0.0);
}

// Best normalized margin over all directions: the geometric margin of the
// signed points rescaled to unit norm.
inline MarginCertificate NormalizedMarginCertificate(
    const Dataset& data, double tol = kDefaultOracleTol) {
  RowMatrix z = data.SignedPoints();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double norm = z.row(i).norm();
    if (norm > 0.0) z.row(i) /= norm;
  }
  return SolveMaxMargin(z, tol);
}

struct OutlierWitness {
  std::size_t count = 0;
  std::vector<std::size_t> removed;  // ascending indices
};

namespace detail {

// Advances `combo` (ascending, values < n) to the next combination in
// lexicographic order. Returns false after the last one.
inline bool NextCombination(std::vector<std::size_t>& combo, std::size_t n) {
  const std::size_t r = combo.size();
  for (std::size_t i = r; i-- > 0;) {
    if (combo[i] < n - r + i) {
      ++combo[i];
      for (std::size_t j = i + 1; j < r; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Smallest removal set leaving margin >= gamma (within tol). Removal sets are
// enumerated by increasing size, lexicographically within a size, so the
// witness is the lexicographically first minimizer.
inline OutlierWitness MinOutliersOracle(const Dataset& data, double gamma,
                                        double tol = kDefaultOracleTol) {
  const std::size_t n = data.size();
  if (n > kExhaustiveOracleCap) {
    throw SizeError("exhaustive outlier oracle supports n <= " +
                    std::to_string(kExhaustiveOracleCap) + ", got " +
                    std::to_string(n));
  }
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const RowMatrix z = data.SignedPoints();
  for (std::size_t r = 0; r <= n; ++r) {
    std::vector<std::size_t> combo(r);
    for (std::size_t i = 0; i < r; ++i) combo[i] = i;
    do {
      const auto keep = Complement(n, combo);
      if (SubsetMargin(z, keep, tol) >= gamma - tol) {
        return {r, combo};
      }
    } while (r > 0 && detail::NextCombination(combo, n));
  }
  return {n, Complement(n, {})};  // unreachable: the empty remainder qualifies
}

// Homogeneous soft-margin linear SVM, min 0.5|w|^2 + C sum hinge(y <w, x>),
// solved by dual coordinate descent in a fixed cyclic order.
inline Vector FitSoftMarginSvm(const Dataset& data, double c = 1.0,
                               double eps = 1e-8,
                               std::size_t max_epochs = 10000) {
  if (!(c > 0.0)) throw DomainError("SVM cost must be positive");
  const auto& x = data.features();
  const std::size_t n = data.size();
  Vector w = Vector::Zero(data.dim());
  std::vector<double> alpha(n, 0.0);
  const Vector q = x.rowwise().squaredNorm();
  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    double max_pg = -std::numeric_limits<double>::infinity();
    double min_pg = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (q(ii) == 0.0) continue;
      const double y = data.label(i);
      const double g = y * x.row(ii).dot(w) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == c) {
        pg = std::max(g, 0.0);
      }
      max_pg = std::max(max_pg, pg);
      min_pg = std::min(min_pg, pg);
      if (pg != 0.0) {
        const double old = alpha[i];
        alpha[i] = std::clamp(old - g / q(ii), 0.0, c);
        w += (alpha[i] - old) * y * x.row(ii).transpose();
      }
    }
    if (max_pg - min_pg < eps) break;
  }
  return w;
}

struct MarginCurvePoint {
  std::size_t removed_count = 0;
  double normalized_margin = 0.0;
  std::optional<std::size_t> removed_index;  // original index removed next
};

// Margin-removal curve: repeatedly removes the point with the smallest
// normalized margin under the current separator and records the best
// normalized margin of what remains. The separator is the max-normalized-margin
// direction when the remainder is separable and a soft-margin SVM otherwise.
inline std::vector<MarginCurvePoint> MarginRemovalCurve(
    const Dataset& data, std::size_t max_removals, double svm_c = 1.0,
    double tol = 1e-9) {
  std::vector<std::size_t> active(data.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
  max_removals = std::min(max_removals, data.size() - 2);
  std::vector<MarginCurvePoint> curve;
  for (std::size_t removed = 0;; ++removed) {
    const Dataset current = data.Subset(active);
    const MarginCertificate cert = NormalizedMarginCertificate(current, tol);
    MarginCurvePoint point{removed, cert.margin, std::nullopt};
    if (removed < max_removals) {
      const Vector w = cert.margin > 0.0 ? cert.direction
                                         : FitSoftMarginSvm(current, svm_c);
      std::vector<double> per_point;
      RawNormalizedMargin(w, current, &per_point);
      const auto worst = static_cast<std::size_t>(
          std::min_element(per_point.begin(), per_point.end()) -
          per_point.begin());
      point.removed_index = active[worst];
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    curve.push_back(point);
    if (removed >= max_removals) break;
  }
  return curve;
}

}  // namespace dpmargin

#endif  // DPMARGIN_ORACLE_HPP_
