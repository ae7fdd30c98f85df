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

#ifndef DPMARGIN_LOSS_HPP_
#define DPMARGIN_LOSS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"

namespace dpmargin {

enum class LossKind { kHinge, kZeroOne };
enum class RiskMode { kAveraged, kSummed };
enum class NeighborRelation { kAddRemove, kReplace };

struct LossSpec {
  LossKind kind = LossKind::kHinge;
  double confidence_margin = 1.0;  // c, hinge only

  static LossSpec Hinge(double c) {
    if (!(c > 0.0)) throw DomainError("hinge confidence margin must be positive");
    return {LossKind::kHinge, c};
  }
  static LossSpec ZeroOne() { return {LossKind::kZeroOne, 1.0}; }
};

namespace detail {
inline void CheckMargin(double c) {
  if (!(c > 0.0)) throw DomainError("hinge confidence margin must be positive");
}

inline void CheckDims(Eigen::Index w, Eigen::Index x) {
  if (w != x) {
    throw DimensionError("weight dimension " + std::to_string(w) +
                         " does not match point dimension " + std::to_string(x));
  }
}
}  // namespace detail

// max{0, 1 - y<w,x>/c}
inline double HingeLoss(const Vector& w, const LabeledPoint& p, double c) {
  detail::CheckMargin(c);
  detail::CheckDims(w.size(), p.features.size());
  return std::max(0.0, 1.0 - p.label * w.dot(p.features) / c);
}

// -(y/c) x on the active side, zero elsewhere including the kink.
inline Vector HingeSubgradient(const Vector& w, const LabeledPoint& p, double c) {
  detail::CheckMargin(c);
  detail::CheckDims(w.size(), p.features.size());
  if (1.0 - p.label * w.dot(p.features) / c > 0.0) {
    return (-p.label / c) * p.features;
  }
  return Vector::Zero(w.size());
}

// 1 iff y<w,x> < 0; a zero score counts as correct.
inline int ZeroOneLoss(const Vector& w, const LabeledPoint& p) {
  detail::CheckDims(w.size(), p.features.size());
  return p.label * w.dot(p.features) < 0.0 ? 1 : 0;
}

// Per-point signed scores y_i <w, x_i>.
inline Vector SignedScores(const Vector& w, const Dataset& data) {
  detail::CheckDims(w.size(), data.dim());
  Vector scores = data.features() * w;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    scores(i) *= data.label(static_cast<std::size_t>(i));
  }
  return scores;
}

inline std::size_t MisclassifiedCount(const Vector& w, const Dataset& data) {
  const Vector scores = SignedScores(w, data);
  return static_cast<std::size_t>((scores.array() < 0.0).count());
}

// Sequential fixed-order reduction so the value is bit-stable.
inline double EmpiricalRisk(const Vector& w, const Dataset& data,
                            const LossSpec& spec, RiskMode mode) {
  const Vector scores = SignedScores(w, data);
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (spec.kind == LossKind::kHinge) {
      total += std::max(0.0, 1.0 - scores(i) / spec.confidence_margin);
    } else {
      total += scores(i) < 0.0 ? 1.0 : 0.0;
    }
  }
  return mode == RiskMode::kSummed ? total
                                   : total / static_cast<double>(data.size());
}

// Gradient of the summed hinge loss, sum_i HingeSubgradient(w, p_i, c).
inline Vector SummedHingeGradient(const Vector& w, const Dataset& data,
                                  double c) {
  detail::CheckMargin(c);
  const Vector scores = SignedScores(w, data);
  Vector coeff(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    coeff(i) = 1.0 - scores(i) / c > 0.0
                   ? -data.label(static_cast<std::size_t>(i)) / c
                   : 0.0;
  }
  return data.features().transpose() * coeff;
}

// L2 sensitivity of the summed hinge gradient for points in the radius-b ball.
inline double HingeSensitivity(double b, double c, NeighborRelation relation) {
  if (!(b > 0.0) || !(c > 0.0)) {
    throw DomainError("norm bound and confidence margin must be positive");
  }
  return relation == NeighborRelation::kAddRemove ? b / c : 2.0 * b / c;
}

}  // namespace dpmargin

#endif  // DPMARGIN_LOSS_HPP_
