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

// Rademacher Johnson-Lindenstrauss projections.

#ifndef DPMARGIN_PROJECTION_HPP_
#define DPMARGIN_PROJECTION_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"
#include "dpmargin/random.hpp"

namespace dpmargin {

inline constexpr double kDefaultJlConstant = 8.0;
// Matrices with more entries than this are regenerated row by row on demand.
inline constexpr std::uint64_t kDefaultMaterializeLimit = 100'000'000;

// k = ceil(C_jl * (b/gamma)^2 * ln(grid_size (n+2)(n+1) / beta)), at least 1.
inline std::uint64_t ProjectionDim(double gamma, std::size_t n,
                                   std::size_t grid_size, double beta,
                                   double b, double c_jl = kDefaultJlConstant) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(b > 0.0)) throw DomainError("norm bound must be positive");
  if (gamma > b) throw DomainError("gamma must not exceed the norm bound");
  if (n == 0 || grid_size == 0) {
    throw DomainError("n and grid size must be positive");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  if (!(c_jl > 0.0)) throw DomainError("JL constant must be positive");
  const double nn = static_cast<double>(n);
  const double ratio = b / gamma;
  const double log_term =
      std::log(static_cast<double>(grid_size) * (nn + 2.0) * (nn + 1.0) / beta);
  const double k = std::ceil(c_jl * ratio * ratio * log_term);
  if (!(k < 9.0e18)) throw ResourceError("projection dimension overflows");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

// k x d matrix with entries +-1/sqrt(k), regenerated exactly from
// (k, d, seed). The identity variant (k = d) stands in when the requested
// dimension would not reduce the ambient one.
class JlMatrix {
 public:
  static JlMatrix Sample(Eigen::Index k, Eigen::Index d, std::uint64_t seed,
                         std::uint64_t materialize_limit =
                             kDefaultMaterializeLimit) {
    if (k < 1 || d < 1) throw DomainError("JL dimensions must be positive");
    JlMatrix phi(k, d, seed, false);
    if (static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(d) <=
        materialize_limit) {
      phi.entries_.resize(k, d);
      for (Eigen::Index i = 0; i < k; ++i) {
        phi.entries_.row(i) = phi.GenerateRow(i).transpose();
      }
    }
    return phi;
  }

  static JlMatrix Identity(Eigen::Index d, std::uint64_t seed = 0) {
    if (d < 1) throw DomainError("dimension must be positive");
    return JlMatrix(d, d, seed, true);
  }

  Eigen::Index k() const noexcept { return k_; }
  Eigen::Index d() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool is_identity() const noexcept { return identity_; }
  bool materialized() const noexcept { return entries_.size() > 0; }

  double entry(Eigen::Index i, Eigen::Index j) const {
    if (identity_) return i == j ? 1.0 : 0.0;
    if (materialized()) return entries_(i, j);
    return Sign(i, j) * scale_;
  }

  // Row i as a d-vector.
  Vector Row(Eigen::Index i) const {
    if (identity_) return Vector::Unit(d_, i);
    if (materialized()) return entries_.row(i).transpose();
    return GenerateRow(i);
  }

  // Phi x
  Vector Apply(const Vector& x) const {
    CheckAmbient(x.size());
    if (identity_) return x;
    if (materialized()) return entries_ * x;
    Vector out(k_);
    for (Eigen::Index i = 0; i < k_; ++i) out(i) = GenerateRow(i).dot(x);
    return out;
  }

  // Phi^T w
  Vector ApplyTranspose(const Vector& w) const {
    if (w.size() != k_) {
      throw DimensionError("weight dimension " + std::to_string(w.size()) +
                           " does not match projection dimension " +
                           std::to_string(k_));
    }
    if (identity_) return w;
    if (materialized()) return entries_.transpose() * w;
    Vector out = Vector::Zero(d_);
    for (Eigen::Index i = 0; i < k_; ++i) out += w(i) * GenerateRow(i);
    return out;
  }

  // Rows of x mapped through Phi: x Phi^T.
  RowMatrix ProjectRows(const RowMatrix& x) const {
    CheckAmbient(x.cols());
    if (identity_) return x;
    if (materialized()) return x * entries_.transpose();
    RowMatrix out(x.rows(), k_);
    for (Eigen::Index i = 0; i < k_; ++i) out.col(i) = x * GenerateRow(i);
    return out;
  }

 private:
  JlMatrix(Eigen::Index k, Eigen::Index d, std::uint64_t seed, bool identity)
      : k_(k),
        d_(d),
        seed_(seed),
        identity_(identity),
        key_(DeriveSeed(seed, "jl/signs")),
        scale_(1.0 / std::sqrt(static_cast<double>(k))) {}

  double Sign(Eigen::Index i, Eigen::Index j) const {
    const auto counter = static_cast<std::uint64_t>(i) *
                             static_cast<std::uint64_t>(d_) +
                         static_cast<std::uint64_t>(j);
    return (BitsAt(key_, counter) >> 63) ? -1.0 : 1.0;
  }

  Vector GenerateRow(Eigen::Index i) const {
    Vector row(d_);
    for (Eigen::Index j = 0; j < d_; ++j) row(j) = Sign(i, j) * scale_;
    return row;
  }

  void CheckAmbient(Eigen::Index dim) const {
    if (dim != d_) {
      throw DimensionError("input dimension " + std::to_string(dim) +
                           " does not match projection input dimension " +
                           std::to_string(d_));
    }
  }

  Eigen::Index k_;
  Eigen::Index d_;
  std::uint64_t seed_;
  bool identity_;
  std::uint64_t key_;
  double scale_;
  RowMatrix entries_;
};

inline JlMatrix SampleJl(Eigen::Index k, Eigen::Index d, std::uint64_t seed) {
  return JlMatrix::Sample(k, d, seed);
}

// Projects every point through phi, then clips it radially to the ball of
// radius 2v. The result carries norm bound 2v.
inline Dataset ProjectAndClip(const JlMatrix& phi, const Dataset& data,
                              double v) {
  if (!(v > 0.0)) throw DomainError("radius must be positive");
  RowMatrix projected = phi.ProjectRows(data.features());
  const double radius = 2.0 * v;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    const double norm = projected.row(i).norm();
    if (norm > radius * (1.0 + kNormSlack)) projected.row(i) *= radius / norm;
  }
  return Dataset(std::move(projected), data.labels(), radius);
}

inline Vector Lift(const JlMatrix& phi, const Vector& w_k) {
  return phi.ApplyTranspose(w_k);
}

}  // namespace dpmargin

#endif  // DPMARGIN_PROJECTION_HPP_
