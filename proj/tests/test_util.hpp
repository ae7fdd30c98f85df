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

#ifndef DPMARGIN_TESTS_TEST_UTIL_HPP_
#define DPMARGIN_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <initializer_list>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "dpmargin/dpmargin.hpp"

namespace dpmargin::testing {

// Builds a dataset from {features..., label} rows with b = max norm.
inline Dataset Make(std::initializer_list<std::pair<std::vector<double>, int>> rows) {
  std::vector<LabeledPoint> points;
  for (const auto& [x, y] : rows) {
    points.push_back({Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())), y});
  }
  return Dataset::FromPoints(points);
}

// Random labelled points in the unit ball of R^d.
inline Dataset RandomDataset(std::size_t n, Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.2, 1.0);
  RowMatrix x(static_cast<Eigen::Index>(n), d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(d);
    for (Eigen::Index j = 0; j < d; ++j) v[j] = g(rng);
    x.row(static_cast<Eigen::Index>(i)) = (u(rng) * v / v.norm()).transpose();
    y[i] = (rng() & 1U) ? 1 : -1;
  }
  return Dataset(std::move(x), std::move(y), 1.0);
}

// Exact 2-d max-min margin: the optimum direction is either some z_i/|z_i| or
// a direction equalizing two points, i.e. orthogonal to z_i - z_j.
inline double ExactMargin2d(const std::vector<Vector>& z) {
  if (z.empty()) return std::numeric_limits<double>::infinity();
  std::vector<Vector> dirs;
  for (const auto& a : z) {
    if (a.norm() > 0) dirs.push_back(a / a.norm());
    for (const auto& b : z) {
      Vector diff = a - b;
      if (diff.norm() < 1e-15) continue;
      Vector perp(2);
      perp << -diff[1], diff[0];
      dirs.push_back(perp / perp.norm());
      dirs.push_back(-perp / perp.norm());
    }
  }
  double best = 0.0;
  for (const auto& w : dirs) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& a : z) worst = std::min(worst, w.dot(a));
    best = std::max(best, worst);
  }
  return best;
}

inline std::vector<Vector> SignedRows(const Dataset& s, const std::vector<std::size_t>& keep) {
  std::vector<Vector> z;
  for (std::size_t i : keep) z.push_back(s.label(i) * s.point(i).features);
  return z;
}

}  // namespace dpmargin::testing

#endif  // DPMARGIN_TESTS_TEST_UTIL_HPP_
