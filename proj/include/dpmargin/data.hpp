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

// Labeled datasets in a norm-bounded ball: construction, file ingestion, norm
// clipping and the planted-margin synthetic generator.

#ifndef DPMARGIN_DATA_HPP_
#define DPMARGIN_DATA_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpmargin/error.hpp"
#include "dpmargin/random.hpp"

namespace dpmargin {

using Vector = Eigen::VectorXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LabeledPoint {
  Vector features;
  int label = 1;
};

enum class FileFormat { kCsv, kLibsvm };

// Immutable after construction. Rows of features() are the points.
// Relative slack for norms that sit on the bound up to rounding.
inline constexpr double kNormSlack = 1e-12;

class Dataset {
 public:
  // Validates labels, finiteness and the norm bound. Throws on violation.
  Dataset(RowMatrix features, std::vector<int> labels, double norm_bound)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        norm_bound_(norm_bound) {
    if (features_.rows() != static_cast<Eigen::Index>(labels_.size())) {
      throw DimensionError("feature rows and label count differ");
    }
    if (labels_.size() < 2) {
      throw DomainError("a dataset needs at least 2 points, got " +
                        std::to_string(labels_.size()));
    }
    if (features_.cols() < 1) throw DimensionError("dataset dimension is 0");
    if (!(norm_bound_ > 0.0) || !std::isfinite(norm_bound_)) {
      throw DomainError("norm bound must be positive and finite");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] != 1 && labels_[i] != -1) {
        throw LabelError("label must be -1 or +1", i + 1);
      }
    }
    if (!features_.allFinite()) {
      throw DomainError("features contain NaN or Inf");
    }
    // Relative slack absorbs rounding in sqrt(sum of squares).
    const double slack = norm_bound_ * kNormSlack;
    for (Eigen::Index i = 0; i < features_.rows(); ++i) {
      if (features_.row(i).norm() > norm_bound_ + slack) {
        throw DomainError("point " + std::to_string(i) +
                          " lies outside the norm bound");
      }
    }
  }

  static Dataset FromPoints(std::span<const LabeledPoint> points,
                            std::optional<double> norm_bound = std::nullopt) {
    if (points.empty()) throw DomainError("no points");
    const Eigen::Index d = points.front().features.size();
    RowMatrix x(static_cast<Eigen::Index>(points.size()), d);
    std::vector<int> y;
    y.reserve(points.size());
    double max_norm = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].features.size() != d) {
        throw DimensionError("point " + std::to_string(i) + " has dimension " +
                             std::to_string(points[i].features.size()) +
                             ", expected " + std::to_string(d));
      }
      x.row(static_cast<Eigen::Index>(i)) = points[i].features.transpose();
      y.push_back(points[i].label);
      max_norm = std::max(max_norm, points[i].features.norm());
    }
    return Dataset(std::move(x), std::move(y), norm_bound.value_or(max_norm));
  }

  std::size_t size() const noexcept { return labels_.size(); }
  Eigen::Index dim() const noexcept { return features_.cols(); }
  double norm_bound() const noexcept { return norm_bound_; }
  const RowMatrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int label(std::size_t i) const { return labels_.at(i); }

  LabeledPoint point(std::size_t i) const {
    return {features_.row(static_cast<Eigen::Index>(i)).transpose(),
            labels_.at(i)};
  }

  // Rows y_i * x_i, the form every margin computation works on.
  RowMatrix SignedPoints() const {
    RowMatrix z = features_;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      z.row(i) *= static_cast<double>(labels_[static_cast<std::size_t>(i)]);
    }
    return z;
  }

  Dataset Subset(std::span<const std::size_t> indices) const {
    RowMatrix x(static_cast<Eigen::Index>(indices.size()), dim());
    std::vector<int> y;
    y.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) =
          features_.row(static_cast<Eigen::Index>(indices[r]));
      y.push_back(labels_.at(indices[r]));
    }
    return Dataset(std::move(x), std::move(y), norm_bound_);
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.norm_bound_ == b.norm_bound_ && a.labels_ == b.labels_ &&
           a.features_.rows() == b.features_.rows() &&
           a.features_.cols() == b.features_.cols() &&
           a.features_ == b.features_;
  }

 private:
  RowMatrix features_;
  std::vector<int> labels_;
  double norm_bound_;
};

namespace detail {

inline std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> ParseDouble(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline int ParseLabel(std::string_view token, std::size_t line) {
  const auto value = ParseDouble(token);
  if (!value) {
    throw ParseError("malformed label '" + std::string(Trim(token)) + "'",
                     line);
  }
  if (*value == 1.0) return 1;
  if (*value == -1.0 || *value == 0.0) return -1;
  throw LabelError("label '" + std::string(Trim(token)) +
                       "' is not one of -1, 0, +1",
                   line);
}

inline Dataset FinishLoad(std::vector<std::vector<double>>& rows,
                          std::vector<int>& labels, Eigen::Index dim) {
  if (rows.size() < 2) {
    throw DomainError("a dataset needs at least 2 points, file has " +
                      std::to_string(rows.size()));
  }
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(rows.size()), dim);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
    max_norm = std::max(max_norm, x.row(static_cast<Eigen::Index>(i)).norm());
  }
  if (!(max_norm > 0.0)) {
    throw DomainError("every feature vector is zero; no norm bound exists");
  }
  return Dataset(std::move(x), std::move(labels), max_norm);
}

}  // namespace detail

// CSV: comma separated values, label in the last column.
// LIBSVM: "<label> idx:val ...", 1-based indices, densified.
// Labels may be -1/+1 or 0/1 (0 maps to -1). The norm bound is the largest
// observed feature norm.
inline Dataset ParseDataset(std::istream& in, FileFormat format) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Eigen::Index dim = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> values;
    if (format == FileFormat::kCsv) {
      std::vector<std::string_view> cells;
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (cells.size() < 2) {
        throw ParseError("expected at least one feature and a label", line_no);
      }
      for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
        const auto v = detail::ParseDouble(cells[c]);
        if (!v) {
          throw ParseError("malformed value '" +
                               std::string(detail::Trim(cells[c])) + "'",
                           line_no);
        }
        values.push_back(*v);
      }
      const auto width = static_cast<Eigen::Index>(values.size());
      if (!rows.empty() && width != dim) {
        throw DimensionError("line " + std::to_string(line_no) + " has " +
                             std::to_string(width) + " features, expected " +
                             std::to_string(dim));
      }
      dim = width;
      labels.push_back(detail::ParseLabel(cells.back(), line_no));
    } else {
      std::istringstream tokens{std::string(line)};
      std::string token;
      tokens >> token;
      labels.push_back(detail::ParseLabel(token, line_no));
      while (tokens >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos) {
          throw ParseError("expected idx:val, got '" + token + "'", line_no);
        }
        long index = 0;
        const auto [ptr, ec] =
            std::from_chars(token.data(), token.data() + colon, index);
        if (ec != std::errc() || ptr != token.data() + colon || index < 1) {
          throw ParseError("bad feature index in '" + token + "'", line_no);
        }
        const auto v = detail::ParseDouble(std::string_view(token).substr(colon + 1));
        if (!v) throw ParseError("bad feature value in '" + token + "'", line_no);
        if (static_cast<std::size_t>(index) > values.size()) {
          values.resize(static_cast<std::size_t>(index), 0.0);
        }
        values[static_cast<std::size_t>(index) - 1] = *v;
      }
      dim = std::max(dim, static_cast<Eigen::Index>(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw ParseError("non-finite feature", line_no);
    }
    rows.push_back(std::move(values));
  }
  if (dim == 0) throw DimensionError("no features found");
  return detail::FinishLoad(rows, labels, dim);
}

inline Dataset LoadDataset(const std::string& path, FileFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return ParseDataset(in, format);
}

inline std::optional<FileFormat> FormatFromName(std::string_view name) {
  if (name == "csv") return FileFormat::kCsv;
  if (name == "libsvm") return FileFormat::kLibsvm;
  return std::nullopt;
}

// Shortest round-trip decimal form; independent of the global locale.
inline std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void WriteCsv(const Dataset& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.features().row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      out << FormatDouble(row(j)) << ',';
    }
    out << (data.label(i) > 0 ? "1" : "-1") << '\n';
  }
}

// Radial projection of every point onto the ball of radius b.
inline Dataset ClipNorms(const Dataset& data, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw DomainError("clip radius must be positive");
  }
  RowMatrix x = data.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    // Points rounded onto the sphere by an earlier clip stay put.
    if (norm > b * (1.0 + kNormSlack)) x.row(i) *= b / norm;
  }
  return Dataset(std::move(x), data.labels(), b);
}

struct SyntheticData {
  Dataset data;
  Vector separator;                  // unit vector w*
  std::vector<std::size_t> outliers;  // indices of label-flipped points
};

inline constexpr std::uint64_t kSynthDrawCap = 1'000'000;

// Points uniform on the unit sphere conditioned on |<w*, x>| >= gamma, labelled
// by sign(<w*, x>); the last n_outliers draws have their labels flipped before
// the seeded shuffle.
inline SyntheticData SynthMarginDataset(std::size_t n, Eigen::Index d,
                                        double gamma, std::size_t n_outliers,
                                        std::uint64_t seed) {
  if (n < 2) throw DomainError("n must be at least 2");
  if (d < 2) throw DomainError("d must be at least 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("gamma must lie in (0, 1]");
  }
  if (2 * n_outliers >= n) throw DomainError("n_outliers must be below n/2");

  CounterStream sep_stream(DeriveSeed(seed, "synth/separator"));
  Vector w(d);
  do {
    for (Eigen::Index j = 0; j < d; ++j) w(j) = sep_stream.Gaussian();
  } while (w.norm() == 0.0);
  w.normalize();

  // <w*, x> for x uniform on the sphere is g1 / sqrt(g1^2 + chi2_{d-1}).
  const double half_dof = 0.5 * static_cast<double>(d - 1);
  RowMatrix x(static_cast<Eigen::Index>(n), d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream stream(DeriveSeed(seed, "synth/point", i));
    std::gamma_distribution<double> chi_half(half_dof, 2.0);
    double t = 0.0;
    std::uint64_t draws = 0;
    while (true) {
      if (++draws > kSynthDrawCap) {
        throw GenerationError(
            "rejection sampling exceeded " + std::to_string(kSynthDrawCap) +
            " draws for one point; gamma=" + FormatDouble(gamma) +
            " is too close to 1 for d=" + std::to_string(d));
      }
      const double g1 = stream.Gaussian();
      const double chi2 = chi_half(stream);
      const double norm = std::sqrt(g1 * g1 + chi2);
      if (norm == 0.0) continue;
      t = g1 / norm;
      if (std::abs(t) >= gamma) break;
    }
    Vector u(d);
    double u_norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < d; ++j) u(j) = stream.Gaussian();
      u -= u.dot(w) * w;
      u_norm = u.norm();
    } while (u_norm < 1e-12);
    u /= u_norm;
    const Vector p = t * w + std::sqrt(std::max(0.0, 1.0 - t * t)) * u;
    x.row(static_cast<Eigen::Index>(i)) = p.transpose() / std::max(1.0, p.norm());
    y[i] = t > 0.0 ? 1 : -1;
    if (i >= n - n_outliers) y[i] = -y[i];
  }

  // Fisher-Yates with the seeded stream.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  CounterStream shuffle(DeriveSeed(seed, "synth/shuffle"));
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(shuffle()) * (i + 1)) >> 64);
    std::swap(order[i], order[j]);
  }
  RowMatrix xs(static_cast<Eigen::Index>(n), d);
  std::vector<int> ys(n);
  std::vector<std::size_t> outliers;
  for (std::size_t r = 0; r < n; ++r) {
    xs.row(static_cast<Eigen::Index>(r)) =
        x.row(static_cast<Eigen::Index>(order[r]));
    ys[r] = y[order[r]];
    if (order[r] >= n - n_outliers) outliers.push_back(r);
  }
  return {Dataset(std::move(xs), std::move(ys), 1.0), std::move(w),
          std::move(outliers)};
}

// Indices not listed in `removed`, ascending.
inline std::vector<std::size_t> Complement(std::size_t n,
                                           std::span<const std::size_t> removed) {
  std::vector<bool> drop(n, false);
  for (auto i : removed) drop.at(i) = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  return keep;
}

}  // namespace dpmargin

#endif  // DPMARGIN_DATA_HPP_
