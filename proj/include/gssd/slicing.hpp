//
// Copyright 2026 The GSSD Authors
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

// Sample matrices, random directions on the sphere, Radon slices and the
// Gaussian double-sampling smoother.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gssd/rng.hpp"

namespace gssd {

/// An n x d matrix of observations stored row-major; one row per sample.
class SampleSet {
 public:
  SampleSet(std::size_t n, std::size_t d, std::vector<double> data)
      : n_(n), d_(d), data_(std::move(data)) {
    if (n_ < 1 || d_ < 1) {
      throw std::invalid_argument("SampleSet: need n >= 1 and d >= 1");
    }
    if (data_.size() != n_ * d_) {
      throw std::invalid_argument("SampleSet: data size is not n * d");
    }
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if (!std::isfinite(data_[k])) {
        throw std::invalid_argument("SampleSet: non-finite entry at row " +
                                    std::to_string(k / d_) + ", column " +
                                    std::to_string(k % d_));
      }
    }
  }

  /// n i.i.d. draws from N(mean, scale^2 I_d), consumed row by row.
  static SampleSet gaussian(std::size_t n, std::size_t d, RngStream& stream,
                            double mean = 0.0, double scale = 1.0) {
    std::vector<double> data(n * d);
    for (double& v : data) v = mean + scale * stream.standard_normal();
    return SampleSet(n, d, std::move(data));
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(data_).subspan(i * d_, d_);
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> data_;
};

/// A unit vector defining one Radon slice.
class Direction {
 public:
  explicit Direction(std::vector<double> coords) : coords_(std::move(coords)) {
    double sq = 0.0;
    for (double c : coords_) sq += c * c;
    if (coords_.empty() || std::abs(std::sqrt(sq) - 1.0) > 1e-12) {
      throw std::invalid_argument("Direction: coordinates are not unit-norm");
    }
  }

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }

 private:
  std::vector<double> coords_;
};

struct SmoothedSlice {
  std::vector<double> values;
  double sigma = 0.0;
};

/// Uniform direction on S^{d-1} by normalising a standard Gaussian vector.
inline Direction sample_direction(std::size_t d, RngStream& stream) {
  if (d < 1) throw std::invalid_argument("sample_direction: d must be >= 1");
  constexpr int kMaxRetries = 16;
  std::vector<double> g(d);
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    double sq = 0.0;
    for (double& v : g) {
      v = stream.standard_normal();
      sq += v * v;
    }
    if (sq > 0.0 && std::isfinite(sq)) {
      const double norm = std::sqrt(sq);
      for (double& v : g) v /= norm;
      // Rounding can leave the norm a few ulps away from 1; one more
      // normalisation pass brings it inside the Direction tolerance.
      double sq2 = 0.0;
      for (double v : g) sq2 += v * v;
      const double norm2 = std::sqrt(sq2);
      for (double& v : g) v /= norm2;
      return Direction(std::move(g));
    }
  }
  throw std::runtime_error("sample_direction: degenerate Gaussian draws");
}

/// Entry i is <u, X_i>.
inline std::vector<double> project(const SampleSet& samples,
                                   const Direction& u) {
  if (u.dim() != samples.d()) {
    throw std::invalid_argument("project: direction has dimension " +
                                std::to_string(u.dim()) + ", samples have " +
                                std::to_string(samples.d()));
  }
  const auto coords = u.coords();
  std::vector<double> out(samples.n());
  for (std::size_t i = 0; i < samples.n(); ++i) {
    const auto x = samples.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < coords.size(); ++k) acc += coords[k] * x[k];
    out[i] = acc;
  }
  return out;
}

/// t_i = v_i + sigma * z_i with one fresh standard normal per value.
/// sigma == 0 leaves the values untouched and consumes no draws.
inline SmoothedSlice smooth_double(std::vector<double> values, double sigma,
                                   RngStream& stream) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("smooth_double: sigma must be >= 0");
  }
  if (sigma > 0.0) {
    for (double& v : values) v += sigma * stream.standard_normal();
  }
  return SmoothedSlice{std::move(values), sigma};
}

/// Density of the mixture (1/n) sum_i N(values_i, sigma^2) at t.
inline double mixture_pdf(std::span<const double> values, double sigma,
                          double t) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("mixture_pdf: sigma must be > 0");
  }
  if (values.empty()) {
    throw std::invalid_argument("mixture_pdf: no mixture components");
  }
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (double v : values) {
    const double z = (t - v) / sigma;
    acc += std::exp(-0.5 * z * z);
  }
  return norm * acc / static_cast<double>(values.size());
}

}  // namespace gssd
