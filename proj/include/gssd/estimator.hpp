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

/**
 * Monte Carlo estimator of the Gaussian-smoothed sliced divergence.
 *
 * For projection l = 1..L the estimator draws u_l from stream ("proj", l),
 * projects both sample sets, adds one N(0, sigma^2) draw per sample from
 * streams ("noisex", l) and ("noisey", l), and evaluates D^p on the two
 * smoothed slices. The estimate is the mean over l.
 *
 * Streams depend only on the projection index, so:
 *  - results are bit-identical for any number of workers;
 *  - estimates at different sigma share directions and standardised noise
 *    (common random numbers), which is what sweep_sigma relies on.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gssd/divergences.hpp"
#include "gssd/rng.hpp"
#include "gssd/slicing.hpp"

namespace gssd {

enum class EstimatorMode {
  DoubleEmpirical,  // smooth by sampling, then compare empirical slices
  MixtureOracle,    // compare the exact Gaussian-mixture slices (W_p only)
};

struct GssdConfig {
  double sigma = 0.0;
  int num_projections = 50;
  double order = 2.0;
  DivergenceSpec divergence{};
  RngRoot seed{42};
  EstimatorMode mode = EstimatorMode::DoubleEmpirical;
  int oracle_grid = 2000;
  // Execution only; never changes the result.
  int workers = 1;

  /// The base divergence with its order set to `order`.
  DivergenceSpec base() const {
    DivergenceSpec spec = divergence;
    spec.p = order;
    return spec;
  }

  void validate() const {
    if (num_projections < 1) {
      throw std::invalid_argument("GssdConfig: num_projections must be >= 1");
    }
    if (!(sigma >= 0.0)) throw std::invalid_argument("GssdConfig: sigma < 0");
    if (!(order >= 1.0)) throw std::invalid_argument("GssdConfig: order < 1");
    if (workers < 1) throw std::invalid_argument("GssdConfig: workers < 1");
    base().validate();
    if (mode == EstimatorMode::MixtureOracle) {
      if (divergence.kind != DivergenceKind::Wasserstein) {
        throw std::invalid_argument(
            "GssdConfig: mixture oracle mode requires the Wasserstein divergence");
      }
      if (!(sigma > 0.0)) {
        throw std::invalid_argument("GssdConfig: mixture oracle mode requires sigma > 0");
      }
    }
  }
};

struct GssdEstimate {
  double mean_pow = 0.0;  // estimate of GSSD^p
  double root = 0.0;      // mean_pow^(1/p)
  std::vector<double> per_projection;
  double sample_std = 0.0;
  double std_error = 0.0;
  int unconverged = 0;  // Sinkhorn projections that hit max_iter
  GssdConfig config;
};

/// Fixed-shape pairwise summation; the tree depends only on values.size().
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace detail {

// Runs body(l) for l in [0, count) on `workers` threads, interleaved.
template <typename Body>
void parallel_for(int count, int workers, Body&& body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int l = 0; l < count; ++l) body(l);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int l = w; l < count; l += workers) body(l);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

inline GssdEstimate summarize(std::vector<double> values, int unconverged,
                              const GssdConfig& cfg) {
  GssdEstimate est;
  const auto count = static_cast<double>(values.size());
  est.mean_pow = pairwise_sum(values) / count;
  est.root = std::pow(std::max(est.mean_pow, 0.0), 1.0 / cfg.order);
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t l = 0; l < values.size(); ++l) {
      const double dev = values[l] - est.mean_pow;
      sq[l] = dev * dev;
    }
    est.sample_std = std::sqrt(pairwise_sum(sq) / (count - 1.0));
    est.std_error = est.sample_std / std::sqrt(count);
  }
  est.per_projection = std::move(values);
  est.unconverged = unconverged;
  est.config = cfg;
  return est;
}

}  // namespace detail

/**
 * One estimate per entry of `sigmas`, all sharing the projections and the
 * standardised noise of every index l. Equivalent to calling estimate()
 * once per sigma, but projects each direction only once.
 */
inline std::vector<GssdEstimate> sweep_sigma(const SampleSet& x,
                                             const SampleSet& y,
                                             std::span<const double> sigmas,
                                             const GssdConfig& cfg) {
  if (x.d() != y.d()) {
    throw std::invalid_argument("gssd: sample sets have different dimensions");
  }
  if (sigmas.empty()) throw std::invalid_argument("sweep_sigma: no sigma values");
  for (double s : sigmas) {
    GssdConfig c = cfg;
    c.sigma = s;
    c.validate();
  }
  const int num_l = cfg.num_projections;
  const std::size_t num_s = sigmas.size();
  const DivergenceSpec spec = cfg.base();
  // values[s * L + l]
  std::vector<double> values(num_s * static_cast<std::size_t>(num_l));
  std::vector<char> converged(values.size(), 1);

  detail::parallel_for(num_l, cfg.workers, [&](int l) {
    const auto index = static_cast<std::uint64_t>(l) + 1;
    RngStream dir_stream = derive_stream(cfg.seed, "proj", index);
    const Direction u = sample_direction(x.d(), dir_stream);
    const std::vector<double> px = project(x, u);
    const std::vector<double> py = project(y, u);
    for (std::size_t s = 0; s < num_s; ++s) {
      const std::size_t slot = s * static_cast<std::size_t>(num_l) +
                               static_cast<std::size_t>(l);
      if (cfg.mode == EstimatorMode::MixtureOracle) {
        values[slot] = smoothed_wasserstein_oracle(px, py, sigmas[s], cfg.order,
                                                   cfg.oracle_grid);
        continue;
      }
      RngStream noise_x = derive_stream(cfg.seed, "noisex", index);
      RngStream noise_y = derive_stream(cfg.seed, "noisey", index);
      const SmoothedSlice tx = smooth_double(px, sigmas[s], noise_x);
      const SmoothedSlice ty = smooth_double(py, sigmas[s], noise_y);
      const DivergenceValue dv = evaluate_divergence(tx.values, ty.values, spec);
      values[slot] = dv.value;
      converged[slot] = dv.converged ? 1 : 0;
    }
  });

  std::vector<GssdEstimate> out;
  out.reserve(num_s);
  for (std::size_t s = 0; s < num_s; ++s) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(s * num_l);
    std::vector<double> row(first, first + num_l);
    const auto cfirst = converged.begin() + static_cast<std::ptrdiff_t>(s * num_l);
    const int bad = static_cast<int>(std::count(cfirst, cfirst + num_l, 0));
    GssdConfig c = cfg;
    c.sigma = sigmas[s];
    out.push_back(detail::summarize(std::move(row), bad, c));
  }
  return out;
}

inline GssdEstimate estimate(const SampleSet& x, const SampleSet& y,
                             const GssdConfig& cfg) {
  const double sigma[] = {cfg.sigma};
  return std::move(sweep_sigma(x, y, sigma, cfg).front());
}

struct TwoSigmaReport {
  double lhs = 0.0;  // GSSW^p at sigma1
  double rhs = 0.0;  // 2^(p-1) GSSW^p at sigma2 + 2^(5p/2) (sigma2^2 - sigma1^2)^p
  double gap = 0.0;  // rhs - lhs
  double combined_std_error = 0.0;
  bool holds = false;
};

/// Additive term of the two-noise-level inequality.
inline double two_sigma_gap_term(double p, double sigma1, double sigma2) {
  return std::pow(2.0, 2.5 * p) * std::pow(sigma2 * sigma2 - sigma1 * sigma1, p);
}

/// Checks GSSW^p_{s1} <= 2^(p-1) GSSW^p_{s2} + 2^(5p/2) (s2^2 - s1^2)^p with
/// common directions; holds allows 3 combined standard errors of slack.
inline TwoSigmaReport two_sigma_check(const SampleSet& x, const SampleSet& y,
                                      double sigma1, double sigma2,
                                      const GssdConfig& cfg) {
  if (!(sigma1 >= 0.0) || !(sigma1 <= sigma2)) {
    throw std::invalid_argument("two_sigma_check: need 0 <= sigma1 <= sigma2");
  }
  if (cfg.divergence.kind != DivergenceKind::Wasserstein) {
    throw std::invalid_argument("two_sigma_check: Wasserstein divergence only");
  }
  const double sigmas[] = {sigma1, sigma2};
  const auto est = sweep_sigma(x, y, sigmas, cfg);
  const double p = cfg.order;
  const double factor = std::pow(2.0, p - 1.0);
  TwoSigmaReport r;
  r.lhs = est[0].mean_pow;
  r.rhs = factor * est[1].mean_pow + two_sigma_gap_term(p, sigma1, sigma2);
  r.gap = r.rhs - r.lhs;
  // CRN makes the two estimates correlated; adding the errors is the safe side.
  r.combined_std_error = est[0].std_error + factor * est[1].std_error;
  r.holds = r.lhs <= r.rhs + 3.0 * r.combined_std_error;
  return r;
}

}  // namespace gssd
