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
 * One-dimensional base divergences between uniform empirical measures.
 *
 * - wasserstein_pp: W_p^p through the quantile coupling.
 * - mmd_sq: biased (V-statistic) squared MMD with a Gaussian kernel.
 * - sinkhorn_div: debiased entropic OT, log-domain Sinkhorn iterations.
 * - smoothed_wasserstein_oracle: W_p^p between two Gaussian mixtures by
 *   numerical inversion of the mixture CDFs.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gssd {

enum class DivergenceKind { Wasserstein, MmdSquared, Sinkhorn };

enum class BandwidthPolicy { MeanPairwise, Fixed };

struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::Wasserstein;
  double p = 2.0;
  double epsilon = 0.1;
  BandwidthPolicy bandwidth_policy = BandwidthPolicy::MeanPairwise;
  double bandwidth = 1.0;  // used when bandwidth_policy == Fixed
  double sinkhorn_tol = 1e-9;
  int sinkhorn_max_iter = 1000;

  void validate() const {
    if (!(p >= 1.0) || !std::isfinite(p)) {
      throw std::invalid_argument("DivergenceSpec: order p must be >= 1");
    }
    if (kind == DivergenceKind::Sinkhorn) {
      if (!(epsilon > 0.0)) {
        throw std::invalid_argument("DivergenceSpec: epsilon must be > 0");
      }
      if (!(sinkhorn_tol > 0.0) || sinkhorn_max_iter < 1) {
        throw std::invalid_argument(
            "DivergenceSpec: sinkhorn_tol must be > 0 and max_iter >= 1");
      }
    }
    if (kind == DivergenceKind::MmdSquared &&
        bandwidth_policy == BandwidthPolicy::Fixed && !(bandwidth > 0.0)) {
      throw std::invalid_argument("DivergenceSpec: bandwidth must be > 0");
    }
  }
};

/// Short CLI/CSV token: swd, mmd, skd.
inline std::string_view divergence_name(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::Wasserstein: return "swd";
    case DivergenceKind::MmdSquared: return "mmd";
    case DivergenceKind::Sinkhorn: return "skd";
  }
  return "?";
}

inline DivergenceKind parse_divergence(std::string_view name) {
  if (name == "swd" || name == "wasserstein") return DivergenceKind::Wasserstein;
  if (name == "mmd") return DivergenceKind::MmdSquared;
  if (name == "skd" || name == "sinkhorn") return DivergenceKind::Sinkhorn;
  throw std::invalid_argument("unknown divergence '" + std::string(name) +
                              "' (expected swd, mmd or skd)");
}

namespace detail {

inline double abs_pow(double diff, double p) {
  const double a = std::abs(diff);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

inline void require_nonempty(std::span<const double> x,
                             std::span<const double> y, const char* who) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty input");
  }
}

}  // namespace detail

/**
 * W_p^p between the uniform empirical measures on x and y.
 *
 * Equal sizes pair the order statistics. Unequal sizes integrate
 * |F_x^{-1}(t) - F_y^{-1}(t)|^p exactly over the merged breakpoints
 * {i/n} U {j/m}, where both quantile functions are constant.
 */
inline double wasserstein_pp(std::span<const double> x,
                             std::span<const double> y, double p) {
  detail::require_nonempty(x, y, "wasserstein_pp");
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_pp: p < 1");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::size_t n = xs.size();
  const std::size_t m = ys.size();
  if (n == m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += detail::abs_pow(xs[i] - ys[i], p);
    return acc / static_cast<double>(n);
  }
  // Breakpoints in units of 1/(n*m): x changes at multiples of m, y at n.
  double acc = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t pos = 0;
  while (i < n && j < m) {
    const std::uint64_t next_x = (i + 1) * std::uint64_t{m};
    const std::uint64_t next_y = (j + 1) * std::uint64_t{n};
    const std::uint64_t next = std::min(next_x, next_y);
    acc += static_cast<double>(next - pos) * detail::abs_pow(xs[i] - ys[j], p);
    pos = next;
    if (next_x == next) ++i;
    if (next_y == next) ++j;
  }
  return acc / (static_cast<double>(n) * static_cast<double>(m));
}

/// Biased V-statistic MMD^2 with k(s, t) = exp(-(s - t)^2 / (2 h^2)).
inline double mmd_sq(std::span<const double> x, std::span<const double> y,
                     double bandwidth) {
  detail::require_nonempty(x, y, "mmd_sq");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_sq: bandwidth <= 0");
  const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
  auto self_sum = [gamma](std::span<const double> v) {
    double off = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        const double d = v[i] - v[j];
        off += std::exp(-gamma * d * d);
      }
    }
    return static_cast<double>(v.size()) + 2.0 * off;
  };
  double cross = 0.0;
  for (double a : x) {
    for (double b : y) {
      const double d = a - b;
      cross += std::exp(-gamma * d * d);
    }
  }
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  return self_sum(x) / (n * n) - 2.0 * cross / (n * m) + self_sum(y) / (m * m);
}

/// Mean |s_i - s_j| over unordered pairs of the pooled sample; 1.0 when
/// every pooled point coincides.
inline double bandwidth_mean_pairwise(std::span<const double> x,
                                      std::span<const double> y) {
  std::vector<double> pooled;
  pooled.reserve(x.size() + y.size());
  pooled.insert(pooled.end(), x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  if (pooled.size() < 2) {
    throw std::invalid_argument("bandwidth_mean_pairwise: need >= 2 points");
  }
  std::sort(pooled.begin(), pooled.end());
  if (pooled.front() == pooled.back()) return 1.0;
  const auto big_n = static_cast<double>(pooled.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    acc += pooled[k] * (2.0 * static_cast<double>(k) - big_n + 1.0);
  }
  return acc / (0.5 * big_n * (big_n - 1.0));
}

struct SinkhornResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;  // largest count among the three OT problems
};

namespace detail {

struct EntropicOt {
  double value;
  bool converged;
  int iterations;
};

// -eps * log sum_j w * exp((pot_j - C(s, t_j)) / eps), with uniform w = 1/size.
inline double soft_min(double s, std::span<const double> t,
                       std::span<const double> pot, double p, double eps,
                       std::vector<double>& scratch) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t.size(); ++j) {
    scratch[j] = (pot[j] - abs_pow(s - t[j], p)) / eps;
    mx = std::max(mx, scratch[j]);
  }
  // Terms below exp(-40) relative to the largest add under 1e-13 in total
  // for any size this library handles; skipping their exp is the hot path.
  const double cut = mx - 40.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (scratch[j] > cut) acc += std::exp(scratch[j] - mx);
  }
  return -eps * (mx + std::log(acc / static_cast<double>(t.size())));
}

// Largest |row marginal - a_i| for the plan built from (f, g) where f_new is
// the c-transform of g: row_i = a_i * exp((f_i - f_new_i) / eps).
inline double marginal_violation(std::span<const double> f,
                                 std::span<const double> f_new, double eps) {
  const double a = 1.0 / static_cast<double>(f.size());
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    err = std::max(err, a * std::abs(std::expm1((f[i] - f_new[i]) / eps)));
  }
  return err;
}

// Geometric epsilon-scaling schedule ending at eps: each stage warm-starts
// the potentials of the previous one.
inline std::vector<double> eps_schedule(std::span<const double> x,
                                        std::span<const double> y, double p,
                                        double eps) {
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const double span = std::max(*xhi, *yhi) - std::min(*xlo, *ylo);
  std::vector<double> out;
  for (double e = abs_pow(span, p); e > eps; e *= 0.5) out.push_back(e);
  out.push_back(eps);
  return out;
}

/// OT_eps(x, y) = <P, C> + eps KL(P | a x b) at the dual optimum.
inline EntropicOt entropic_ot(std::span<const double> x,
                              std::span<const double> y, double p, double eps,
                              double tol, int max_iter) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  std::vector<double> f(n, 0.0), g(m, 0.0), f_new(n);
  std::vector<double> scratch(std::max(n, m));
  const auto schedule = eps_schedule(x, y, p, eps);
  bool converged = false;
  int it = 0;
  for (std::size_t stage = 0; stage < schedule.size() && it < max_iter; ++stage) {
    const double e = schedule[stage];
    const bool last = stage + 1 == schedule.size();
    // Intermediate stages only need a rough warm start.
    const double stage_tol = last ? tol : 1e-2 / static_cast<double>(n);
    bool first = true;
    while (it < max_iter) {
      ++it;
      for (std::size_t i = 0; i < n; ++i) f_new[i] = soft_min(x[i], y, g, p, e, scratch);
      const double err = first ? std::numeric_limits<double>::infinity()
                               : marginal_violation(f, f_new, e);
      first = false;
      f.swap(f_new);
      for (std::size_t j = 0; j < m; ++j) g[j] = soft_min(y[j], x, f, p, e, scratch);
      if (err < stage_tol) {
        converged = last;
        break;
      }
    }
  }
  double value = 0.0;
  for (double v : f) value += v / static_cast<double>(n);
  for (double v : g) value += v / static_cast<double>(m);
  return {value, converged, it};
}

/// OT_eps(x, x) with the averaged symmetric update f <- (f + T(f)) / 2.
inline EntropicOt entropic_ot_self(std::span<const double> x, double p,
                                   double eps, double tol, int max_iter) {
  const std::size_t n = x.size();
  std::vector<double> f(n, 0.0), tf(n);
  std::vector<double> scratch(n);
  bool converged = false;
  int it = 0;
  while (it < max_iter) {
    ++it;
    for (std::size_t i = 0; i < n; ++i) tf[i] = soft_min(x[i], x, f, p, eps, scratch);
    if (marginal_violation(f, tf, eps) < tol) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) f[i] = 0.5 * (f[i] + tf[i]);
  }
  // (f, T(f)) has exact column marginals, so the dual equals the primal.
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) value += (f[i] + tf[i]) / static_cast<double>(n);
  return {value, converged, it};
}

}  // namespace detail

/// S_eps = OT_eps(x, y) - OT_eps(x, x) / 2 - OT_eps(y, y) / 2 with cost
/// |s - t|^p. Non-convergence is reported, not thrown.
inline SinkhornResult sinkhorn_div(std::span<const double> x,
                                   std::span<const double> y,
                                   const DivergenceSpec& spec) {
  detail::require_nonempty(x, y, "sinkhorn_div");
  if (!(spec.epsilon > 0.0)) {
    throw std::invalid_argument("sinkhorn_div: epsilon must be > 0");
  }
  const auto xy = detail::entropic_ot(x, y, spec.p, spec.epsilon,
                                      spec.sinkhorn_tol, spec.sinkhorn_max_iter);
  const auto xx = detail::entropic_ot_self(x, spec.p, spec.epsilon,
                                           spec.sinkhorn_tol, spec.sinkhorn_max_iter);
  const auto yy = detail::entropic_ot_self(y, spec.p, spec.epsilon,
                                           spec.sinkhorn_tol, spec.sinkhorn_max_iter);
  SinkhornResult r;
  r.value = xy.value - 0.5 * xx.value - 0.5 * yy.value;
  r.converged = xy.converged && xx.converged && yy.converged;
  r.iterations = std::max({xy.iterations, xx.iterations, yy.iterations});
  return r;
}

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Quantile function of (1/n) sum_i N(locs_i, sigma^2); locs sorted.
class MixtureQuantile {
 public:
  MixtureQuantile(std::span<const double> locs, double sigma)
      : locs_(locs.begin(), locs.end()), sigma_(sigma) {
    std::sort(locs_.begin(), locs_.end());
  }

  double cdf(double t) const {
    double acc = 0.0;
    for (double v : locs_) acc += normal_cdf((t - v) / sigma_);
    return acc / static_cast<double>(locs_.size());
  }

  /// Safeguarded Newton inside a bisection bracket.
  double operator()(double q, double guess) const {
    double lo = locs_.front() - 40.0 * sigma_;
    double hi = locs_.back() + 40.0 * sigma_;
    const double scale = hi - lo;
    double t = std::clamp(guess, lo, hi);
    const double inv = 1.0 / (sigma_ * std::sqrt(2.0 * std::numbers::pi) *
                              static_cast<double>(locs_.size()));
    for (int it = 0; it < 200; ++it) {
      double c = 0.0;
      double dens = 0.0;
      for (double v : locs_) {
        const double z = (t - v) / sigma_;
        c += normal_cdf(z);
        dens += std::exp(-0.5 * z * z);
      }
      c /= static_cast<double>(locs_.size());
      dens *= inv;
      const double resid = c - q;
      if (resid > 0.0) hi = t; else lo = t;
      double next = dens > 0.0 ? t - resid / dens : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-14 * scale || hi - lo <= 1e-14 * scale) {
        return next;
      }
      t = next;
    }
    return t;
  }

 private:
  std::vector<double> locs_;
  double sigma_;
};

}  // namespace detail

/**
 * W_p^p between (1/n) sum N(vx_i, sigma^2) and (1/m) sum N(vy_j, sigma^2),
 * integrating |Qx(t) - Qy(t)|^p by the midpoint rule on `grid` levels
 * t_k = (k + 1/2) / grid.
 */
inline double smoothed_wasserstein_oracle(std::span<const double> vx,
                                          std::span<const double> vy,
                                          double sigma, double p,
                                          int grid = 2000) {
  detail::require_nonempty(vx, vy, "smoothed_wasserstein_oracle");
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("smoothed_wasserstein_oracle: sigma must be > 0");
  }
  if (grid < 1000) {
    throw std::invalid_argument("smoothed_wasserstein_oracle: grid must be >= 1000");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("smoothed_wasserstein_oracle: p < 1");
  const detail::MixtureQuantile qx(vx, sigma);
  const detail::MixtureQuantile qy(vy, sigma);
  double tx = 0.0;
  double ty = 0.0;
  double acc = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double level = (k + 0.5) / grid;
    tx = qx(level, k == 0 ? -std::numeric_limits<double>::infinity() : tx);
    ty = qy(level, k == 0 ? -std::numeric_limits<double>::infinity() : ty);
    acc += detail::abs_pow(tx - ty, p);
  }
  return acc / grid;
}

struct DivergenceValue {
  double value = 0.0;
  bool converged = true;
};

/// D^p between two 1D samples under `spec`: W_p^p, MMD^2 or S_eps.
inline DivergenceValue evaluate_divergence(std::span<const double> x,
                                           std::span<const double> y,
                                           const DivergenceSpec& spec) {
  switch (spec.kind) {
    case DivergenceKind::Wasserstein:
      return {wasserstein_pp(x, y, spec.p), true};
    case DivergenceKind::MmdSquared: {
      const double h = spec.bandwidth_policy == BandwidthPolicy::Fixed
                           ? spec.bandwidth
                           : bandwidth_mean_pairwise(x, y);
      return {mmd_sq(x, y, h), true};
    }
    case DivergenceKind::Sinkhorn: {
      const auto r = sinkhorn_div(x, y, spec);
      return {r.value, r.converged};
    }
  }
  throw std::logic_error("evaluate_divergence: unknown kind");
}

}  // namespace gssd
