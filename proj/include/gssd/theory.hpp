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
 * Analytic constants for the sample- and projection-complexity bounds.
 *
 * The sample-complexity bound of the double-empirical estimator reads
 *
 *   E[GSSW^p] <= Xi / sqrt(n) + Upsilon * log(n) / n
 *
 * with
 *
 *   Xi = 2^(5p/2 - 5/4) / sqrt(pi) * sigma^(p - 1/4) * vartheta^(p + 1)
 *        * sqrt(Gamma(p + 1/2))
 *        * ( sqrt(4 pi sigma^2 vartheta^2 / (vartheta^2 - 2)) + 4 I )^(1/2),
 *   I  = int_0^inf exp(2 xi^2 / (sigma^2 vartheta^2)) P[|X| > xi] dxi,
 *
 *   Upsilon = 2^(2p - 1) C_p / sqrt(pi) * sigma^(2p) * Gamma(p + 1/2)
 *             * sum_{k=0}^{p} (-p)_k / (1/2)_k * (-1)^k / ((2 sigma^2)^k k!)
 *               * M_2k(mu),
 *
 * where M_2k(mu) = E|X|^(2k) and C_p is an unspecified positive constant.
 */

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace gssd {

/// E|N(0, s^2)|^q = s^q 2^(q/2) Gamma((q + 1) / 2) / sqrt(pi).
inline double gaussian_abs_moment(double q, double s) {
  if (!(q >= 0.0) || !(s > 0.0)) {
    throw std::invalid_argument("gaussian_abs_moment: need q >= 0 and s > 0");
  }
  return std::pow(s, q) * std::pow(2.0, 0.5 * q) *
         std::tgamma(0.5 * (q + 1.0)) / std::sqrt(std::numbers::pi);
}

/// Rising factorial (alpha)_k = alpha (alpha + 1) ... (alpha + k - 1).
inline double pochhammer(double alpha, int k) {
  if (k < 0) throw std::invalid_argument("pochhammer: k must be >= 0");
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc *= alpha + i;
  return acc;
}

class SeriesNotConverged : public std::runtime_error {
 public:
  SeriesNotConverged(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial() const noexcept { return partial_; }

 private:
  double partial_;
};

namespace detail {

inline bool is_nonpositive_integer(double v) {
  return v <= 0.0 && v == std::floor(v);
}

}  // namespace detail

/**
 * Kummer's confluent hypergeometric function 1F1(a; gamma; z) by its power
 * series. Terminates exactly when a is a non-positive integer; otherwise
 * stops once a term falls below 1e-12 of the partial sum and the term ratio
 * has dropped under 1/2.
 */
inline double kummer_1f1(double a, double gamma, double z) {
  if (detail::is_nonpositive_integer(gamma)) {
    throw std::invalid_argument("kummer_1f1: gamma is a non-positive integer");
  }
  constexpr int kMaxTerms = 10000;
  const bool terminating = detail::is_nonpositive_integer(a);
  const int last = terminating ? static_cast<int>(-a) : kMaxTerms;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < last; ++k) {
    const double ratio = (a + k) / (gamma + k) * z / (k + 1.0);
    term *= ratio;
    sum += term;
    if (!terminating && std::abs(term) < 1e-12 * std::abs(sum) &&
        std::abs((a + k + 1) / (gamma + k + 1) * z / (k + 2.0)) < 0.5) {
      return sum;
    }
  }
  if (!terminating) {
    throw SeriesNotConverged("kummer_1f1: series did not converge", sum);
  }
  return sum;
}

/**
 * Tail model xi -> P[|X| > xi] for the integrability condition.
 *
 * Stored in log form so that the growing factor exp(2 xi^2 / (sigma vartheta)^2)
 * can be combined without overflow; `breakpoints` lists discontinuities
 * handed to the quadrature.
 */
struct TailModel {
  std::function<double(double)> log_survival;
  std::vector<double> breakpoints;

  double survival(double xi) const { return std::exp(log_survival(xi)); }

  /// X = 0 almost surely.
  static TailModel point_mass() {
    return {[](double) { return -std::numeric_limits<double>::infinity(); }, {}};
  }

  /// Worst case for |X| <= radius: P[|X| > xi] = 1 below the radius.
  static TailModel bounded_support(double radius) {
    if (!(radius > 0.0)) {
      throw std::invalid_argument("TailModel: radius must be > 0");
    }
    return {[radius](double xi) {
              return xi < radius ? 0.0 : -std::numeric_limits<double>::infinity();
            },
            {radius}};
  }

  /// X ~ N(0, scale^2 I_d): P[|X| > xi] = Q(d/2, xi^2 / (2 scale^2)).
  static TailModel spherical_gaussian(int d, double scale) {
    if (d < 1 || !(scale > 0.0)) {
      throw std::invalid_argument("TailModel: need d >= 1 and scale > 0");
    }
    return {[d, scale](double xi) {
              const double a = 0.5 * d;
              const double x = xi * xi / (2.0 * scale * scale);
              const double q = boost::math::gamma_q(a, x);
              if (q > 1e-300) return std::log(q);
              // Leading asymptotic term once Q underflows.
              return (a - 1.0) * std::log(x) - x - std::lgamma(a) +
                     std::log1p((a - 1.0) / x);
            },
            {}};
  }

  /// Any user-supplied survival function.
  static TailModel from_survival(std::function<double(double)> survival) {
    return {[fn = std::move(survival)](double xi) { return std::log(fn(xi)); }, {}};
  }
};

/**
 * int_0^inf exp(2 xi^2 / (sigma^2 vartheta^2)) P[|X| > xi] dxi.
 *
 * The upper limit is the first point of a doubling scan where the integrand
 * and its successor are both below 1e-14; an integrand that overflows or has
 * not decayed by 1e6 is reported as divergent.
 */
inline double tail_integral(double sigma, double vartheta, const TailModel& tail) {
  const double width = sigma * vartheta;
  auto log_integrand = [&](double xi) {
    return 2.0 * xi * xi / (width * width) + tail.log_survival(xi);
  };
  auto integrand = [&](double xi) {
    const double l = log_integrand(xi);
    return l == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(l);
  };
  const double log_small = std::log(1e-14);
  double cutoff = 0.0;
  for (double xi = 0.125; ; xi *= 2.0) {
    if (xi > 1e6 || log_integrand(xi) > 700.0) {
      throw std::domain_error("tail_integral: integrand does not decay (divergent)");
    }
    if (log_integrand(xi) < log_small && log_integrand(2.0 * xi) < log_small) {
      cutoff = xi;
      break;
    }
  }
  std::vector<double> knots = {0.0};
  for (double b : tail.breakpoints) {
    if (b > 0.0 && b < cutoff) knots.push_back(b);
  }
  knots.push_back(cutoff);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, knots[k], knots[k + 1], 15, 1e-12);
  }
  return total;
}

inline void require_vartheta(double vartheta) {
  if (!(vartheta > std::numbers::sqrt2)) {
    throw std::invalid_argument("vartheta must be > sqrt(2)");
  }
}

/// Xi_{p, sigma, vartheta} given the tail integral I.
inline double xi_from_tail_integral(double p, double sigma, double vartheta,
                                    double tail) {
  require_vartheta(vartheta);
  if (!(sigma > 0.0) || !(p >= 1.0)) {
    throw std::invalid_argument("xi_constant: need sigma > 0 and p >= 1");
  }
  const double v2 = vartheta * vartheta;
  const double inner =
      std::sqrt(4.0 * std::numbers::pi * sigma * sigma * v2 / (v2 - 2.0)) +
      4.0 * tail;
  return std::pow(2.0, 2.5 * p - 1.25) / std::sqrt(std::numbers::pi) *
         std::pow(sigma, p - 0.25) * std::pow(vartheta, p + 1.0) *
         std::sqrt(std::tgamma(p + 0.5)) * std::sqrt(inner);
}

inline double xi_constant(double p, double sigma, double vartheta,
                          const TailModel& tail) {
  require_vartheta(vartheta);
  if (!(sigma > 0.0)) throw std::invalid_argument("xi_constant: sigma must be > 0");
  return xi_from_tail_integral(p, sigma, vartheta, tail_integral(sigma, vartheta, tail));
}

/// M_2k = E|X|^(2k) for X ~ N(0, scale^2 I_d).
inline double gaussian_norm_moment(int d, double scale, int k) {
  return std::pow(2.0 * scale * scale, k) *
         std::exp(std::lgamma(0.5 * d + k) - std::lgamma(0.5 * d));
}

/// Upsilon for integer p; `moments(k)` returns M_2k(mu) for 0 <= k <= p.
inline double upsilon_constant(double p, double sigma,
                               const std::function<double(int)>& moments,
                               double c_p = 1.0) {
  if (!(p >= 1.0) || p != std::floor(p)) {
    throw std::invalid_argument("upsilon_constant: p must be a positive integer");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("upsilon_constant: sigma must be > 0");
  const int order = static_cast<int>(p);
  double series = 0.0;
  for (int k = 0; k <= order; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    series += pochhammer(-p, k) / pochhammer(0.5, k) * sign /
              (std::pow(2.0 * sigma * sigma, k) * std::tgamma(k + 1.0)) *
              moments(k);
  }
  return std::pow(2.0, 2.0 * p - 1.0) * c_p / std::sqrt(std::numbers::pi) *
         std::pow(sigma, 2.0 * p) * std::tgamma(p + 0.5) * series;
}

/// Xi / sqrt(n) + Upsilon log(n) / n.
inline double sample_bound(long long n, double xi, double upsilon) {
  if (n < 1) throw std::invalid_argument("sample_bound: n must be >= 1");
  const auto dn = static_cast<double>(n);
  return xi / std::sqrt(dn) + upsilon * std::log(dn) / dn;
}

/// Plug-in A(p, sigma) / sqrt(L): sample std of per-projection values / sqrt(L).
inline double mc_error_bound(std::span<const double> per_projection) {
  if (per_projection.size() < 2) {
    throw std::invalid_argument("mc_error_bound: need at least 2 projections");
  }
  const auto count = static_cast<double>(per_projection.size());
  double mean = 0.0;
  for (double v : per_projection) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : per_projection) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
}

struct TheoryBound {
  double p = 2.0;
  double sigma = 1.0;
  double vartheta = 2.0;
  double xi = 0.0;
  double upsilon = 0.0;
  double c_p = 1.0;
  double tail_integral = 0.0;

  double at(long long n) const { return sample_bound(n, xi, upsilon); }
};

inline TheoryBound make_theory_bound(double p, double sigma, double vartheta,
                                     const TailModel& tail,
                                     const std::function<double(int)>& moments,
                                     double c_p = 1.0) {
  require_vartheta(vartheta);
  TheoryBound b;
  b.p = p;
  b.sigma = sigma;
  b.vartheta = vartheta;
  b.c_p = c_p;
  b.tail_integral = tail_integral(sigma, vartheta, tail);
  b.xi = xi_from_tail_integral(p, sigma, vartheta, b.tail_integral);
  b.upsilon = upsilon_constant(p, sigma, moments, c_p);
  return b;
}

}  // namespace gssd
