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
 * Desk-scale experiment drivers and their CSV / JSON output.
 *
 * Randomness is keyed by grid point, never by execution order:
 *  - the Gaussian pair of run r at (d, n) comes from
 *    RngRoot(seed).child("d", d).child("n", n).child("run", r), shared by
 *    sample-complexity, noise-sweep and projection-complexity, so a sigma = 0
 *    noise-sweep row equals the matching sample-complexity row;
 *  - sigma, L and the displacement shift are not part of the key, which
 *    gives common random numbers along those axes.
 */

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gssd/divergences.hpp"
#include "gssd/estimator.hpp"
#include "gssd/rng.hpp"
#include "gssd/slicing.hpp"
#include "gssd/theory.hpp"

namespace gssd {

inline constexpr std::string_view kVersion = "0.1.0";

struct ExperimentConfig {
  std::string command = "sample-complexity";
  std::vector<std::size_t> dims = {50};
  std::vector<std::size_t> sizes = {100, 400, 1600, 6400};
  std::vector<double> sigmas = {3.0};
  int runs = 20;
  std::vector<DivergenceSpec> divergences = {DivergenceSpec{}};
  std::vector<int> projections = {50};
  int reference_projections = 10000;
  double p = 2.0;
  std::uint64_t seed = 42;
  std::vector<double> shifts = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  double vartheta = 2.0;
  double c_p = 1.0;
  EstimatorMode mode = EstimatorMode::DoubleEmpirical;
  int oracle_grid = 2000;
  int workers = 1;  // not echoed: never affects values

  /// Per-command defaults for the grids.
  static ExperimentConfig defaults_for(std::string_view command) {
    ExperimentConfig cfg;
    cfg.command = std::string(command);
    if (command == "projection-complexity") {
      cfg.sizes = {500};
      cfg.projections = {10, 50, 100, 500, 1000};
    } else if (command == "noise-sweep") {
      cfg.sigmas = {0.0, 1.0, 3.0, 5.0, 15.0};
    } else if (command == "displacement") {
      cfg.sizes = {200};
    } else if (command != "sample-complexity" && command != "compare" &&
               command != "bounds") {
      throw std::invalid_argument("unknown command '" + std::string(command) + "'");
    }
    return cfg;
  }

  void validate() const {
    if (dims.empty() || sizes.empty() || sigmas.empty() || divergences.empty() ||
        projections.empty()) {
      throw std::invalid_argument("experiment grids must be nonempty");
    }
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    for (auto d : dims) if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    for (auto n : sizes) if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    for (double s : sigmas) if (!(s >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    for (int l : projections) if (l < 1) throw std::invalid_argument("projections must be >= 1");
    if (command == "projection-complexity") {
      for (int l : projections) {
        if (l > reference_projections) {
          throw std::invalid_argument("projections exceed the reference count");
        }
      }
    }
    if (command == "displacement" && shifts.empty()) {
      throw std::invalid_argument("displacement needs at least one shift");
    }
    if (command == "bounds") require_vartheta(vartheta);
    for (const auto& spec : divergences) {
      DivergenceSpec s = spec;
      s.p = p;
      s.validate();
    }
  }

  GssdConfig estimator_config(const DivergenceSpec& div, double sigma, int num_l,
                              RngRoot root) const {
    GssdConfig g;
    g.sigma = sigma;
    g.num_projections = num_l;
    g.order = p;
    g.divergence = div;
    g.divergence.p = p;
    g.seed = root;
    g.mode = mode;
    g.oracle_grid = oracle_grid;
    g.workers = workers;
    return g;
  }
};

inline nlohmann::json divergence_to_json(const DivergenceSpec& d) {
  nlohmann::json j;
  j["name"] = divergence_name(d.kind);
  if (d.kind == DivergenceKind::Sinkhorn) {
    j["epsilon"] = d.epsilon;
    j["sinkhorn_tol"] = d.sinkhorn_tol;
    j["sinkhorn_max_iter"] = d.sinkhorn_max_iter;
  }
  if (d.kind == DivergenceKind::MmdSquared) {
    if (d.bandwidth_policy == BandwidthPolicy::Fixed) {
      j["bandwidth"] = d.bandwidth;
    } else {
      j["bandwidth"] = "mean-pairwise";
    }
  }
  return j;
}

inline std::string_view mode_name(EstimatorMode m) {
  return m == EstimatorMode::MixtureOracle ? "oracle" : "double";
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["dims"] = cfg.dims;
  j["sizes"] = cfg.sizes;
  j["sigmas"] = cfg.sigmas;
  j["runs"] = cfg.runs;
  j["projections"] = cfg.projections;
  j["p"] = cfg.p;
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["divergences"] = nlohmann::json::array();
  for (const auto& d : cfg.divergences) j["divergences"].push_back(divergence_to_json(d));
  if (cfg.mode == EstimatorMode::MixtureOracle) j["oracle_grid"] = cfg.oracle_grid;
  if (cfg.command == "projection-complexity") {
    j["reference_projections"] = cfg.reference_projections;
  }
  if (cfg.command == "displacement") j["shifts"] = cfg.shifts;
  if (cfg.command == "bounds") {
    j["vartheta"] = cfg.vartheta;
    j["c_p"] = cfg.c_p;
  }
  return j;
}

struct ResultRow {
  std::string experiment;
  std::string divergence;
  std::size_t d = 0;
  std::size_t n = 0;
  double sigma = 0.0;
  int projections = 0;
  int run = 0;
  double value = 0.0;
  double std_error = 0.0;
  double wall_ms = 0.0;
};

inline constexpr std::string_view kCsvColumns =
    "experiment,divergence,d,n,sigma,L,run,value,std_error,wall_ms";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_row(const ResultRow& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
  return r.experiment + ',' + r.divergence + ',' + std::to_string(r.d) + ',' +
         std::to_string(r.n) + ',' + format_double(r.sigma) + ',' +
         std::to_string(r.projections) + ',' + std::to_string(r.run) + ',' +
         format_double(r.value) + ',' + format_double(r.std_error) + ',' + wall;
}

/// `#`-prefixed provenance block, the column header, then one line per row.
inline void write_results_csv(std::ostream& out, const ExperimentConfig& cfg,
                              const std::vector<ResultRow>& rows,
                              const std::vector<std::string>& extra_header = {}) {
  out << "# gssd " << kVersion << '\n';
  out << "# seed=" << cfg.seed << '\n';
  out << "# config=" << to_json(cfg).dump() << '\n';
  for (const auto& line : extra_header) out << "# " << line << '\n';
  out << kCsvColumns << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

inline RngRoot gaussian_pair_root(std::uint64_t seed, std::size_t d,
                                  std::size_t n, int run) {
  return RngRoot(seed).child("d", d).child("n", n).child("run",
                                                         static_cast<std::uint64_t>(run));
}

struct GaussianPair {
  SampleSet x;
  SampleSet y;
};

inline GaussianPair gaussian_pair(const RngRoot& root, std::size_t n, std::size_t d,
                                  double mean_x = 0.0, double mean_y = 0.0) {
  RngStream sx = derive_stream(root, "x", 0);
  RngStream sy = derive_stream(root, "y", 0);
  SampleSet x = SampleSet::gaussian(n, d, sx, mean_x);
  SampleSet y = SampleSet::gaussian(n, d, sy, mean_y);
  return {std::move(x), std::move(y)};
}

// Sample-complexity and noise-sweep share this loop: for every grid point
// and run, one sigma sweep per divergence.
inline std::vector<ResultRow> run_gaussian_pairs(const ExperimentConfig& cfg,
                                                 const std::string& id) {
  cfg.validate();
  const int num_l = cfg.projections.front();
  const std::size_t num_s = cfg.sigmas.size();
  const std::size_t num_div = cfg.divergences.size();
  const auto runs = static_cast<std::size_t>(cfg.runs);
  std::vector<ResultRow> rows;
  rows.reserve(cfg.dims.size() * cfg.sizes.size() * num_s * num_div * runs);
  for (std::size_t d : cfg.dims) {
    for (std::size_t n : cfg.sizes) {
      // block[(s * num_div + k) * runs + run]; emitted in that order.
      std::vector<ResultRow> block(num_s * num_div * runs);
      for (std::size_t k = 0; k < num_div; ++k) {
        const auto& div = cfg.divergences[k];
        for (std::size_t run = 0; run < runs; ++run) {
          const RngRoot root = gaussian_pair_root(cfg.seed, d, n, static_cast<int>(run));
          const auto pair = gaussian_pair(root, n, d);
          const auto gcfg =
              cfg.estimator_config(div, cfg.sigmas.front(), num_l, root.child("estimator", 0));
          const auto start = Clock::now();
          const auto est = sweep_sigma(pair.x, pair.y, cfg.sigmas, gcfg);
          const double wall = elapsed_ms(start) / static_cast<double>(num_s);
          for (std::size_t s = 0; s < num_s; ++s) {
            block[(s * num_div + k) * runs + run] =
                ResultRow{id, std::string(divergence_name(div.kind)), d, n,
                          cfg.sigmas[s], num_l, static_cast<int>(run),
                          est[s].mean_pow, est[s].std_error, wall};
          }
        }
      }
      rows.insert(rows.end(), block.begin(), block.end());
    }
  }
  return rows;
}

}  // namespace detail

/// ŜGSSD^p between two fresh N(0, I_d) sets per (d, n, sigma, divergence, run).
inline std::vector<ResultRow> run_sample_complexity(const ExperimentConfig& cfg) {
  return detail::run_gaussian_pairs(cfg, "sample-complexity");
}

/// Same grid as sample-complexity, swept over sigma with common random numbers.
inline std::vector<ResultRow> run_noise_sweep(const ExperimentConfig& cfg) {
  return detail::run_gaussian_pairs(cfg, "noise-sweep");
}

/**
 * |ŜGSSD^p(L) - ŜGSSD^p(L_ref)| for every L in cfg.projections. The first L
 * directions of the reference estimate are exactly the directions of the
 * L-projection estimate, so each error comes from one reference pass.
 */
inline std::vector<ResultRow> run_projection_complexity(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (std::size_t d : cfg.dims) {
    for (std::size_t n : cfg.sizes) {
      for (double sigma : cfg.sigmas) {
        for (const auto& div : cfg.divergences) {
          for (int run = 0; run < cfg.runs; ++run) {
            const RngRoot root = detail::gaussian_pair_root(cfg.seed, d, n, run);
            const auto pair = detail::gaussian_pair(root, n, d);
            const auto gcfg = cfg.estimator_config(div, sigma, cfg.reference_projections,
                                                   root.child("estimator", 0));
            const auto start = detail::Clock::now();
            const auto ref = estimate(pair.x, pair.y, gcfg);
            const double wall = detail::elapsed_ms(start);
            for (int num_l : cfg.projections) {
              std::vector<double> prefix(ref.per_projection.begin(),
                                         ref.per_projection.begin() + num_l);
              GssdConfig c = gcfg;
              c.num_projections = num_l;
              const auto est = detail::summarize(std::move(prefix), 0, c);
              rows.push_back({"projection-complexity",
                              std::string(divergence_name(div.kind)), d, n, sigma, num_l,
                              run, std::abs(est.mean_pow - ref.mean_pow), est.std_error,
                              wall});
            }
          }
        }
      }
    }
  }
  return rows;
}

inline std::string displacement_id(double shift) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "displacement:s=%g", shift);
  return buf;
}

/**
 * mu ~ N(2 * 1_d, I) against nu ~ N(s * 1_d, I) for every shift s. The
 * centred samples and the estimator streams are shared across shifts.
 */
inline std::vector<ResultRow> run_displacement(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows;
  const int num_l = cfg.projections.front();
  for (std::size_t d : cfg.dims) {
    for (std::size_t n : cfg.sizes) {
      for (double shift : cfg.shifts) {
        for (double sigma : cfg.sigmas) {
          for (const auto& div : cfg.divergences) {
            for (int run = 0; run < cfg.runs; ++run) {
              const RngRoot root = RngRoot(cfg.seed)
                                       .child("displacement", 0)
                                       .child("d", d)
                                       .child("n", n)
                                       .child("run", static_cast<std::uint64_t>(run));
              const auto pair = detail::gaussian_pair(root, n, d, 2.0, shift);
              const auto gcfg =
                  cfg.estimator_config(div, sigma, num_l, root.child("estimator", 0));
              const auto start = detail::Clock::now();
              const auto est = estimate(pair.x, pair.y, gcfg);
              rows.push_back({displacement_id(shift),
                              std::string(divergence_name(div.kind)), d, n, sigma, num_l,
                              run, est.mean_pow, est.std_error,
                              detail::elapsed_ms(start)});
            }
          }
        }
      }
    }
  }
  return rows;
}

/// Theory bound for mu = N(0, I_d) at every (d, n, sigma > 0).
inline TheoryBound gaussian_theory_bound(const ExperimentConfig& cfg, std::size_t d,
                                         double sigma) {
  const int dim = static_cast<int>(d);
  return make_theory_bound(
      cfg.p, sigma, cfg.vartheta, TailModel::spherical_gaussian(dim, 1.0),
      [dim](int k) { return gaussian_norm_moment(dim, 1.0, k); }, cfg.c_p);
}

inline std::vector<ResultRow> run_bounds(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (std::size_t d : cfg.dims) {
    for (double sigma : cfg.sigmas) {
      if (!(sigma > 0.0)) continue;
      const TheoryBound b = gaussian_theory_bound(cfg, d, sigma);
      for (std::size_t n : cfg.sizes) {
        rows.push_back({"bound", "swd", d, n, sigma, 0, 0,
                        b.at(static_cast<long long>(n)), 0.0, 0.0});
      }
    }
  }
  return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::invalid_argument("fit_loglog_slope: values must be positive");
    }
    sx += std::log(x);
    sy += std::log(y);
  }
  const auto count = static_cast<double>(points.size());
  const double mx = sx / count;
  const double my = sy / count;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxy += dx * (std::log(y) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: all x equal");
  return sxy / sxx;
}

/// Flat JSON report: the estimate fields plus the configuration.
inline nlohmann::json estimate_to_json(const GssdEstimate& est, std::size_t n_x,
                                       std::size_t n_y, std::size_t d) {
  nlohmann::json j;
  j["mean_pow"] = est.mean_pow;
  j["root"] = est.root;
  j["std_error"] = est.std_error;
  j["sample_std"] = est.sample_std;
  j["per_projection"] = est.per_projection;
  j["unconverged"] = est.unconverged;
  j["n_x"] = n_x;
  j["n_y"] = n_y;
  j["d"] = d;
  j["sigma"] = est.config.sigma;
  j["projections"] = est.config.num_projections;
  j["p"] = est.config.order;
  j["seed"] = est.config.seed.seed();
  j["mode"] = mode_name(est.config.mode);
  j["divergence"] = divergence_to_json(est.config.divergence);
  j["version"] = kVersion;
  return j;
}

/// Estimate between two ingested matrices; uses the first divergence, sigma
/// and projection count of cfg.
inline nlohmann::json compare(const SampleSet& x, const SampleSet& y,
                              const ExperimentConfig& cfg) {
  if (x.d() != y.d()) {
    throw std::invalid_argument("compare: dimension mismatch (" + std::to_string(x.d()) +
                                " vs " + std::to_string(y.d()) + ")");
  }
  const auto gcfg = cfg.estimator_config(cfg.divergences.front(), cfg.sigmas.front(),
                                         cfg.projections.front(), RngRoot(cfg.seed));
  return estimate_to_json(estimate(x, y, gcfg), x.n(), y.n(), x.d());
}

inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.command == "sample-complexity") return run_sample_complexity(cfg);
  if (cfg.command == "noise-sweep") return run_noise_sweep(cfg);
  if (cfg.command == "projection-complexity") return run_projection_complexity(cfg);
  if (cfg.command == "displacement") return run_displacement(cfg);
  if (cfg.command == "bounds") return run_bounds(cfg);
  throw std::invalid_argument("run_experiment: unsupported command '" + cfg.command + "'");
}

}  // namespace gssd
