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

// gssd: command-line harness for the smoothed sliced divergence experiments.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gssd/experiments.hpp"
#include "gssd/io.hpp"

namespace {

struct CliOptions {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> sizes;
  std::vector<double> sigmas;
  std::vector<int> projections;
  std::vector<std::string> divs;
  std::vector<double> shifts;
  int runs = 0;
  double p = 2.0;
  double epsilon = 0.1;
  double bandwidth = 0.0;
  double sinkhorn_tol = 1e-9;
  int sinkhorn_max_iter = 1000;
  std::uint64_t seed = 42;
  int workers = 1;
  int reference_projections = 10000;
  double vartheta = 2.0;
  double c_p = 1.0;
  std::string mode = "double";
  int oracle_grid = 2000;
  std::string out;
  std::string file_x;
  std::string file_y;
};

void add_common(CLI::App* sub, CliOptions& o) {
  sub->add_option("--dim", o.dims, "Dimensions, comma separated")->delimiter(',');
  sub->add_option("--sizes", o.sizes, "Sample sizes, comma separated")->delimiter(',');
  sub->add_option("--sigmas", o.sigmas, "Noise levels, comma separated")->delimiter(',');
  sub->add_option("--projections", o.projections,
                  "Number of projections (a grid for projection-complexity)")
      ->delimiter(',');
  sub->add_option("--div", o.divs, "Base divergences: swd, mmd, skd")->delimiter(',');
  sub->add_option("--runs", o.runs, "Runs per grid point");
  sub->add_option("--p", o.p, "Order p");
  sub->add_option("--epsilon", o.epsilon, "Sinkhorn entropic regularisation");
  sub->add_option("--bandwidth", o.bandwidth,
                  "Fixed MMD bandwidth (default: mean pairwise distance)");
  sub->add_option("--sinkhorn-tol", o.sinkhorn_tol, "Sinkhorn marginal tolerance");
  sub->add_option("--sinkhorn-max-iter", o.sinkhorn_max_iter, "Sinkhorn iteration cap");
  sub->add_option("--seed", o.seed, "Root seed");
  sub->add_option("--workers", o.workers, "Worker threads (results do not depend on it)");
  sub->add_option("--mode", o.mode, "Estimator: double or oracle")
      ->check(CLI::IsMember({"double", "oracle"}));
  sub->add_option("--oracle-grid", o.oracle_grid, "Quantile grid of the mixture oracle");
  sub->add_option("--out", o.out, "Output path ('-' for stdout)");
}

gssd::ExperimentConfig build_config(const std::string& command, const CLI::App* sub,
                                    const CliOptions& o) {
  auto cfg = gssd::ExperimentConfig::defaults_for(command);
  if (!o.dims.empty()) cfg.dims = o.dims;
  if (!o.sizes.empty()) cfg.sizes = o.sizes;
  if (!o.sigmas.empty()) cfg.sigmas = o.sigmas;
  if (!o.projections.empty()) cfg.projections = o.projections;
  if (!o.shifts.empty()) cfg.shifts = o.shifts;
  if (sub->count("--runs") > 0) cfg.runs = o.runs;
  cfg.p = o.p;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.reference_projections = o.reference_projections;
  cfg.vartheta = o.vartheta;
  cfg.c_p = o.c_p;
  cfg.mode = o.mode == "oracle" ? gssd::EstimatorMode::MixtureOracle
                                : gssd::EstimatorMode::DoubleEmpirical;
  cfg.oracle_grid = o.oracle_grid;
  std::vector<std::string> names = o.divs.empty() ? std::vector<std::string>{"swd"} : o.divs;
  cfg.divergences.clear();
  for (const auto& name : names) {
    gssd::DivergenceSpec spec;
    spec.kind = gssd::parse_divergence(name);
    spec.p = o.p;
    spec.epsilon = o.epsilon;
    spec.sinkhorn_tol = o.sinkhorn_tol;
    spec.sinkhorn_max_iter = o.sinkhorn_max_iter;
    if (sub->count("--bandwidth") > 0) {
      spec.bandwidth_policy = gssd::BandwidthPolicy::Fixed;
      spec.bandwidth = o.bandwidth;
    }
    cfg.divergences.push_back(spec);
  }
  cfg.validate();
  return cfg;
}

// Writes the whole payload at once so a failure leaves no partial file.
void emit(const std::string& path, const std::string& payload) {
  if (path.empty() || path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << payload;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-smoothed sliced divergences: experiments and comparisons"};
  app.require_subcommand(1);
  CliOptions opts;

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"sample-complexity", "Divergence between i.i.d. N(0, I) sets of growing size"},
      {"projection-complexity", "Monte Carlo error against a 10^4-projection reference"},
      {"noise-sweep", "Sample complexity across noise levels (common random numbers)"},
      {"displacement", "N(2*1, I) against N(s*1, I) over a grid of shifts s"},
      {"bounds", "Theoretical sample-complexity bound for N(0, I_d)"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : experiments) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, opts);
    if (name == "projection-complexity") {
      sub->add_option("--reference-projections", opts.reference_projections,
                      "Projections of the reference estimate");
    }
    if (name == "displacement") {
      sub->add_option("--shifts", opts.shifts, "Shift grid s, comma separated")
          ->delimiter(',');
    }
    if (name == "bounds") {
      sub->add_option("--vartheta", opts.vartheta, "Free parameter, must exceed sqrt(2)");
      sub->add_option("--c-p", opts.c_p, "Proof constant C_p");
    }
    subs.push_back(sub);
  }
  auto* cmp = app.add_subcommand("compare", "Estimate between two CSV matrices (JSON out)");
  add_common(cmp, opts);
  cmp->add_option("file_x", opts.file_x, "First sample matrix (CSV)")->required();
  cmp->add_option("file_y", opts.file_y, "Second sample matrix (CSV)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmp->parsed()) {
      auto cfg = build_config("compare", cmp, opts);
      const auto x = gssd::read_matrix_csv(opts.file_x);
      const auto y = gssd::read_matrix_csv(opts.file_y);
      emit(opts.out, gssd::compare(x, y, cfg).dump(2) + "\n");
      return 0;
    }
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (!subs[k]->parsed()) continue;
      const std::string& name = experiments[k].first;
      auto cfg = build_config(name, subs[k], opts);
      const auto rows = gssd::run_experiment(cfg);
      std::vector<std::string> extra;
      if (name == "bounds") {
        for (std::size_t d : cfg.dims) {
          for (double s : cfg.sigmas) {
            if (!(s > 0.0)) continue;
            const auto b = gssd::gaussian_theory_bound(cfg, d, s);
            extra.push_back("bound d=" + std::to_string(d) + " sigma=" +
                            gssd::format_double(s) + " xi=" + gssd::format_double(b.xi) +
                            " upsilon=" + gssd::format_double(b.upsilon) +
                            " tail_integral=" + gssd::format_double(b.tail_integral));
          }
        }
      }
      std::ostringstream buf;
      gssd::write_results_csv(buf, cfg, rows, extra);
      emit(opts.out.empty() ? "results.csv" : opts.out, buf.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "gssd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
