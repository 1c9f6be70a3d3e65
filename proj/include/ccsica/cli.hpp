#ifndef CCSICA_CLI_HPP
#define CCSICA_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccsica/bench.hpp"
#include "ccsica/io.hpp"
#include "ccsica/metrics.hpp"

namespace ccsica::cli {

namespace detail {

inline std::vector<SourceSpec> parse_spec_list(const std::string& csv, double tau1,
                                               double tau2, bool standardize) {
  std::vector<SourceSpec> plan;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    plan.push_back(SourceSpec{source_kind_from_string(item), tau1, tau2, standardize});
  }
  if (plan.empty()) throw CLI::ValidationError("--spec", "needs at least one source kind");
  return plan;
}

struct GenOptions {
  std::string spec = "uniform,uniform";
  Eigen::Index samples = 1000;
  std::uint64_t seed = 1;
  std::string out;
  double tau1 = 3.0;
  double tau2 = 1.0;
  bool no_standardize = false;
  double noise_std = 0.0;
};

inline void run_gen(const GenOptions& o) {
  const auto plan = parse_spec_list(o.spec, o.tau1, o.tau2, !o.no_standardize);
  const int dims = static_cast<int>(plan.size());
  const SignalMatrix sources =
      gen_sources(plan, dims, o.samples, mix_seed(o.seed, 1));
  MixingModel model = gen_mixing(dims, mix_seed(o.seed, 2));
  model.noise_std = o.noise_std;
  const SignalMatrix x = mix(model, sources, mix_seed(o.seed, 3));

  write_text_file(o.out, dataset_to_csv(x));
  DatasetSidecar sc;
  sc.mixing = model.a;
  sc.seed = o.seed;
  for (const auto& s : plan) sc.specs.emplace_back(to_string(s.kind));
  sc.noise_std = o.noise_std;
  write_text_file(sidecar_path(o.out), sidecar_to_json(sc));
  std::cout << "wrote " << o.out << " (" << dims << " channels, " << o.samples
            << " samples) and " << sidecar_path(o.out) << "\n";
}

struct SeparateOptions {
  std::string in;
  std::string algo = "jacobi";
  double alpha = -0.99999;
  int t_s = 1;
  double gamma = 0.3;
  double epsilon = 1e-4;
  int max_iter = 100;
  int max_sweeps = 30;
  int max_outer = 10;
  std::string out;
  std::string est_out;
};

inline void run_separate(const SeparateOptions& o) {
  const SignalMatrix x = dataset_from_csv(read_text_file(o.in));
  const ContrastConfig contrast{o.alpha, 0.0, o.t_s, kDensityFloor};
  OptimizerConfig opt;
  opt.gamma = o.gamma;
  opt.epsilon = o.epsilon;
  opt.max_iterations = o.max_iter;

  DemixingState state;
  switch (algorithm_from_string(o.algo)) {
    case Algorithm::gradient:
      state = run_gradient_ica(x, contrast, opt);
      break;
    case Algorithm::pairwise_gradient:
      state = run_pairwise_gradient_ica(x, contrast, opt, o.max_outer);
      break;
    case Algorithm::jacobi:
      state = run_jacobi_ica(x, RotationGrid{}, contrast, o.max_sweeps);
      break;
  }

  const Eigen::MatrixXd total = state.total();
  write_text_file(o.out, matrix_to_csv(total));
  if (!o.est_out.empty()) {
    write_text_file(o.est_out, dataset_to_csv(total * x));
  }
  std::cout << "wrote demixing matrix to " << o.out
            << (state.converged ? " (converged" : " (not converged") << " after "
            << state.iterations << " iterations)\n";

  const std::string side = sidecar_path(o.in);
  if (std::filesystem::exists(side)) {
    const DatasetSidecar sc = sidecar_from_json(read_text_file(side));
    if (sc.mixing.rows() == total.rows()) {
      std::cout << "amari_x100 vs recorded mixing: "
                << amari_error(total, sc.mixing).value_x100 << "\n";
    }
  }
}

struct BenchOptions {
  std::string config;
  std::string out;
  std::string svg;
  // optional overrides; NaN / -1 / empty mean "keep config value"
  std::string algo;
  int trials = -1;
  int dims = -1;
  long long samples = -1;
  long long seed = -1;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  int t_s = -1;
  bool no_timing = false;
};

inline void run_bench(const BenchOptions& o) {
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = nlohmann::json::parse(read_text_file(o.config)).get<RunConfig>();
  }
  if (!o.algo.empty()) cfg.algorithm = algorithm_from_string(o.algo);
  if (o.trials >= 1) cfg.trials = o.trials;
  if (o.dims >= 2) cfg.dims = o.dims;
  if (o.samples > 0) cfg.samples = o.samples;
  if (o.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(o.seed);
  if (!std::isnan(o.alpha)) cfg.alpha = o.alpha;
  if (o.t_s >= 1) cfg.t_s = o.t_s;
  if (o.no_timing) cfg.timing = false;

  const std::vector<TrialRecord> records = run_benchmark(cfg);
  write_text_file(o.out, emit_table(records));
  std::cout << "wrote " << o.out << " (" << records.size() << " trials)\n";
  if (!o.svg.empty()) {
    write_text_file(o.svg, emit_figure(records));
    std::cout << "wrote " << o.svg << "\n";
  }
}

}  // namespace detail

/// Entry point behind the ccsica binary. Exit codes: 0 success, 1 usage
/// error, 2 runtime failure.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"Blind source separation with the convex Cauchy-Schwarz divergence"};
  app.require_subcommand(1);

  detail::GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a mixture dataset");
  gen_cmd->add_option("--spec", gen.spec,
                      "comma-separated source kinds (uniform, rayleigh, laplacian, lognormal)");
  gen_cmd->add_option("--samples", gen.samples, "samples per channel")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "master seed");
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();
  gen_cmd->add_option("--tau1", gen.tau1, "uniform half-width");
  gen_cmd->add_option("--tau2", gen.tau2, "laplacian scale");
  gen_cmd->add_flag("--no-standardize", gen.no_standardize, "keep raw family scales");
  gen_cmd->add_option("--noise-std", gen.noise_std, "additive Gaussian noise std");

  detail::SeparateOptions sep;
  CLI::App* sep_cmd = app.add_subcommand("separate", "demix a dataset");
  sep_cmd->add_option("--in", sep.in, "input dataset CSV")->required();
  sep_cmd->add_option("--algo", sep.algo, "gradient | pairwise_gradient | jacobi");
  sep_cmd->add_option("--alpha", sep.alpha, "convexity parameter");
  sep_cmd->add_option("--t-s", sep.t_s, "sampling stride")->check(CLI::PositiveNumber);
  sep_cmd->add_option("--gamma", sep.gamma, "gradient step size");
  sep_cmd->add_option("--epsilon", sep.epsilon, "contrast-change stop threshold");
  sep_cmd->add_option("--max-iter", sep.max_iter, "gradient iteration cap");
  sep_cmd->add_option("--max-sweeps", sep.max_sweeps, "Jacobi sweep cap");
  sep_cmd->add_option("--max-outer", sep.max_outer, "pairwise-gradient outer cap");
  sep_cmd->add_option("--out", sep.out, "demixing matrix CSV")->required();
  sep_cmd->add_option("--est-out", sep.est_out, "estimated sources CSV");

  detail::BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run a Monte-Carlo batch");
  bench_cmd->add_option("--config", bench.config, "JSON run configuration");
  bench_cmd->add_option("--out", bench.out, "results CSV path")->required();
  bench_cmd->add_option("--svg", bench.svg, "optional bar-chart SVG path");
  bench_cmd->add_option("--algo", bench.algo, "override algorithm");
  bench_cmd->add_option("--trials", bench.trials, "override trial count");
  bench_cmd->add_option("--dims", bench.dims, "override channel count");
  bench_cmd->add_option("--samples", bench.samples, "override sample count");
  bench_cmd->add_option("--seed", bench.seed, "override master seed");
  bench_cmd->add_option("--alpha", bench.alpha, "override convexity parameter");
  bench_cmd->add_option("--t-s", bench.t_s, "override sampling stride");
  bench_cmd->add_flag("--no-timing", bench.no_timing,
                      "record zero wall time for byte-stable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "run with --help for usage\n";
    return 1;
  }

  try {
    if (gen_cmd->parsed()) detail::run_gen(gen);
    if (sep_cmd->parsed()) detail::run_separate(sep);
    if (bench_cmd->parsed()) detail::run_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace ccsica::cli

#endif  // CCSICA_CLI_HPP
