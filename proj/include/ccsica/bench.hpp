#ifndef CCSICA_BENCH_HPP
#define CCSICA_BENCH_HPP

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ccsica/ica_core.hpp"
#include "ccsica/metrics.hpp"
#include "ccsica/pairwise.hpp"
#include "ccsica/signals.hpp"
#include "ccsica/types.hpp"

namespace ccsica {

enum class Algorithm { gradient, pairwise_gradient, jacobi };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gradient: return "gradient";
    case Algorithm::pairwise_gradient: return "pairwise_gradient";
    case Algorithm::jacobi: return "jacobi";
  }
  throw std::invalid_argument("unknown algorithm");
}

inline Algorithm algorithm_from_string(const std::string& name) {
  if (name == "gradient") return Algorithm::gradient;
  if (name == "pairwise_gradient") return Algorithm::pairwise_gradient;
  if (name == "jacobi") return Algorithm::jacobi;
  throw std::invalid_argument("unknown algorithm: " + name);
}

/// One Monte-Carlo batch: everything needed to generate, separate and score
/// `trials` independent mixtures. Fully determines the outputs together with
/// master_seed.
struct RunConfig {
  Algorithm algorithm = Algorithm::jacobi;
  double alpha = -0.99999;
  double gamma = 0.3;
  double epsilon = 1e-4;
  int t_s = 1;
  RotationGrid grid{};
  int dims = 2;
  Eigen::Index samples = 1000;
  int trials = 20;
  std::uint64_t master_seed = 1;
  std::vector<SourceSpec> source_plan = {SourceSpec{}};
  int max_iterations = 500;
  int max_sweeps = 30;
  int max_outer = 10;
  double noise_std = 0.0;
  bool timing = true;  ///< false pins wall_seconds to 0 for byte-stable output
};

struct TrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  double amari_x100 = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  bool converged = false;
  bool failed = false;
  Algorithm algorithm = Algorithm::jacobi;
  int dims = 0;
  Eigen::Index samples = 0;
  int t_s = 1;
};

namespace detail {

inline unsigned worker_count(int jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("CCS_ICA_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end != env && parsed >= 1) n = static_cast<unsigned>(parsed);
  }
  if (jobs > 0 && static_cast<unsigned>(jobs) < n) n = static_cast<unsigned>(jobs);
  return n;
}

/// Run fn(i) for i in [0, n) on a small worker pool; results must be written
/// to per-index slots by the callback.
template <typename Fn>
inline void parallel_for_index(int n, Fn&& fn) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned k = 0; k < workers; ++k) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// One trial: derive the trial seed, draw sources and a mixing matrix, mix,
/// run the configured algorithm, and score the total demixing map against
/// the truth. The algorithm call alone is timed.
inline TrialRecord run_trial(const RunConfig& cfg, int trial_index) {
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index));
  rec.algorithm = cfg.algorithm;
  rec.dims = cfg.dims;
  rec.samples = cfg.samples;
  rec.t_s = cfg.t_s;

  try {
    const SignalMatrix sources =
        gen_sources(cfg.source_plan, cfg.dims, cfg.samples, mix_seed(rec.seed, 1));
    MixingModel model = gen_mixing(cfg.dims, mix_seed(rec.seed, 2));
    model.noise_std = cfg.noise_std;
    const SignalMatrix x = mix(model, sources, mix_seed(rec.seed, 3));

    const ContrastConfig contrast{cfg.alpha, 0.0, cfg.t_s, kDensityFloor};
    OptimizerConfig opt;
    opt.gamma = cfg.gamma;
    opt.epsilon = cfg.epsilon;
    opt.max_iterations = cfg.max_iterations;

    const auto t0 = std::chrono::steady_clock::now();
    DemixingState state;
    switch (cfg.algorithm) {
      case Algorithm::gradient:
        state = run_gradient_ica(x, contrast, opt);
        break;
      case Algorithm::pairwise_gradient:
        state = run_pairwise_gradient_ica(x, contrast, opt, cfg.max_outer);
        break;
      case Algorithm::jacobi:
        state = run_jacobi_ica(x, cfg.grid, contrast, cfg.max_sweeps);
        break;
    }
    const auto t1 = std::chrono::steady_clock::now();

    rec.amari_x100 = amari_error(state.total(), model.a).value_x100;
    rec.converged = state.converged;
    if (cfg.timing) {
      rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    }
  } catch (const std::exception&) {
    rec.failed = true;
  }
  return rec;
}

/// Run all trials on a worker pool (capped by CCS_ICA_THREADS). Records come
/// back in trial order regardless of scheduling; a failed trial is recorded
/// and never aborts the batch.
inline std::vector<TrialRecord> run_benchmark(const RunConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("run_benchmark: trials must be >= 1");
  if (cfg.dims < 2) throw std::invalid_argument("run_benchmark: dims must be >= 2");
  if (cfg.samples <= cfg.dims) {
    throw std::invalid_argument("run_benchmark: samples must exceed dims");
  }
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  detail::parallel_for_index(cfg.trials, [&](int i) {
    records[static_cast<std::size_t>(i)] = run_trial(cfg, i);
  });
  return records;
}

namespace detail {

struct GroupKey {
  std::vector<std::variant<double, std::string>> parts;
  bool operator<(const GroupKey& other) const { return parts < other.parts; }
};

inline std::variant<double, std::string> record_field(const TrialRecord& r,
                                                      const std::string& name) {
  if (name == "dims") return static_cast<double>(r.dims);
  if (name == "samples") return static_cast<double>(r.samples);
  if (name == "algorithm") return std::string(to_string(r.algorithm));
  if (name == "t_s") return static_cast<double>(r.t_s);
  throw std::invalid_argument("emit_table: unknown group field: " + name);
}

inline std::string field_to_string(const std::variant<double, std::string>& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  const double d = std::get<double>(v);
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(d));
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Aggregate records into an RFC-4180 CSV: one row per group key with trial
/// count, failure count, mean and population variance of the Amari score and
/// mean wall time. Rows are sorted by key; failed trials are excluded from
/// the means.
inline std::string emit_table(const std::vector<TrialRecord>& records,
                              const std::vector<std::string>& group_by = {
                                  "dims", "samples", "algorithm", "t_s"}) {
  if (records.empty()) throw std::invalid_argument("emit_table: no records");
  if (group_by.empty()) throw std::invalid_argument("emit_table: empty grouping");

  struct Aggregate {
    int trials = 0;
    int failures = 0;
    double sum = 0.0, sum_sq = 0.0, wall = 0.0;
  };
  std::map<detail::GroupKey, Aggregate> groups;
  for (const TrialRecord& r : records) {
    detail::GroupKey key;
    key.parts.reserve(group_by.size());
    for (const std::string& f : group_by) key.parts.push_back(detail::record_field(r, f));
    Aggregate& agg = groups[key];
    ++agg.trials;
    if (r.failed) {
      ++agg.failures;
    } else {
      agg.sum += r.amari_x100;
      agg.sum_sq += r.amari_x100 * r.amari_x100;
      agg.wall += r.wall_seconds;
    }
  }

  std::string out;
  for (const std::string& f : group_by) {
    out += f;
    out += ',';
  }
  out += "trials,failures,mean_amari_x100,var_amari_x100,mean_wall_seconds\r\n";
  for (const auto& [key, agg] : groups) {
    for (const auto& part : key.parts) {
      out += detail::field_to_string(part);
      out += ',';
    }
    const int n = agg.trials - agg.failures;
    const double mean = n > 0 ? agg.sum / n : std::numeric_limits<double>::quiet_NaN();
    const double var =
        n > 0 ? std::max(0.0, agg.sum_sq / n - mean * mean)
              : std::numeric_limits<double>::quiet_NaN();
    const double wall = n > 0 ? agg.wall / n : std::numeric_limits<double>::quiet_NaN();
    out += std::to_string(agg.trials);
    out += ',';
    out += std::to_string(agg.failures);
    out += ',';
    out += detail::format_double(mean);
    out += ',';
    out += detail::format_double(var);
    out += ',';
    out += detail::format_double(wall);
    out += "\r\n";
  }
  return out;
}

/// Static SVG bar chart of the mean Amari score (x100) per algorithm.
/// Deterministic bytes for a fixed record set.
inline std::string emit_figure(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("emit_figure: no records");

  std::map<std::string, std::pair<int, double>> groups;  // name -> (n, sum)
  for (const TrialRecord& r : records) {
    if (r.failed) continue;
    auto& g = groups[to_string(r.algorithm)];
    g.first += 1;
    g.second += r.amari_x100;
  }
  if (groups.empty()) throw std::invalid_argument("emit_figure: all trials failed");

  std::vector<std::pair<std::string, double>> bars;
  double max_mean = 0.0;
  for (const auto& [name, g] : groups) {
    const double mean = g.second / g.first;
    bars.emplace_back(name, mean);
    max_mean = std::max(max_mean, mean);
  }

  const double width = 120.0 * static_cast<double>(bars.size()) + 80.0;
  const double height = 320.0;
  const double plot_h = 240.0;
  const double base_y = 280.0;

  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
         num(height) + "\">\n";
  svg += "  <title>mean Amari error (x100) by algorithm</title>\n";
  svg += "  <line x1=\"40\" y1=\"" + num(base_y) + "\" x2=\"" + num(width - 20.0) +
         "\" y2=\"" + num(base_y) + "\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < bars.size(); ++k) {
    const double mean = bars[k].second;
    const double h = max_mean > 0.0 ? plot_h * mean / max_mean : 0.0;
    const double x = 60.0 + 120.0 * static_cast<double>(k);
    svg += "  <rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(base_y - h) +
           "\" width=\"80\" height=\"" + num(h) + "\" fill=\"#4878a8\"/>\n";
    svg += "  <text x=\"" + num(x + 40.0) + "\" y=\"" + num(base_y - h - 6.0) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + num(mean) + "</text>\n";
    svg += "  <text x=\"" + num(x + 40.0) + "\" y=\"" + num(base_y + 18.0) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + bars[k].first + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// ---------------------------------------------------------------------------
// JSON bindings for config documents. Missing keys keep their defaults.
// ---------------------------------------------------------------------------

inline void from_json(const nlohmann::json& j, SourceSpec& spec) {
  if (j.is_string()) {
    spec.kind = source_kind_from_string(j.get<std::string>());
    return;
  }
  spec.kind = source_kind_from_string(j.value("kind", std::string("uniform")));
  spec.tau1 = j.value("tau1", spec.tau1);
  spec.tau2 = j.value("tau2", spec.tau2);
  spec.standardize = j.value("standardize", spec.standardize);
}

inline void to_json(nlohmann::json& j, const SourceSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)},
                     {"tau1", spec.tau1},
                     {"tau2", spec.tau2},
                     {"standardize", spec.standardize}};
}

inline void from_json(const nlohmann::json& j, RotationGrid& g) {
  g.theta_min = j.value("theta_min", g.theta_min);
  g.theta_max = j.value("theta_max", g.theta_max);
  g.step = j.value("step", g.step);
}

inline void to_json(nlohmann::json& j, const RotationGrid& g) {
  j = nlohmann::json{{"theta_min", g.theta_min}, {"theta_max", g.theta_max}, {"step", g.step}};
}

inline void from_json(const nlohmann::json& j, RunConfig& cfg) {
  if (j.contains("algorithm")) {
    cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  }
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.t_s = j.value("t_s", cfg.t_s);
  if (j.contains("grid")) cfg.grid = j.at("grid").get<RotationGrid>();
  cfg.dims = j.value("dims", cfg.dims);
  cfg.samples = j.value("samples", cfg.samples);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  if (j.contains("sources")) {
    cfg.source_plan = j.at("sources").get<std::vector<SourceSpec>>();
  }
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.max_sweeps = j.value("max_sweeps", cfg.max_sweeps);
  cfg.max_outer = j.value("max_outer", cfg.max_outer);
  cfg.noise_std = j.value("noise_std", cfg.noise_std);
  cfg.timing = j.value("timing", cfg.timing);
}

inline void to_json(nlohmann::json& j, const RunConfig& cfg) {
  j = nlohmann::json{{"algorithm", to_string(cfg.algorithm)},
                     {"alpha", cfg.alpha},
                     {"gamma", cfg.gamma},
                     {"epsilon", cfg.epsilon},
                     {"t_s", cfg.t_s},
                     {"grid", cfg.grid},
                     {"dims", cfg.dims},
                     {"samples", cfg.samples},
                     {"trials", cfg.trials},
                     {"master_seed", cfg.master_seed},
                     {"sources", cfg.source_plan},
                     {"max_iterations", cfg.max_iterations},
                     {"max_sweeps", cfg.max_sweeps},
                     {"max_outer", cfg.max_outer},
                     {"noise_std", cfg.noise_std},
                     {"timing", cfg.timing}};
}

}  // namespace ccsica

#endif  // CCSICA_BENCH_HPP
