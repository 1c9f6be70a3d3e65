#ifndef CCSICA_SIGNALS_HPP
#define CCSICA_SIGNALS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ccsica/types.hpp"

namespace ccsica {

enum class SourceKind { uniform, rayleigh, laplacian, lognormal };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::uniform: return "uniform";
    case SourceKind::rayleigh: return "rayleigh";
    case SourceKind::laplacian: return "laplacian";
    case SourceKind::lognormal: return "lognormal";
  }
  throw std::invalid_argument("unknown source kind");
}

inline SourceKind source_kind_from_string(const std::string& name) {
  if (name == "uniform") return SourceKind::uniform;
  if (name == "rayleigh") return SourceKind::rayleigh;
  if (name == "laplacian") return SourceKind::laplacian;
  if (name == "lognormal") return SourceKind::lognormal;
  throw std::invalid_argument("unknown source kind: " + name);
}

/// One synthetic source family. tau1 is the uniform half-width, tau2 the
/// Laplacian scale. standardize rescales to zero mean / unit variance using
/// the family's analytic moments, keeping samples i.i.d.
struct SourceSpec {
  SourceKind kind = SourceKind::uniform;
  double tau1 = 3.0;
  double tau2 = 1.0;
  bool standardize = true;
};

/// Linear mixing model x = A s + v with i.i.d. Gaussian v of std noise_std.
struct MixingModel {
  Eigen::MatrixXd a;
  double noise_std = 0.0;
};

// ---------------------------------------------------------------------------
// Seeding. All seed derivation goes through splitmix64 so that the stream
// layout is fixed and documented: child = mix_seed(parent, index).
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(parent ^ (splitmix64(index) + 0x9E3779B97F4A7C15ull));
}

namespace detail {

/// mt19937_64 stream with explicit inverse-CDF transforms, so sampled values
/// depend only on the engine output and not on library-specific
/// distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform01() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace detail

/// Draw T i.i.d. samples from the family in spec. Deterministic in
/// (spec, t_count, seed).
inline Eigen::VectorXd gen_source(const SourceSpec& spec, Eigen::Index t_count,
                                  std::uint64_t seed) {
  if (t_count < 1) throw std::invalid_argument("gen_source: t_count must be positive");
  if (!(spec.tau1 > 0.0) || !(spec.tau2 > 0.0)) {
    throw std::invalid_argument("gen_source: tau parameters must be positive");
  }
  detail::Rng rng(seed);
  Eigen::VectorXd s(t_count);
  double mean = 0.0, sd = 1.0;
  switch (spec.kind) {
    case SourceKind::uniform:
      for (Eigen::Index t = 0; t < t_count; ++t) {
        s[t] = spec.tau1 * (2.0 * rng.uniform01() - 1.0);
      }
      mean = 0.0;
      sd = spec.tau1 / std::sqrt(3.0);
      break;
    case SourceKind::rayleigh:
      // density s * exp(-s^2/2); inverse CDF sqrt(-2 log(1-u))
      for (Eigen::Index t = 0; t < t_count; ++t) {
        s[t] = std::sqrt(-2.0 * std::log(1.0 - rng.uniform01()));
      }
      mean = std::sqrt(std::numbers::pi / 2.0);
      sd = std::sqrt((4.0 - std::numbers::pi) / 2.0);
      break;
    case SourceKind::laplacian:
      for (Eigen::Index t = 0; t < t_count; ++t) {
        const double v = rng.uniform01() - 0.5;
        s[t] = -spec.tau2 * (v < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(v));
      }
      mean = 0.0;
      sd = spec.tau2 * std::sqrt(2.0);
      break;
    case SourceKind::lognormal:
      for (Eigen::Index t = 0; t < t_count; ++t) {
        s[t] = std::exp(rng.normal());
      }
      mean = std::exp(0.5);
      sd = std::sqrt((std::numbers::e - 1.0) * std::numbers::e);
      break;
  }
  if (spec.standardize) {
    s = (s.array() - mean) / sd;
  }
  return s;
}

/// Stack m channels drawn from the plan (cycled when shorter than m);
/// channel c uses seed mix_seed(seed, c).
inline SignalMatrix gen_sources(const std::vector<SourceSpec>& plan, Eigen::Index m,
                                Eigen::Index t_count, std::uint64_t seed) {
  if (plan.empty()) throw std::invalid_argument("gen_sources: empty source plan");
  if (m < 1) throw std::invalid_argument("gen_sources: m must be positive");
  SignalMatrix s(m, t_count);
  for (Eigen::Index c = 0; c < m; ++c) {
    s.row(c) = gen_source(plan[static_cast<std::size_t>(c) % plan.size()], t_count,
                          mix_seed(seed, static_cast<std::uint64_t>(c)))
                   .transpose();
  }
  return s;
}

/// Random mixing matrix with entries uniform on (-1, 1), redrawn until the
/// condition number is at most 1e3.
inline MixingModel gen_mixing(Eigen::Index m, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("gen_mixing: m must be >= 2");
  detail::Rng rng(seed);
  MixingModel model;
  model.a.resize(m, m);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        model.a(i, j) = rng.uniform(-1.0, 1.0);
      }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.a);
    const double smin = svd.singularValues().minCoeff();
    if (smin > 0.0 && svd.singularValues().maxCoeff() / smin <= 1e3) {
      return model;
    }
  }
  throw std::runtime_error("gen_mixing: failed to draw a well-conditioned matrix");
}

/// x = A s + v. The noise stream is consumed sample-major (t outer, channel
/// inner) and only drawn when noise_std > 0.
inline SignalMatrix mix(const MixingModel& model, const SignalMatrix& s,
                        std::uint64_t seed) {
  if (model.a.cols() != s.rows()) {
    throw std::invalid_argument("mix: mixing matrix and sources disagree on channels");
  }
  SignalMatrix x = model.a * s;
  if (model.noise_std > 0.0) {
    detail::Rng rng(seed);
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      for (Eigen::Index c = 0; c < x.rows(); ++c) {
        x(c, t) += model.noise_std * rng.normal();
      }
    }
  }
  return x;
}

}  // namespace ccsica

#endif  // CCSICA_SIGNALS_HPP
