#ifndef CCSICA_PAIRWISE_HPP
#define CCSICA_PAIRWISE_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ccsica/ica_core.hpp"
#include "ccsica/preprocess.hpp"
#include "ccsica/types.hpp"

namespace ccsica {

/// Planar rotation [[cos t, -sin t], [sin t, cos t]].
inline Eigen::Matrix2d rotation2(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("rotation2: theta must be finite");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

/// Inclusive candidate grid over [theta_min, theta_max]. The default covers
/// [-pi/4, pi/4] in steps of pi/64, 33 candidates with an exact zero in the
/// middle.
struct RotationGrid {
  double theta_min = -std::numbers::pi / 4.0;
  double theta_max = std::numbers::pi / 4.0;
  double step = std::numbers::pi / 64.0;

  std::vector<double> candidates() const {
    if (!(step > 0.0)) throw std::invalid_argument("RotationGrid: step must be positive");
    if (!(theta_max >= theta_min)) {
      throw std::invalid_argument("RotationGrid: empty angle range");
    }
    std::vector<double> out;
    for (int k = 0;; ++k) {
      double theta = theta_min + k * step;
      if (theta > theta_max + 1e-9 * step) break;
      if (std::abs(theta) < 1e-9 * step) theta = 0.0;
      out.push_back(theta);
    }
    return out;
  }
};

/// Pairwise sweep bookkeeping. cm holds the last applied rotation angle of
/// each pair in degrees (upper triangle); a freshly initialized state uses a
/// 1-degree sentinel so every pair is visited at least once. w_accum is the
/// product of applied pair rotations, orthonormal throughout.
struct SweepState {
  Eigen::MatrixXd cm;
  int sweep = 0;
  Eigen::MatrixXd w_accum;

  static SweepState init(Eigen::Index m) {
    if (m < 2) throw std::invalid_argument("SweepState: needs at least two channels");
    SweepState s;
    s.cm = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) s.cm(i, j) = 1.0;
    }
    s.w_accum = Eigen::MatrixXd::Identity(m, m);
    return s;
  }

  double cm_abs_sum() const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < cm.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < cm.cols(); ++j) total += std::abs(cm(i, j));
    }
    return total;
  }
};

/// Contrast of a rotated/demixed channel pair; the M = 2 restriction of
/// eval_contrast.
inline double pairwise_contrast(const SignalMatrix& x2, const Eigen::Matrix2d& w2,
                                const ContrastConfig& cfg) {
  if (x2.rows() != 2) {
    throw std::invalid_argument("pairwise_contrast: expects a 2-channel block");
  }
  return eval_contrast(x2, w2, cfg);
}

namespace detail {

struct GridScanResult {
  double theta = 0.0;
  double contrast = std::numeric_limits<double>::quiet_NaN();
};

/// Scan the rotation grid over one channel pair. The joint-density vector is
/// shared across candidates (the pair data does not rotate, only the
/// evaluation matrix does). Ties resolve to the smallest |theta|, negative
/// first.
inline GridScanResult scan_rotation_grid(const SignalMatrix& pair,
                                         const RotationGrid& grid,
                                         const ContrastConfig& cfg) {
  const SignalMatrix xs = stride_columns(pair, cfg.stride);
  if (xs.cols() < 2) {
    throw std::invalid_argument("jacobi scan: fewer than 2 effective samples");
  }
  const double h = bandwidth_for(cfg, xs.cols());
  const Eigen::ArrayXd px = multi_parzen_self(xs, h);

  GridScanResult best;
  bool first = true;
  for (const double theta : grid.candidates()) {
    const double d = contrast_given_px(xs, rotation2(theta), cfg, h, px);
    const bool better =
        first || d < best.contrast ||
        (d == best.contrast && (std::abs(theta) < std::abs(best.theta) ||
                                (std::abs(theta) == std::abs(best.theta) &&
                                 theta < best.theta)));
    if (better) {
      best.theta = theta;
      best.contrast = d;
      first = false;
    }
  }
  return best;
}

inline void embed_pair(Eigen::MatrixXd& r, Eigen::Index i, Eigen::Index j,
                       const Eigen::Matrix2d& w2) {
  r(i, i) = w2(0, 0);
  r(i, j) = w2(0, 1);
  r(j, i) = w2(1, 0);
  r(j, j) = w2(1, 1);
}

}  // namespace detail

/// One Jacobi sweep over all pairs (i, j), i < j, in lexicographic order.
/// Pairs whose stored angle is exactly zero are skipped. For every visited
/// pair the grid minimizer is applied to the accumulated demixing matrix and
/// its angle recorded in degrees.
inline SweepState jacobi_sweep(const SignalMatrix& x, SweepState state,
                               const RotationGrid& grid, const ContrastConfig& cfg) {
  const Eigen::Index m = x.rows();
  if (m < 2 || state.w_accum.rows() != m) {
    throw std::invalid_argument("jacobi_sweep: state does not match the data");
  }
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (state.cm(i, j) == 0.0) continue;
      SignalMatrix pair(2, x.cols());
      pair.row(0) = state.w_accum.row(i) * x;
      pair.row(1) = state.w_accum.row(j) * x;
      const detail::GridScanResult best = detail::scan_rotation_grid(pair, grid, cfg);

      Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m);
      detail::embed_pair(r, i, j, rotation2(best.theta));
      state.w_accum = r * state.w_accum;
      state.cm(i, j) = best.theta * 180.0 / std::numbers::pi;
    }
  }
  state.sweep += 1;
  return state;
}

/// Jacobi-scheme ICA: whiten, then sweep until the summed |angle| over all
/// pairs drops to one degree or the sweep cap is hit. The returned state has
/// w = accumulated rotation product; total() composes it with the whitener.
inline DemixingState run_jacobi_ica(const SignalMatrix& x, const RotationGrid& grid,
                                    const ContrastConfig& cfg, int max_sweeps = 30) {
  if (x.rows() < 2) {
    throw std::invalid_argument("run_jacobi_ica: needs at least two channels");
  }
  if (max_sweeps < 1) throw std::invalid_argument("run_jacobi_ica: max_sweeps < 1");
  DemixingState out;
  out.whitener = fit_whitener(x);
  const SignalMatrix xw = apply_whitener(out.whitener, x);

  SweepState state = SweepState::init(x.rows());
  for (int s = 0; s < max_sweeps; ++s) {
    state = jacobi_sweep(xw, std::move(state), grid, cfg);
    if (state.cm_abs_sum() <= 1.0) {
      out.converged = true;
      break;
    }
  }
  out.w = state.w_accum;
  out.iterations = state.sweep;
  out.last_divergence = eval_contrast(xw, out.w, cfg);
  return out;
}

/// Pairwise gradient-descent ICA: whiten once, then repeatedly run the
/// two-channel gradient stage on every pair of current outputs and fold the
/// resulting 2x2 demixers into the accumulated matrix. Pairs whose inner
/// optimization diverges are skipped. Converged means an outer pass changed
/// the accumulated matrix by at most 1e-4 (max norm).
inline DemixingState run_pairwise_gradient_ica(const SignalMatrix& x,
                                               const ContrastConfig& cfg,
                                               const OptimizerConfig& opt,
                                               int max_outer = 10) {
  if (x.rows() < 2) {
    throw std::invalid_argument("run_pairwise_gradient_ica: needs at least two channels");
  }
  if (max_outer < 1) throw std::invalid_argument("run_pairwise_gradient_ica: max_outer < 1");
  const Eigen::Index m = x.rows();
  DemixingState out;
  out.whitener = fit_whitener(x);
  const SignalMatrix xw = apply_whitener(out.whitener, x);

  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(m, m);
  int skipped = 0;
  int outer = 0;
  for (outer = 1; outer <= max_outer; ++outer) {
    const Eigen::MatrixXd w_before = w;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        SignalMatrix pair(2, xw.cols());
        pair.row(0) = w.row(i) * xw;
        pair.row(1) = w.row(j) * xw;
        const detail::GradientCoreResult core =
            detail::gradient_descent_core(pair, cfg, opt);
        if (core.diverged) {
          ++skipped;
          continue;
        }
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m);
        detail::embed_pair(r, i, j, core.w);
        w = r * w;
      }
    }
    if ((w - w_before).cwiseAbs().maxCoeff() <= 1e-4) {
      out.converged = true;
      break;
    }
  }
  out.w = w;
  out.iterations = std::min(outer, max_outer);
  out.last_divergence = eval_contrast(xw, w, cfg);
  out.skipped_pairs = skipped;
  return out;
}

}  // namespace ccsica

#endif  // CCSICA_PAIRWISE_HPP
