#ifndef CCSICA_ICA_CORE_HPP
#define CCSICA_ICA_CORE_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ccsica/density.hpp"
#include "ccsica/divergence.hpp"
#include "ccsica/preprocess.hpp"
#include "ccsica/types.hpp"

namespace ccsica {

/// Result of a demixing run. w acts on whitened data; total() composes it
/// with the whitener into the map that applies to raw observations.
struct DemixingState {
  Eigen::MatrixXd w;
  Whitener whitener;
  int iterations = 0;
  double last_divergence = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int skipped_pairs = 0;  // pairwise gradient scheme only

  Eigen::MatrixXd total() const { return w * whitener.v; }
};

/// The three contrast sums and their element-wise partials with respect to
/// the demixing matrix:
///   v1 = sum_t f^2(P_J),  v2 = sum_t f^2(Q_M),  v3 = sum_t f(P_J) f(Q_M),
/// contrast D = log v1 + log v2 - 2 log v3, dD/dW = v1p/v1 + v2p/v2 - 2 v3p/v3.
struct GradientTerms {
  double v1 = 0.0, v2 = 0.0, v3 = 0.0;
  Eigen::MatrixXd v1p, v2p, v3p;
};

namespace detail {

// Row-block size keeping the pairwise-difference work matrices around a few
// hundred MB at worst; blocks split query rows only, so per-row sums are
// unaffected by the blocking.
inline Eigen::Index kernel_block_rows(Eigen::Index t_eff) {
  const Eigen::Index cap = 4'000'000 / std::max<Eigen::Index>(t_eff, 1);
  return std::max<Eigen::Index>(1, std::min(t_eff, cap));
}

inline double bandwidth_for(const ContrastConfig& cfg, Eigen::Index t_eff) {
  if (cfg.bandwidth > 0.0) return cfg.bandwidth;
  return default_bandwidth(t_eff).h;
}

/// Multivariate Parzen density of each column of xs, anchored at all columns
/// of xs (self-estimate used for the joint density of the whitened data).
inline Eigen::ArrayXd multi_parzen_self(const SignalMatrix& xs, double h) {
  const Eigen::Index m = xs.rows();
  const Eigen::Index tp = xs.cols();
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(m)) /
                      (static_cast<double>(tp) * std::pow(h, static_cast<double>(m)));
  const Eigen::RowVectorXd sq = xs.colwise().squaredNorm();
  const double inv_h2 = 1.0 / (h * h);

  Eigen::ArrayXd px(tp);
  const Eigen::Index block = kernel_block_rows(tp);
  Eigen::MatrixXd s;
  for (Eigen::Index r0 = 0; r0 < tp; r0 += block) {
    const Eigen::Index len = std::min(block, tp - r0);
    s.noalias() = -2.0 * (xs.middleCols(r0, len).transpose() * xs);
    s.colwise() += sq.segment(r0, len).transpose();
    s.rowwise() += sq;
    px.segment(r0, len) =
        ((s.array() * (-0.5 * inv_h2)).min(0.0).exp().rowwise().sum()) * norm;
  }
  return px;
}

/// Univariate Parzen self-estimate of one channel: u[t] = p(v_t) with anchors
/// {v_i}. When grad is true also fills
///   a[t] = 1/(T'h^2) sum_i kernel'((v_t-v_i)/h)        (query-point factor)
///   b(t,l) = 1/(T'h^2) sum_i kernel'((v_t-v_i)/h) x_li (anchor-motion factor)
/// which together give d p(v_t)/d w_ml = a[t] x_lt - b(t,l).
struct UniParzenStats {
  Eigen::ArrayXd u;
  Eigen::ArrayXd a;
  Eigen::MatrixXd b;  // T' x M
};

inline UniParzenStats uni_parzen_self(const Eigen::VectorXd& v, const SignalMatrix& xs,
                                      double h, bool grad) {
  const Eigen::Index tp = v.size();
  const double c1 = kInvSqrt2Pi / (static_cast<double>(tp) * h);
  const double c2 = c1 / h;
  UniParzenStats out;
  out.u.resize(tp);
  if (grad) {
    out.a.resize(tp);
    out.b.resize(tp, xs.rows());
  }
  const Eigen::Index block = kernel_block_rows(tp);
  Eigen::MatrixXd diff, kern;
  for (Eigen::Index r0 = 0; r0 < tp; r0 += block) {
    const Eigen::Index len = std::min(block, tp - r0);
    diff.noalias() = v.segment(r0, len) * Eigen::RowVectorXd::Ones(tp);
    diff.rowwise() -= v.transpose();
    diff /= h;
    kern = (-0.5 * diff.array().square()).exp().matrix();
    out.u.segment(r0, len) = kern.rowwise().sum().array() * c1;
    if (grad) {
      kern.array() *= -diff.array();  // kernel derivative (without constant)
      out.a.segment(r0, len) = kern.rowwise().sum().array() * c2;
      out.b.middleRows(r0, len).noalias() = kern * xs.transpose() * c2;
    }
  }
  return out;
}

struct ContrastParts {
  Eigen::ArrayXd p;               // floored joint-density values P_J
  Eigen::ArrayXd q;               // floored marginal products Q_M
  Eigen::MatrixXd u;              // per-channel marginal estimates, M x T'
  std::vector<UniParzenStats> stats;  // per channel, derivative parts if asked
  double abs_det = 0.0;
};

/// Shared estimator: y = w*xs, Q_M from the univariate self-estimates of the
/// rows of y, P_J from the cached joint density px over |det w|.
inline ContrastParts contrast_parts(const SignalMatrix& xs, const Eigen::MatrixXd& w,
                                    const ContrastConfig& cfg, double h,
                                    const Eigen::ArrayXd& px, bool grad) {
  const Eigen::Index m = xs.rows();
  const Eigen::Index tp = xs.cols();
  const double det = w.determinant();
  if (!(std::abs(det) > 1e-300)) {
    throw singular_matrix_error("contrast: demixing matrix is singular");
  }
  const SignalMatrix y = w * xs;

  ContrastParts parts;
  parts.abs_det = std::abs(det);
  parts.u.resize(m, tp);
  parts.stats.reserve(grad ? static_cast<std::size_t>(m) : 0);
  Eigen::ArrayXd q = Eigen::ArrayXd::Ones(tp);
  for (Eigen::Index c = 0; c < m; ++c) {
    if (y.row(c).maxCoeff() == y.row(c).minCoeff()) {
      throw degenerate_contrast_error("contrast: demixed channel is constant");
    }
    UniParzenStats st = uni_parzen_self(y.row(c).transpose(), xs, h, grad);
    parts.u.row(c) = st.u.matrix().transpose();
    q *= st.u;
    if (grad) parts.stats.push_back(std::move(st));
  }
  parts.q = q.max(cfg.density_floor);
  parts.p = (px / parts.abs_det).max(cfg.density_floor);
  return parts;
}

inline double contrast_from_parts(const ContrastParts& parts, ConvexityParam a) {
  const Eigen::Index tp = parts.p.size();
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (Eigen::Index t = 0; t < tp; ++t) {
    const double fp = convex_f(parts.p[t], a);
    const double fq = convex_f(parts.q[t], a);
    s11 += fp * fp;
    s22 += fq * fq;
    s12 += fp * fq;
  }
  return ccs_div_from_sums(s11, s22, s12);
}

inline double contrast_given_px(const SignalMatrix& xs, const Eigen::MatrixXd& w,
                                const ContrastConfig& cfg, double h,
                                const Eigen::ArrayXd& px) {
  const ContrastParts parts = contrast_parts(xs, w, cfg, h, px, false);
  return contrast_from_parts(parts, ConvexityParam{cfg.alpha});
}

/// Gradient terms at w. P_J' carries only the determinant factor (the joint
/// density of the whitened data does not move with w); Q_M' differentiates
/// the full estimator, including the motion of the kernel anchors, so the
/// result is the exact derivative of the evaluated contrast.
inline GradientTerms gradient_terms_given_px(const SignalMatrix& xs,
                                             const Eigen::MatrixXd& w,
                                             const ContrastConfig& cfg, double h,
                                             const Eigen::ArrayXd& px) {
  const Eigen::Index m = xs.rows();
  const Eigen::Index tp = xs.cols();
  const ConvexityParam a{cfg.alpha};
  const ContrastParts parts = contrast_parts(xs, w, cfg, h, px, true);

  Eigen::ArrayXd fp(tp), fpp(tp), fq(tp), fqp(tp);
  for (Eigen::Index t = 0; t < tp; ++t) {
    fp[t] = convex_f(parts.p[t], a);
    fpp[t] = convex_f_prime(parts.p[t], a);
    fq[t] = convex_f(parts.q[t], a);
    fqp[t] = convex_f_prime(parts.q[t], a);
  }

  GradientTerms terms;
  terms.v1 = (fp * fp).sum();
  terms.v2 = (fq * fq).sum();
  terms.v3 = (fp * fq).sum();
  if (!(terms.v1 > 0.0) || !(terms.v2 > 0.0) || terms.v3 == 0.0) {
    throw degenerate_contrast_error("gradient: contrast sums degenerate");
  }

  // dP_J/dw_ml = -P_J * (w^-T)_ml, so the P_J' parts collapse to a scalar
  // weight times w^-T.
  const Eigen::MatrixXd winv_t = w.inverse().transpose();
  const double w1 = (2.0 * fp * fpp * (-parts.p)).sum();
  const double w3 = (fpp * fq * (-parts.p)).sum();
  terms.v1p = w1 * winv_t;
  terms.v3p = w3 * winv_t;
  terms.v2p = Eigen::MatrixXd::Zero(m, m);

  for (Eigen::Index c = 0; c < m; ++c) {
    // product of the marginals over every channel except c
    Eigen::ArrayXd excl = Eigen::ArrayXd::Ones(tp);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != c) excl *= parts.u.row(j).transpose().array();
    }
    const Eigen::ArrayXd c2 = 2.0 * fq * fqp * excl;
    const Eigen::ArrayXd c3 = fp * fqp * excl;
    const UniParzenStats& st = parts.stats[static_cast<std::size_t>(c)];
    terms.v2p.row(c) =
        (xs * (c2 * st.a).matrix() - st.b.transpose() * c2.matrix()).transpose();
    terms.v3p.row(c) +=
        (xs * (c3 * st.a).matrix() - st.b.transpose() * c3.matrix()).transpose();
  }
  return terms;
}

inline Eigen::MatrixXd gradient_from_terms(const GradientTerms& t) {
  return t.v1p / t.v1 + t.v2p / t.v2 - 2.0 * t.v3p / t.v3;
}

struct GradientCoreResult {
  Eigen::MatrixXd w;
  int iterations = 0;
  double last_div = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool diverged = false;
};

/// The component of the gradient the row-normalized update can actually act
/// on: per row, the part orthogonal to the (unit) row itself.
inline Eigen::MatrixXd tangential_gradient(const Eigen::MatrixXd& w,
                                           const Eigen::MatrixXd& grad) {
  Eigen::MatrixXd tang = grad;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const Eigen::RowVectorXd row = w.row(r) / w.row(r).norm();
    tang.row(r) -= (grad.row(r).dot(row)) * row;
  }
  return tang;
}

inline void normalize_rows(Eigen::MatrixXd& w) {
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const double norm = w.row(r).norm();
    if (!(norm > 1e-12)) {
      throw singular_matrix_error("gradient ICA: demixing row collapsed");
    }
    w.row(r) /= norm;
  }
}

/// Fixed-step gradient descent on already-whitened data, started at the
/// identity, rows renormalized after every update.
///
/// Stopping: |delta D| <= epsilon alone is not a usable test on this
/// landscape. After whitening, the identity start can sit arbitrarily close
/// to a stationary *maximum* of the contrast (the residual rotation is a
/// free angle), where increments and tangential gradients both vanish. So a
/// candidate stop (small increment and small tangential gradient) is
/// confirmed by probing pair rotations of +-pi/16: a probe that lowers the
/// contrast by more than epsilon exposes a maximum/saddle and the descent
/// jumps there and continues; otherwise the point is accepted as a minimum.
inline GradientCoreResult gradient_descent_core(const SignalMatrix& data,
                                                const ContrastConfig& cfg,
                                                const OptimizerConfig& opt,
                                                std::vector<double>* contrast_trace = nullptr) {
  const Eigen::Index m = data.rows();
  const SignalMatrix xs = stride_columns(data, cfg.stride);
  if (xs.cols() < 2) {
    throw std::invalid_argument("gradient ICA: fewer than 2 effective samples");
  }
  const double h = bandwidth_for(cfg, xs.cols());
  const Eigen::ArrayXd px = multi_parzen_self(xs, h);

  // Probe ladder for confirming candidate stops: coarse angles hop over
  // finite-sample dips riding on top of the contrast ridge, fine angles
  // refine toward the nearest true minimum. A probe counts as an escape only
  // if it beats the current contrast by more than epsilon.
  static constexpr double kProbeAngles[] = {
      std::numbers::pi / 4.0, std::numbers::pi / 8.0, std::numbers::pi / 16.0,
      std::numbers::pi / 64.0, std::numbers::pi / 256.0};
  const auto probe_escape = [&](const Eigen::MatrixXd& w, Eigen::MatrixXd* w_out,
                                double* d_out) {
    bool found = false;
    const double d_here = *d_out;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        for (const double angle : kProbeAngles) {
          for (const double sign : {-1.0, 1.0}) {
            Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m);
            const double c = std::cos(sign * angle);
            const double s = std::sin(sign * angle);
            r(i, i) = c;
            r(i, j) = -s;
            r(j, i) = s;
            r(j, j) = c;
            Eigen::MatrixXd cand = r * w;
            normalize_rows(cand);
            const double dc = contrast_given_px(xs, cand, cfg, h, px);
            if (dc < d_here - opt.epsilon && dc < *d_out) {
              *w_out = cand;
              *d_out = dc;
              found = true;
            }
          }
        }
      }
    }
    return found;
  };

  GradientCoreResult res;
  res.w = Eigen::MatrixXd::Identity(m, m);
  double d = contrast_given_px(xs, res.w, cfg, h, px);
  if (contrast_trace) contrast_trace->push_back(d);
  int rises = 0;
  int stall = 0;  // consecutive iterations with |delta D| <= epsilon
  int escapes_left = 8;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const GradientTerms terms = gradient_terms_given_px(xs, res.w, cfg, h, px);
    const Eigen::MatrixXd grad = gradient_from_terms(terms);
    res.w -= opt.gamma * grad;
    normalize_rows(res.w);
    const double dn = contrast_given_px(xs, res.w, cfg, h, px);
    if (contrast_trace) contrast_trace->push_back(dn);
    res.iterations = it;

    const bool small_step = std::abs(dn - d) <= opt.epsilon;
    stall = small_step ? stall + 1 : 0;
    const bool flat =
        tangential_gradient(res.w, grad).cwiseAbs().maxCoeff() <= opt.grad_tolerance;
    if ((small_step && flat) || stall >= 10) {
      Eigen::MatrixXd w_esc = res.w;
      double d_esc = dn;
      if (escapes_left > 0 && probe_escape(res.w, &w_esc, &d_esc)) {
        --escapes_left;
        res.w = w_esc;
        d = d_esc;
        rises = 0;
        stall = 0;
        continue;
      }
      res.converged = true;
      d = dn;
      break;
    }
    rises = dn > d ? rises + 1 : 0;
    d = dn;
    if (rises >= opt.divergence_patience) {
      res.diverged = true;
      break;
    }
  }
  res.last_div = d;
  return res;
}

}  // namespace detail

/// Contrast of y = w * x_white over the strided samples. The joint density is
/// taken as the (w-independent) Parzen estimate of the whitened data over
/// |det w|; the marginal products come from univariate self-estimates of the
/// current outputs.
inline double eval_contrast(const SignalMatrix& x_white, const Eigen::MatrixXd& w,
                            const ContrastConfig& cfg) {
  if (w.rows() != w.cols() || w.rows() != x_white.rows()) {
    throw std::invalid_argument("eval_contrast: w must be square and match the data");
  }
  const SignalMatrix xs = detail::stride_columns(x_white, cfg.stride);
  if (xs.cols() < 2) {
    throw std::invalid_argument("eval_contrast: fewer than 2 effective samples");
  }
  const double h = detail::bandwidth_for(cfg, xs.cols());
  return detail::contrast_given_px(xs, w, cfg, h, detail::multi_parzen_self(xs, h));
}

/// Full matrix of contrast partials at w (see GradientTerms).
inline GradientTerms eval_gradient_terms(const SignalMatrix& x_white,
                                         const Eigen::MatrixXd& w,
                                         const ContrastConfig& cfg) {
  if (w.rows() != w.cols() || w.rows() != x_white.rows()) {
    throw std::invalid_argument("eval_gradient: w must be square and match the data");
  }
  const SignalMatrix xs = detail::stride_columns(x_white, cfg.stride);
  if (xs.cols() < 2) {
    throw std::invalid_argument("eval_gradient: fewer than 2 effective samples");
  }
  const double h = detail::bandwidth_for(cfg, xs.cols());
  return detail::gradient_terms_given_px(xs, w, cfg, h,
                                         detail::multi_parzen_self(xs, h));
}

inline Eigen::MatrixXd eval_gradient(const SignalMatrix& x_white,
                                     const Eigen::MatrixXd& w,
                                     const ContrastConfig& cfg) {
  return detail::gradient_from_terms(eval_gradient_terms(x_white, w, cfg));
}

/// Full-matrix gradient-descent ICA: whiten, then descend the contrast from
/// W = I with fixed step size and per-step row normalization.
inline DemixingState run_gradient_ica(const SignalMatrix& x, const ContrastConfig& cfg,
                                      const OptimizerConfig& opt) {
  if (x.rows() < 2) {
    throw std::invalid_argument("run_gradient_ica: needs at least two channels");
  }
  DemixingState state;
  state.whitener = fit_whitener(x);
  const SignalMatrix xw = apply_whitener(state.whitener, x);
  const detail::GradientCoreResult core = detail::gradient_descent_core(xw, cfg, opt);
  state.w = core.w;
  state.iterations = core.iterations;
  state.last_divergence = core.last_div;
  state.converged = core.converged && !core.diverged;
  return state;
}

}  // namespace ccsica

#endif  // CCSICA_ICA_CORE_HPP
