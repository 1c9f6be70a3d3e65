#ifndef CCSICA_DIVERGENCE_HPP
#define CCSICA_DIVERGENCE_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "ccsica/types.hpp"

namespace ccsica {

/// Convexity parameter of the divergence. alpha = +1 or -1 selects the
/// corresponding limit branch, anything else the generic power form.
struct ConvexityParam {
  double alpha = -0.99999;
};

/// One sample-level density pair: joint-density values pj and
/// marginal-product values qm, one entry per retained time sample.
struct DensityPair {
  Eigen::ArrayXd pj;
  Eigen::ArrayXd qm;
};

/// Convex generator f(t) = 4/(1-a^2) * [(1-a)/2 + (1+a)/2 * t - t^((1+a)/2)],
/// with f(t) = t*log(t) - t + 1 at a = +1 and f(t) = t - 1 - log(t) at a = -1.
/// Nonnegative, strictly convex, zero exactly at t = 1.
inline double convex_f(double t, ConvexityParam a) {
  const double alpha = a.alpha;
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("convex_f: alpha must be finite");
  }
  if (!(t >= 0.0)) {
    throw std::domain_error("convex_f: t must be nonnegative");
  }
  if (alpha == 1.0) {
    if (t == 0.0) return 1.0;  // 0*log(0) := 0
    return t * std::log(t) - t + 1.0;
  }
  if (alpha == -1.0) {
    if (t == 0.0) {
      throw std::domain_error("convex_f: t must be positive at alpha = -1");
    }
    return t - 1.0 - std::log(t);
  }
  if (t == 0.0) return 2.0 / (1.0 + alpha);
  const double lt = std::log(t);
  if (alpha < 0.0) {
    // expm1 keeps the bracket accurate as alpha -> -1, where the
    // exponent (1+alpha)/2 collapses toward zero.
    const double beta = 0.5 * (1.0 + alpha);
    return 2.0 / (1.0 - alpha) * ((t - 1.0) - std::expm1(beta * lt) / beta);
  }
  const double delta = 0.5 * (1.0 - alpha);
  return 2.0 / (1.0 + alpha) * ((1.0 - t) - t * std::expm1(-delta * lt) / delta);
}

/// Derivative of convex_f: 2/(1-a) * [1 - t^((a-1)/2)] for generic a,
/// log(t) at a = +1 and 1 - 1/t at a = -1. Zero at t = 1, increasing.
inline double convex_f_prime(double t, ConvexityParam a) {
  const double alpha = a.alpha;
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("convex_f_prime: alpha must be finite");
  }
  if (!(t > 0.0)) {
    throw std::domain_error("convex_f_prime: t must be positive");
  }
  if (alpha == 1.0) return std::log(t);
  // -expm1(-delta*log t)/delta equals the generic form and degrades
  // gracefully into both limits (delta = 1 gives 1 - 1/t exactly).
  const double delta = 0.5 * (1.0 - alpha);
  return -std::expm1(-delta * std::log(t)) / delta;
}

namespace detail {

/// log(s11 * s22 / s12^2) with the degenerate cases rejected. The
/// Cauchy-Schwarz inequality makes the result nonnegative; rounding
/// residue just below zero is snapped back to 0.
inline double ccs_div_from_sums(double s11, double s22, double s12) {
  if (!(s11 > 0.0) || !(s22 > 0.0) || !(s12 > 0.0)) {
    throw degenerate_contrast_error("ccs_div: f-sums vanished, contrast undefined");
  }
  double d = std::log(s11) + std::log(s22) - 2.0 * std::log(s12);
  if (d < 0.0 && d > -1e-9) d = 0.0;
  return d;
}

}  // namespace detail

/// Sample-approximated contrast
///   log[ sum_t f^2(pj_t) * sum_t f^2(qm_t) / (sum_t f(pj_t) f(qm_t))^2 ].
/// Zero iff {f(pj_t)} and {f(qm_t)} are proportional, in particular pj = qm.
inline double ccs_div(const DensityPair& d, ConvexityParam a,
                      double density_floor = kDensityFloor) {
  const Eigen::Index n = d.pj.size();
  if (n < 1 || d.qm.size() != n) {
    throw std::invalid_argument("ccs_div: pj and qm must share a nonzero length");
  }
  if ((d.pj < 0.0).any() || (d.qm < 0.0).any()) {
    throw std::invalid_argument("ccs_div: density values must be nonnegative");
  }
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double fp = convex_f(std::max(d.pj[t], density_floor), a);
    const double fq = convex_f(std::max(d.qm[t], density_floor), a);
    s11 += fp * fp;
    s22 += fq * fq;
    s12 += fp * fq;
  }
  return detail::ccs_div_from_sums(s11, s22, s12);
}

/// Quadrature form of the divergence over two positive density grids with a
/// shared cell area. Symmetric in the two grids by construction.
inline double ccs_div_grid2(const Eigen::MatrixXd& pa, const Eigen::MatrixXd& pb,
                            ConvexityParam a, double cell_area,
                            double density_floor = kDensityFloor) {
  if (pa.rows() != pb.rows() || pa.cols() != pb.cols() || pa.size() == 0) {
    throw std::invalid_argument("ccs_div_grid2: grids must share nonzero dimensions");
  }
  if (!(cell_area > 0.0)) {
    throw std::invalid_argument("ccs_div_grid2: cell_area must be positive");
  }
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (Eigen::Index j = 0; j < pa.cols(); ++j) {
    for (Eigen::Index i = 0; i < pa.rows(); ++i) {
      const double fa = convex_f(std::max(pa(i, j), density_floor), a);
      const double fb = convex_f(std::max(pb(i, j), density_floor), a);
      s11 += fa * fa;
      s22 += fb * fb;
      s12 += fa * fb;
    }
  }
  return detail::ccs_div_from_sums(s11 * cell_area, s22 * cell_area, s12 * cell_area);
}

/// Two-dimensional quadrature cross-check: joint grid against the outer
/// product of its marginals. Zero (within quadrature error) iff the joint
/// factorizes.
inline double ccs_div_integral_2d(const Eigen::MatrixXd& p_joint,
                                  const Eigen::VectorXd& p_marg1,
                                  const Eigen::VectorXd& p_marg2,
                                  ConvexityParam a, double cell_area) {
  if (p_marg1.size() != p_joint.rows() || p_marg2.size() != p_joint.cols()) {
    throw std::invalid_argument("ccs_div_integral_2d: marginal grids do not match the joint grid");
  }
  const Eigen::MatrixXd prod = p_marg1 * p_marg2.transpose();
  return ccs_div_grid2(p_joint, prod, a, cell_area);
}

}  // namespace ccsica

#endif  // CCSICA_DIVERGENCE_HPP
