#ifndef CCSICA_DENSITY_HPP
#define CCSICA_DENSITY_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "ccsica/types.hpp"

namespace ccsica {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Kernel width h together with the sample count it was derived from.
struct KernelBandwidth {
  double h = 0.0;
  Eigen::Index t_count = 0;
};

/// Rule-of-thumb width 1.06 * T^(-1/5), evaluated at the effective
/// (post-stride) sample count.
inline KernelBandwidth default_bandwidth(Eigen::Index t_count) {
  if (t_count < 1) {
    throw std::invalid_argument("default_bandwidth: sample count must be positive");
  }
  return {1.06 * std::pow(static_cast<double>(t_count), -0.2), t_count};
}

/// Univariate Gaussian kernel (2*pi)^(-1/2) * exp(-u^2/2).
inline double kernel_uni(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

/// d/du of kernel_uni.
inline double kernel_uni_deriv(double u) { return -u * kernel_uni(u); }

/// Multivariate Gaussian kernel (2*pi)^(-N/2) * exp(-u'u/2).
inline double kernel_multi(const Eigen::VectorXd& u) {
  const double n = static_cast<double>(u.size());
  return std::pow(2.0 * std::numbers::pi, -0.5 * n) * std::exp(-0.5 * u.squaredNorm());
}

namespace detail {

/// Columns 0, stride, 2*stride, ... of x.
inline SignalMatrix stride_columns(const SignalMatrix& x, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (stride == 1) return x;
  const Eigen::Index kept = (x.cols() + stride - 1) / stride;
  SignalMatrix out(x.rows(), kept);
  for (Eigen::Index k = 0; k < kept; ++k) out.col(k) = x.col(k * stride);
  return out;
}

}  // namespace detail

/// Gaussian Parzen-window estimator anchored at every stride-th column of a
/// reference sample block. The bandwidth defaults to the rule-of-thumb width
/// at the effective anchor count.
class ParzenModel {
 public:
  ParzenModel(const SignalMatrix& anchors, int stride = 1, double bandwidth = 0.0)
      : anchors_(detail::stride_columns(anchors, stride)), stride_(stride) {
    if (anchors_.cols() < 2) {
      throw std::invalid_argument("ParzenModel: needs at least 2 effective anchors");
    }
    if (bandwidth < 0.0) {
      throw std::invalid_argument("ParzenModel: bandwidth must be nonnegative");
    }
    h_ = bandwidth > 0.0 ? bandwidth : default_bandwidth(anchors_.cols()).h;
  }

  Eigen::Index channels() const { return anchors_.rows(); }
  Eigen::Index anchor_count() const { return anchors_.cols(); }
  int stride() const { return stride_; }
  double bandwidth() const { return h_; }
  const SignalMatrix& anchors() const { return anchors_; }

  /// p(y) = 1/(T'h) * sum_i kernel_uni((y - a_mi)/h) for channel m.
  double pdf_uni(Eigen::Index channel, double y) const {
    check_channel(channel);
    const double inv_h = 1.0 / h_;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < anchors_.cols(); ++i) {
      acc += kernel_uni((y - anchors_(channel, i)) * inv_h);
    }
    return acc / (static_cast<double>(anchors_.cols()) * h_);
  }

  /// d/dy of pdf_uni: 1/(T'h^2) * sum_i kernel_uni_deriv((y - a_mi)/h).
  double pdf_uni_deriv(Eigen::Index channel, double y) const {
    check_channel(channel);
    const double inv_h = 1.0 / h_;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < anchors_.cols(); ++i) {
      acc += kernel_uni_deriv((y - anchors_(channel, i)) * inv_h);
    }
    return acc / (static_cast<double>(anchors_.cols()) * h_ * h_);
  }

  /// p(y) = 1/(T'h^M) * sum_i kernel_multi((y - a_i)/h).
  double pdf_multi(const Eigen::VectorXd& y) const {
    if (y.size() != anchors_.rows()) {
      throw std::invalid_argument("pdf_multi: query dimension does not match anchors");
    }
    const double inv_h = 1.0 / h_;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < anchors_.cols(); ++i) {
      acc += kernel_multi((y - anchors_.col(i)) * inv_h);
    }
    return acc / (static_cast<double>(anchors_.cols()) *
                  std::pow(h_, static_cast<double>(anchors_.rows())));
  }

 private:
  void check_channel(Eigen::Index channel) const {
    if (channel < 0 || channel >= anchors_.rows()) {
      throw std::invalid_argument("ParzenModel: channel index out of range");
    }
  }

  SignalMatrix anchors_;  // strided copy, M x T'
  int stride_ = 1;
  double h_ = 0.0;
};

}  // namespace ccsica

#endif  // CCSICA_DENSITY_HPP
