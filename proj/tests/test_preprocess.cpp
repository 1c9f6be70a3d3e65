#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ccsica/preprocess.hpp"

using namespace ccsica;

namespace {

SignalMatrix random_signals(int m, int t, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  SignalMatrix x(m, t);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < t; ++j) x(i, j) = dist(rng);
  }
  return x;
}

double max_abs_off_identity(const Eigen::MatrixXd& m) {
  return (m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("whitened output has identity covariance and zero mean") {
  const SignalMatrix x = 2.5 * random_signals(3, 4000, 1);
  const Whitener w = fit_whitener(x);
  const SignalMatrix xw = apply_whitener(w, x);

  CHECK(xw.rowwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd cov = xw * xw.transpose() / static_cast<double>(xw.cols());
  CHECK(max_abs_off_identity(cov) <= 1e-8);
  // V R V' = I as well
  const SignalMatrix centered = x.colwise() - w.mean;
  const Eigen::MatrixXd r = centered * centered.transpose() / static_cast<double>(x.cols());
  CHECK(max_abs_off_identity(w.v * r * w.v.transpose()) <= 1e-8);
}

TEST_CASE("whitening a mixed source block") {
  const SignalMatrix s = random_signals(4, 3000, 2);
  Eigen::MatrixXd a(4, 4);
  a << 0.9, -0.3, 0.2, 0.5, 0.1, 1.2, -0.7, 0.3, -0.4, 0.2, 0.8, -0.1, 0.3, 0.6, 0.1, 1.1;
  const SignalMatrix x = a * s;
  const Whitener w = fit_whitener(x);
  const SignalMatrix xw = apply_whitener(w, x);
  const Eigen::MatrixXd cov = xw * xw.transpose() / static_cast<double>(xw.cols());
  CHECK(max_abs_off_identity(cov) <= 1e-8);
}

TEST_CASE("already-white input gives an orthonormal whitener") {
  SignalMatrix x = random_signals(2, 50000, 3);
  // force exact zero mean / identity covariance in-sample
  const Whitener pre = fit_whitener(x);
  x = apply_whitener(pre, x);
  const Whitener w = fit_whitener(x);
  CHECK(max_abs_off_identity(w.v * w.v.transpose()) <= 1e-8);
}

TEST_CASE("constant channel is rejected") {
  SignalMatrix x = random_signals(3, 500, 4);
  x.row(1).setConstant(3.7);
  CHECK_THROWS_AS(fit_whitener(x), rank_deficiency_error);
}

TEST_CASE("fit demands more samples than channels") {
  const SignalMatrix x = random_signals(5, 5, 5);
  CHECK_THROWS_AS(fit_whitener(x), std::invalid_argument);
}

TEST_CASE("apply checks dimensions and maps zero to zero") {
  const SignalMatrix x = random_signals(3, 400, 6);
  const Whitener w = fit_whitener(x);
  CHECK_THROWS_AS(apply_whitener(w, random_signals(2, 10, 7)), std::invalid_argument);

  Whitener zero_mean = w;
  zero_mean.mean.setZero();
  const SignalMatrix zeros = SignalMatrix::Zero(3, 8);
  CHECK(apply_whitener(zero_mean, zeros).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("whitening round-trips through the inverse") {
  const SignalMatrix x = random_signals(3, 600, 8);
  const Whitener w = fit_whitener(x);
  const SignalMatrix xw = apply_whitener(w, x);
  const SignalMatrix centered = x.colwise() - w.mean;
  const SignalMatrix back = w.v.partialPivLu().solve(xw);
  CHECK((back - centered).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fit is deterministic and sign-pinned") {
  const SignalMatrix x = random_signals(4, 800, 9);
  const Whitener a = fit_whitener(x);
  const Whitener b = fit_whitener(x);
  CHECK(a.v == b.v);
  CHECK(a.mean == b.mean);
  CHECK(a.eigenvalues == b.eigenvalues);

  // eigenvalues sorted descending
  for (int k = 1; k < a.eigenvalues.size(); ++k) {
    CHECK(a.eigenvalues[k - 1] >= a.eigenvalues[k]);
  }
  // each eigenvector's largest-magnitude entry is positive; rows of V are
  // eigenvectors scaled by positive numbers, so check rows of V
  for (int r = 0; r < a.v.rows(); ++r) {
    int pivot = 0;
    for (int c = 1; c < a.v.cols(); ++c) {
      if (std::abs(a.v(r, c)) > std::abs(a.v(r, pivot))) pivot = c;
    }
    CHECK(a.v(r, pivot) > 0.0);
  }
}
