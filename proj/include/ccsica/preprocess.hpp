#ifndef CCSICA_PREPROCESS_HPP
#define CCSICA_PREPROCESS_HPP

#include <stdexcept>

#include <Eigen/Dense>

#include "ccsica/types.hpp"

namespace ccsica {

/// Centering + whitening transform V = Lambda^(-1/2) E', fitted from the
/// 1/T sample covariance. Immutable once fitted.
struct Whitener {
  Eigen::MatrixXd v;
  Eigen::VectorXd mean;
  Eigen::VectorXd eigenvalues;  // descending
};

inline Whitener fit_whitener(const SignalMatrix& x) {
  const Eigen::Index m = x.rows();
  const Eigen::Index t = x.cols();
  if (m < 1 || t <= m) {
    throw std::invalid_argument("fit_whitener: requires more samples than channels");
  }
  Whitener w;
  w.mean = x.rowwise().mean();
  const SignalMatrix centered = x.colwise() - w.mean;
  const Eigen::MatrixXd cov =
      centered * centered.transpose() / static_cast<double>(t);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("fit_whitener: eigendecomposition failed");
  }

  // Reorder descending and pin each eigenvector's sign so the whitener is
  // reproducible across eigensolver implementations: the entry of largest
  // magnitude (first such entry on ties) is made positive.
  Eigen::VectorXd evals(m);
  Eigen::MatrixXd evecs(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    evals[k] = solver.eigenvalues()[m - 1 - k];
    Eigen::VectorXd v = solver.eigenvectors().col(m - 1 - k);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < m; ++i) {
      if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    }
    if (v[pivot] < 0.0) v = -v;
    evecs.col(k) = v;
  }
  if (evals[m - 1] < 1e-12) {
    throw rank_deficiency_error("fit_whitener: covariance is rank deficient");
  }

  w.eigenvalues = evals;
  w.v = evals.cwiseSqrt().cwiseInverse().asDiagonal() * evecs.transpose();
  return w;
}

/// V * (x - mean), column-wise.
inline SignalMatrix apply_whitener(const Whitener& w, const SignalMatrix& x) {
  if (x.rows() != w.v.cols()) {
    throw std::invalid_argument("apply_whitener: channel count mismatch");
  }
  return w.v * (x.colwise() - w.mean);
}

}  // namespace ccsica

#endif  // CCSICA_PREPROCESS_HPP
