#ifndef CCSICA_METRICS_HPP
#define CCSICA_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>
#include <stdexcept>

#include <Eigen/Dense>

#include "ccsica/types.hpp"

namespace ccsica {

/// Permutation- and scale-invariant separation score in [0, 1]; zero iff the
/// performance matrix P = W*A is a scaled permutation. value_x100 is the
/// conventional reporting scale.
struct AmariScore {
  double value = 0.0;
  double value_x100 = 0.0;
};

/// Amari error of the total demixing map w against the true mixing a:
///   P = w*a,
///   value = [ sum_i (sum_j |p_ij| / max_k |p_ik| - 1)
///           + sum_j (sum_i |p_ij| / max_k |p_kj| - 1) ] / (2 M (M-1)).
inline AmariScore amari_error(const Eigen::MatrixXd& w, const Eigen::MatrixXd& a) {
  const Eigen::Index m = w.rows();
  if (w.cols() != m || a.rows() != m || a.cols() != m) {
    throw std::invalid_argument("amari_error: matrices must be square and equal-sized");
  }
  if (m < 2) {
    throw std::invalid_argument("amari_error: needs at least two channels");
  }
  const Eigen::MatrixXd p = (w * a).cwiseAbs();
  // Every reduction runs in sorted order so that row/column-permuted inputs
  // produce bit-identical scores.
  const auto line_term = [&](const Eigen::VectorXd& line, const char* what) {
    std::vector<double> vals(line.data(), line.data() + line.size());
    std::sort(vals.begin(), vals.end());
    const double vmax = vals.back();
    if (vmax == 0.0) {
      throw std::invalid_argument(std::string("amari_error: performance matrix has a zero ") +
                                  what);
    }
    double sum = 0.0;
    for (const double v : vals) sum += v;
    return sum / vmax - 1.0;
  };
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * m));
  for (Eigen::Index i = 0; i < m; ++i) {
    terms.push_back(line_term(p.row(i).transpose(), "row"));
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    terms.push_back(line_term(p.col(j), "column"));
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (const double t : terms) total += t;
  AmariScore s;
  s.value = total / (2.0 * static_cast<double>(m) * static_cast<double>(m - 1));
  s.value_x100 = 100.0 * s.value;
  return s;
}

/// Excess kurtosis E[s^4]/(E[s^2])^2 - 3 with biased (1/T) moments taken
/// about the sample mean. Exactly scale invariant.
inline double kurtosis(const Eigen::VectorXd& s) {
  const Eigen::Index t = s.size();
  if (t < 4) {
    throw std::invalid_argument("kurtosis: needs at least 4 samples");
  }
  const double mean = s.mean();
  const Eigen::ArrayXd c = s.array() - mean;
  const double m2 = c.square().mean();
  if (m2 == 0.0) {
    throw std::domain_error("kurtosis: zero variance");
  }
  const double m4 = c.square().square().mean();
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace ccsica

#endif  // CCSICA_METRICS_HPP
