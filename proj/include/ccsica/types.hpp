#ifndef CCSICA_TYPES_HPP
#define CCSICA_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>

namespace ccsica {

/// Multichannel signal block: row = channel, column = time sample.
using SignalMatrix = Eigen::MatrixXd;

/// Density values are clamped to this floor before entering the convex
/// function so log/power evaluations stay inside their domain.
inline constexpr double kDensityFloor = 1e-300;

/// Settings shared by every contrast evaluation.
struct ContrastConfig {
  double alpha = -0.99999;  ///< convexity parameter
  double bandwidth = 0.0;   ///< kernel width; 0 selects 1.06 * T'^(-1/5)
  int stride = 1;           ///< keep every stride-th sample in all sums
  double density_floor = kDensityFloor;
};

/// Gradient-descent settings.
/// Convergence needs both a small contrast increment and a small gradient:
/// the increment alone also vanishes on the plateau near the contrast
/// maximum, far from any minimum.
struct OptimizerConfig {
  double gamma = 0.3;            ///< step size
  double epsilon = 1e-4;         ///< contrast-increment part of the stop test
  double grad_tolerance = 1e-3;  ///< max-norm gradient part of the stop test
  int max_iterations = 500;
  int divergence_patience = 10;  ///< consecutive rises before giving up
};

/// Contrast denominator (or an f-sum) collapsed to zero.
class degenerate_contrast_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample covariance is numerically rank deficient.
class rank_deficiency_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A demixing matrix lost invertibility.
class singular_matrix_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccsica

#endif  // CCSICA_TYPES_HPP
