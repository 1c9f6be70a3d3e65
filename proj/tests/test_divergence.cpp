#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ccsica/divergence.hpp"

using namespace ccsica;

namespace {

// Plain transcription of the generic convex form, used as the independent
// reference for grid/quadrature checks (kept away from the stable
// expm1-based implementation on purpose).
double naive_f(double t, double alpha) {
  return 4.0 / (1.0 - alpha * alpha) *
         ((1.0 - alpha) / 2.0 + (1.0 + alpha) / 2.0 * t - std::pow(t, (1.0 + alpha) / 2.0));
}

}  // namespace

TEST_CASE("convex_f pinned values") {
  CHECK(convex_f(1.0, ConvexityParam{0.3}) == 0.0);
  CHECK(convex_f(1.0, ConvexityParam{-0.99999}) == 0.0);
  CHECK(convex_f(1.0, ConvexityParam{1.0}) == 0.0);
  CHECK(convex_f(1.0, ConvexityParam{-1.0}) == 0.0);

  CHECK_THAT(convex_f(0.0, ConvexityParam{0.0}), Catch::Matchers::WithinRel(2.0, 1e-14));
  CHECK_THAT(convex_f(4.0, ConvexityParam{0.0}), Catch::Matchers::WithinRel(2.0, 1e-13));
  // frozen from a high-precision evaluation of the generic form
  CHECK_THAT(convex_f(2.0, ConvexityParam{0.5}),
             Catch::Matchers::WithinRel(0.36377157062704487, 1e-13));
}

TEST_CASE("convex_f limit branches") {
  // alpha = +1: t log t - t + 1, with 0 log 0 = 0
  CHECK(convex_f(0.0, ConvexityParam{1.0}) == 1.0);
  CHECK_THAT(convex_f(2.0, ConvexityParam{1.0}),
             Catch::Matchers::WithinRel(2.0 * std::log(2.0) - 1.0, 1e-14));
  // alpha = -1: t - 1 - log t
  CHECK_THAT(convex_f(2.0, ConvexityParam{-1.0}),
             Catch::Matchers::WithinRel(1.0 - std::log(2.0), 1e-14));
  // generic branch approaches both limits
  for (const double t : {0.07, 0.9, 1.8, 23.0}) {
    CHECK_THAT(convex_f(t, ConvexityParam{1.0 - 1e-9}),
               Catch::Matchers::WithinRel(convex_f(t, ConvexityParam{1.0}), 1e-7));
    CHECK_THAT(convex_f(t, ConvexityParam{-1.0 + 1e-9}),
               Catch::Matchers::WithinRel(convex_f(t, ConvexityParam{-1.0}), 1e-7));
  }
}

TEST_CASE("convex_f domain errors") {
  CHECK_THROWS_AS(convex_f(-0.5, ConvexityParam{0.0}), std::domain_error);
  CHECK_THROWS_AS(convex_f(0.0, ConvexityParam{-1.0}), std::domain_error);
  CHECK_THROWS_AS(convex_f(1.0, ConvexityParam{std::nan("")}), std::invalid_argument);
}

TEST_CASE("convex_f nonnegative with unique zero") {
  for (const double alpha : {-1.0, -0.99999, -0.5, 0.0, 0.5, 0.99, 1.0}) {
    for (double t = 0.02; t <= 50.0; t *= 1.17) {
      const double v = convex_f(t, ConvexityParam{alpha});
      if (std::abs(t - 1.0) < 1e-12) {
        CHECK(v == 0.0);
      } else {
        CHECK(v > 0.0);
      }
    }
    CHECK(convex_f(1.0, ConvexityParam{alpha}) == 0.0);
  }
}

TEST_CASE("convex_f_prime pinned values and errors") {
  CHECK(convex_f_prime(1.0, ConvexityParam{0.42}) == 0.0);
  CHECK(convex_f_prime(1.0, ConvexityParam{1.0}) == 0.0);
  CHECK(convex_f_prime(1.0, ConvexityParam{-1.0}) == 0.0);
  CHECK_THAT(convex_f_prime(4.0, ConvexityParam{0.0}),
             Catch::Matchers::WithinRel(1.0, 1e-14));
  CHECK_THAT(convex_f_prime(4.0, ConvexityParam{-1.0}),
             Catch::Matchers::WithinRel(0.75, 1e-14));
  CHECK_THAT(convex_f_prime(2.0, ConvexityParam{1.0}),
             Catch::Matchers::WithinRel(std::log(2.0), 1e-14));
  CHECK_THROWS_AS(convex_f_prime(0.0, ConvexityParam{0.0}), std::domain_error);
  CHECK_THROWS_AS(convex_f_prime(-1.0, ConvexityParam{0.0}), std::domain_error);
}

TEST_CASE("convex_f_prime matches central finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> t_dist(0.1, 10.0);
  std::uniform_real_distribution<double> a_dist(-0.99, 0.99);
  const double delta = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const double t = t_dist(rng);
    const ConvexityParam a{a_dist(rng)};
    const double fd = (convex_f(t + delta, a) - convex_f(t - delta, a)) / (2.0 * delta);
    CHECK_THAT(convex_f_prime(t, a), Catch::Matchers::WithinRel(fd, 1e-6));
  }
}

TEST_CASE("convex_f_prime finite differences over the wide range") {
  // includes the extremes t = 0.01 and t = 100 with a t-scaled step
  for (const double alpha : {-0.99, -0.5, 0.0, 0.5, 0.99}) {
    for (double t = 0.01; t <= 100.0; t *= 2.1) {
      const double delta = 1e-6 * std::max(t, 0.05);
      const ConvexityParam a{alpha};
      const double fd = (convex_f(t + delta, a) - convex_f(t - delta, a)) / (2.0 * delta);
      CHECK_THAT(convex_f_prime(t, a), Catch::Matchers::WithinRel(fd, 1e-6));
    }
  }
}

TEST_CASE("ccs_div frozen example") {
  DensityPair d;
  d.pj = Eigen::ArrayXd(2);
  d.pj << 0.5, 0.5;
  d.qm = Eigen::ArrayXd(2);
  d.qm << 0.2, 0.8;
  CHECK_THAT(ccs_div(d, ConvexityParam{0.5}),
             Catch::Matchers::WithinRel(0.61510401485893114, 1e-12));
}

TEST_CASE("ccs_div is zero for identical vectors") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(0.05, 2.0);
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + static_cast<int>(rng() % 64);
    DensityPair d;
    d.pj.resize(n);
    for (int i = 0; i < n; ++i) d.pj[i] = dist(rng);
    d.qm = d.pj;
    CHECK(std::abs(ccs_div(d, ConvexityParam{-0.99999})) <= 1e-12);
  }
  // any single-sample pair has proportional f-vectors
  DensityPair single;
  single.pj = Eigen::ArrayXd::Constant(1, 0.3);
  single.qm = Eigen::ArrayXd::Constant(1, 2.6);
  CHECK(std::abs(ccs_div(single, ConvexityParam{0.25})) <= 1e-12);
}

TEST_CASE("ccs_div nonnegative and symmetric on random pairs") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(1e-3, 3.0);
  std::uniform_real_distribution<double> a_dist(-0.999, 0.999);
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + static_cast<int>(rng() % 32);
    DensityPair d;
    d.pj.resize(n);
    d.qm.resize(n);
    for (int i = 0; i < n; ++i) {
      d.pj[i] = dist(rng);
      d.qm[i] = dist(rng);
    }
    const ConvexityParam a{a_dist(rng)};
    const double v = ccs_div(d, a);
    REQUIRE(v >= 0.0);
    DensityPair swapped{d.qm, d.pj};
    REQUIRE(ccs_div(swapped, a) == v);
  }
}

TEST_CASE("ccs_div limit continuity in alpha") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(0.02, 2.5);
  for (int k = 0; k < 50; ++k) {
    const int n = 8;
    DensityPair d;
    d.pj.resize(n);
    d.qm.resize(n);
    for (int i = 0; i < n; ++i) {
      d.pj[i] = dist(rng);
      d.qm[i] = dist(rng);
    }
    const double near_plus = ccs_div(d, ConvexityParam{1.0 - 1e-6});
    const double at_plus = ccs_div(d, ConvexityParam{1.0});
    CHECK_THAT(near_plus, Catch::Matchers::WithinRel(at_plus, 1e-4));
    const double near_minus = ccs_div(d, ConvexityParam{-1.0 + 1e-6});
    const double at_minus = ccs_div(d, ConvexityParam{-1.0});
    CHECK_THAT(near_minus, Catch::Matchers::WithinRel(at_minus, 1e-4));
  }
}

TEST_CASE("ccs_div degenerate and argument errors") {
  DensityPair ones;
  ones.pj = Eigen::ArrayXd::Constant(4, 1.0);  // f == 0 everywhere
  ones.qm = Eigen::ArrayXd::Constant(4, 1.0);
  CHECK_THROWS_AS(ccs_div(ones, ConvexityParam{0.5}), degenerate_contrast_error);

  DensityPair ragged;
  ragged.pj = Eigen::ArrayXd::Constant(3, 0.5);
  ragged.qm = Eigen::ArrayXd::Constant(2, 0.5);
  CHECK_THROWS_AS(ccs_div(ragged, ConvexityParam{0.5}), std::invalid_argument);

  DensityPair negative;
  negative.pj = Eigen::ArrayXd::Constant(2, -0.5);
  negative.qm = Eigen::ArrayXd::Constant(2, 0.5);
  CHECK_THROWS_AS(ccs_div(negative, ConvexityParam{0.5}), std::invalid_argument);
}

TEST_CASE("grid divergence vanishes when the joint factorizes") {
  const int n1 = 24, n2 = 30;
  Eigen::VectorXd m1(n1), m2(n2);
  for (int i = 0; i < n1; ++i) m1[i] = 0.2 + 0.05 * i;
  for (int j = 0; j < n2; ++j) m2[j] = 1.3 - 0.03 * j;
  const Eigen::MatrixXd joint = m1 * m2.transpose();
  const double v = ccs_div_integral_2d(joint, m1, m2, ConvexityParam{0.5}, 0.01);
  CHECK(std::abs(v) <= 1e-8);
}

TEST_CASE("grid divergence is symmetric in its two grids") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(0.05, 1.5);
  Eigen::MatrixXd a(5, 7), b(5, 7);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 7; ++j) {
      a(i, j) = dist(rng);
      b(i, j) = dist(rng);
    }
  }
  const ConvexityParam alpha{-0.3};
  CHECK(ccs_div_grid2(a, b, alpha, 0.25) == ccs_div_grid2(b, a, alpha, 0.25));
}

TEST_CASE("grid divergence matches a brute-force double sum") {
  // correlated bivariate Gaussian vs the product of its marginals
  const int n = 41;
  const double lo = -4.0, hi = 4.0;
  const double step = (hi - lo) / (n - 1);
  const double rho = 0.6;
  Eigen::MatrixXd joint(n, n);
  Eigen::VectorXd mx(n), my(n);
  const double joint_norm = 1.0 / (2.0 * M_PI * std::sqrt(1.0 - rho * rho));
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * step;
    mx[i] = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    for (int j = 0; j < n; ++j) {
      const double y = lo + j * step;
      joint(i, j) = joint_norm *
                    std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * (1.0 - rho * rho)));
    }
  }
  my = mx;
  const double alpha = 0.5;
  const double cell = step * step;

  // independent accumulation with the naive power-form generator
  long double s11 = 0.0L, s22 = 0.0L, s12 = 0.0L;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const long double fa = naive_f(joint(i, j), alpha);
      const long double fb = naive_f(mx[i] * my[j], alpha);
      s11 += fa * fa;
      s22 += fb * fb;
      s12 += fa * fb;
    }
  }
  const double expected = static_cast<double>(
      std::log((s11 * cell) * (s22 * cell) / ((s12 * cell) * (s12 * cell))));

  const double got = ccs_div_integral_2d(joint, mx, my, ConvexityParam{alpha}, cell);
  CHECK(got > 0.0);
  CHECK_THAT(got, Catch::Matchers::WithinRel(expected, 1e-10));
}

TEST_CASE("grid divergence rejects mismatched dimensions") {
  const Eigen::MatrixXd joint = Eigen::MatrixXd::Constant(4, 5, 0.2);
  const Eigen::VectorXd m1 = Eigen::VectorXd::Constant(4, 0.5);
  const Eigen::VectorXd bad = Eigen::VectorXd::Constant(4, 0.5);
  CHECK_THROWS_AS(ccs_div_integral_2d(joint, m1, bad, ConvexityParam{0.0}, 1.0),
                  std::invalid_argument);
}
