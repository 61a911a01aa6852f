#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "matfactor/rng.hpp"
#include "matfactor/zoo.hpp"
#include "test_support.hpp"

namespace mftest {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd normal_equations(const VectorXd& y, const MatrixXd& x) {
  return (x.transpose() * x).inverse() * (x.transpose() * y);
}

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double eps, int depth) {
  const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 1e-13, 60);
}

inline double chi2_density(double x, double k) {
  if (x <= 0) return 0;
  return std::exp((k / 2 - 1) * std::log(x) - x / 2 - (k / 2) * std::log(2.0) - std::lgamma(k / 2));
}

inline double f_density(double x, double d1, double d2) {
  if (x <= 0) return 0;
  const double lb = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) - std::lgamma((d1 + d2) / 2);
  return std::exp((d1 / 2) * std::log(d1 / d2) + (d1 / 2 - 1) * std::log(x) -
                  ((d1 + d2) / 2) * std::log1p(d1 * x / d2) - lb);
}

// CDF by quadrature in u = sqrt(s), which removes the density's pole at zero
// for one degree of freedom.
inline double cdf_by_quadrature(const std::function<double(double)>& density, double x) {
  return integrate([&](double u) { return density(u * u) * 2 * u; }, 0.0, std::sqrt(x));
}

// Random design with an intercept column and moderate conditioning.
inline MatrixXd design(int n, int k, matfactor::Rng& rng) {
  MatrixXd x(n, k);
  x.col(0).setOnes();
  x.rightCols(k - 1) = gaussian(n, k - 1, rng);
  if (k > 2) x.col(2) += 0.5 * x.col(1);
  return x;
}

// 1 / (1 - R^2) from regressing column j on an intercept and the others.
inline double vif_by_definition(const MatrixXd& x, Eigen::Index j) {
  MatrixXd others(x.rows(), x.cols());
  others.col(0).setOnes();
  Eigen::Index c = 1;
  for (Eigen::Index m = 0; m < x.cols(); ++m)
    if (m != j) others.col(c++) = x.col(m);
  const VectorXd y = x.col(j);
  const VectorXd resid = y - others * normal_equations(y, others);
  const double r2 = 1 - resid.squaredNorm() / (y.array() - y.mean()).matrix().squaredNorm();
  return 1 / (1 - r2);
}

// Columns centred and scaled to unit (1/n) variance, by explicit loops.
inline MatrixXd standardize(const MatrixXd& x) {
  MatrixXd z(x.rows(), x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double mean = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) mean += x(i, j) / n;
    double var = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean) / n;
    for (Eigen::Index i = 0; i < x.rows(); ++i) z(i, j) = (x(i, j) - mean) / std::sqrt(var);
  }
  return z;
}

// Max KKT violation computed from the original-scale fit.
inline double kkt_violation(const VectorXd& y, const MatrixXd& x, const matfactor::LassoFit& fit) {
  const MatrixXd z = standardize(x);
  const VectorXd resid = y - (x * fit.beta).eval() - VectorXd::Constant(y.size(), fit.intercept);
  double worst = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double g = z.col(j).dot(resid) / static_cast<double>(y.size());
    if (fit.beta(j) == 0) {
      worst = std::max(worst, std::abs(g) - fit.lambda);
    } else {
      worst = std::max(worst, std::abs(g - fit.lambda * (fit.beta(j) > 0 ? 1 : -1)));
    }
  }
  return worst;
}

}  // namespace mftest
