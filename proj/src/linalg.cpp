#include "matfactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "matfactor/error.hpp"

namespace matfactor {

double normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (v.size() > 0 && v(arg) < 0) {
    v = -v;
    return -1.0;
  }
  return 1.0;
}

void normalize_column_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::VectorXd c = columns.col(j);
    normalize_sign(c);
    columns.col(j) = c;
  }
}

EigenPairs symmetric_eigen_desc(const Eigen::MatrixXd& symmetric) {
  const Eigen::MatrixXd sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) raise(ErrorCode::kNumeric, "symmetric eigen-decomposition failed");
  const Eigen::Index n = sym.rows();
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = solver.eigenvalues()(n - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  normalize_column_signs(out.vectors);
  return out;
}

Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& symmetric, Eigen::Index rank) {
  require(rank >= 1 && rank <= symmetric.rows(), ErrorCode::kDomain,
          "rank " + std::to_string(rank) + " outside [1, " + std::to_string(symmetric.rows()) + "]");
  if (!symmetric.allFinite()) raise(ErrorCode::kNumeric, "non-finite entries in co-moment matrix");
  return symmetric_eigen_desc(symmetric).vectors.leftCols(rank);
}

double orthonormality_error(const Eigen::MatrixXd& columns) {
  const Eigen::MatrixXd gram = columns.transpose() * columns;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double subspace_distance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
  require(u.rows() == v.rows(), ErrorCode::kContract, "subspace_distance: ambient dimensions differ");
  require(orthonormality_error(u) <= 1e-8 && orthonormality_error(v) <= 1e-8, ErrorCode::kContract,
          "subspace_distance: inputs must be orthonormal");
  if (u.cols() == v.cols()) {
    // sin of the largest principal angle, computed from the residual of V
    // against span(U) to keep precision for nearly equal spaces.
    const Eigen::MatrixXd residual = v - u * (u.transpose() * v);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    return std::min(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  }
  const Eigen::MatrixXd diff = u * u.transpose() - v * v.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(diff, Eigen::EigenvaluesOnly);
  return std::min(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
}

double line_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ua = a.normalized();
  Eigen::VectorXd ub = b.normalized();
  if (ua.dot(ub) < 0) ub = -ub;
  // 2 asin(|a-b|/2) is accurate for tiny angles, unlike acos.
  return 2.0 * std::asin(std::min(1.0, (ua - ub).norm() / 2.0));
}

}  // namespace matfactor
