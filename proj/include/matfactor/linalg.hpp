#pragma once

#include <Eigen/Dense>

namespace matfactor {

/// Flips column signs so that each column's largest-magnitude entry is
/// positive (first such entry on ties).
void normalize_column_signs(Eigen::MatrixXd& columns);
/// Same rule for a single vector; returns the sign applied (+1 or -1).
double normalize_sign(Eigen::Ref<Eigen::VectorXd> v);

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns, sign-normalized
};

/// Full eigen-decomposition of a symmetric matrix, sorted descending.
EigenPairs symmetric_eigen_desc(const Eigen::MatrixXd& symmetric);

/// Leading `rank` eigenvectors of a symmetric matrix, sign-normalized.
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& symmetric, Eigen::Index rank);

/// max |L'L - I|
double orthonormality_error(const Eigen::MatrixXd& columns);

/// Spectral norm of UU' - VV' for orthonormal U, V (contract error otherwise).
/// Equals the sine of the largest principal angle when ranks agree.
double subspace_distance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v);

/// Angle in [0, pi/2] between the lines spanned by two nonzero vectors.
double line_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace matfactor
