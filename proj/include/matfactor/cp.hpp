#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "matfactor/ingest.hpp"
#include "matfactor/tucker.hpp"

namespace matfactor {

struct CpOptions {
  int h0 = 1;
  int max_iter = 200;
  double tol = 1e-7;  // max angular change (radians) of any loading vector
  bool demean = true;
  // Settings for the Tucker run that seeds the initialization.
  int init_max_iter = 50;
  double init_tol = 1e-6;
};

struct CpLoadings {
  Eigen::MatrixXd a;  // n1 x r, unit columns
  Eigen::MatrixXd b;  // n2 x r, unit columns
};

struct CPModel {
  Eigen::MatrixXd a;        // n1 x r, unit columns
  Eigen::MatrixXd b;        // n2 x r, unit columns
  Eigen::MatrixXd a_tilde;  // column i: a_i projected off the other a_j, renormalized
  Eigen::MatrixXd b_tilde;
  Eigen::MatrixXd factors;  // T x r, f_it = a~_i' X_t b~_i
  int r = 0;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  // The safeguarded update could not lower the residual before converging.
  bool stalled = false;
  // Least-squares residual sum of squares given (A, B): entry 0 is the
  // initialization, entry k the state after sweep k.
  std::vector<double> rss_history;
  bool demeaned = true;
  Eigen::MatrixXd center;
};

/// Unit residual of column i after orthogonal projection onto the span of the
/// remaining columns. Degeneracy error when the residual vanishes.
Eigen::VectorXd project_orthocomplement(const Eigen::MatrixXd& m, Eigen::Index i);
/// project_orthocomplement applied to every column.
Eigen::MatrixXd project_orthocomplement_all(const Eigen::MatrixXd& m);

/// Initial loadings: rank-(r,r) iterative TIPUP, top-r right singular vectors
/// of the stacked fitted signal, then the leading singular pair of each.
CpLoadings cp_init(std::span<const Eigen::MatrixXd> series, int r, const CpOptions& options = {});
CpLoadings cp_init(const MatrixPanel& panel, int r, const CpOptions& options = {});

CPModel cp_fit(std::span<const Eigen::MatrixXd> series, int r, const CpOptions& options = {});
CPModel cp_fit(const MatrixPanel& panel, int r, const CpOptions& options = {});

/// Factors CP1..CPr computed on the centred panel with the model's projected
/// loadings.
FactorSeries extract_cp_factors(const MatrixPanel& panel, const CPModel& model);

/// sum_t min_f || X_t - sum_i f_i a_i b_i' ||_F^2
double cp_residual_ss(std::span<const Eigen::MatrixXd> series, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace matfactor
