#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "matfactor/ingest.hpp"

namespace matfactor {

using MatrixSeries = std::vector<Eigen::MatrixXd>;

/// Which loading space an estimator targets: rows (front loading R) or
/// columns (back loading C, obtained by transposing every observation).
enum class LoadingMode { kRows, kCols };

struct DemeanedPanel {
  MatrixPanel panel;     // per-cell time means removed; missing cells hold 0
  Eigen::MatrixXd mean;  // n1 x n2 cell means over observed months
};

DemeanedPanel demean_panel(const MatrixPanel& panel);

/// Estimator input: the demeaned panel, or with demean=false the raw panel
/// with missing cells filled by their cell mean.
MatrixSeries estimation_series(const MatrixPanel& panel, bool demean = true);

// Lagged co-moment accumulations for one mode.
//   TIPUP: M = sum_{h=1..h0} W_h W_h',  W_h = 1/(T-h) sum_t X_t X_{t+h}'
//   TOPUP: M = sum_{h=1..h0} P_h P_h',  P_h[i,(j,k,l)] = 1/(T-h) sum_t X_t[i,j] X_{t+h}[k,l]
Eigen::MatrixXd tipup_matrix(std::span<const Eigen::MatrixXd> series, LoadingMode mode, int h0);
Eigen::MatrixXd topup_matrix(std::span<const Eigen::MatrixXd> series, LoadingMode mode, int h0,
                             std::size_t max_columns);

inline constexpr std::size_t kDefaultTopupMaxColumns = std::size_t{1} << 22;

/// Top-`rank` sign-normalized eigenvectors of the TIPUP matrix.
Eigen::MatrixXd tipup_loading(std::span<const Eigen::MatrixXd> series, LoadingMode mode, Eigen::Index rank,
                              int h0);
Eigen::MatrixXd topup_loading(std::span<const Eigen::MatrixXd> series, LoadingMode mode, Eigen::Index rank,
                              int h0, std::size_t max_columns = kDefaultTopupMaxColumns);

struct TuckerOptions {
  int h0 = 1;
  int max_iter = 50;
  double tol = 1e-6;
  bool demean = true;
};

struct TuckerModel {
  Eigen::MatrixXd front;  // R, n1 x r1, orthonormal
  Eigen::MatrixXd back;   // C, n2 x r2, orthonormal
  MatrixSeries factors;   // F_t = R' X_t C, r1 x r2 each
  int r1 = 0;
  int r2 = 0;
  int h0 = 1;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;  // loading-space distance at the final sweep
  bool demeaned = true;
  Eigen::MatrixXd center;  // cell means removed before estimation
};

/// Alternating TIPUP refinement: start C from one-shot TIPUP on the columns,
/// then repeatedly re-estimate R from {X_t C} and C from {X_t' R}.
TuckerModel iterative_tipup(std::span<const Eigen::MatrixXd> series, int r1, int r2,
                            const TuckerOptions& options = {});
TuckerModel iterative_tipup(const MatrixPanel& panel, int r1, int r2, const TuckerOptions& options = {});

/// Factors TF1..TF(r1*r2), row-major over F_t, computed on the centred panel.
FactorSeries extract_tucker_factors(const MatrixPanel& panel, const TuckerModel& model);

/// R F_t C' for every t.
MatrixSeries fitted_common_component(const TuckerModel& model);

/// argmax_{1<=k<max_rank} lambda_k / lambda_{k+1}. Eigenvalues at numerical
/// zero count as exact zeros; the first k followed by a zero wins.
int eigen_ratio_rank(const Eigen::VectorXd& eigenvalues_desc, int max_rank);
int rank_suggest_eigen_ratio(const MatrixPanel& panel, LoadingMode mode, int max_rank, int h0 = 1);

/// Principal-component scores of the vectorized (size-major) demeaned panel,
/// named PC1..PCr.
FactorSeries pca_vector_factors(const MatrixPanel& panel, int r);

}  // namespace matfactor
