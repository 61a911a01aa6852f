#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matfactor/ingest.hpp"

namespace matfactor {

/// Cross-sectional pricing data: every matrix is (series x T).
struct ZooDataset {
  std::vector<MonthStamp> dates;
  std::vector<std::string> asset_ids;
  std::vector<std::string> control_names;
  std::vector<std::string> new_factor_names;
  Eigen::MatrixXd returns;      // n x T test-asset returns
  Eigen::MatrixXd controls;     // p x T existing factors
  Eigen::MatrixXd new_factors;  // r x T factors under test

  /// Shape, finiteness and n > r + 1 checks.
  void validate() const;
};

struct CrossMoments {
  Eigen::VectorXd mean_returns;  // n
  Eigen::MatrixXd cov_new;       // n x r, Cov(r_t, g_t) with 1/T
  Eigen::MatrixXd cov_controls;  // n x p, Cov(r_t, h_t) with 1/T
};

CrossMoments compute_cross_moments(const ZooDataset& data);

struct LassoOptions {
  double tol = 1e-8;  // max coefficient change per sweep, standardized scale
  int max_sweeps = 10000;
};

struct LassoFit {
  double lambda = 0.0;
  double intercept = 0.0;
  Eigen::VectorXd beta;               // original column scale
  Eigen::VectorXd beta_standardized;  // scale of the internally standardized columns
  int sweeps = 0;
};

/// Minimizes (1/2n)||y - b0 - Z b||^2 + lambda ||b||_1 by cyclic coordinate
/// descent, where Z holds the columns of x standardized to mean 0 and unit
/// (1/n) variance. Constant columns are held at zero.
LassoFit lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double lambda, const LassoOptions& options = {});

/// Smallest lambda at which every slope is zero: max_j |z_j'(y - ybar)| / n.
double lasso_lambda_max(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

/// `count` log-spaced values from lasso_lambda_max down to ratio times it.
std::vector<double> default_lambda_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int count = 100,
                                        double ratio = 1e-3);

struct KktReport {
  double max_inactive_excess = 0.0;  // max(|g_j| - lambda, 0) over zero coefficients
  double max_active_gap = 0.0;       // max | g_j - lambda sign(b_j) | over active coefficients
  double worst() const { return std::max(max_inactive_excess, max_active_gap); }
};

/// Stationarity check on the standardized scale, g_j = z_j'(y - yhat) / n.
KktReport lasso_kkt(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const LassoFit& fit);

struct LambdaSelection {
  double lambda = 0.0;
  std::size_t index = 0;      // chosen grid position (1-SE rule)
  std::size_t min_index = 0;  // grid position of minimum CV error
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
};

/// K-fold CV over a descending grid; returns the largest lambda whose CV error
/// is within one standard error of the minimum. Folds come from a seeded
/// shuffle.
LambdaSelection select_lambda_cv(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int folds,
                                 const std::vector<double>& grid, std::uint64_t seed);

struct ZooOptions {
  int folds = 10;
  std::uint64_t seed = 20200101;
  int grid_size = 100;
  double grid_ratio = 1e-3;
};

struct ZooResult {
  Eigen::VectorXd lambda_g;
  Eigen::MatrixXd lambda_cov;  // HC0 block for lambda_g
  double gamma0 = 0.0;
  std::vector<int> selected_first;   // controls chosen for mean returns
  std::vector<int> selected_second;  // union over new-factor covariances
  std::vector<int> selected;         // union of both, ascending
  double wald = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool pseudo_inverse = false;  // lambda_cov was singular
  double lambda_first = 0.0;
  std::vector<double> lambda_second;
  double max_kkt_violation = 0.0;
  std::vector<std::string> new_factor_names;
  std::vector<std::string> control_names;
  ZooOptions options;
};

/// Double-selection LASSO on E(r) = gamma0 + C_g lambda_g + C_h lambda_h:
/// select controls for mean returns and for each column of C_g, refit by OLS on
/// the union, and Wald-test lambda_g = 0 with an HC0 covariance.
ZooResult double_selection(const ZooDataset& data, const ZooOptions& options = {});

struct LabelledMatrix {
  std::vector<std::string> ids;
  std::vector<MonthStamp> dates;
  Eigen::MatrixXd values;  // ids x dates
};

/// "<id>,<date>,<date>,..." header, then one row per series.
LabelledMatrix parse_series_by_row_csv(std::istream& in);
ZooDataset make_zoo_dataset(LabelledMatrix assets, LabelledMatrix controls, LabelledMatrix new_factors);

}  // namespace matfactor
