#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matfactor/ingest.hpp"

namespace matfactor {

struct RegressionResult {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_errors;  // classical, sigma^2 (X'X)^-1
  Eigen::VectorXd residuals;
  double rss = 0.0;
  double r2 = 0.0;  // 1 - rss / centred TSS; 0 when y is constant
  int n_obs = 0;
  int k = 0;  // regressors including the intercept column
};

/// Least squares via Householder QR. X must carry its own intercept column.
/// Collinearity error when the smallest singular value of the column-scaled
/// design falls below 1e-10.
RegressionResult ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

/// [1, columns]
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& columns);

struct PartialFResult {
  double f_stat = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p_value = 1.0;
  bool infinite = false;  // full model fits exactly
};

PartialFResult partial_f_test(const RegressionResult& reduced, const RegressionResult& full);

/// VIF_j = 1 / (1 - R^2_j), regressing column j on the others plus an
/// intercept. Columns with R^2_j >= 1 - 1e-12 report +inf.
Eigen::VectorXd vif(const Eigen::MatrixXd& x);

/// Replaces every target series by its OLS residual on [1, controls].
FactorSeries residualize(const FactorSeries& targets, const FactorSeries& controls);

inline constexpr int kHistogramBins = 20;

struct Histogram {
  std::vector<std::size_t> counts;  // kHistogramBins uniform bins on [0, 1]
};

Histogram histogram_unit_interval(const std::vector<double>& values, int bins = kHistogramBins);

struct StockFit {
  std::string stock_id;
  int n_obs = 0;
  double r2_reduced = 0.0;
  double r2_full = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;
};

struct SkippedStock {
  std::string stock_id;
  std::string reason;
};

struct PanelSummary {
  std::vector<StockFit> stocks;  // input order
  std::vector<SkippedStock> skipped;
  double mean_r2_reduced = 0.0;
  double median_r2_reduced = 0.0;
  double mean_r2_full = 0.0;
  double median_r2_full = 0.0;
  double share_p_below_05 = 0.0;
  double share_p_below_10 = 0.0;
  Histogram r2_reduced_hist;
  Histogram r2_full_hist;
  Histogram p_value_hist;
  std::vector<std::string> control_names;
  std::vector<std::string> stat_factor_names;
  bool residualized = false;
};

struct PanelEvaluationOptions {
  int min_obs = 30;  // stocks need strictly more observed months
  bool residualize = false;
  unsigned threads = 1;
};

/// Per stock: excess returns on [1, controls] (reduced) and on
/// [1, controls, stat factors] (full), compared by the partial F test.
/// All series must share the stock panel's dates.
PanelSummary run_panel_evaluation(const StockPanel& stocks, const FactorSeries& controls,
                                  const FactorSeries& stat_factors, const Eigen::VectorXd& rf,
                                  const PanelEvaluationOptions& options = {});

}  // namespace matfactor
