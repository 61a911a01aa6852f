#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "matfactor/distributions.hpp"
#include "matfactor/error.hpp"
#include "matfactor/regress.hpp"
#include "matfactor/zoo.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace matfactor;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using mftest::kkt_violation;
using mftest::standardize;

namespace {

// Columns centred and scaled to unit 1/n variance, built by hand.
int active_count(const LassoFit& f) { return static_cast<int>((f.beta.array() != 0).count()); }

ZooDataset random_zoo(int n, int p, int r, int periods, std::uint64_t seed) {
  Rng rng(seed);
  ZooDataset d;
  d.dates = month_sequence(MonthStamp{1990, 1}, static_cast<std::size_t>(periods));
  for (int i = 0; i < n; ++i) d.asset_ids.push_back("A" + std::to_string(i));
  for (int j = 0; j < p; ++j) d.control_names.push_back("H" + std::to_string(j));
  for (int j = 0; j < r; ++j) d.new_factor_names.push_back("G" + std::to_string(j));
  d.controls = mftest::gaussian(p, periods, rng);
  d.new_factors = mftest::gaussian(r, periods, rng);
  const MatrixXd bh = mftest::gaussian(n, p, rng) * 0.3;
  const MatrixXd bg = mftest::gaussian(n, r, rng);
  d.returns = bh * d.controls + bg * d.new_factors + mftest::gaussian(n, periods, rng);
  d.returns.colwise() += 0.2 * bg.col(0);
  return d;
}

}  // namespace

TEST(CrossMoments, LoopOracle) {
  auto d = random_zoo(6, 3, 2, 40, 1);
  d.new_factors.row(1) = d.returns.row(2);
  const auto m = compute_cross_moments(d);
  const double t_count = 40;
  for (int i = 0; i < 6; ++i) {
    double rbar = 0;
    for (int t = 0; t < 40; ++t) rbar += d.returns(i, t) / t_count;
    EXPECT_NEAR(m.mean_returns(i), rbar, 1e-12);
    for (int j = 0; j < 2; ++j) {
      double gbar = 0, c = 0;
      for (int t = 0; t < 40; ++t) gbar += d.new_factors(j, t) / t_count;
      for (int t = 0; t < 40; ++t) c += (d.returns(i, t) - rbar) * (d.new_factors(j, t) - gbar) / t_count;
      EXPECT_NEAR(m.cov_new(i, j), c, 1e-12);
    }
    for (int j = 0; j < 3; ++j) {
      double hbar = 0, c = 0;
      for (int t = 0; t < 40; ++t) hbar += d.controls(j, t) / t_count;
      for (int t = 0; t < 40; ++t) c += (d.returns(i, t) - rbar) * (d.controls(j, t) - hbar) / t_count;
      EXPECT_NEAR(m.cov_controls(i, j), c, 1e-12);
    }
  }
}

TEST(CrossMoments, HandComputedToy) {
  ZooDataset d;
  d.dates = month_sequence(MonthStamp{2000, 1}, 3);
  d.asset_ids = {"a", "b", "c"};
  d.control_names = {"h"};
  d.new_factor_names = {"g"};
  d.returns.resize(3, 3);
  d.returns << 1, 2, 3, 0, 0, 3, 5, 5, 5;
  d.controls.resize(1, 3);
  d.controls << 1, 0, -1;
  d.new_factors.resize(1, 3);
  d.new_factors << 0, 0, 3;
  const auto m = compute_cross_moments(d);
  // Asset a: mean 2, deviations (-1, 0, 1); g deviations (-1, -1, 2).
  EXPECT_NEAR(m.mean_returns(0), 2.0, 1e-15);
  EXPECT_NEAR(m.cov_new(0, 0), (1 + 0 + 2) / 3.0, 1e-15);
  EXPECT_NEAR(m.cov_controls(0, 0), (-1 + 0 - 1) / 3.0, 1e-15);
  // Asset b: mean 1, deviations (-1, -1, 2).
  EXPECT_NEAR(m.cov_new(1, 0), (1 + 1 + 4) / 3.0, 1e-15);
  // Constant asset c.
  EXPECT_EQ(m.cov_new(2, 0), 0.0);
  EXPECT_EQ(m.cov_controls(2, 0), 0.0);
}

TEST(CrossMoments, ZeroVarianceFactorIsDegenerate) {
  auto d = random_zoo(5, 3, 1, 20, 2);
  d.controls.row(1).setConstant(0.4);
  try {
    compute_cross_moments(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegeneracy);
    EXPECT_NE(std::string(e.what()).find("H1"), std::string::npos);
  }
}

TEST(Lasso, ZeroPenaltyIsOls) {
  Rng rng(3);
  const MatrixXd x = mftest::gaussian(80, 6, rng) * 2.0;
  const VectorXd y = x * mftest::gaussian(6, rng) + mftest::gaussian(80, rng);
  const auto fit = lasso(y, x, 0.0);
  const auto ols = ols_fit(y, with_intercept(x));
  EXPECT_LT((fit.beta - ols.coef.tail(6)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(fit.intercept, ols.coef(0), 1e-6);
}

TEST(Lasso, NullThreshold) {
  Rng rng(4);
  const MatrixXd x = mftest::gaussian(50, 8, rng);
  const VectorXd y = x.col(2) + mftest::gaussian(50, rng);
  const MatrixXd z = standardize(x);
  const VectorXd yc = y.array() - y.mean();
  const double oracle = (z.transpose() * yc).cwiseAbs().maxCoeff() / 50.0;
  EXPECT_NEAR(lasso_lambda_max(y, x), oracle, 1e-12);
  const auto at = lasso(y, x, oracle);
  EXPECT_EQ(active_count(at), 0);
  EXPECT_NEAR(at.intercept, y.mean(), 1e-12);
  EXPECT_GT(active_count(lasso(y, x, 0.9 * oracle)), 0);
}

TEST(Lasso, KktHoldsOnRandomInstances) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(300 + s);
    const MatrixXd x = mftest::gaussian(60, 30, rng) * (1 + rng.uniform());
    const VectorXd y = x.leftCols(4) * mftest::gaussian(4, rng) + mftest::gaussian(60, rng);
    const double lambda = lasso_lambda_max(y, x) * (0.02 + 0.5 * rng.uniform());
    const auto fit = lasso(y, x, lambda);
    EXPECT_LT(kkt_violation(y, x, fit), 1e-6) << s;
    EXPECT_LT(lasso_kkt(y, x, fit).worst(), 1e-6) << s;
  }
}

TEST(Lasso, ConstantColumnHeldAtZero) {
  Rng rng(5);
  MatrixXd x = mftest::gaussian(40, 3, rng);
  x.col(1).setConstant(2.0);
  const auto fit = lasso(x.col(0) + mftest::gaussian(40, rng), x, 0.01);
  EXPECT_EQ(fit.beta(1), 0.0);
}

TEST(Lasso, ActiveSetShrinksAsPenaltyGrows) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(400 + s);
    const MatrixXd x = mftest::gaussian(100, 20, rng);
    const VectorXd y = x.leftCols(6) * mftest::gaussian(6, rng) + mftest::gaussian(100, rng);
    const auto grid = default_lambda_grid(y, x, 50, 1e-3);
    ASSERT_EQ(grid.size(), 50u);
    EXPECT_NEAR(grid.front(), lasso_lambda_max(y, x), 1e-12);
    EXPECT_NEAR(grid.back(), 1e-3 * grid.front(), 1e-12 * grid.front());
    std::vector<int> sizes;
    for (double l : grid) sizes.push_back(active_count(lasso(y, x, l)));
    // Descending grid: sizes grow, allowing one step of slack.
    for (std::size_t k = 0; k + 2 < sizes.size(); ++k) {
      EXPECT_GE(std::max(sizes[k + 1], sizes[k + 2]), sizes[k]) << s << " at " << k;
    }
  }
}

TEST(SelectLambda, SingleGridPointAndPreconditions) {
  Rng rng(6);
  const MatrixXd x = mftest::gaussian(30, 5, rng);
  const VectorXd y = mftest::gaussian(30, rng);
  const auto one = select_lambda_cv(y, x, 5, {0.123}, 1);
  EXPECT_EQ(one.lambda, 0.123);
  EXPECT_EQ(one.index, 0u);
  EXPECT_THROW(select_lambda_cv(y, x, 1, {0.1, 0.01}, 1), Error);
  EXPECT_THROW(select_lambda_cv(y, x, 31, {0.1, 0.01}, 1), Error);
  EXPECT_THROW(select_lambda_cv(y, x, 5, {}, 1), Error);
  EXPECT_THROW(select_lambda_cv(y, x, 5, {0.01, 0.1}, 1), Error);
}

TEST(SelectLambda, OneStandardErrorRule) {
  Rng rng(7);
  const MatrixXd x = mftest::gaussian(120, 15, rng);
  const VectorXd y = x.leftCols(3) * VectorXd::Constant(3, 1.0) + mftest::gaussian(120, rng);
  const auto grid = default_lambda_grid(y, x);
  const auto sel = select_lambda_cv(y, x, 10, grid, 99);
  ASSERT_EQ(sel.cv_mean.size(), grid.size());
  const double bound = sel.cv_mean[sel.min_index] + sel.cv_se[sel.min_index];
  EXPECT_LE(sel.cv_mean[sel.index], bound);
  EXPECT_LE(sel.index, sel.min_index);
  for (std::size_t k = 0; k < sel.index; ++k) EXPECT_GT(sel.cv_mean[k], bound);
  EXPECT_EQ(sel.lambda, grid[sel.index]);
  // Fixed seed, fixed answer.
  EXPECT_EQ(select_lambda_cv(y, x, 10, grid, 99).cv_mean, sel.cv_mean);
}

TEST(SelectLambda, PureNoiseSelectsNearThreshold) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(500 + s);
    const MatrixXd x = mftest::gaussian(100, 20, rng);
    const VectorXd y = mftest::gaussian(100, rng);
    const auto grid = default_lambda_grid(y, x);
    const auto sel = select_lambda_cv(y, x, 10, grid, s);
    // Within five grid steps of the threshold (lambda >= 0.84 lambda_max).
    if (sel.index <= 5) ++hits;
  }
  EXPECT_GE(hits, 45);
}

TEST(SelectLambda, SparseSupportRecovery) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(600 + s);
    const MatrixXd x = mftest::gaussian(200, 50, rng);
    VectorXd beta = VectorXd::Zero(50);
    beta(3) = 1.0;
    beta(17) = -1.0;
    beta(40) = 0.8;
    const VectorXd y = x * beta + mftest::gaussian(200, rng);
    const auto grid = default_lambda_grid(y, x);
    const auto sel = select_lambda_cv(y, x, 10, grid, s);
    const auto fit = lasso(y, x, sel.lambda);
    if (fit.beta(3) != 0 && fit.beta(17) != 0 && fit.beta(40) != 0) ++hits;
  }
  EXPECT_GE(hits, 45);
}

TEST(DoubleSelection, ContractAndDeterminism) {
  const auto d = random_zoo(80, 25, 2, 150, 8);
  ZooOptions opt;
  opt.grid_size = 40;
  const auto a = double_selection(d, opt);
  const auto b = double_selection(d, opt);
  EXPECT_EQ(a.lambda_g, b.lambda_g);
  EXPECT_EQ(a.lambda_cov, b.lambda_cov);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.wald, b.wald);
  EXPECT_EQ(a.df, 2);
  EXPECT_NEAR(a.p_value, chi2_sf(a.wald, 2), 1e-12);
  EXPECT_NEAR(a.p_value, 1 - chi2_cdf(a.wald, 2), 1e-10);
  EXPECT_LT(a.max_kkt_violation, 1e-6);
  // Symmetric PSD covariance.
  EXPECT_LT((a.lambda_cov - a.lambda_cov.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a.lambda_cov);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  // Wald statistic from its definition.
  EXPECT_NEAR(a.wald, a.lambda_g.dot(a.lambda_cov.inverse() * a.lambda_g), 1e-8 * a.wald);
  // The union is sorted and covers both selections.
  EXPECT_TRUE(std::is_sorted(a.selected.begin(), a.selected.end()));
  for (int j : a.selected_first) EXPECT_TRUE(std::binary_search(a.selected.begin(), a.selected.end(), j));
  for (int j : a.selected_second) EXPECT_TRUE(std::binary_search(a.selected.begin(), a.selected.end(), j));
}

TEST(DoubleSelection, PostSelectionOlsAndHc0Oracle) {
  const auto d = random_zoo(60, 10, 1, 120, 9);
  ZooOptions opt;
  opt.grid_size = 30;
  const auto res = double_selection(d, opt);
  const auto m = compute_cross_moments(d);
  const Eigen::Index k = 2 + static_cast<Eigen::Index>(res.selected.size());
  MatrixXd x(60, k);
  x.col(0).setOnes();
  x.col(1) = m.cov_new.col(0);
  for (std::size_t s = 0; s < res.selected.size(); ++s) x.col(2 + static_cast<Eigen::Index>(s)) = m.cov_controls.col(res.selected[s]);
  const MatrixXd xtx_inv = (x.transpose() * x).inverse();
  const VectorXd coef = xtx_inv * x.transpose() * m.mean_returns;
  const VectorXd e = m.mean_returns - x * coef;
  MatrixXd meat = MatrixXd::Zero(k, k);
  for (int i = 0; i < 60; ++i) meat += e(i) * e(i) * x.row(i).transpose() * x.row(i);
  const MatrixXd cov = xtx_inv * meat * xtx_inv;
  EXPECT_NEAR(res.gamma0, coef(0), 1e-9);
  EXPECT_NEAR(res.lambda_g(0), coef(1), 1e-9 * (1 + std::abs(coef(1))));
  EXPECT_NEAR(res.lambda_cov(0, 0), cov(1, 1), 1e-9 * cov(1, 1));
}

TEST(DoubleSelection, ScaleEquivariance) {
  const auto d = random_zoo(70, 20, 2, 130, 10);
  ZooOptions opt;
  opt.grid_size = 30;
  const auto base = double_selection(d, opt);
  for (double c : {0.01, 3.0, 250.0}) {
    ZooDataset scaled = d;
    scaled.new_factors *= c;
    const auto r = double_selection(scaled, opt);
    EXPECT_EQ(r.selected, base.selected) << c;
    EXPECT_NEAR(r.wald, base.wald, 1e-8 * (1 + base.wald)) << c;
    EXPECT_NEAR(r.p_value, base.p_value, 1e-8) << c;
    EXPECT_LT((r.lambda_g * c - base.lambda_g).cwiseAbs().maxCoeff(), 1e-8 * (1 + base.lambda_g.norm()));
  }
}

TEST(DoubleSelection, DimensionalityAndEmptyNewFactors) {
  auto small = random_zoo(4, 3, 3, 40, 11);
  try {
    double_selection(small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionality);
  }
  auto none = random_zoo(20, 3, 1, 40, 12);
  none.new_factors.resize(0, 40);
  none.new_factor_names.clear();
  try {
    double_selection(none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
  // Many selected controls relative to n.
  auto tight = random_zoo(12, 30, 1, 60, 13);
  tight.returns += 5.0 * (MatrixXd::Random(12, 30) * tight.controls.topRows(30));
  ZooOptions opt;
  opt.grid_size = 20;
  opt.folds = 3;
  try {
    const auto r = double_selection(tight, opt);
    EXPECT_LT(static_cast<int>(r.selected.size()) + 2, 12);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionality) << e.what();
  }
}

TEST(ZooCsv, ParseAndAlign) {
  std::istringstream a("id,2000-01,2000-02,2000-03\np1,1,2,3\np2,4,5,6\np3,0,1,0\n");
  std::istringstream h("factor,200001,200002,200003\nh1,0.1,0.2,0.3\n");
  std::istringstream g("factor,2000-01,2000-02,2000-03\ng1,1,0,1\n");
  auto d = make_zoo_dataset(parse_series_by_row_csv(a), parse_series_by_row_csv(h), parse_series_by_row_csv(g));
  EXPECT_EQ(d.asset_ids.size(), 3u);
  EXPECT_EQ(d.returns(1, 2), 6.0);
  EXPECT_EQ(d.control_names[0], "h1");
  std::istringstream a2("id,2000-01,2000-02,2000-03\np1,1,2,3\n");
  std::istringstream h2("factor,2000-01,2000-02,2000-04\nh1,0.1,0.2,0.3\n");
  std::istringstream g2("factor,2000-01,2000-02,2000-03\ng1,1,0,1\n");
  EXPECT_THROW(make_zoo_dataset(parse_series_by_row_csv(a2), parse_series_by_row_csv(h2), parse_series_by_row_csv(g2)),
               Error);
}
