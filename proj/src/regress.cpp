#include "matfactor/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "matfactor/distributions.hpp"
#include "matfactor/error.hpp"
#include "matfactor/parallel.hpp"

namespace matfactor {

namespace {

constexpr double kCollinearityTol = 1e-10;

void check_full_rank(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd scaled = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double norm = x.col(j).norm();
    if (!(norm > 0)) raise(ErrorCode::kCollinearity, "design column " + std::to_string(j) + " is identically zero");
    scaled.col(j) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
  if (smallest < kCollinearityTol) {
    raise(ErrorCode::kCollinearity, "design is rank deficient (smallest scaled singular value " +
                                        std::to_string(smallest) + ")");
  }
}

double centred_ss(const Eigen::VectorXd& y) { return (y.array() - y.mean()).matrix().squaredNorm(); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& columns) {
  Eigen::MatrixXd out(columns.rows(), columns.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(columns.cols()) = columns;
  return out;
}

RegressionResult ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto k = x.cols();
  require(y.size() == n, ErrorCode::kStructural, "response and design have different lengths");
  require(k >= 1 && n > k, ErrorCode::kDomain,
          "need more observations (" + std::to_string(n) + ") than regressors (" + std::to_string(k) + ")");
  require(y.allFinite() && x.allFinite(), ErrorCode::kNumeric, "non-finite regression input");
  check_full_rank(x);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  RegressionResult out;
  out.coef = qr.solve(y);
  out.residuals = y - x * out.coef;
  out.rss = out.residuals.squaredNorm();
  out.n_obs = static_cast<int>(n);
  out.k = static_cast<int>(k);
  const double tss = centred_ss(y);
  out.r2 = tss > 0 ? std::clamp(1.0 - out.rss / tss, 0.0, 1.0) : 0.0;

  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const double sigma2 = out.rss / static_cast<double>(n - k);
  out.std_errors = (sigma2 * (r_inv * r_inv.transpose()).diagonal()).array().sqrt();
  return out;
}

PartialFResult partial_f_test(const RegressionResult& reduced, const RegressionResult& full) {
  require(reduced.n_obs == full.n_obs, ErrorCode::kContract, "partial F: models use different observations");
  require(full.k > reduced.k, ErrorCode::kContract, "partial F: full model must have more regressors");
  const double slack = 1e-12 * std::max(1.0, reduced.rss);
  require(reduced.rss >= full.rss - slack, ErrorCode::kContract,
          "partial F: reduced RSS below full RSS, models are not nested");
  PartialFResult out;
  out.df1 = full.k - reduced.k;
  out.df2 = full.n_obs - full.k;
  const double gain = std::max(0.0, reduced.rss - full.rss);
  if (full.rss == 0.0) {
    if (gain > 0) {
      out.f_stat = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
      out.infinite = true;
    }
    return out;
  }
  out.f_stat = (gain / out.df1) / (full.rss / out.df2);
  out.p_value = f_sf(out.f_stat, out.df1, out.df2);
  return out;
}

Eigen::VectorXd vif(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto k = x.cols();
  require(k >= 2 && n > k, ErrorCode::kDomain, "VIF needs at least two columns and more rows than columns");
  Eigen::VectorXd out(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::MatrixXd others(n, k - 1);
    others << x.leftCols(j), x.rightCols(k - j - 1);
    const Eigen::MatrixXd design = with_intercept(others);
    const Eigen::VectorXd target = x.col(j);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const double rss = (target - design * cod.solve(target)).squaredNorm();
    const double tss = centred_ss(target);
    const double r2 = tss > 0 ? 1.0 - rss / tss : 1.0;
    out(j) = r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return out;
}

FactorSeries residualize(const FactorSeries& targets, const FactorSeries& controls) {
  require(targets.dates == controls.dates, ErrorCode::kDomain, "residualize: series have different dates");
  const Eigen::MatrixXd design = with_intercept(controls.values);
  require(design.rows() > design.cols(), ErrorCode::kDomain, "residualize: too few observations");
  check_full_rank(design);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  FactorSeries out = targets;
  out.values = targets.values - design * qr.solve(targets.values);
  return out;
}

Histogram histogram_unit_interval(const std::vector<double>& values, int bins) {
  require(bins >= 1, ErrorCode::kDomain, "histogram needs at least one bin");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const double v : values) {
    if (std::isnan(v)) continue;
    const double clamped = std::clamp(v, 0.0, 1.0);
    const auto bin = std::min(bins - 1, static_cast<int>(std::floor(clamped * bins)));
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

PanelSummary run_panel_evaluation(const StockPanel& stocks, const FactorSeries& controls,
                                  const FactorSeries& stat_factors, const Eigen::VectorXd& rf,
                                  const PanelEvaluationOptions& options) {
  const auto periods = static_cast<Eigen::Index>(stocks.periods());
  require(controls.dates == stocks.dates, ErrorCode::kDomain, "control factors are not aligned with the stocks");
  require(stat_factors.dates == stocks.dates, ErrorCode::kDomain,
          "statistical factors are not aligned with the stocks");
  require(rf.size() == periods, ErrorCode::kDomain, "risk-free series is not aligned with the stocks");
  require(stat_factors.size() >= 1, ErrorCode::kDomain, "no statistical factors to evaluate");
  require(options.min_obs >= 0, ErrorCode::kDomain, "min_obs must be non-negative");

  const FactorSeries added = options.residualize ? residualize(stat_factors, controls) : stat_factors;
  const Eigen::MatrixXd reduced_all = with_intercept(controls.values);
  Eigen::MatrixXd full_all(periods, reduced_all.cols() + added.values.cols());
  full_all << reduced_all, added.values;
  const auto k_full = full_all.cols();

  const std::size_t n = stocks.size();
  std::vector<std::optional<StockFit>> fits(n);
  std::vector<std::string> reasons(n);
  parallel_for(n, options.threads, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < periods; ++t) {
      if (!stocks.missing(t, col)) rows.push_back(t);
    }
    const auto n_obs = static_cast<Eigen::Index>(rows.size());
    if (n_obs <= options.min_obs) {
      reasons[j] = "only " + std::to_string(n_obs) + " observations (need more than " +
                   std::to_string(options.min_obs) + ")";
      return;
    }
    if (n_obs <= k_full) {
      reasons[j] = "fewer observations than regressors";
      return;
    }
    Eigen::VectorXd y(n_obs);
    Eigen::MatrixXd xr(n_obs, reduced_all.cols());
    Eigen::MatrixXd xf(n_obs, k_full);
    for (Eigen::Index i = 0; i < n_obs; ++i) {
      const auto t = rows[static_cast<std::size_t>(i)];
      y(i) = stocks.returns(t, col) - rf(t);
      xr.row(i) = reduced_all.row(t);
      xf.row(i) = full_all.row(t);
    }
    try {
      const RegressionResult reduced = ols_fit(y, xr);
      const RegressionResult full = ols_fit(y, xf);
      const PartialFResult f = partial_f_test(reduced, full);
      fits[j] = StockFit{stocks.stock_ids[j], static_cast<int>(n_obs), reduced.r2, full.r2, f.f_stat, f.p_value};
    } catch (const Error& e) {
      reasons[j] = e.what();
    }
  });

  PanelSummary out;
  out.control_names = controls.names;
  out.stat_factor_names = stat_factors.names;
  out.residualized = options.residualize;
  std::vector<double> r2r, r2f, pv;
  for (std::size_t j = 0; j < n; ++j) {
    if (!fits[j]) {
      out.skipped.push_back({stocks.stock_ids[j], reasons[j]});
      continue;
    }
    out.stocks.push_back(*fits[j]);
    r2r.push_back(fits[j]->r2_reduced);
    r2f.push_back(fits[j]->r2_full);
    pv.push_back(fits[j]->p_value);
  }
  out.mean_r2_reduced = mean_of(r2r);
  out.median_r2_reduced = median_of(r2r);
  out.mean_r2_full = mean_of(r2f);
  out.median_r2_full = median_of(r2f);
  if (!pv.empty()) {
    const auto below = [&](double cut) {
      return static_cast<double>(std::count_if(pv.begin(), pv.end(), [cut](double p) { return p < cut; })) /
             static_cast<double>(pv.size());
    };
    out.share_p_below_05 = below(0.05);
    out.share_p_below_10 = below(0.10);
  }
  out.r2_reduced_hist = histogram_unit_interval(r2r);
  out.r2_full_hist = histogram_unit_interval(r2f);
  out.p_value_hist = histogram_unit_interval(pv);
  return out;
}

}  // namespace matfactor
