#include "matfactor/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "matfactor/distributions.hpp"
#include "matfactor/error.hpp"
#include "matfactor/linalg.hpp"
#include "matfactor/regress.hpp"
#include "matfactor/rng.hpp"
#include "text.hpp"

namespace matfactor {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Standardized least-squares problem shared by fits along a lambda path.
struct LassoProblem {
  double y_mean = 0.0;
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;  // 0 for constant columns
  Eigen::MatrixXd gram;     // Z'Z / n
  Eigen::VectorXd score;    // Z'(y - ybar) / n

  LassoProblem(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    require(y.size() == x.rows(), ErrorCode::kStructural, "lasso: response and design lengths differ");
    require(x.rows() >= 2, ErrorCode::kDomain, "lasso: need at least two observations");
    require(y.allFinite() && x.allFinite(), ErrorCode::kNumeric, "lasso: non-finite input");
    const auto n = static_cast<double>(x.rows());
    y_mean = y.mean();
    x_mean = x.colwise().mean().transpose();
    Eigen::MatrixXd z = x.rowwise() - x_mean.transpose();
    x_scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sd = std::sqrt(z.col(j).squaredNorm() / n);
      const double magnitude = std::max(1.0, x.col(j).cwiseAbs().maxCoeff());
      x_scale(j) = sd > 1e-12 * magnitude ? sd : 0.0;
      if (x_scale(j) > 0) {
        z.col(j) /= x_scale(j);
      } else {
        z.col(j).setZero();
      }
    }
    gram = z.transpose() * z / n;
    score = z.transpose() * (y.array() - y_mean).matrix() / n;
  }

  // Coordinate descent from `beta` (standardized scale), updated in place.
  int solve(double lambda, Eigen::VectorXd& beta, const LassoOptions& options) const {
    require(lambda >= 0 && std::isfinite(lambda), ErrorCode::kDomain, "lasso: lambda must be finite and >= 0");
    const auto p = gram.rows();
    Eigen::VectorXd gb = gram * beta;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (x_scale(j) == 0.0) continue;
        const double old = beta(j);
        const double z = score(j) - gb(j) + gram(j, j) * old;
        const double next = soft_threshold(z, lambda) / gram(j, j);
        const double delta = next - old;
        if (delta != 0.0) {
          beta(j) = next;
          gb.noalias() += delta * gram.col(j);
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change < options.tol) return sweep;
    }
    raise(ErrorCode::kNumeric, "lasso did not converge in " + std::to_string(options.max_sweeps) + " sweeps");
  }

  LassoFit finish(double lambda, const Eigen::VectorXd& beta_std, int sweeps) const {
    LassoFit fit;
    fit.lambda = lambda;
    fit.sweeps = sweeps;
    fit.beta_standardized = beta_std;
    fit.beta = Eigen::VectorXd::Zero(beta_std.size());
    for (Eigen::Index j = 0; j < beta_std.size(); ++j) {
      if (x_scale(j) > 0) fit.beta(j) = beta_std(j) / x_scale(j);
    }
    fit.intercept = y_mean - x_mean.dot(fit.beta);
    return fit;
  }

  double lambda_max() const { return score.size() ? score.cwiseAbs().maxCoeff() : 0.0; }
};

void check_grid(const std::vector<double>& grid) {
  require(!grid.empty(), ErrorCode::kDomain, "lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0 && std::isfinite(grid[i]), ErrorCode::kDomain, "lambda grid values must be finite and >= 0");
    require(i == 0 || grid[i] <= grid[i - 1], ErrorCode::kDomain, "lambda grid must be descending");
  }
}

std::vector<int> support(const LassoFit& fit) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.beta(j) != 0.0) out.push_back(static_cast<int>(j));
  }
  return out;
}

Eigen::MatrixXd row_centred(const Eigen::MatrixXd& m) { return m.colwise() - m.rowwise().mean(); }

}  // namespace

void ZooDataset::validate() const {
  const auto t = static_cast<Eigen::Index>(dates.size());
  require(returns.cols() == t && controls.cols() == t && new_factors.cols() == t, ErrorCode::kStructural,
          "zoo inputs must share the same months");
  require(static_cast<std::size_t>(returns.rows()) == asset_ids.size() &&
              static_cast<std::size_t>(controls.rows()) == control_names.size() &&
              static_cast<std::size_t>(new_factors.rows()) == new_factor_names.size(),
          ErrorCode::kStructural, "zoo labels do not match matrix shapes");
  require(new_factors.rows() >= 1, ErrorCode::kDomain, "no new factors to test");
  require(returns.allFinite() && controls.allFinite() && new_factors.allFinite(), ErrorCode::kDomain,
          "zoo inputs contain missing or non-finite values");
  require(returns.rows() > new_factors.rows() + 1, ErrorCode::kDimensionality,
          "need more test assets than new factors plus one");
}

CrossMoments compute_cross_moments(const ZooDataset& data) {
  data.validate();
  const auto t = static_cast<double>(data.dates.size());
  require(data.dates.size() >= 3, ErrorCode::kDomain, "cross moments need T >= 3");
  const auto check_variance = [](const Eigen::MatrixXd& centred, const std::vector<std::string>& names) {
    for (Eigen::Index j = 0; j < centred.rows(); ++j) {
      const double scale = std::max(1.0, centred.row(j).cwiseAbs().maxCoeff());
      if (centred.row(j).squaredNorm() <= 1e-24 * scale * scale * static_cast<double>(centred.cols())) {
        raise(ErrorCode::kDegeneracy, "factor '" + names[static_cast<std::size_t>(j)] + "' has zero variance");
      }
    }
  };
  const Eigen::MatrixXd r = row_centred(data.returns);
  const Eigen::MatrixXd g = row_centred(data.new_factors);
  const Eigen::MatrixXd h = row_centred(data.controls);
  check_variance(g, data.new_factor_names);
  check_variance(h, data.control_names);
  CrossMoments out;
  out.mean_returns = data.returns.rowwise().mean();
  out.cov_new = r * g.transpose() / t;
  out.cov_controls = r * h.transpose() / t;
  return out;
}

LassoFit lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double lambda, const LassoOptions& options) {
  const LassoProblem problem(y, x);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  const int sweeps = problem.solve(lambda, beta, options);
  return problem.finish(lambda, beta, sweeps);
}

double lasso_lambda_max(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) { return LassoProblem(y, x).lambda_max(); }

std::vector<double> default_lambda_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int count, double ratio) {
  require(count >= 1, ErrorCode::kDomain, "grid needs at least one point");
  require(ratio > 0 && ratio <= 1, ErrorCode::kDomain, "grid ratio must be in (0, 1]");
  const double top = lasso_lambda_max(y, x);
  if (count == 1 || top == 0.0) return std::vector<double>(1, top);
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = std::log(ratio) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = top * std::exp(step * i);
  grid.front() = top;
  return grid;
}

KktReport lasso_kkt(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const LassoFit& fit) {
  const LassoProblem problem(y, x);
  const Eigen::VectorXd gradient = problem.score - problem.gram * fit.beta_standardized;
  KktReport report;
  for (Eigen::Index j = 0; j < gradient.size(); ++j) {
    if (problem.x_scale(j) == 0.0) continue;
    const double b = fit.beta_standardized(j);
    if (b == 0.0) {
      report.max_inactive_excess = std::max(report.max_inactive_excess, std::abs(gradient(j)) - fit.lambda);
    } else {
      const double target = b > 0 ? fit.lambda : -fit.lambda;
      report.max_active_gap = std::max(report.max_active_gap, std::abs(gradient(j) - target));
    }
  }
  return report;
}

LambdaSelection select_lambda_cv(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int folds,
                                 const std::vector<double>& grid, std::uint64_t seed) {
  check_grid(grid);
  require(folds >= 2, ErrorCode::kDomain, "cross-validation needs at least two folds");
  const auto n = static_cast<std::size_t>(x.rows());
  require(y.size() == x.rows(), ErrorCode::kStructural, "response and design lengths differ");
  require(static_cast<std::size_t>(folds) <= n, ErrorCode::kDomain,
          "cannot split " + std::to_string(n) + " observations into " + std::to_string(folds) + " non-empty folds");

  LambdaSelection out;
  if (grid.size() == 1) {
    out.lambda = grid.front();
    out.cv_mean.assign(1, 0.0);
    out.cv_se.assign(1, 0.0);
    return out;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));

  const std::size_t g = grid.size();
  Eigen::MatrixXd errors(folds, static_cast<Eigen::Index>(g));
  for (int k = 0; k < folds; ++k) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == k ? test : train).push_back(static_cast<Eigen::Index>(i));
    if (test.empty() || train.size() < 2) raise(ErrorCode::kDomain, "degenerate cross-validation fold");
    const Eigen::VectorXd y_train = y(train);
    const Eigen::MatrixXd x_train = x(train, Eigen::all);
    const Eigen::VectorXd y_test = y(test);
    const Eigen::MatrixXd x_test = x(test, Eigen::all);
    const LassoProblem problem(y_train, x_train);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    for (std::size_t l = 0; l < g; ++l) {
      const int sweeps = problem.solve(grid[l], beta, LassoOptions{});
      const LassoFit fit = problem.finish(grid[l], beta, sweeps);
      const Eigen::VectorXd pred = (x_test * fit.beta).array() + fit.intercept;
      errors(k, static_cast<Eigen::Index>(l)) = (y_test - pred).squaredNorm() / static_cast<double>(test.size());
    }
  }

  out.cv_mean.resize(g);
  out.cv_se.resize(g);
  for (std::size_t l = 0; l < g; ++l) {
    const Eigen::VectorXd e = errors.col(static_cast<Eigen::Index>(l));
    const double mean = e.mean();
    const double var = (e.array() - mean).square().sum() / (folds - 1);
    out.cv_mean[l] = mean;
    out.cv_se[l] = std::sqrt(var / folds);
  }
  out.min_index = static_cast<std::size_t>(std::min_element(out.cv_mean.begin(), out.cv_mean.end()) - out.cv_mean.begin());
  const double cutoff = out.cv_mean[out.min_index] + out.cv_se[out.min_index];
  out.index = out.min_index;
  for (std::size_t l = 0; l < out.min_index; ++l) {
    if (out.cv_mean[l] <= cutoff) {
      out.index = l;
      break;
    }
  }
  out.lambda = grid[out.index];
  return out;
}

ZooResult double_selection(const ZooDataset& data, const ZooOptions& options) {
  const CrossMoments moments = compute_cross_moments(data);
  const auto n = moments.mean_returns.size();
  const auto r = moments.cov_new.cols();

  ZooResult out;
  out.options = options;
  out.new_factor_names = data.new_factor_names;
  out.control_names = data.control_names;

  const auto select = [&](const Eigen::VectorXd& y, std::uint64_t seed, double& chosen) {
    const auto grid = default_lambda_grid(y, moments.cov_controls, options.grid_size, options.grid_ratio);
    chosen = select_lambda_cv(y, moments.cov_controls, options.folds, grid, seed).lambda;
    const LassoFit fit = lasso(y, moments.cov_controls, chosen);
    out.max_kkt_violation = std::max(out.max_kkt_violation, lasso_kkt(y, moments.cov_controls, fit).worst());
    return support(fit);
  };

  out.selected_first = select(moments.mean_returns, options.seed, out.lambda_first);
  std::set<int> second;
  for (Eigen::Index j = 0; j < r; ++j) {
    double chosen = 0.0;
    for (const int idx : select(moments.cov_new.col(j), options.seed, chosen)) second.insert(idx);
    out.lambda_second.push_back(chosen);
  }
  out.selected_second.assign(second.begin(), second.end());
  std::set<int> all(second);
  all.insert(out.selected_first.begin(), out.selected_first.end());
  out.selected.assign(all.begin(), all.end());

  const auto s = static_cast<Eigen::Index>(out.selected.size());
  if (s + r + 1 >= n) {
    raise(ErrorCode::kDimensionality, std::to_string(s) + " selected controls plus " + std::to_string(r) +
                                          " new factors and an intercept leave no residual degrees of freedom with n=" +
                                          std::to_string(n));
  }
  Eigen::MatrixXd design(n, 1 + r + s);
  design.col(0).setOnes();
  design.middleCols(1, r) = moments.cov_new;
  for (Eigen::Index j = 0; j < s; ++j) design.col(1 + r + j) = moments.cov_controls.col(out.selected[static_cast<std::size_t>(j)]);

  const RegressionResult fit = ols_fit(moments.mean_returns, design);
  out.gamma0 = fit.coef(0);
  out.lambda_g = fit.coef.segment(1, r);

  // HC0 sandwich (X'X)^-1 X' diag(e^2) X (X'X)^-1.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const auto k = design.cols();
  const Eigen::MatrixXd upper = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd bread = r_inv * r_inv.transpose();
  const Eigen::MatrixXd weighted = design.array().colwise() * fit.residuals.array();
  const Eigen::MatrixXd meat = weighted.transpose() * weighted;
  Eigen::MatrixXd cov = bread * meat * bread;
  cov = 0.5 * (cov + cov.transpose()).eval();
  out.lambda_cov = cov.block(1, 1, r, r);

  const EigenPairs eig = symmetric_eigen_desc(out.lambda_cov);
  const double top = std::max(eig.values(0), 0.0);
  Eigen::VectorXd inv_values = Eigen::VectorXd::Zero(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (eig.values(i) > top * 1e-12 && eig.values(i) > 0) {
      inv_values(i) = 1.0 / eig.values(i);
    } else {
      out.pseudo_inverse = true;
    }
  }
  const Eigen::VectorXd rotated = eig.vectors.transpose() * out.lambda_g;
  out.wald = (rotated.array().square() * inv_values.array()).sum();
  out.df = static_cast<int>(r);
  out.p_value = chi2_sf(out.wald, out.df);
  return out;
}

LabelledMatrix parse_series_by_row_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::is_blank(line)) break;
  }
  const auto header = detail::split_csv(line);
  require(header.size() >= 2, ErrorCode::kSchema, "header needs an identifier column and at least one date");
  LabelledMatrix out;
  for (std::size_t i = 1; i < header.size(); ++i) {
    try {
      out.dates.push_back(MonthStamp::parse(header[i]));
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    require(out.dates.size() < 2 || out.dates[out.dates.size() - 2] < out.dates.back(), ErrorCode::kStructural,
            "header dates must be strictly increasing");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      raise(ErrorCode::kStructural, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                        " cells, found " + std::to_string(cells.size()));
    }
    out.ids.emplace_back(cells[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto v = detail::parse_double(cells[i]);
      if (!v) throw ParseError(line_no, "malformed number '" + std::string(cells[i]) + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.dates.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t t = 0; t < out.dates.size(); ++t) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[i][t];
    }
  }
  return out;
}

ZooDataset make_zoo_dataset(LabelledMatrix assets, LabelledMatrix controls, LabelledMatrix new_factors) {
  require(assets.dates == controls.dates && assets.dates == new_factors.dates, ErrorCode::kStructural,
          "assets, controls and new factors must cover identical months");
  ZooDataset out;
  out.dates = std::move(assets.dates);
  out.asset_ids = std::move(assets.ids);
  out.control_names = std::move(controls.ids);
  out.new_factor_names = std::move(new_factors.ids);
  out.returns = std::move(assets.values);
  out.controls = std::move(controls.values);
  out.new_factors = std::move(new_factors.values);
  out.validate();
  return out;
}

}  // namespace matfactor
