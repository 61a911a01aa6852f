#include "matfactor/tucker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matfactor/error.hpp"
#include "matfactor/linalg.hpp"

namespace matfactor {

namespace {

void check_lag(std::size_t periods, int h0) {
  const auto t = static_cast<long>(periods);
  if (h0 < 1 || h0 > t - 2) {
    raise(ErrorCode::kDomain, "lag budget h0=" + std::to_string(h0) + " outside [1, T-2] for T=" + std::to_string(t));
  }
}

void check_shapes(std::span<const Eigen::MatrixXd> series) {
  require(!series.empty(), ErrorCode::kDomain, "empty matrix series");
  for (const auto& x : series) {
    require(x.rows() == series.front().rows() && x.cols() == series.front().cols(), ErrorCode::kStructural,
            "matrix series has inconsistent shapes");
  }
}

MatrixSeries oriented(std::span<const Eigen::MatrixXd> series, LoadingMode mode) {
  MatrixSeries out;
  out.reserve(series.size());
  for (const auto& x : series) out.push_back(mode == LoadingMode::kRows ? x : Eigen::MatrixXd(x.transpose()));
  return out;
}

}  // namespace

DemeanedPanel demean_panel(const MatrixPanel& panel) {
  require(panel.periods() >= 2, ErrorCode::kDomain, "demeaning needs T >= 2");
  const Eigen::Index n1 = panel.rows();
  const Eigen::Index n2 = panel.cols();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n1, n2);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(n1, n2);
  for (std::size_t t = 0; t < panel.periods(); ++t) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      for (Eigen::Index i = 0; i < n1; ++i) {
        if (panel.missing[t](i, j)) continue;
        sum(i, j) += panel.values[t](i, j);
        ++count(i, j);
      }
    }
  }
  DemeanedPanel out;
  out.mean.resize(n1, n2);
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index i = 0; i < n1; ++i) {
      if (count(i, j) == 0) {
        raise(ErrorCode::kDomain, "cell (" + panel.row_labels[static_cast<std::size_t>(i)] + ", " +
                                      panel.col_labels[static_cast<std::size_t>(j)] + ") is missing in every month");
      }
      out.mean(i, j) = sum(i, j) / count(i, j);
    }
  }
  out.panel = panel;
  for (std::size_t t = 0; t < panel.periods(); ++t) {
    auto& x = out.panel.values[t];
    x = panel.missing[t].select(Eigen::ArrayXXd::Zero(n1, n2), (panel.values[t] - out.mean).array()).matrix();
  }
  return out;
}

MatrixSeries estimation_series(const MatrixPanel& panel, bool demean) {
  DemeanedPanel d = demean_panel(panel);
  MatrixSeries out;
  out.reserve(panel.periods());
  for (auto& x : d.panel.values) {
    out.push_back(demean ? std::move(x) : Eigen::MatrixXd(x + d.mean));
  }
  return out;
}

Eigen::MatrixXd tipup_matrix(std::span<const Eigen::MatrixXd> series, LoadingMode mode, int h0) {
  check_shapes(series);
  check_lag(series.size(), h0);
  const MatrixSeries x = oriented(series, mode);
  const auto n = x.front().rows();
  const auto periods = static_cast<int>(x.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int h = 1; h <= h0; ++h) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t + h < periods; ++t) omega.noalias() += x[t] * x[t + h].transpose();
    omega /= static_cast<double>(periods - h);
    m.noalias() += omega * omega.transpose();
  }
  if (!m.allFinite()) raise(ErrorCode::kNumeric, "TIPUP co-moment matrix is not finite");
  return m;
}

Eigen::MatrixXd topup_matrix(std::span<const Eigen::MatrixXd> series, LoadingMode mode, int h0,
                             std::size_t max_columns) {
  check_shapes(series);
  check_lag(series.size(), h0);
  const MatrixSeries x = oriented(series, mode);
  const auto n = x.front().rows();
  const auto k = x.front().cols();
  const auto block = n * k;
  const auto columns = static_cast<std::size_t>(k) * static_cast<std::size_t>(block);
  if (columns > max_columns) {
    raise(ErrorCode::kDomain, "TOPUP workspace of " + std::to_string(columns) + " columns exceeds the bound of " +
                                  std::to_string(max_columns));
  }
  const auto periods = static_cast<int>(x.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(columns));
  Eigen::RowVectorXd lead(block);
  for (int h = 1; h <= h0; ++h) {
    phi.setZero();
    for (int t = 0; t + h < periods; ++t) {
      // (k,l) flattened row-major to match the (j,k,l) column ordering.
      for (Eigen::Index r = 0; r < n; ++r) lead.segment(r * k, k) = x[t + h].row(r);
      for (Eigen::Index j = 0; j < k; ++j) phi.middleCols(j * block, block).noalias() += x[t].col(j) * lead;
    }
    phi /= static_cast<double>(periods - h);
    m.noalias() += phi * phi.transpose();
  }
  if (!m.allFinite()) raise(ErrorCode::kNumeric, "TOPUP co-moment matrix is not finite");
  return m;
}

Eigen::MatrixXd tipup_loading(std::span<const Eigen::MatrixXd> series, LoadingMode mode, Eigen::Index rank,
                              int h0) {
  check_shapes(series);
  const auto n = mode == LoadingMode::kRows ? series.front().rows() : series.front().cols();
  require(rank >= 1 && rank <= n, ErrorCode::kDomain,
          "rank " + std::to_string(rank) + " exceeds mode dimension " + std::to_string(n));
  return top_eigenvectors(tipup_matrix(series, mode, h0), rank);
}

Eigen::MatrixXd topup_loading(std::span<const Eigen::MatrixXd> series, LoadingMode mode, Eigen::Index rank, int h0,
                              std::size_t max_columns) {
  check_shapes(series);
  const auto n = mode == LoadingMode::kRows ? series.front().rows() : series.front().cols();
  require(rank >= 1 && rank <= n, ErrorCode::kDomain,
          "rank " + std::to_string(rank) + " exceeds mode dimension " + std::to_string(n));
  return top_eigenvectors(topup_matrix(series, mode, h0, max_columns), rank);
}

TuckerModel iterative_tipup(std::span<const Eigen::MatrixXd> series, int r1, int r2, const TuckerOptions& options) {
  check_shapes(series);
  const auto n1 = series.front().rows();
  const auto n2 = series.front().cols();
  require(r1 >= 1 && r1 <= n1, ErrorCode::kDomain,
          "row rank " + std::to_string(r1) + " outside [1, " + std::to_string(n1) + "]");
  require(r2 >= 1 && r2 <= n2, ErrorCode::kDomain,
          "column rank " + std::to_string(r2) + " outside [1, " + std::to_string(n2) + "]");
  require(options.max_iter >= 1, ErrorCode::kDomain, "max_iter must be at least 1");
  require(options.tol > 0, ErrorCode::kDomain, "tol must be positive");
  check_lag(series.size(), options.h0);

  TuckerModel model;
  model.r1 = r1;
  model.r2 = r2;
  model.h0 = options.h0;
  model.demeaned = options.demean;

  Eigen::MatrixXd back = tipup_loading(series, LoadingMode::kCols, r2, options.h0);
  Eigen::MatrixXd front = tipup_loading(series, LoadingMode::kRows, r1, options.h0);

  MatrixSeries projected(series.size());
  for (int it = 1; it <= options.max_iter; ++it) {
    for (std::size_t t = 0; t < series.size(); ++t) projected[t].noalias() = series[t] * back;
    const Eigen::MatrixXd next_front = tipup_loading(projected, LoadingMode::kRows, r1, options.h0);
    for (std::size_t t = 0; t < series.size(); ++t) projected[t].noalias() = series[t].transpose() * next_front;
    const Eigen::MatrixXd next_back = tipup_loading(projected, LoadingMode::kRows, r2, options.h0);

    model.last_change = std::max(subspace_distance(front, next_front), subspace_distance(back, next_back));
    front = next_front;
    back = next_back;
    model.iterations = it;
    if (model.last_change < options.tol) {
      model.converged = true;
      break;
    }
  }

  model.front = std::move(front);
  model.back = std::move(back);
  model.factors.reserve(series.size());
  for (const auto& x : series) model.factors.push_back(model.front.transpose() * x * model.back);
  return model;
}

TuckerModel iterative_tipup(const MatrixPanel& panel, int r1, int r2, const TuckerOptions& options) {
  const DemeanedPanel d = demean_panel(panel);
  const MatrixSeries series = estimation_series(panel, options.demean);
  TuckerModel model = iterative_tipup(series, r1, r2, options);
  model.center = options.demean ? d.mean : Eigen::MatrixXd::Zero(panel.rows(), panel.cols());
  return model;
}

FactorSeries extract_tucker_factors(const MatrixPanel& panel, const TuckerModel& model) {
  require(model.front.rows() == panel.rows() && model.back.rows() == panel.cols(), ErrorCode::kDomain,
          "model loadings do not match the panel dimensions");
  const MatrixSeries series = estimation_series(panel, model.demeaned);
  FactorSeries out;
  out.dates = panel.dates;
  const auto r1 = model.front.cols();
  const auto r2 = model.back.cols();
  for (Eigen::Index k = 0; k < r1 * r2; ++k) out.names.push_back("TF" + std::to_string(k + 1));
  out.values.resize(static_cast<Eigen::Index>(series.size()), r1 * r2);
  for (std::size_t t = 0; t < series.size(); ++t) {
    const Eigen::MatrixXd f = model.front.transpose() * series[t] * model.back;
    for (Eigen::Index i = 0; i < r1; ++i) {
      for (Eigen::Index j = 0; j < r2; ++j) out.values(static_cast<Eigen::Index>(t), i * r2 + j) = f(i, j);
    }
  }
  return out;
}

MatrixSeries fitted_common_component(const TuckerModel& model) {
  MatrixSeries out;
  out.reserve(model.factors.size());
  for (const auto& f : model.factors) out.push_back(model.front * f * model.back.transpose());
  return out;
}

int eigen_ratio_rank(const Eigen::VectorXd& eigenvalues_desc, int max_rank) {
  require(max_rank >= 2, ErrorCode::kDomain, "max_rank must be at least 2");
  require(max_rank <= eigenvalues_desc.size(), ErrorCode::kDomain,
          "max_rank " + std::to_string(max_rank) + " exceeds the number of eigenvalues");
  const double top = std::max(eigenvalues_desc(0), 0.0);
  const double floor = top * 1e-12;
  const auto value = [&](int k) {  // 1-based
    const double v = eigenvalues_desc(k - 1);
    return v <= floor ? 0.0 : v;
  };
  int best = 1;
  double best_ratio = -1.0;
  for (int k = 1; k < max_rank; ++k) {
    if (value(k + 1) == 0.0) return k;
    const double ratio = value(k) / value(k + 1);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  return best;
}

int rank_suggest_eigen_ratio(const MatrixPanel& panel, LoadingMode mode, int max_rank, int h0) {
  const MatrixSeries series = estimation_series(panel, true);
  const Eigen::MatrixXd m = tipup_matrix(series, mode, h0);
  return eigen_ratio_rank(symmetric_eigen_desc(m).values, max_rank);
}

FactorSeries pca_vector_factors(const MatrixPanel& panel, int r) {
  const MatrixSeries series = estimation_series(panel, true);
  const Eigen::Index n1 = panel.rows();
  const Eigen::Index n2 = panel.cols();
  const Eigen::Index dim = n1 * n2;
  require(r >= 1 && r <= dim, ErrorCode::kDomain,
          "PCA rank " + std::to_string(r) + " outside [1, " + std::to_string(dim) + "]");
  const auto periods = static_cast<Eigen::Index>(series.size());
  Eigen::MatrixXd stacked(periods, dim);
  for (Eigen::Index t = 0; t < periods; ++t) {
    for (Eigen::Index i = 0; i < n1; ++i) stacked.row(t).segment(i * n2, n2) = series[static_cast<std::size_t>(t)].row(i);
  }
  const Eigen::MatrixXd cov = stacked.transpose() * stacked / static_cast<double>(periods);
  const Eigen::MatrixXd loadings = top_eigenvectors(cov, r);
  FactorSeries out;
  out.dates = panel.dates;
  for (int k = 0; k < r; ++k) out.names.push_back("PC" + std::to_string(k + 1));
  out.values = stacked * loadings;
  return out;
}

}  // namespace matfactor
