#include "matfactor/cp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "matfactor/error.hpp"
#include "matfactor/linalg.hpp"

namespace matfactor {

namespace {

constexpr double kDegenerateNorm = 1e-10;

void check_rank(std::span<const Eigen::MatrixXd> series, int r) {
  require(!series.empty(), ErrorCode::kDomain, "empty matrix series");
  const auto limit = std::min(series.front().rows(), series.front().cols());
  require(r >= 1 && r <= limit, ErrorCode::kDomain,
          "CP rank " + std::to_string(r) + " outside [1, " + std::to_string(limit) + "]");
}

Eigen::VectorXd unit(const Eigen::VectorXd& v, const char* what) {
  const double norm = v.norm();
  if (!(norm > 0) || !std::isfinite(norm)) raise(ErrorCode::kDegeneracy, std::string(what) + " collapsed to zero");
  return v / norm;
}

Eigen::MatrixXd without_column(const Eigen::MatrixXd& m, Eigen::Index i) {
  Eigen::MatrixXd out(m.rows(), m.cols() - 1);
  out << m.leftCols(i), m.rightCols(m.cols() - i - 1);
  return out;
}

Eigen::VectorXd factor_values(std::span<const Eigen::MatrixXd> series, const Eigen::VectorXd& a_tilde,
                              const Eigen::VectorXd& b_tilde) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(series.size()));
  for (std::size_t t = 0; t < series.size(); ++t) f(static_cast<Eigen::Index>(t)) = a_tilde.dot(series[t] * b_tilde);
  return f;
}

}  // namespace

Eigen::VectorXd project_orthocomplement(const Eigen::MatrixXd& m, Eigen::Index i) {
  require(i >= 0 && i < m.cols(), ErrorCode::kDomain, "column index out of range");
  const double scale = m.col(i).norm();
  if (!(scale > 0)) raise(ErrorCode::kDegeneracy, "column " + std::to_string(i + 1) + " is zero");
  Eigen::VectorXd v = m.col(i) / scale;
  if (m.cols() > 1) {
    const Eigen::MatrixXd others = without_column(m, i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(rank);
    // Two passes of classical Gram-Schmidt keep the residual orthogonal to
    // working precision.
    v -= q * (q.transpose() * v);
    v -= q * (q.transpose() * v);
  }
  const double norm = v.norm();
  if (norm < kDegenerateNorm) {
    raise(ErrorCode::kDegeneracy, "column " + std::to_string(i + 1) + " lies in the span of the other columns");
  }
  return v / norm;
}

Eigen::MatrixXd project_orthocomplement_all(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.cols(); ++i) out.col(i) = project_orthocomplement(m, i);
  return out;
}

double cp_residual_ss(std::span<const Eigen::MatrixXd> series, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto n1 = a.rows();
  const auto n2 = b.rows();
  const auto r = a.cols();
  Eigen::MatrixXd basis(n1 * n2, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::MatrixXd outer = a.col(i) * b.col(i).transpose();
    basis.col(i) = Eigen::Map<const Eigen::VectorXd>(outer.data(), n1 * n2);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(qr.rank());
  double rss = 0.0;
  for (const auto& x : series) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), n1 * n2);
    rss += (v - q * (q.transpose() * v)).squaredNorm();
  }
  return rss;
}

CpLoadings cp_init(std::span<const Eigen::MatrixXd> series, int r, const CpOptions& options) {
  check_rank(series, r);
  TuckerOptions tucker_options;
  tucker_options.h0 = options.h0;
  tucker_options.max_iter = options.init_max_iter;
  tucker_options.tol = options.init_tol;
  const TuckerModel tucker = iterative_tipup(series, r, r, tucker_options);
  const MatrixSeries signal = fitted_common_component(tucker);

  const auto n1 = series.front().rows();
  const auto n2 = series.front().cols();
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(signal.size()), n1 * n2);
  for (std::size_t t = 0; t < signal.size(); ++t) {
    stacked.row(static_cast<Eigen::Index>(t)) = Eigen::Map<const Eigen::VectorXd>(signal[t].data(), n1 * n2);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() < r || !(sv(0) > 0) || sv(r - 1) <= sv(0) * 1e-12) {
    raise(ErrorCode::kDegeneracy, "fitted signal has fewer than " + std::to_string(r) + " non-zero singular values");
  }

  CpLoadings out{Eigen::MatrixXd(n1, r), Eigen::MatrixXd(n2, r)};
  for (int i = 0; i < r; ++i) {
    const Eigen::VectorXd v = svd.matrixV().col(i);
    const Eigen::Map<const Eigen::MatrixXd> shaped(v.data(), n1, n2);
    Eigen::JacobiSVD<Eigen::MatrixXd> pair(shaped, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!(pair.singularValues()(0) > 0)) raise(ErrorCode::kDegeneracy, "zero singular value in CP initialization");
    Eigen::VectorXd a = pair.matrixU().col(0);
    Eigen::VectorXd b = pair.matrixV().col(0);
    normalize_sign(a);
    normalize_sign(b);
    out.a.col(i) = a;
    out.b.col(i) = b;
  }
  return out;
}

CpLoadings cp_init(const MatrixPanel& panel, int r, const CpOptions& options) {
  const MatrixSeries series = estimation_series(panel, options.demean);
  return cp_init(series, r, options);
}

CPModel cp_fit(std::span<const Eigen::MatrixXd> series, int r, const CpOptions& options) {
  check_rank(series, r);
  require(options.max_iter >= 1, ErrorCode::kDomain, "max_iter must be at least 1");
  require(options.tol > 0, ErrorCode::kDomain, "tol must be positive");

  CpLoadings loadings = cp_init(series, r, options);
  Eigen::MatrixXd& a = loadings.a;
  Eigen::MatrixXd& b = loadings.b;
  const auto n1 = a.rows();
  const auto n2 = b.rows();

  CPModel model;
  model.r = r;
  model.demeaned = options.demean;
  model.rss_history.push_back(cp_residual_ss(series, a, b));

  // One sweep of the projection update, Gauss-Seidel over components.
  const auto sweep = [&](Eigen::MatrixXd& sa, Eigen::MatrixXd& sb) {
    for (Eigen::Index i = 0; i < r; ++i) {
      const Eigen::VectorXd a_tilde = project_orthocomplement(sa, i);
      const Eigen::VectorXd b_tilde = project_orthocomplement(sb, i);
      const Eigen::VectorXd f = factor_values(series, a_tilde, b_tilde);
      Eigen::VectorXd a_next = Eigen::VectorXd::Zero(n1);
      Eigen::VectorXd b_next = Eigen::VectorXd::Zero(n2);
      for (std::size_t t = 0; t < series.size(); ++t) {
        const double w = f(static_cast<Eigen::Index>(t));
        a_next.noalias() += w * (series[t] * b_tilde);
        b_next.noalias() += w * (series[t].transpose() * a_tilde);
      }
      a_next = unit(a_next, "CP loading a");
      b_next = unit(b_next, "CP loading b");
      normalize_sign(a_next);
      normalize_sign(b_next);
      sa.col(i) = a_next;
      sb.col(i) = b_next;
    }
  };
  const auto max_angle = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) m = std::max(m, line_angle(x.col(i), y.col(i)));
    return m;
  };
  const auto blend = [](const Eigen::MatrixXd& from, const Eigen::MatrixXd& to, double step) {
    Eigen::MatrixXd out = (1.0 - step) * from + step * to;
    out.colwise().normalize();
    return out;
  };

  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::MatrixXd a_next = a;
    Eigen::MatrixXd b_next = b;
    sweep(a_next, b_next);
    const double change = std::max(max_angle(a, a_next), max_angle(b, b_next));
    const double rss = model.rss_history.back();
    double rss_next = cp_residual_ss(series, a_next, b_next);
    model.iterations = it;
    model.last_change = change;
    if (change < options.tol) {
      // At the fixed point; keep whichever state fits better.
      if (rss_next <= rss) {
        a = a_next;
        b = b_next;
        model.rss_history.push_back(rss_next);
      }
      model.converged = true;
      break;
    }
    // Safeguard: the projection update is not a least-squares step, so it may
    // raise the residual. Backtrack along the step; give up when nothing helps.
    const Eigen::MatrixXd a_full = a_next;
    const Eigen::MatrixXd b_full = b_next;
    double step = 1.0;
    while (rss_next > rss && step > 1.0 / 1024) {
      step /= 2;
      a_next = blend(a, a_full, step);
      b_next = blend(b, b_full, step);
      rss_next = cp_residual_ss(series, a_next, b_next);
    }
    if (rss_next > rss) {
      model.stalled = true;
      break;
    }
    a = a_next;
    b = b_next;
    model.rss_history.push_back(rss_next);
  }

  Eigen::MatrixXd a_tilde = project_orthocomplement_all(a);
  Eigen::MatrixXd b_tilde = project_orthocomplement_all(b);
  Eigen::MatrixXd factors(static_cast<Eigen::Index>(series.size()), r);
  for (Eigen::Index i = 0; i < r; ++i) factors.col(i) = factor_values(series, a_tilde.col(i), b_tilde.col(i));

  // Order components by descending sample variance of their factor series.
  Eigen::VectorXd variance(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::VectorXd centred = factors.col(i).array() - factors.col(i).mean();
    variance(i) = centred.squaredNorm();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return variance(x) > variance(y); });

  model.a.resize(n1, r);
  model.b.resize(n2, r);
  model.a_tilde.resize(n1, r);
  model.b_tilde.resize(n2, r);
  model.factors.resize(factors.rows(), r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    model.a.col(k) = a.col(src);
    model.b.col(k) = b.col(src);
    model.a_tilde.col(k) = a_tilde.col(src);
    model.b_tilde.col(k) = b_tilde.col(src);
    model.factors.col(k) = factors.col(src);
  }
  return model;
}

CPModel cp_fit(const MatrixPanel& panel, int r, const CpOptions& options) {
  const DemeanedPanel d = demean_panel(panel);
  const MatrixSeries series = estimation_series(panel, options.demean);
  CPModel model = cp_fit(series, r, options);
  model.center = options.demean ? d.mean : Eigen::MatrixXd::Zero(panel.rows(), panel.cols());
  return model;
}

FactorSeries extract_cp_factors(const MatrixPanel& panel, const CPModel& model) {
  require(model.a_tilde.rows() == panel.rows() && model.b_tilde.rows() == panel.cols(), ErrorCode::kDomain,
          "model loadings do not match the panel dimensions");
  const MatrixSeries series = estimation_series(panel, model.demeaned);
  FactorSeries out;
  out.dates = panel.dates;
  for (int k = 0; k < model.a_tilde.cols(); ++k) out.names.push_back("CP" + std::to_string(k + 1));
  out.values.resize(static_cast<Eigen::Index>(series.size()), model.a_tilde.cols());
  for (Eigen::Index i = 0; i < model.a_tilde.cols(); ++i) {
    out.values.col(i) = factor_values(series, model.a_tilde.col(i), model.b_tilde.col(i));
  }
  return out;
}

}  // namespace matfactor
