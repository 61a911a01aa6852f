#include "matfactor/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "matfactor/error.hpp"

namespace matfactor {

namespace {

const MonthStamp kFirstSimulatedMonth{1901, 1};

void check_common(int periods, double factor_ar, double snr, double missing_rate) {
  require(periods >= 10, ErrorCode::kDomain, "simulation needs T >= 10");
  require(factor_ar > -1 && factor_ar < 1, ErrorCode::kDomain, "factor_ar must lie in (-1, 1)");
  require(snr > 0 && !std::isnan(snr), ErrorCode::kDomain, "snr must be positive");
  require(missing_rate >= 0 && missing_rate < 1, ErrorCode::kDomain, "missing_rate must lie in [0, 1)");
}

// T x k independent AR(1) columns with unit innovations, started from the
// stationary distribution.
Eigen::MatrixXd ar1_series(int periods, Eigen::Index k, double phi, Rng& rng) {
  Eigen::MatrixXd out(periods, k);
  const double stationary_sd = 1.0 / std::sqrt(1.0 - phi * phi);
  for (Eigen::Index j = 0; j < k; ++j) out(0, j) = stationary_sd * rng.normal();
  for (int t = 1; t < periods; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) out(t, j) = phi * out(t - 1, j) + rng.normal();
  }
  return out;
}

// Adds noise at the requested signal-to-noise ratio and punches the missing
// mask; returns the noise standard deviation used.
double finish_panel(MatrixSeries& x, double snr, double missing_rate, Rng& rng) {
  double signal = 0.0;
  double cells = 0.0;
  for (const auto& m : x) {
    signal += m.squaredNorm();
    cells += static_cast<double>(m.size());
  }
  const double noise_sd = std::isinf(snr) ? 0.0 : std::sqrt(signal / cells / snr);
  if (noise_sd > 0) {
    for (auto& m : x) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) += noise_sd * rng.normal();
      }
    }
  }
  if (missing_rate > 0) {
    for (auto& m : x) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          if (rng.uniform() < missing_rate) m(i, j) = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }
  return noise_sd;
}

// A = Q G^{1/2} with G = (1 - c) I + c 11', so every pair of columns meets at
// the same angle and every column has unit norm.
Eigen::MatrixXd equiangular(Eigen::Index n, Eigen::Index r, double cosine, Rng& rng) {
  const Eigen::MatrixXd q = random_orthonormal(n, r, rng);
  if (cosine == 0.0) return q;
  const Eigen::MatrixXd gram =
      (1.0 - cosine) * Eigen::MatrixXd::Identity(r, r) + cosine * Eigen::MatrixXd::Ones(r, r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::MatrixXd root = es.operatorSqrt();
  Eigen::MatrixXd a = q * root;
  for (Eigen::Index i = 0; i < r; ++i) a.col(i).normalize();
  return a;
}

template <typename Score>
double best_permutation(Eigen::Index r, Score score) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) worst = std::max(worst, score(i, perm[static_cast<std::size_t>(i)]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::string to_string(SimulationKind kind) {
  switch (kind) {
    case SimulationKind::kTucker:
      return "tucker";
    case SimulationKind::kCp:
      return "cp";
    case SimulationKind::kCrossSection:
      return "cross_section";
  }
  return "unknown";
}

Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index k, Rng& rng) {
  require(k >= 1 && k <= n, ErrorCode::kDomain, "orthonormal basis needs 1 <= k <= n");
  Eigen::MatrixXd g(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  // Fixing the signs of diag(R) makes Q Haar distributed.
  for (Eigen::Index j = 0; j < k; ++j) {
    if (qr.matrixQR()(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

SimulatedPanel simulate_tucker(const TuckerSimConfig& config) {
  check_common(config.periods, config.factor_ar, config.snr, config.missing_rate);
  require(config.r1 >= 1 && config.r1 <= config.n1 && config.r2 >= 1 && config.r2 <= config.n2, ErrorCode::kDomain,
          "Tucker ranks must satisfy 1 <= r1 <= n1 and 1 <= r2 <= n2");
  Rng rng(config.seed);
  SyntheticTruth truth;
  truth.kind = SimulationKind::kTucker;
  truth.generator = Rng::kAlgorithm;
  truth.seed = config.seed;
  truth.factor_ar = config.factor_ar;
  truth.snr = config.snr;
  truth.missing_rate = config.missing_rate;
  truth.row_loadings = random_orthonormal(config.n1, config.r1, rng);
  truth.col_loadings = random_orthonormal(config.n2, config.r2, rng);

  const Eigen::MatrixXd f = ar1_series(config.periods, config.r1 * config.r2, config.factor_ar, rng);
  MatrixSeries x;
  for (int t = 0; t < config.periods; ++t) {
    Eigen::MatrixXd ft(config.r1, config.r2);
    for (int i = 0; i < config.r1; ++i) {
      for (int j = 0; j < config.r2; ++j) ft(i, j) = f(t, i * config.r2 + j);
    }
    x.push_back(truth.row_loadings * ft * truth.col_loadings.transpose());
    truth.tucker_factors.push_back(std::move(ft));
  }
  truth.noise_sd = finish_panel(x, config.snr, config.missing_rate, rng);
  auto dates = month_sequence(kFirstSimulatedMonth, static_cast<std::size_t>(config.periods));
  return {MatrixPanel::from_matrices(std::move(dates), std::move(x)), std::move(truth)};
}

SimulatedPanel simulate_cp(const CpSimConfig& config) {
  check_common(config.periods, config.factor_ar, config.snr, config.missing_rate);
  require(config.r >= 1 && config.r <= std::min(config.n1, config.n2), ErrorCode::kDomain,
          "CP rank must satisfy 1 <= r <= min(n1, n2)");
  require(config.loading_angle > 0 && config.loading_angle <= 90, ErrorCode::kDomain,
          "loading_angle must lie in (0, 90] degrees");
  Eigen::VectorXd scales(config.r);
  if (config.factor_scales.empty()) {
    for (int i = 0; i < config.r; ++i) scales(i) = config.r - i;
  } else {
    require(static_cast<int>(config.factor_scales.size()) == config.r, ErrorCode::kDomain,
            "factor_scales needs one entry per component");
    for (int i = 0; i < config.r; ++i) {
      scales(i) = config.factor_scales[static_cast<std::size_t>(i)];
      require(scales(i) > 0 && std::isfinite(scales(i)), ErrorCode::kDomain, "factor scales must be positive");
    }
  }
  const double cosine = config.loading_angle == 90.0 ? 0.0 : std::cos(config.loading_angle * M_PI / 180.0);

  Rng rng(config.seed);
  SyntheticTruth truth;
  truth.kind = SimulationKind::kCp;
  truth.generator = Rng::kAlgorithm;
  truth.seed = config.seed;
  truth.factor_ar = config.factor_ar;
  truth.snr = config.snr;
  truth.missing_rate = config.missing_rate;
  truth.loading_angle = config.loading_angle;
  truth.factor_scales = scales;
  truth.a = equiangular(config.n1, config.r, cosine, rng);
  truth.b = equiangular(config.n2, config.r, cosine, rng);
  truth.cp_factors = ar1_series(config.periods, config.r, config.factor_ar, rng) * scales.asDiagonal();

  MatrixSeries x;
  for (int t = 0; t < config.periods; ++t) {
    x.push_back(truth.a * truth.cp_factors.row(t).asDiagonal() * truth.b.transpose());
  }
  truth.noise_sd = finish_panel(x, config.snr, config.missing_rate, rng);
  auto dates = month_sequence(kFirstSimulatedMonth, static_cast<std::size_t>(config.periods));
  return {MatrixPanel::from_matrices(std::move(dates), std::move(x)), std::move(truth)};
}

SimulatedCrossSection simulate_cross_section(const CrossSectionSimConfig& config) {
  const int n = config.n;
  const int p = config.p;
  const int r = config.r_new;
  const int periods = config.periods;
  require(r >= 1 && p >= 1, ErrorCode::kDomain, "need at least one control and one new factor");
  require(n > r + 1, ErrorCode::kDomain, "need n > r_new + 1 test assets");
  require(config.sparsity >= 0 && config.sparsity <= p, ErrorCode::kDomain, "sparsity must lie in [0, p]");
  require(periods > p + r + 1, ErrorCode::kDomain, "need T > p + r_new + 1 to whiten the factors");
  require(config.idio_sd >= 0 && std::isfinite(config.idio_sd), ErrorCode::kDomain, "idio_sd must be >= 0");
  Eigen::VectorXd lambda_g = config.lambda_g.size() ? config.lambda_g : Eigen::VectorXd::Zero(r);
  require(lambda_g.size() == r, ErrorCode::kDomain, "lambda_g needs r_new entries");

  Rng rng(config.seed);
  SyntheticTruth truth;
  truth.kind = SimulationKind::kCrossSection;
  truth.generator = Rng::kAlgorithm;
  truth.seed = config.seed;
  truth.gamma0 = config.gamma0;
  truth.lambda_g = lambda_g;
  truth.idio_sd = config.idio_sd;
  truth.noise_sd = config.idio_sd;

  // Columns 0..r-1 are g_t, the rest h_t.
  Eigen::MatrixXd factors(periods, r + p);
  for (Eigen::Index j = 0; j < factors.cols(); ++j) {
    for (int t = 0; t < periods; ++t) factors(t, j) = rng.normal();
  }
  factors.rowwise() -= factors.colwise().mean();
  const Eigen::MatrixXd sample_cov = factors.transpose() * factors / periods;
  const Eigen::LLT<Eigen::MatrixXd> llt(sample_cov);
  require(llt.info() == Eigen::Success, ErrorCode::kNumeric, "factor sample covariance is not positive definite");
  factors = llt.matrixU().transpose().solve(factors.transpose()).transpose();

  truth.beta_g.resize(n, r);
  truth.beta_h.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) truth.beta_g(i, j) = rng.normal();
    for (int j = 0; j < p; ++j) truth.beta_h(i, j) = rng.normal();
  }
  truth.lambda_h = Eigen::VectorXd::Zero(p);
  std::vector<std::size_t> slots(static_cast<std::size_t>(p));
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  for (int k = 0; k < config.sparsity; ++k) {
    const auto pick = static_cast<std::size_t>(k) + rng.index(static_cast<std::size_t>(p - k));
    std::swap(slots[static_cast<std::size_t>(k)], slots[pick]);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    truth.lambda_h(static_cast<Eigen::Index>(slots[static_cast<std::size_t>(k)])) = sign * config.lambda_h_size;
  }
  truth.expected_returns =
      (truth.beta_g * lambda_g + truth.beta_h * truth.lambda_h).array() + config.gamma0;

  ZooDataset data;
  data.dates = month_sequence(kFirstSimulatedMonth, static_cast<std::size_t>(periods));
  data.new_factors = factors.leftCols(r).transpose();
  data.controls = factors.rightCols(p).transpose();
  data.returns = (truth.beta_g * data.new_factors + truth.beta_h * data.controls).colwise() + truth.expected_returns;
  for (int t = 0; t < periods; ++t) {
    for (int i = 0; i < n; ++i) data.returns(i, t) += config.idio_sd * rng.normal();
  }
  for (int i = 0; i < n; ++i) data.asset_ids.push_back("A" + std::to_string(i + 1));
  for (int j = 0; j < p; ++j) data.control_names.push_back("H" + std::to_string(j + 1));
  for (int j = 0; j < r; ++j) data.new_factor_names.push_back("G" + std::to_string(j + 1));
  data.validate();
  return {std::move(data), std::move(truth)};
}

double matched_loading_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  require(estimate.rows() == truth.rows() && estimate.cols() == truth.cols() && truth.cols() >= 1,
          ErrorCode::kDomain, "loading matrices must have the same shape");
  require(truth.cols() <= 8, ErrorCode::kDomain, "permutation matching is limited to 8 columns");
  return best_permutation(truth.cols(),
                          [&](Eigen::Index i, Eigen::Index j) { return line_angle(estimate.col(j), truth.col(i)); });
}

double matched_cp_error(const Eigen::MatrixXd& a_estimate, const Eigen::MatrixXd& b_estimate,
                        const Eigen::MatrixXd& a_truth, const Eigen::MatrixXd& b_truth) {
  require(a_estimate.rows() == a_truth.rows() && a_estimate.cols() == a_truth.cols() &&
              b_estimate.rows() == b_truth.rows() && b_estimate.cols() == b_truth.cols() &&
              a_truth.cols() == b_truth.cols() && a_truth.cols() >= 1,
          ErrorCode::kDomain, "loading matrices must have matching shapes");
  require(a_truth.cols() <= 8, ErrorCode::kDomain, "permutation matching is limited to 8 columns");
  return best_permutation(a_truth.cols(), [&](Eigen::Index i, Eigen::Index j) {
    return std::max(line_angle(a_estimate.col(j), a_truth.col(i)), line_angle(b_estimate.col(j), b_truth.col(i)));
  });
}

}  // namespace matfactor
