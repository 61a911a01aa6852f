#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "matfactor/error.hpp"
#include "matfactor/linalg.hpp"
#include "matfactor/synth.hpp"
#include "matfactor/zoo.hpp"
#include "test_support.hpp"

using namespace matfactor;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_panel(const MatrixPanel& a, const MatrixPanel& b) {
  if (a.periods() != b.periods() || a.dates != b.dates) return false;
  for (std::size_t t = 0; t < a.periods(); ++t) {
    // Bitwise, NaN included.
    if (std::memcmp(a.values[t].data(), b.values[t].data(), sizeof(double) * a.values[t].size()) != 0) return false;
    if ((a.missing[t] != b.missing[t]).any()) return false;
  }
  return true;
}

}  // namespace

TEST(SimulateTucker, NoNoiseReproducesSignal) {
  TuckerSimConfig c;
  c.snr = kInf;
  c.seed = 3;
  const auto s = simulate_tucker(c);
  EXPECT_EQ(s.truth.noise_sd, 0.0);
  EXPECT_EQ(s.truth.generator, std::string(Rng::kAlgorithm));
  EXPECT_LT(orthonormality_error(s.truth.row_loadings), 1e-12);
  EXPECT_LT(orthonormality_error(s.truth.col_loadings), 1e-12);
  for (std::size_t t = 0; t < s.panel.periods(); ++t) {
    const MatrixXd signal = s.truth.row_loadings * s.truth.tucker_factors[t] * s.truth.col_loadings.transpose();
    EXPECT_EQ(s.panel.values[t], signal);
  }
  EXPECT_EQ(s.panel.dates.front().yyyymm(), 190101);
}

TEST(SimulateTucker, WhiteFactorsHaveNoLagOneCorrelation) {
  TuckerSimConfig c;
  c.factor_ar = 0.0;
  c.periods = 400;
  c.seed = 5;
  const auto s = simulate_tucker(c);
  const double bound = 3 / std::sqrt(400.0);
  for (int i = 0; i < c.r1; ++i) {
    for (int j = 0; j < c.r2; ++j) {
      VectorXd f(400);
      for (int t = 0; t < 400; ++t) f(t) = s.truth.tucker_factors[static_cast<std::size_t>(t)](i, j);
      EXPECT_LT(std::abs(mftest::correlation(f.head(399), f.tail(399))), bound);
    }
  }
}

TEST(SimulateTucker, ArFactorsAreAutocorrelated) {
  TuckerSimConfig c;
  c.factor_ar = 0.8;
  c.periods = 2000;
  const auto s = simulate_tucker(c);
  VectorXd f(2000);
  for (int t = 0; t < 2000; ++t) f(t) = s.truth.tucker_factors[static_cast<std::size_t>(t)](0, 0);
  EXPECT_NEAR(mftest::correlation(f.head(1999), f.tail(1999)), 0.8, 0.05);
}

TEST(SimulateTucker, RealizedSignalToNoise) {
  TuckerSimConfig c;
  c.snr = 2.0;
  c.periods = 300;
  const auto s = simulate_tucker(c);
  double signal = 0, noise = 0;
  for (std::size_t t = 0; t < s.panel.periods(); ++t) {
    const MatrixXd g = s.truth.row_loadings * s.truth.tucker_factors[t] * s.truth.col_loadings.transpose();
    signal += g.squaredNorm();
    noise += (s.panel.values[t] - g).squaredNorm();
  }
  EXPECT_NEAR(signal / noise, 2.0, 0.1);
}

TEST(SimulateTucker, DeterministicAndSeedSensitive) {
  TuckerSimConfig c;
  c.seed = 7;
  c.missing_rate = 0.1;
  const auto a = simulate_tucker(c);
  const auto b = simulate_tucker(c);
  EXPECT_TRUE(same_panel(a.panel, b.panel));
  EXPECT_GT(a.panel.missing_count(), 0u);
  c.seed = 8;
  EXPECT_FALSE(same_panel(a.panel, simulate_tucker(c).panel));
}

TEST(SimulateTucker, MissingRateApproximate) {
  TuckerSimConfig c;
  c.missing_rate = 0.2;
  c.periods = 500;
  const auto s = simulate_tucker(c);
  const double share = static_cast<double>(s.panel.missing_count()) / (500.0 * 100.0);
  EXPECT_NEAR(share, 0.2, 0.01);
}

TEST(SimulateTucker, InvalidInputs) {
  TuckerSimConfig c;
  c.periods = 9;
  EXPECT_THROW(simulate_tucker(c), Error);
  c = {};
  c.factor_ar = 1.0;
  EXPECT_THROW(simulate_tucker(c), Error);
  c = {};
  c.r1 = 11;
  EXPECT_THROW(simulate_tucker(c), Error);
  c = {};
  c.snr = 0;
  EXPECT_THROW(simulate_tucker(c), Error);
}

TEST(SimulateCp, RightAngleGivesOrthonormalLoadings) {
  CpSimConfig c;
  c.r = 3;
  c.loading_angle = 90;
  const auto s = simulate_cp(c);
  EXPECT_LT((s.truth.a.transpose() * s.truth.a - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((s.truth.b.transpose() * s.truth.b - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SimulateCp, EquiangularLoadings) {
  CpSimConfig c;
  c.r = 3;
  c.loading_angle = 60;
  const auto s = simulate_cp(c);
  const double want = 60 * std::numbers::pi / 180;
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(s.truth.a.col(i).norm(), 1.0, 1e-12);
    for (int j = i + 1; j < 3; ++j) {
      EXPECT_NEAR(std::acos(s.truth.a.col(i).dot(s.truth.a.col(j))), want, 1e-10);
      EXPECT_NEAR(std::acos(s.truth.b.col(i).dot(s.truth.b.col(j))), want, 1e-10);
    }
  }
}

TEST(SimulateCp, NoiseFreeRankOne) {
  CpSimConfig c;
  c.r = 1;
  c.snr = kInf;
  const auto s = simulate_cp(c);
  for (const auto& x : s.panel.values) {
    Eigen::JacobiSVD<MatrixXd> svd(x);
    EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
  }
}

TEST(SimulateCp, SignalMatchesTruth) {
  CpSimConfig c;
  c.snr = kInf;
  c.factor_scales = {3.0, 0.5};
  const auto s = simulate_cp(c);
  for (std::size_t t = 0; t < s.panel.periods(); ++t) {
    MatrixXd g = MatrixXd::Zero(10, 10);
    for (int i = 0; i < 2; ++i) {
      g += s.truth.cp_factors(static_cast<Eigen::Index>(t), i) * s.truth.a.col(i) * s.truth.b.col(i).transpose();
    }
    EXPECT_LT((s.panel.values[t] - g).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SimulateCp, DeterministicAndInfeasible) {
  CpSimConfig c;
  c.loading_angle = 45;
  c.seed = 9;
  EXPECT_TRUE(same_panel(simulate_cp(c).panel, simulate_cp(c).panel));
  for (double bad : {0.0, -10.0, 95.0}) {
    c.loading_angle = bad;
    try {
      simulate_cp(c);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDomain);
    }
  }
  c = {};
  c.r = 11;
  EXPECT_THROW(simulate_cp(c), Error);
}

TEST(SimulateCrossSection, NullAndStructure) {
  CrossSectionSimConfig c;
  c.n = 50;
  c.p = 10;
  c.r_new = 2;
  c.periods = 120;
  c.sparsity = 3;
  c.gamma0 = 0.1;
  const auto s = simulate_cross_section(c);
  EXPECT_EQ(s.truth.lambda_g, VectorXd::Zero(2));
  EXPECT_EQ((s.truth.lambda_h.array() != 0).count(), 3);
  // Whitened factors: exactly identity sample covariance.
  MatrixXd all(12, 120);
  all << s.dataset.new_factors, s.dataset.controls;
  const MatrixXd centred = all.colwise() - all.rowwise().mean();
  const MatrixXd cov = centred * centred.transpose() / 120.0;
  EXPECT_LT((cov - MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
  const VectorXd er = s.truth.beta_g * s.truth.lambda_g + s.truth.beta_h * s.truth.lambda_h;
  EXPECT_LT((s.truth.expected_returns.array() - er.array() - 0.1).abs().maxCoeff(), 1e-12);
  // Without idiosyncratic noise, Cov(r, g) recovers the betas.
  c.idio_sd = 0;
  const auto quiet = simulate_cross_section(c);
  const auto m = compute_cross_moments(quiet.dataset);
  EXPECT_LT((m.cov_new - quiet.truth.beta_g).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((m.cov_controls - quiet.truth.beta_h).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((m.mean_returns - quiet.truth.expected_returns).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SimulateCrossSection, InvalidInputs) {
  CrossSectionSimConfig c;
  c.sparsity = 61;
  EXPECT_THROW(simulate_cross_section(c), Error);
  c = {};
  c.periods = 60;
  EXPECT_THROW(simulate_cross_section(c), Error);
  c = {};
  c.r_new = 0;
  EXPECT_THROW(simulate_cross_section(c), Error);
}

TEST(SimulateCrossSection, StrongPriceOfRiskSignRecovered) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    CrossSectionSimConfig c;
    c.r_new = 2;
    c.lambda_g = VectorXd(2);
    c.lambda_g << 0.6, -0.6;
    c.sparsity = 5;
    c.idio_sd = 0.2;
    c.seed = 100 + s;
    const auto sim = simulate_cross_section(c);
    const auto r = double_selection(sim.dataset);
    if (r.lambda_g(0) > 0 && r.lambda_g(1) < 0) ++hits;
  }
  EXPECT_GE(hits, 45);
}

TEST(SimulateCrossSection, NoPricingControlsRarelySelected) {
  int empty = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    CrossSectionSimConfig c;
    c.sparsity = 0;
    c.seed = 300 + s;
    const auto r = double_selection(simulate_cross_section(c).dataset);
    if (r.selected_first.empty()) ++empty;
  }
  EXPECT_GE(empty, 40);
}

TEST(SubspaceDistance, ClosedForms) {
  Rng rng(1);
  const MatrixXd u = random_orthonormal(6, 2, rng);
  EXPECT_LT(orthonormality_error(u), 1e-12);
  EXPECT_LT(subspace_distance(u, u), 1e-12);
  const MatrixXd q = random_orthonormal(6, 6, rng);
  EXPECT_NEAR(subspace_distance(q.leftCols(3), q.rightCols(3)), 1.0, 1e-12);
  for (double th : {0.1, 0.7, 1.3}) {
    MatrixXd a(3, 1), b(3, 1);
    a << 1, 0, 0;
    b << std::cos(th), std::sin(th), 0;
    EXPECT_NEAR(subspace_distance(a, b), std::sin(th), 1e-10);
  }
  try {
    subspace_distance(MatrixXd::Ones(3, 1), u.topRows(3).leftCols(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContract);
  }
}

TEST(SubspaceDistance, BasisFree) {
  Rng rng(2);
  const MatrixXd u = random_orthonormal(8, 3, rng);
  const MatrixXd rot = random_orthonormal(3, 3, rng);
  EXPECT_LT(subspace_distance(u, u * rot), 1e-12);
}

TEST(MatchedError, PermutationAndSign) {
  Rng rng(3);
  const MatrixXd t = random_orthonormal(5, 3, rng);
  MatrixXd e(5, 3);
  e << -t.col(2), t.col(0), t.col(1);
  EXPECT_LT(matched_loading_error(e, t), 1e-7);
  EXPECT_LT(matched_cp_error(e, e, t, t), 1e-7);
  MatrixXd b(5, 3);
  b << t.col(0), t.col(1), t.col(2);
  // a and b must share one permutation.
  EXPECT_GT(matched_cp_error(e, b, t, t), 0.5);
}
