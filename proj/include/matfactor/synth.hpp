#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matfactor/ingest.hpp"
#include "matfactor/linalg.hpp"
#include "matfactor/rng.hpp"
#include "matfactor/tucker.hpp"
#include "matfactor/zoo.hpp"

namespace matfactor {

enum class SimulationKind { kTucker, kCp, kCrossSection };

std::string to_string(SimulationKind kind);

struct TuckerSimConfig {
  int n1 = 10;
  int n2 = 10;
  int r1 = 2;
  int r2 = 2;
  int periods = 200;
  double factor_ar = 0.6;
  double snr = 1.0;  // realized signal variance / noise variance; +inf for no noise
  double missing_rate = 0.0;
  std::uint64_t seed = 1;
};

struct CpSimConfig {
  int n1 = 10;
  int n2 = 10;
  int r = 2;
  int periods = 200;
  double loading_angle = 90.0;  // degrees between every pair of a_i (and of b_i)
  double factor_ar = 0.6;
  double snr = 1.0;
  double missing_rate = 0.0;
  std::vector<double> factor_scales;  // empty: r, r-1, ..., 1
  std::uint64_t seed = 1;
};

struct CrossSectionSimConfig {
  int n = 200;
  int p = 60;
  int r_new = 1;
  int periods = 300;
  Eigen::VectorXd lambda_g;  // empty: zeros (the null)
  int sparsity = 0;          // nonzero entries of lambda_h
  double lambda_h_size = 0.5;
  double gamma0 = 0.0;
  double idio_sd = 1.0;
  std::uint64_t seed = 1;
};

/// Everything needed to regenerate and score a simulated dataset.
struct SyntheticTruth {
  SimulationKind kind = SimulationKind::kTucker;
  std::string generator = "";
  std::uint64_t seed = 0;
  double factor_ar = 0.0;
  double snr = std::numeric_limits<double>::infinity();
  double noise_sd = 0.0;
  double missing_rate = 0.0;

  // Tucker
  Eigen::MatrixXd row_loadings;  // R
  Eigen::MatrixXd col_loadings;  // C
  MatrixSeries tucker_factors;   // F_t

  // CP
  double loading_angle = 90.0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd cp_factors;  // T x r
  Eigen::VectorXd factor_scales;

  // Cross section
  double gamma0 = 0.0;
  Eigen::VectorXd lambda_g;
  Eigen::VectorXd lambda_h;
  Eigen::MatrixXd beta_g;  // n x r_new
  Eigen::MatrixXd beta_h;  // n x p
  Eigen::VectorXd expected_returns;
  double idio_sd = 0.0;
};

struct SimulatedPanel {
  MatrixPanel panel;
  SyntheticTruth truth;
};

struct SimulatedCrossSection {
  ZooDataset dataset;
  SyntheticTruth truth;
};

/// X_t = R F_t C' + E_t with Haar-random orthonormal R, C and independent
/// AR(1) factor entries (unit innovations, stationary start).
SimulatedPanel simulate_tucker(const TuckerSimConfig& config);

/// X_t = sum_i f_it a_i b_i' + E_t with unit-norm, equiangular a_i and b_i.
SimulatedPanel simulate_cp(const CpSimConfig& config);

/// Cross-sectional pricing economy: factors are Gaussian draws whitened to an
/// exactly identity sample covariance, r_t = E(r) + B_g g_t + B_h h_t + e_t and
/// E(r) = gamma0 + B_g lambda_g + B_h lambda_h.
SimulatedCrossSection simulate_cross_section(const CrossSectionSimConfig& config);

/// n x k matrix with Haar-distributed orthonormal columns.
Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index k, Rng& rng);

/// Smallest achievable max angle (radians) between estimated and true columns
/// over all column permutations, ignoring signs. Brute force; small r only.
double matched_loading_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

/// As above, with one permutation shared by the a and b loadings.
double matched_cp_error(const Eigen::MatrixXd& a_estimate, const Eigen::MatrixXd& b_estimate,
                        const Eigen::MatrixXd& a_truth, const Eigen::MatrixXd& b_truth);

}  // namespace matfactor
