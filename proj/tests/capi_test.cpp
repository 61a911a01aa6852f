// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "matfactor/matfactor.h"
#include "plain_files.hpp"

namespace fs = std::filesystem;
using namespace mfplain;

namespace {

mf_dataset* ingest(const FrenchFiles& f, const char* start, const char* end, mf_status* status) {
  mf_ingest_options o;
  mf_ingest_options_init(&o);
  o.portfolios_path = f.portfolios.c_str();
  o.factors_path = f.factors.c_str();
  o.momentum_path = f.momentum.c_str();
  o.stocks_path = f.stocks.c_str();
  o.start = start;
  o.end = end;
  o.n1 = 3;
  o.n2 = 3;
  mf_dataset* ds = nullptr;
  *status = mf_ingest(&o, &ds);
  return ds;
}

mf_dataset* simulated_dataset(const Scratch& dir, const char* kind, const char* config) {
  mf_simulation* sim = nullptr;
  EXPECT_EQ(mf_simulate(kind, config, &sim), MF_OK) << mf_last_error();
  EXPECT_EQ(mf_simulation_write(sim, (dir / "sim").c_str()), MF_OK) << mf_last_error();
  mf_simulation_free(sim);
  mf_dataset* ds = nullptr;
  EXPECT_EQ(mf_dataset_read((dir / "sim").c_str(), &ds), MF_OK) << mf_last_error();
  return ds;
}

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STRNE(mf_version(), "");
  EXPECT_STREQ(mf_status_name(MF_OK), "ok");
  for (int s = 1; s <= 12; ++s) EXPECT_STRNE(mf_status_name(static_cast<mf_status>(s)), "");
}

TEST(CApi, NullArgumentsAreRejected) {
  mf_dataset* ds = nullptr;
  EXPECT_EQ(mf_dataset_read(nullptr, &ds), MF_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(mf_last_error(), "");
  EXPECT_EQ(mf_tucker_fit(nullptr, nullptr, nullptr), MF_ERR_INVALID_ARGUMENT);
  double buf[4];
  EXPECT_EQ(mf_tucker_row_loadings(nullptr, buf, 4), MF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mf_dataset_periods(nullptr), 0u);
  EXPECT_EQ(mf_zoo_df(nullptr), 0);
  EXPECT_TRUE(std::isnan(mf_zoo_wald(nullptr)));
  // Freeing null is a no-op.
  mf_dataset_free(nullptr);
  mf_tucker_free(nullptr);
  mf_cp_free(nullptr);
  mf_zoo_free(nullptr);
  mf_evaluation_free(nullptr);
  mf_simulation_free(nullptr);
}

TEST(CApi, LastErrorClearsOnSuccess) {
  mf_simulation* sim = nullptr;
  EXPECT_EQ(mf_simulate("bogus", "{}", &sim), MF_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(mf_last_error()).find("bogus"), std::string::npos);
  ASSERT_EQ(mf_simulate("tucker", "{\"t\": 20}", &sim), MF_OK);
  EXPECT_STREQ(mf_last_error(), "");
  mf_simulation_free(sim);
}

TEST(CApi, ConfigErrorsMapToCodes) {
  mf_simulation* sim = nullptr;
  EXPECT_EQ(mf_simulate("tucker", "{not json", &sim), MF_ERR_PARSE);
  EXPECT_EQ(mf_simulate("tucker", "{\"n3\": 4}", &sim), MF_ERR_SCHEMA);
  EXPECT_EQ(mf_simulate("cp", "{\"loading_angle\": 0}", &sim), MF_ERR_DOMAIN);
  EXPECT_EQ(sim, nullptr);
}

TEST(CApi, TuckerThroughHandles) {
  Scratch dir;
  mf_dataset* ds = simulated_dataset(dir, "tucker", "{\"snr\": \"inf\", \"t\": 200, \"seed\": 4}");
  ASSERT_NE(ds, nullptr);
  EXPECT_EQ(mf_dataset_periods(ds), 200u);
  EXPECT_EQ(mf_dataset_rows(ds), 10);
  EXPECT_EQ(mf_dataset_cols(ds), 10);
  EXPECT_EQ(mf_dataset_has_stocks(ds), 0);
  int ym = 0;
  ASSERT_EQ(mf_dataset_date(ds, 0, &ym), MF_OK);
  EXPECT_EQ(ym, 190101);
  double v = 0;
  EXPECT_EQ(mf_dataset_date(ds, 200, &ym), MF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mf_dataset_value(ds, 0, 10, 0, &v), MF_ERR_INVALID_ARGUMENT);

  mf_tucker_options o;
  mf_tucker_options_init(&o);
  o.r1 = 2;
  o.r2 = 2;
  mf_tucker* model = nullptr;
  ASSERT_EQ(mf_tucker_fit(ds, &o, &model), MF_OK) << mf_last_error();
  EXPECT_EQ(mf_tucker_converged(model), 1);
  std::vector<double> a(20);
  EXPECT_EQ(mf_tucker_row_loadings(model, a.data(), 19), MF_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(mf_tucker_row_loadings(model, a.data(), 20), MF_OK);
  // Column-major with unit-norm columns.
  double norm = 0;
  for (int i = 0; i < 10; ++i) norm += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
  EXPECT_NEAR(norm, 1.0, 1e-12);
  int s1 = 0, s2 = 0;
  ASSERT_EQ(mf_tucker_suggested_ranks(model, &s1, &s2), MF_OK);
  EXPECT_EQ(s1, 2);
  EXPECT_EQ(s2, 2);
  ASSERT_EQ(mf_tucker_write_factors(model, (dir / "tf.csv").c_str()), MF_OK);
  EXPECT_EQ(slurp(dir / "tf.csv").rfind("date,TF1,TF2,TF3,TF4\n", 0), 0u);
  mf_tucker_free(model);

  o.r1 = 11;
  EXPECT_EQ(mf_tucker_fit(ds, &o, &model), MF_ERR_DOMAIN);
  mf_dataset_free(ds);
}

TEST(CApi, CpThroughHandles) {
  Scratch dir;
  mf_dataset* ds =
      simulated_dataset(dir, "cp", "{\"snr\": \"inf\", \"t\": 300, \"loading_angle\": 60, \"seed\": 2}");
  ASSERT_NE(ds, nullptr);
  mf_cp_options o;
  mf_cp_options_init(&o);
  o.r = 2;
  mf_cp* model = nullptr;
  ASSERT_EQ(mf_cp_fit(ds, &o, &model), MF_OK) << mf_last_error();
  EXPECT_EQ(mf_cp_converged(model), 1);
  EXPECT_EQ(mf_cp_stalled(model), 0);
  std::vector<double> b(20);
  ASSERT_EQ(mf_cp_b(model, b.data(), b.size()), MF_OK);
  double dot = 0;
  for (int i = 0; i < 10; ++i) dot += b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(10 + i)];
  EXPECT_NEAR(std::abs(dot), 0.5, 1e-4);  // cos 60
  mf_cp_free(model);
  mf_dataset_free(ds);
}

TEST(CApi, IngestEvaluateAndRoundTrip) {
  Scratch dir;
  const auto files = write_french(dir, 48);
  mf_status st;
  mf_dataset* ds = ingest(files, "2000-01", "2003-12", &st);
  ASSERT_EQ(st, MF_OK) << mf_last_error();
  EXPECT_EQ(mf_dataset_periods(ds), 48u);
  EXPECT_EQ(mf_dataset_factor_count(ds), 5u);
  EXPECT_EQ(mf_dataset_has_stocks(ds), 1);
  ASSERT_EQ(mf_dataset_write(ds, (dir / "ds").c_str()), MF_OK);
  mf_dataset* back = nullptr;
  ASSERT_EQ(mf_dataset_read((dir / "ds").c_str(), &back), MF_OK);
  double x = 0, y = 0;
  mf_dataset_value(ds, 5, 1, 2, &x);
  mf_dataset_value(back, 5, 1, 2, &y);
  EXPECT_EQ(x, y);
  mf_dataset_free(back);

  mf_tucker_options to;
  mf_tucker_options_init(&to);
  to.r1 = 1;
  to.r2 = 1;
  mf_tucker* model = nullptr;
  ASSERT_EQ(mf_tucker_fit(ds, &to, &model), MF_OK) << mf_last_error();
  ASSERT_EQ(mf_tucker_write_factors(model, (dir / "tf.csv").c_str()), MF_OK);
  mf_tucker_free(model);

  mf_evaluate_options eo;
  mf_evaluate_options_init(&eo);
  mf_evaluation* ev = nullptr;
  ASSERT_EQ(mf_evaluate(ds, nullptr, (dir / "tf.csv").c_str(), &eo, &ev), MF_OK) << mf_last_error();
  EXPECT_EQ(mf_evaluation_stock_count(ev), 2u);
  EXPECT_EQ(mf_evaluation_skipped_count(ev), 1u);
  EXPECT_GE(mf_evaluation_mean_r2_full(ev), mf_evaluation_mean_r2_reduced(ev));
  const double share = mf_evaluation_share_p_below(ev, 0.05);
  EXPECT_TRUE(share == 0.0 || share == 0.5 || share == 1.0);
  ASSERT_EQ(mf_evaluation_write_histogram(ev, MF_HIST_P_VALUE, (dir / "h.csv").c_str()), MF_OK);
  EXPECT_EQ(mf_evaluation_write_histogram(ev, static_cast<mf_histogram_kind>(7), (dir / "h.csv").c_str()),
            MF_ERR_INVALID_ARGUMENT);
  mf_evaluation_free(ev);

  eo.controls = "Mkt-RF,Nope";
  EXPECT_NE(mf_evaluate(ds, nullptr, (dir / "tf.csv").c_str(), &eo, &ev), MF_OK);
  mf_evaluate_options_init(&eo);
  eo.min_obs = 100;
  ASSERT_EQ(mf_evaluate(ds, nullptr, (dir / "tf.csv").c_str(), &eo, &ev), MF_OK);
  EXPECT_EQ(mf_evaluation_stock_count(ev), 0u);
  mf_evaluation_free(ev);
  mf_dataset_free(ds);
}

TEST(CApi, IngestErrors) {
  Scratch dir;
  const auto files = write_french(dir, 24);
  mf_status st;
  EXPECT_EQ(ingest(files, "2000-13", "2001-12", &st), nullptr);
  EXPECT_EQ(st, MF_ERR_DOMAIN);  // well-formed but not a month
  EXPECT_EQ(ingest(files, "2000-1x", "2001-12", &st), nullptr);
  EXPECT_EQ(st, MF_ERR_PARSE);
  EXPECT_EQ(ingest(files, "1990-01", "1990-12", &st), nullptr);
  EXPECT_EQ(st, MF_ERR_DOMAIN);
  FrenchFiles missing = files;
  missing.portfolios = dir / "absent.csv";
  EXPECT_EQ(ingest(missing, "2000-01", "2001-12", &st), nullptr);
  EXPECT_EQ(st, MF_ERR_IO);
}

TEST(CApi, ZooThroughFiles) {
  Scratch dir;
  mf_simulation* sim = nullptr;
  ASSERT_EQ(mf_simulate("cross-section", "{\"lambda_g\": [0.5, -0.5], \"r_new\": 2, \"idio_sd\": 0.2, \"seed\": 3}",
                        &sim),
            MF_OK)
      << mf_last_error();
  ASSERT_EQ(mf_simulation_output_count(sim), 5u);
  EXPECT_STREQ(mf_simulation_output_name(sim, 0), "assets.csv");
  EXPECT_EQ(mf_simulation_output_name(sim, 5), nullptr);
  ASSERT_EQ(mf_simulation_write(sim, (dir / "cs").c_str()), MF_OK);
  mf_simulation_free(sim);

  mf_zoo_options o;
  mf_zoo_options_init(&o);
  mf_zoo* z = nullptr;
  ASSERT_EQ(mf_zoo_run((dir / "cs/assets.csv").c_str(), (dir / "cs/controls.csv").c_str(),
                       (dir / "cs/new_factors.csv").c_str(), &o, &z),
            MF_OK)
      << mf_last_error();
  EXPECT_EQ(mf_zoo_r_new(z), 2);
  EXPECT_EQ(mf_zoo_df(z), 2);
  double lg[2];
  EXPECT_EQ(mf_zoo_lambda_g(z, lg, 1), MF_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(mf_zoo_lambda_g(z, lg, 2), MF_OK);
  EXPECT_GT(lg[0], 0);
  EXPECT_LT(lg[1], 0);
  EXPECT_LT(mf_zoo_p_value(z), 0.05);
  EXPECT_GE(mf_zoo_selected_union_count(z), mf_zoo_selected_first_count(z));
  ASSERT_EQ(mf_zoo_write_result(z, (dir / "zoo.json").c_str()), MF_OK);
  const std::string first = slurp(dir / "zoo.json");
  mf_zoo_free(z);

  ASSERT_EQ(mf_zoo_run((dir / "cs/assets.csv").c_str(), (dir / "cs/controls.csv").c_str(),
                       (dir / "cs/new_factors.csv").c_str(), &o, &z),
            MF_OK);
  ASSERT_EQ(mf_zoo_write_result(z, (dir / "zoo.json").c_str()), MF_OK);
  EXPECT_EQ(slurp(dir / "zoo.json"), first);
  mf_zoo_free(z);

  o.folds = 1;
  EXPECT_EQ(mf_zoo_run((dir / "cs/assets.csv").c_str(), (dir / "cs/controls.csv").c_str(),
                       (dir / "cs/new_factors.csv").c_str(), &o, &z),
            MF_ERR_DOMAIN);
}
