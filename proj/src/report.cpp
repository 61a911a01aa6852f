#include "matfactor/report.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "matfactor/error.hpp"
#include "matfactor/io.hpp"
#include "text.hpp"

namespace matfactor {

using nlohmann::json;

namespace {

// JSON has no inf or NaN; those are written as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return detail::format_double(v);
}

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

json mat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_object(std::string_view text, const std::set<std::string>& allowed, std::string_view what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
  require(j.is_object(), ErrorCode::kSchema, std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    require(allowed.count(key) > 0, ErrorCode::kSchema, std::string(what) + ": unknown key '" + key + "'");
  }
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception&) {
    raise(ErrorCode::kSchema, std::string("config key '") + key + "' has the wrong type");
  }
}

// snr may be a number or the string "inf".
void take_snr(const json& j, double& target) {
  if (!j.contains("snr")) return;
  const auto& v = j.at("snr");
  if (v.is_string()) {
    const auto s = detail::lower(v.get<std::string>());
    require(s == "inf" || s == "infinity", ErrorCode::kSchema, "snr must be a number or \"inf\"");
    target = std::numeric_limits<double>::infinity();
    return;
  }
  take(j, "snr", target);
}

json common_truth(const SyntheticTruth& truth) {
  json j;
  j["kind"] = to_string(truth.kind);
  j["generator"] = truth.generator;
  j["seed"] = truth.seed;
  return j;
}

}  // namespace

std::string tucker_model_json(const TuckerModel& model, const MatrixPanel& panel, int suggested_r1,
                              int suggested_r2) {
  json j;
  j["model"] = "tucker";
  j["estimator"] = "iterative_tipup";
  j["r1"] = model.r1;
  j["r2"] = model.r2;
  j["h0"] = model.h0;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["last_change"] = num(model.last_change);
  j["demeaned"] = model.demeaned;
  j["row_labels"] = panel.row_labels;
  j["col_labels"] = panel.col_labels;
  j["row_loadings"] = mat(model.front);
  j["col_loadings"] = mat(model.back);
  j["center"] = mat(model.center);
  j["eigen_ratio_suggestion"] = {{"r1", suggested_r1}, {"r2", suggested_r2}};
  return dump(j);
}

std::string cp_model_json(const CPModel& model, const MatrixPanel& panel) {
  json j;
  j["model"] = "cp";
  j["r"] = model.r;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["stalled"] = model.stalled;
  j["last_change"] = num(model.last_change);
  j["demeaned"] = model.demeaned;
  j["row_labels"] = panel.row_labels;
  j["col_labels"] = panel.col_labels;
  j["a"] = mat(model.a);
  j["b"] = mat(model.b);
  j["a_tilde"] = mat(model.a_tilde);
  j["b_tilde"] = mat(model.b_tilde);
  j["center"] = mat(model.center);
  json rss = json::array();
  for (const double v : model.rss_history) rss.push_back(num(v));
  j["rss_history"] = rss;
  return dump(j);
}

std::string stock_fits_csv(const PanelSummary& summary) {
  std::ostringstream out;
  out << "stock_id,n_obs,r2_reduced,r2_full,f_stat,p_value\n";
  for (const auto& s : summary.stocks) {
    out << s.stock_id << ',' << s.n_obs << ',' << format_number(s.r2_reduced) << ',' << format_number(s.r2_full)
        << ',' << format_number(s.f_stat) << ',' << format_number(s.p_value) << '\n';
  }
  return out.str();
}

std::string panel_summary_json(const PanelSummary& summary) {
  json j;
  j["stocks_fitted"] = summary.stocks.size();
  j["stocks_skipped"] = summary.skipped.size();
  json skipped = json::array();
  for (const auto& s : summary.skipped) skipped.push_back({{"stock_id", s.stock_id}, {"reason", s.reason}});
  j["skipped"] = skipped;
  j["mean_r2_reduced"] = num(summary.mean_r2_reduced);
  j["median_r2_reduced"] = num(summary.median_r2_reduced);
  j["mean_r2_full"] = num(summary.mean_r2_full);
  j["median_r2_full"] = num(summary.median_r2_full);
  j["share_p_below_05"] = num(summary.share_p_below_05);
  j["share_p_below_10"] = num(summary.share_p_below_10);
  j["control_factors"] = summary.control_names;
  j["stat_factors"] = summary.stat_factor_names;
  j["residualized"] = summary.residualized;
  j["histogram_bins"] = kHistogramBins;
  return dump(j);
}

std::string histogram_csv(const Histogram& histogram) {
  std::ostringstream out;
  out << "bin,lower,upper,count\n";
  const auto bins = histogram.counts.size();
  for (std::size_t b = 0; b < bins; ++b) {
    out << b + 1 << ',' << format_number(static_cast<double>(b) / static_cast<double>(bins)) << ','
        << format_number(static_cast<double>(b + 1) / static_cast<double>(bins)) << ',' << histogram.counts[b]
        << '\n';
  }
  return out.str();
}

std::string zoo_result_json(const ZooResult& result, const ZooDataset& data) {
  json j;
  j["new_factors"] = result.new_factor_names;
  j["lambda_g"] = vec(result.lambda_g);
  j["lambda_cov"] = mat(result.lambda_cov);
  j["gamma0"] = num(result.gamma0);
  const auto named = [&](const std::vector<int>& idx) {
    json out = json::array();
    for (const int i : idx) out.push_back({{"index", i}, {"name", result.control_names[static_cast<std::size_t>(i)]}});
    return out;
  };
  j["selected_first"] = named(result.selected_first);
  j["selected_second"] = named(result.selected_second);
  j["selected_union"] = named(result.selected);
  j["wald"] = num(result.wald);
  j["df"] = result.df;
  j["p_value"] = num(result.p_value);
  j["pseudo_inverse_warning"] = result.pseudo_inverse;
  j["tuning"] = {{"folds", result.options.folds},
                 {"seed", result.options.seed},
                 {"grid_size", result.options.grid_size},
                 {"grid_ratio", num(result.options.grid_ratio)},
                 {"selection_rule", "1se"},
                 {"lambda_first", num(result.lambda_first)},
                 {"lambda_second", vec(Eigen::Map<const Eigen::VectorXd>(result.lambda_second.data(),
                                                                          static_cast<Eigen::Index>(result.lambda_second.size())))},
                 {"max_kkt_violation", num(result.max_kkt_violation)},
                 {"standardized_controls", true}};
  j["covariance"] = "HC0 cross-sectional; ignores estimation error in the covariance regressors";
  j["n_assets"] = data.asset_ids.size();
  j["n_controls"] = data.control_names.size();
  j["periods"] = data.dates.size();
  return dump(j);
}

std::string truth_json(const SyntheticTruth& truth) {
  json j = common_truth(truth);
  switch (truth.kind) {
    case SimulationKind::kTucker: {
      j["factor_ar"] = num(truth.factor_ar);
      j["snr"] = num(truth.snr);
      j["noise_sd"] = num(truth.noise_sd);
      j["missing_rate"] = num(truth.missing_rate);
      j["row_loadings"] = mat(truth.row_loadings);
      j["col_loadings"] = mat(truth.col_loadings);
      json f = json::array();
      for (const auto& ft : truth.tucker_factors) f.push_back(mat(ft));
      j["factors"] = f;
      break;
    }
    case SimulationKind::kCp:
      j["factor_ar"] = num(truth.factor_ar);
      j["snr"] = num(truth.snr);
      j["noise_sd"] = num(truth.noise_sd);
      j["missing_rate"] = num(truth.missing_rate);
      j["loading_angle"] = num(truth.loading_angle);
      j["factor_scales"] = vec(truth.factor_scales);
      j["a"] = mat(truth.a);
      j["b"] = mat(truth.b);
      j["factors"] = mat(truth.cp_factors);
      break;
    case SimulationKind::kCrossSection:
      j["gamma0"] = num(truth.gamma0);
      j["lambda_g"] = vec(truth.lambda_g);
      j["lambda_h"] = vec(truth.lambda_h);
      j["null_lambda_g"] = truth.lambda_g.size() == 0 || truth.lambda_g.isZero(0.0);
      j["beta_g"] = mat(truth.beta_g);
      j["beta_h"] = mat(truth.beta_h);
      j["expected_returns"] = vec(truth.expected_returns);
      j["idio_sd"] = num(truth.idio_sd);
      break;
  }
  return dump(j);
}

TuckerSimConfig tucker_sim_config_from_json(std::string_view text) {
  const json j = parse_object(
      text, {"n1", "n2", "r1", "r2", "t", "factor_ar", "snr", "missing_rate", "seed"}, "tucker simulation config");
  TuckerSimConfig c;
  take(j, "n1", c.n1);
  take(j, "n2", c.n2);
  take(j, "r1", c.r1);
  take(j, "r2", c.r2);
  take(j, "t", c.periods);
  take(j, "factor_ar", c.factor_ar);
  take_snr(j, c.snr);
  take(j, "missing_rate", c.missing_rate);
  take(j, "seed", c.seed);
  return c;
}

CpSimConfig cp_sim_config_from_json(std::string_view text) {
  const json j = parse_object(text,
                              {"n1", "n2", "r", "t", "loading_angle", "factor_ar", "snr", "missing_rate",
                               "factor_scales", "seed"},
                              "cp simulation config");
  CpSimConfig c;
  take(j, "n1", c.n1);
  take(j, "n2", c.n2);
  take(j, "r", c.r);
  take(j, "t", c.periods);
  take(j, "loading_angle", c.loading_angle);
  take(j, "factor_ar", c.factor_ar);
  take_snr(j, c.snr);
  take(j, "missing_rate", c.missing_rate);
  take(j, "factor_scales", c.factor_scales);
  take(j, "seed", c.seed);
  return c;
}

CrossSectionSimConfig cross_section_sim_config_from_json(std::string_view text) {
  const json j = parse_object(text,
                              {"n", "p", "r_new", "t", "lambda_g", "sparsity", "lambda_h_size", "gamma0", "idio_sd",
                               "seed"},
                              "cross-section simulation config");
  CrossSectionSimConfig c;
  take(j, "n", c.n);
  take(j, "p", c.p);
  take(j, "r_new", c.r_new);
  take(j, "t", c.periods);
  std::vector<double> lambda_g;
  take(j, "lambda_g", lambda_g);
  if (!lambda_g.empty()) c.lambda_g = Eigen::Map<const Eigen::VectorXd>(lambda_g.data(), static_cast<Eigen::Index>(lambda_g.size()));
  take(j, "sparsity", c.sparsity);
  take(j, "lambda_h_size", c.lambda_h_size);
  take(j, "gamma0", c.gamma0);
  take(j, "idio_sd", c.idio_sd);
  take(j, "seed", c.seed);
  return c;
}

std::string sim_config_json(const TuckerSimConfig& c) {
  json j{{"n1", c.n1}, {"n2", c.n2}, {"r1", c.r1}, {"r2", c.r2}, {"t", c.periods}, {"factor_ar", num(c.factor_ar)},
         {"snr", num(c.snr)}, {"missing_rate", num(c.missing_rate)}, {"seed", c.seed}};
  return dump(j);
}

std::string sim_config_json(const CpSimConfig& c) {
  json j{{"n1", c.n1}, {"n2", c.n2}, {"r", c.r}, {"t", c.periods}, {"loading_angle", num(c.loading_angle)},
         {"factor_ar", num(c.factor_ar)}, {"snr", num(c.snr)}, {"missing_rate", num(c.missing_rate)},
         {"factor_scales", c.factor_scales}, {"seed", c.seed}};
  return dump(j);
}

std::string sim_config_json(const CrossSectionSimConfig& c) {
  json j{{"n", c.n}, {"p", c.p}, {"r_new", c.r_new}, {"t", c.periods}, {"lambda_g", vec(c.lambda_g)},
         {"sparsity", c.sparsity}, {"lambda_h_size", num(c.lambda_h_size)}, {"gamma0", num(c.gamma0)},
         {"idio_sd", num(c.idio_sd)}, {"seed", c.seed}};
  return dump(j);
}

std::string series_by_row_csv(const std::vector<std::string>& ids, const std::vector<MonthStamp>& dates,
                              const Eigen::MatrixXd& values) {
  require(values.rows() == static_cast<Eigen::Index>(ids.size()) &&
              values.cols() == static_cast<Eigen::Index>(dates.size()),
          ErrorCode::kStructural, "labels do not match the matrix shape");
  std::ostringstream out;
  out << "id";
  for (const auto& d : dates) out << ',' << d.yyyymm();
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < values.cols(); ++t) out << ',' << format_number(values(i, t));
    out << '\n';
  }
  return out.str();
}

}  // namespace matfactor
