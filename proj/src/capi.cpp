#include "matfactor/matfactor.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <variant>

#include "matfactor/cp.hpp"
#include "matfactor/error.hpp"
#include "matfactor/io.hpp"
#include "matfactor/regress.hpp"
#include "matfactor/report.hpp"
#include "matfactor/synth.hpp"
#include "matfactor/tucker.hpp"
#include "matfactor/zoo.hpp"
#include "text.hpp"

namespace fs = std::filesystem;
using namespace matfactor;

struct mf_dataset {
  AlignedDataset data;
};

struct mf_tucker {
  TuckerModel model;
  MatrixPanel panel;
  int suggested_r1 = 0;
  int suggested_r2 = 0;
};

struct mf_cp {
  CPModel model;
  MatrixPanel panel;
};

struct mf_evaluation {
  PanelSummary summary;
};

struct mf_zoo {
  ZooResult result;
  ZooDataset data;
};

struct mf_simulation {
  std::string config_json;
  std::variant<SimulatedPanel, SimulatedCrossSection> output;
  std::vector<std::string> outputs;
};

namespace {

thread_local std::string g_last_error;

struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Body>
mf_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return MF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<mf_status>(static_cast<int>(e.code()));
  } catch (const InvalidArgument& e) {
    g_last_error = e.what();
    return MF_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MF_ERR_INTERNAL;
  } catch (const fs::filesystem_error& e) {
    g_last_error = e.what();
    return MF_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MF_ERR_INTERNAL;
  }
}

template <typename T>
const T& deref(const T* p, const char* what) {
  if (p == nullptr) throw InvalidArgument(std::string("null ") + what);
  return *p;
}

const char* need_string(const char* s, const char* what) {
  if (s == nullptr) throw InvalidArgument(std::string(what) + " is required");
  return s;
}

template <typename Out>
void need_out(Out** out) {
  if (out == nullptr) throw InvalidArgument("null output pointer");
  *out = nullptr;
}

void copy_matrix(const Eigen::MatrixXd& m, double* out, std::size_t len) {
  if (out == nullptr) throw InvalidArgument("null output buffer");
  if (len < static_cast<std::size_t>(m.size())) {
    throw InvalidArgument("buffer holds " + std::to_string(len) + " values, need " + std::to_string(m.size()));
  }
  Eigen::Map<Eigen::MatrixXd>(out, m.rows(), m.cols()) = m;
}

std::vector<std::string> split_names(const char* text) {
  std::vector<std::string> out;
  for (const auto cell : detail::split_csv(text)) {
    if (!cell.empty()) out.emplace_back(cell);
  }
  return out;
}

// Reindexes a stock panel onto the sample months; months the file lacks are
// missing.
StockPanel onto_dates(const StockPanel& stocks, const std::vector<MonthStamp>& dates) {
  StockPanel out;
  out.dates = dates;
  out.stock_ids = stocks.stock_ids;
  const auto t_out = static_cast<Eigen::Index>(dates.size());
  const auto n = static_cast<Eigen::Index>(stocks.size());
  out.returns = Eigen::MatrixXd::Constant(t_out, n, std::numeric_limits<double>::quiet_NaN());
  out.missing = BoolMatrix::Constant(t_out, n, true);
  std::size_t src = 0;
  for (std::size_t t = 0; t < dates.size(); ++t) {
    while (src < stocks.dates.size() && stocks.dates[src] < dates[t]) ++src;
    if (src < stocks.dates.size() && stocks.dates[src] == dates[t]) {
      const auto row = static_cast<Eigen::Index>(t);
      out.returns.row(row) = stocks.returns.row(static_cast<Eigen::Index>(src));
      out.missing.row(row) = stocks.missing.row(static_cast<Eigen::Index>(src));
    }
  }
  return out;
}

// Runs a reader over a file's contents, prefixing errors with the path.
template <typename Fn>
auto with_text(const fs::path& path, Fn fn) {
  try {
    std::istringstream in(read_text_file(path));
    return fn(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

StockPanel read_stocks(const char* path) {
  return with_text(path, [](std::istream& in) { return parse_stock_csv(in); });
}

void write_factor_file(const FactorSeries& f, const char* path) {
  std::ostringstream out;
  write_factors_csv(out, f);
  write_text_file_atomic(need_string(path, "path"), out.str());
}

}  // namespace

extern "C" {

MF_API const char* mf_version(void) { return MATFACTOR_VERSION; }

MF_API const char* mf_status_name(mf_status status) {
  switch (status) {
    case MF_OK:
      return "ok";
    case MF_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case MF_ERR_INTERNAL:
      return "internal";
    default:
      break;
  }
  if (status >= MF_ERR_PARSE && status <= MF_ERR_IO) {
    return to_string(static_cast<ErrorCode>(static_cast<int>(status))).data();
  }
  return "unknown";
}

MF_API const char* mf_last_error(void) { return g_last_error.c_str(); }

MF_API void mf_ingest_options_init(mf_ingest_options* options) {
  if (options == nullptr) return;
  *options = mf_ingest_options{};
  options->n1 = 10;
  options->n2 = 10;
}

MF_API mf_status mf_ingest(const mf_ingest_options* options, mf_dataset** out) {
  return guarded([&] {
    need_out(out);
    const auto& o = deref(options, "options");
    const auto weighting = o.equal_weighted ? PortfolioWeighting::kEqual : PortfolioWeighting::kValue;
    const MatrixPanel panel = with_text(need_string(o.portfolios_path, "portfolios path"), [&](std::istream& in) {
      return parse_ff_portfolio_csv(in, o.n1, o.n2, weighting);
    });
    FactorSeries factors = with_text(need_string(o.factors_path, "factors path"), [](std::istream& in) {
      return parse_ff_factors_csv(in, {"Mkt-RF", "SMB", "HML", "RF"});
    });
    if (o.momentum_path != nullptr) {
      const FactorSeries mom =
          with_text(o.momentum_path, [](std::istream& in) { return parse_ff_factors_csv(in, {"Mom"}); });
      factors = merge_factor_series(factors, mom);
    }
    std::optional<StockPanel> stocks;
    if (o.stocks_path != nullptr) stocks = read_stocks(o.stocks_path);
    std::vector<MonthRange> exclusions;
    for (std::size_t i = 0; i < o.exclusion_count; ++i) {
      exclusions.push_back(MonthRange::parse(need_string(o.exclusions[i], "exclusion")));
    }
    const MonthStamp start = MonthStamp::parse(need_string(o.start, "start month"));
    const MonthStamp end = MonthStamp::parse(need_string(o.end, "end month"));
    AlignedDataset data = align_and_filter(panel, factors, std::nullopt, start, end, exclusions);
    // Stock files rarely cover the panel window exactly; absent months are missing.
    if (stocks) data.stocks = onto_dates(*stocks, data.sample_dates);
    *out = new mf_dataset{std::move(data)};
  });
}

MF_API mf_status mf_dataset_read(const char* dir, mf_dataset** out) {
  return guarded([&] {
    need_out(out);
    *out = new mf_dataset{read_dataset(need_string(dir, "dataset directory"))};
  });
}

MF_API mf_status mf_dataset_write(const mf_dataset* dataset, const char* dir) {
  return guarded([&] { write_dataset(need_string(dir, "output directory"), deref(dataset, "dataset").data); });
}

MF_API void mf_dataset_free(mf_dataset* dataset) { delete dataset; }

MF_API size_t mf_dataset_periods(const mf_dataset* dataset) { return dataset ? dataset->data.panel.periods() : 0; }
MF_API int mf_dataset_rows(const mf_dataset* dataset) {
  return dataset ? static_cast<int>(dataset->data.panel.rows()) : 0;
}
MF_API int mf_dataset_cols(const mf_dataset* dataset) {
  return dataset ? static_cast<int>(dataset->data.panel.cols()) : 0;
}
MF_API size_t mf_dataset_missing_cells(const mf_dataset* dataset) {
  return dataset ? dataset->data.panel.missing_count() : 0;
}
MF_API size_t mf_dataset_factor_count(const mf_dataset* dataset) { return dataset ? dataset->data.factors.size() : 0; }
MF_API int mf_dataset_has_stocks(const mf_dataset* dataset) {
  return dataset && dataset->data.stocks.has_value() ? 1 : 0;
}

MF_API mf_status mf_dataset_date(const mf_dataset* dataset, size_t t, int* yyyymm) {
  return guarded([&] {
    const auto& d = deref(dataset, "dataset").data;
    if (yyyymm == nullptr || t >= d.panel.periods()) throw InvalidArgument("month index out of range");
    *yyyymm = d.panel.dates[t].yyyymm();
  });
}

MF_API mf_status mf_dataset_value(const mf_dataset* dataset, size_t t, int i, int j, double* out) {
  return guarded([&] {
    const auto& p = deref(dataset, "dataset").data.panel;
    if (out == nullptr || t >= p.periods() || i < 0 || i >= p.rows() || j < 0 || j >= p.cols()) {
      throw InvalidArgument("panel index out of range");
    }
    *out = p.missing[t](i, j) ? std::numeric_limits<double>::quiet_NaN() : p.values[t](i, j);
  });
}

MF_API void mf_tucker_options_init(mf_tucker_options* options) {
  if (options == nullptr) return;
  const TuckerOptions defaults;
  *options = mf_tucker_options{2, 2, defaults.h0, defaults.max_iter, defaults.tol, defaults.demean ? 1 : 0};
}

MF_API mf_status mf_tucker_fit(const mf_dataset* dataset, const mf_tucker_options* options, mf_tucker** out) {
  return guarded([&] {
    need_out(out);
    const auto& panel = deref(dataset, "dataset").data.panel;
    const auto& o = deref(options, "options");
    TuckerOptions opts;
    opts.h0 = o.h0;
    opts.max_iter = o.max_iter;
    opts.tol = o.tol;
    opts.demean = o.demean != 0;
    auto handle = std::make_unique<mf_tucker>();
    handle->model = iterative_tipup(panel, o.r1, o.r2, opts);
    handle->panel = panel;
    // The suggestion is advisory; 0 means none could be formed.
    const auto suggest = [&](LoadingMode mode, Eigen::Index dim) {
      if (dim < 2) return 0;
      try {
        return rank_suggest_eigen_ratio(panel, mode, static_cast<int>(dim) - 1, o.h0);
      } catch (const Error&) {
        return 0;
      }
    };
    handle->suggested_r1 = suggest(LoadingMode::kRows, panel.rows());
    handle->suggested_r2 = suggest(LoadingMode::kCols, panel.cols());
    *out = handle.release();
  });
}

MF_API void mf_tucker_free(mf_tucker* model) { delete model; }
MF_API int mf_tucker_converged(const mf_tucker* model) { return model && model->model.converged ? 1 : 0; }
MF_API int mf_tucker_iterations(const mf_tucker* model) { return model ? model->model.iterations : 0; }
MF_API double mf_tucker_last_change(const mf_tucker* model) {
  return model ? model->model.last_change : std::numeric_limits<double>::quiet_NaN();
}

MF_API mf_status mf_tucker_suggested_ranks(const mf_tucker* model, int* r1, int* r2) {
  return guarded([&] {
    const auto& m = deref(model, "model");
    if (r1 == nullptr || r2 == nullptr) throw InvalidArgument("null output pointer");
    *r1 = m.suggested_r1;
    *r2 = m.suggested_r2;
  });
}

MF_API mf_status mf_tucker_row_loadings(const mf_tucker* model, double* out, size_t len) {
  return guarded([&] { copy_matrix(deref(model, "model").model.front, out, len); });
}

MF_API mf_status mf_tucker_col_loadings(const mf_tucker* model, double* out, size_t len) {
  return guarded([&] { copy_matrix(deref(model, "model").model.back, out, len); });
}

MF_API mf_status mf_tucker_write_model(const mf_tucker* model, const char* path) {
  return guarded([&] {
    const auto& m = deref(model, "model");
    write_text_file_atomic(need_string(path, "path"),
                           tucker_model_json(m.model, m.panel, m.suggested_r1, m.suggested_r2));
  });
}

MF_API mf_status mf_tucker_write_factors(const mf_tucker* model, const char* path) {
  return guarded([&] {
    const auto& m = deref(model, "model");
    write_factor_file(extract_tucker_factors(m.panel, m.model), path);
  });
}

MF_API void mf_cp_options_init(mf_cp_options* options) {
  if (options == nullptr) return;
  const CpOptions defaults;
  *options = mf_cp_options{4, defaults.h0, defaults.max_iter, defaults.tol, defaults.demean ? 1 : 0};
}

MF_API mf_status mf_cp_fit(const mf_dataset* dataset, const mf_cp_options* options, mf_cp** out) {
  return guarded([&] {
    need_out(out);
    const auto& panel = deref(dataset, "dataset").data.panel;
    const auto& o = deref(options, "options");
    CpOptions opts;
    opts.h0 = o.h0;
    opts.max_iter = o.max_iter;
    opts.tol = o.tol;
    opts.demean = o.demean != 0;
    auto handle = std::make_unique<mf_cp>();
    handle->model = cp_fit(panel, o.r, opts);
    handle->panel = panel;
    *out = handle.release();
  });
}

MF_API void mf_cp_free(mf_cp* model) { delete model; }
MF_API int mf_cp_converged(const mf_cp* model) { return model && model->model.converged ? 1 : 0; }
MF_API int mf_cp_stalled(const mf_cp* model) { return model && model->model.stalled ? 1 : 0; }
MF_API int mf_cp_iterations(const mf_cp* model) { return model ? model->model.iterations : 0; }
MF_API double mf_cp_last_change(const mf_cp* model) {
  return model ? model->model.last_change : std::numeric_limits<double>::quiet_NaN();
}

MF_API mf_status mf_cp_a(const mf_cp* model, double* out, size_t len) {
  return guarded([&] { copy_matrix(deref(model, "model").model.a, out, len); });
}

MF_API mf_status mf_cp_b(const mf_cp* model, double* out, size_t len) {
  return guarded([&] { copy_matrix(deref(model, "model").model.b, out, len); });
}

MF_API mf_status mf_cp_write_model(const mf_cp* model, const char* path) {
  return guarded([&] {
    const auto& m = deref(model, "model");
    write_text_file_atomic(need_string(path, "path"), cp_model_json(m.model, m.panel));
  });
}

MF_API mf_status mf_cp_write_factors(const mf_cp* model, const char* path) {
  return guarded([&] {
    const auto& m = deref(model, "model");
    write_factor_file(extract_cp_factors(m.panel, m.model), path);
  });
}

MF_API void mf_evaluate_options_init(mf_evaluate_options* options) {
  if (options == nullptr) return;
  const PanelEvaluationOptions defaults;
  *options = mf_evaluate_options{defaults.min_obs, 0, defaults.threads, nullptr, nullptr};
}

MF_API mf_status mf_evaluate(const mf_dataset* dataset, const char* stocks_path, const char* stat_factors_path,
                             const mf_evaluate_options* options, mf_evaluation** out) {
  return guarded([&] {
    need_out(out);
    const auto& data = deref(dataset, "dataset").data;
    const auto& o = deref(options, "options");
    StockPanel stocks;
    if (stocks_path != nullptr) {
      stocks = onto_dates(read_stocks(stocks_path), data.sample_dates);
    } else if (data.stocks) {
      stocks = *data.stocks;
    } else {
      raise(ErrorCode::kSchema, "dataset has no stock panel and no stock file was given");
    }
    const FactorSeries stat =
        restrict_dates(with_text(need_string(stat_factors_path, "stat factors path"),
                                 [](std::istream& in) { return read_factors_csv(in); }),
                       data.sample_dates);
    const auto control_names =
        o.controls ? split_names(o.controls) : std::vector<std::string>{"Mkt-RF", "SMB", "HML", "Mom"};
    const FactorSeries controls = data.factors.select(control_names);
    const Eigen::VectorXd rf = data.factors.column(o.risk_free ? o.risk_free : "RF");
    PanelEvaluationOptions opts;
    opts.min_obs = o.min_obs;
    opts.residualize = o.residualize != 0;
    opts.threads = o.threads == 0 ? 1 : o.threads;
    *out = new mf_evaluation{run_panel_evaluation(stocks, controls, stat, rf, opts)};
  });
}

MF_API void mf_evaluation_free(mf_evaluation* evaluation) { delete evaluation; }
MF_API size_t mf_evaluation_stock_count(const mf_evaluation* e) { return e ? e->summary.stocks.size() : 0; }
MF_API size_t mf_evaluation_skipped_count(const mf_evaluation* e) { return e ? e->summary.skipped.size() : 0; }
MF_API double mf_evaluation_mean_r2_reduced(const mf_evaluation* e) {
  return e ? e->summary.mean_r2_reduced : std::numeric_limits<double>::quiet_NaN();
}
MF_API double mf_evaluation_median_r2_reduced(const mf_evaluation* e) {
  return e ? e->summary.median_r2_reduced : std::numeric_limits<double>::quiet_NaN();
}
MF_API double mf_evaluation_mean_r2_full(const mf_evaluation* e) {
  return e ? e->summary.mean_r2_full : std::numeric_limits<double>::quiet_NaN();
}
MF_API double mf_evaluation_median_r2_full(const mf_evaluation* e) {
  return e ? e->summary.median_r2_full : std::numeric_limits<double>::quiet_NaN();
}

MF_API double mf_evaluation_share_p_below(const mf_evaluation* e, double cutoff) {
  if (e == nullptr || e->summary.stocks.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t below = 0;
  for (const auto& s : e->summary.stocks) below += s.p_value < cutoff ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(e->summary.stocks.size());
}

MF_API mf_status mf_evaluation_write_stock_fits(const mf_evaluation* evaluation, const char* path) {
  return guarded([&] {
    write_text_file_atomic(need_string(path, "path"), stock_fits_csv(deref(evaluation, "evaluation").summary));
  });
}

MF_API mf_status mf_evaluation_write_summary(const mf_evaluation* evaluation, const char* path) {
  return guarded([&] {
    write_text_file_atomic(need_string(path, "path"), panel_summary_json(deref(evaluation, "evaluation").summary));
  });
}

MF_API mf_status mf_evaluation_write_histogram(const mf_evaluation* evaluation, mf_histogram_kind kind,
                                               const char* path) {
  return guarded([&] {
    const auto& s = deref(evaluation, "evaluation").summary;
    const Histogram* h = nullptr;
    switch (kind) {
      case MF_HIST_R2_REDUCED:
        h = &s.r2_reduced_hist;
        break;
      case MF_HIST_R2_FULL:
        h = &s.r2_full_hist;
        break;
      case MF_HIST_P_VALUE:
        h = &s.p_value_hist;
        break;
    }
    if (h == nullptr) throw InvalidArgument("unknown histogram kind");
    write_text_file_atomic(need_string(path, "path"), histogram_csv(*h));
  });
}

MF_API void mf_zoo_options_init(mf_zoo_options* options) {
  if (options == nullptr) return;
  const ZooOptions defaults;
  *options = mf_zoo_options{defaults.folds, defaults.seed, defaults.grid_size, defaults.grid_ratio};
}

MF_API mf_status mf_zoo_run(const char* assets_path, const char* controls_path, const char* new_factors_path,
                            const mf_zoo_options* options, mf_zoo** out) {
  return guarded([&] {
    need_out(out);
    const auto& o = deref(options, "options");
    const auto load = [](const char* path, const char* what) {
      return with_text(need_string(path, what), [](std::istream& in) { return parse_series_by_row_csv(in); });
    };
    auto handle = std::make_unique<mf_zoo>();
    handle->data = make_zoo_dataset(load(assets_path, "assets path"), load(controls_path, "controls path"),
                                    load(new_factors_path, "new factors path"));
    ZooOptions opts;
    opts.folds = o.folds;
    opts.seed = o.seed;
    opts.grid_size = o.grid_size;
    opts.grid_ratio = o.grid_ratio;
    handle->result = double_selection(handle->data, opts);
    *out = handle.release();
  });
}

MF_API void mf_zoo_free(mf_zoo* result) { delete result; }
MF_API int mf_zoo_r_new(const mf_zoo* z) { return z ? static_cast<int>(z->result.lambda_g.size()) : 0; }

MF_API mf_status mf_zoo_lambda_g(const mf_zoo* result, double* out, size_t len) {
  return guarded([&] { copy_matrix(deref(result, "result").result.lambda_g, out, len); });
}

MF_API double mf_zoo_gamma0(const mf_zoo* z) { return z ? z->result.gamma0 : std::numeric_limits<double>::quiet_NaN(); }
MF_API double mf_zoo_wald(const mf_zoo* z) { return z ? z->result.wald : std::numeric_limits<double>::quiet_NaN(); }
MF_API int mf_zoo_df(const mf_zoo* z) { return z ? z->result.df : 0; }
MF_API double mf_zoo_p_value(const mf_zoo* z) {
  return z ? z->result.p_value : std::numeric_limits<double>::quiet_NaN();
}
MF_API size_t mf_zoo_selected_first_count(const mf_zoo* z) { return z ? z->result.selected_first.size() : 0; }
MF_API size_t mf_zoo_selected_second_count(const mf_zoo* z) { return z ? z->result.selected_second.size() : 0; }
MF_API size_t mf_zoo_selected_union_count(const mf_zoo* z) { return z ? z->result.selected.size() : 0; }
MF_API int mf_zoo_pseudo_inverse(const mf_zoo* z) { return z && z->result.pseudo_inverse ? 1 : 0; }

MF_API mf_status mf_zoo_write_result(const mf_zoo* result, const char* path) {
  return guarded([&] {
    const auto& z = deref(result, "result");
    write_text_file_atomic(need_string(path, "path"), zoo_result_json(z.result, z.data));
  });
}

MF_API mf_status mf_simulate(const char* kind, const char* config_json, mf_simulation** out) {
  return guarded([&] {
    need_out(out);
    const std::string k = need_string(kind, "simulation kind");
    const char* text = config_json ? config_json : "{}";
    auto handle = std::make_unique<mf_simulation>();
    if (k == "tucker") {
      const auto config = tucker_sim_config_from_json(text);
      handle->config_json = sim_config_json(config);
      handle->output = simulate_tucker(config);
    } else if (k == "cp") {
      const auto config = cp_sim_config_from_json(text);
      handle->config_json = sim_config_json(config);
      handle->output = simulate_cp(config);
    } else if (k == "cross-section") {
      const auto config = cross_section_sim_config_from_json(text);
      handle->config_json = sim_config_json(config);
      handle->output = simulate_cross_section(config);
    } else {
      throw InvalidArgument("unknown simulation kind '" + k + "'");
    }
    if (std::holds_alternative<SimulatedPanel>(handle->output)) {
      handle->outputs = {"dataset.json", "panel.csv", "factors.csv", "truth.json", "config.json"};
    } else {
      handle->outputs = {"assets.csv", "controls.csv", "new_factors.csv", "truth.json", "config.json"};
    }
    *out = handle.release();
  });
}

MF_API void mf_simulation_free(mf_simulation* simulation) { delete simulation; }

MF_API mf_status mf_simulation_write(const mf_simulation* simulation, const char* dir) {
  return guarded([&] {
    const auto& s = deref(simulation, "simulation");
    const fs::path root = need_string(dir, "output directory");
    const SyntheticTruth* truth = nullptr;
    if (const auto* panel = std::get_if<SimulatedPanel>(&s.output)) {
      AlignedDataset data;
      data.panel = panel->panel;
      data.sample_dates = panel->panel.dates;
      data.factors.dates = panel->panel.dates;
      data.factors.values.resize(static_cast<Eigen::Index>(panel->panel.periods()), 0);
      write_dataset(root, data);
      truth = &panel->truth;
    } else {
      const auto& cs = std::get<SimulatedCrossSection>(s.output);
      const auto& d = cs.dataset;
      write_text_file_atomic(root / "assets.csv", series_by_row_csv(d.asset_ids, d.dates, d.returns));
      write_text_file_atomic(root / "controls.csv", series_by_row_csv(d.control_names, d.dates, d.controls));
      write_text_file_atomic(root / "new_factors.csv", series_by_row_csv(d.new_factor_names, d.dates, d.new_factors));
      truth = &cs.truth;
    }
    write_text_file_atomic(root / "truth.json", truth_json(*truth));
    write_text_file_atomic(root / "config.json", s.config_json);
  });
}

MF_API size_t mf_simulation_output_count(const mf_simulation* simulation) {
  return simulation ? simulation->outputs.size() : 0;
}

MF_API const char* mf_simulation_output_name(const mf_simulation* simulation, size_t index) {
  if (simulation == nullptr || index >= simulation->outputs.size()) return nullptr;
  return simulation->outputs[index].c_str();
}

}  // extern "C"
