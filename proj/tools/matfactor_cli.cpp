// matfactor command-line front end. Links only the C API.
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "matfactor/matfactor.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitNoStocks = 4;
constexpr int kExitDimensionality = 5;

struct CliFailure {
  int code;
  std::string message;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw CliFailure{kExitUsage, "SHA-256 digest failed"};
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{kExitUsage, "cannot read '" + path.string() + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw CliFailure{kExitUsage, "cannot write '" + tmp.string() + "'"};
  }
  fs::rename(tmp, path);
}

std::string utc_timestamp(std::chrono::system_clock::time_point when) {
  const std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

unsigned thread_cap() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MATFACTOR_THREADS")) {
    try {
      const long requested = std::stol(env);
      if (requested >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(requested));
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring MATFACTOR_THREADS='" << env << "'\n";
    }
  }
  return threads;
}

// Status -> exit code. Input problems are usage errors; `domain_code` picks how
// domain errors are classed for the command at hand.
int exit_code_for(mf_status status, int domain_code, int other_code) {
  switch (status) {
    case MF_OK:
      return 0;
    case MF_ERR_PARSE:
    case MF_ERR_STRUCTURAL:
    case MF_ERR_SCHEMA:
    case MF_ERR_IO:
    case MF_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case MF_ERR_DIMENSIONALITY:
      return kExitDimensionality;
    case MF_ERR_DOMAIN:
      return domain_code;
    default:
      return other_code;
  }
}

void check(mf_status status, int domain_code = kExitEstimation, int other_code = kExitEstimation) {
  if (status != MF_OK) throw CliFailure{exit_code_for(status, domain_code, other_code), mf_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

// Collects what the manifest needs while a command runs.
class Run {
 public:
  Run(std::string command, fs::path out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(std::chrono::system_clock::now()),
        clock_(std::chrono::steady_clock::now()) {}

  json& parameters() { return parameters_; }
  const fs::path& out_dir() const { return out_dir_; }
  fs::path output(const std::string& name) const { return out_dir_ / name; }

  void input(const fs::path& path) { inputs_.push_back(path); }
  void dataset_inputs(const fs::path& dir) {
    for (const char* name : {"dataset.json", "panel.csv", "factors.csv", "stocks.csv"}) {
      if (fs::exists(dir / name)) input(dir / name);
    }
  }
  void produced(const fs::path& path) { outputs_.push_back(path); }

  void write_manifest() const {
    json m;
    m["command"] = command_;
    m["parameters"] = parameters_;
    json inputs = json::array();
    for (const auto& p : inputs_) inputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(slurp(p))}});
    m["inputs"] = inputs;
    json outputs = json::array();
    for (const auto& p : outputs_) outputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(slurp(p))}});
    m["outputs"] = outputs;
    m["library_version"] = mf_version();
    m["started_at"] = utc_timestamp(started_);
    m["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    write_atomic(output(command_ + "_manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_dir_;
  json parameters_ = json::object();
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_;
};

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string portfolios, factors, momentum, stocks, start, end, out;
  std::vector<std::string> exclude;
  int n1 = 10;
  int n2 = 10;
  bool equal_weighted = false;
};

int cmd_ingest(const IngestArgs& a) {
  Run run("ingest", a.out);
  mf_ingest_options o;
  mf_ingest_options_init(&o);
  o.portfolios_path = a.portfolios.c_str();
  o.factors_path = a.factors.c_str();
  o.momentum_path = a.momentum.empty() ? nullptr : a.momentum.c_str();
  o.stocks_path = a.stocks.empty() ? nullptr : a.stocks.c_str();
  o.start = a.start.c_str();
  o.end = a.end.c_str();
  std::vector<const char*> exclusions;
  for (const auto& e : a.exclude) exclusions.push_back(e.c_str());
  o.exclusions = exclusions.data();
  o.exclusion_count = exclusions.size();
  o.n1 = a.n1;
  o.n2 = a.n2;
  o.equal_weighted = a.equal_weighted ? 1 : 0;

  Handle<mf_dataset, mf_dataset_free> ds;
  check(mf_ingest(&o, ds.out()), kExitUsage, kExitUsage);
  check(mf_dataset_write(ds.get(), a.out.c_str()), kExitUsage, kExitUsage);

  run.parameters() = {{"portfolios", a.portfolios}, {"factors", a.factors}, {"momentum", a.momentum},
                      {"stocks", a.stocks},         {"start", a.start},     {"end", a.end},
                      {"exclude", a.exclude},       {"n1", a.n1},           {"n2", a.n2},
                      {"weighting", a.equal_weighted ? "equal" : "value"}};
  for (const auto* p : {&a.portfolios, &a.factors, &a.momentum, &a.stocks}) {
    if (!p->empty()) run.input(*p);
  }
  for (const char* name : {"dataset.json", "panel.csv", "factors.csv", "stocks.csv"}) {
    if (fs::exists(run.output(name)) && (std::string(name) != "stocks.csv" || mf_dataset_has_stocks(ds.get()))) {
      run.produced(run.output(name));
    }
  }
  run.write_manifest();

  std::cout << "T = " << mf_dataset_periods(ds.get()) << "\n"
            << "n1 = " << mf_dataset_rows(ds.get()) << "\n"
            << "n2 = " << mf_dataset_cols(ds.get()) << "\n"
            << "missing cells = " << mf_dataset_missing_cells(ds.get()) << "\n";
  return 0;
}

// ---- tucker / cp ----------------------------------------------------------

struct EstimateArgs {
  std::string dataset, out = ".";
  std::vector<int> ranks;
  int rank = 4;
  int h0 = 1;
  std::optional<int> max_iter;
  std::optional<double> tol;
  bool no_demean = false;
};

int cmd_tucker(const EstimateArgs& a) {
  Run run("tucker", a.out);
  Handle<mf_dataset, mf_dataset_free> ds;
  check(mf_dataset_read(a.dataset.c_str(), ds.out()), kExitUsage, kExitUsage);
  mf_tucker_options o;
  mf_tucker_options_init(&o);
  o.r1 = a.ranks.at(0);
  o.r2 = a.ranks.at(1);
  o.h0 = a.h0;
  if (a.max_iter) o.max_iter = *a.max_iter;
  if (a.tol) o.tol = *a.tol;
  o.demean = a.no_demean ? 0 : 1;

  Handle<mf_tucker, mf_tucker_free> model;
  check(mf_tucker_fit(ds.get(), &o, model.out()));
  const auto model_path = run.output("tucker_model.json");
  const auto factors_path = run.output("tucker_factors.csv");
  check(mf_tucker_write_model(model.get(), model_path.c_str()), kExitUsage, kExitUsage);
  check(mf_tucker_write_factors(model.get(), factors_path.c_str()), kExitUsage, kExitUsage);

  int s1 = 0;
  int s2 = 0;
  check(mf_tucker_suggested_ranks(model.get(), &s1, &s2));
  run.parameters() = {{"dataset", a.dataset}, {"r1", o.r1},        {"r2", o.r2},
                      {"h0", o.h0},           {"max_iter", o.max_iter}, {"tol", o.tol},
                      {"demean", o.demean != 0}};
  run.dataset_inputs(a.dataset);
  run.produced(model_path);
  run.produced(factors_path);
  run.write_manifest();

  std::cout << (mf_tucker_converged(model.get()) ? "converged" : "not converged") << " after "
            << mf_tucker_iterations(model.get()) << " iterations (last change "
            << mf_tucker_last_change(model.get()) << ")\n"
            << "ranks = " << o.r1 << " x " << o.r2 << "; eigen-ratio suggestion = " << s1 << " x " << s2 << "\n"
            << "factors: " << o.r1 * o.r2 << " series TF1..TF" << o.r1 * o.r2 << "\n";
  return 0;
}

int cmd_cp(const EstimateArgs& a) {
  Run run("cp", a.out);
  Handle<mf_dataset, mf_dataset_free> ds;
  check(mf_dataset_read(a.dataset.c_str(), ds.out()), kExitUsage, kExitUsage);
  mf_cp_options o;
  mf_cp_options_init(&o);
  o.r = a.rank;
  o.h0 = a.h0;
  if (a.max_iter) o.max_iter = *a.max_iter;
  if (a.tol) o.tol = *a.tol;
  o.demean = a.no_demean ? 0 : 1;

  Handle<mf_cp, mf_cp_free> model;
  check(mf_cp_fit(ds.get(), &o, model.out()));
  const auto model_path = run.output("cp_model.json");
  const auto factors_path = run.output("cp_factors.csv");
  check(mf_cp_write_model(model.get(), model_path.c_str()), kExitUsage, kExitUsage);
  check(mf_cp_write_factors(model.get(), factors_path.c_str()), kExitUsage, kExitUsage);

  run.parameters() = {{"dataset", a.dataset}, {"r", o.r}, {"h0", o.h0}, {"max_iter", o.max_iter},
                      {"tol", o.tol},         {"demean", o.demean != 0}};
  run.dataset_inputs(a.dataset);
  run.produced(model_path);
  run.produced(factors_path);
  run.write_manifest();

  const char* status = mf_cp_converged(model.get()) ? "converged"
                       : mf_cp_stalled(model.get()) ? "stalled (residual could not be lowered further)"
                                                    : "not converged";
  std::cout << status << " after "
            << mf_cp_iterations(model.get()) << " iterations (last change " << mf_cp_last_change(model.get())
            << ")\n"
            << "factors: " << o.r << " series CP1..CP" << o.r << "\n";
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string dataset, stocks, stat_factors, controls, out = ".";
  int min_obs = 30;
  bool residualize = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  Run run("evaluate", a.out);
  Handle<mf_dataset, mf_dataset_free> ds;
  check(mf_dataset_read(a.dataset.c_str(), ds.out()), kExitUsage, kExitUsage);
  mf_evaluate_options o;
  mf_evaluate_options_init(&o);
  o.min_obs = a.min_obs;
  o.residualize = a.residualize ? 1 : 0;
  o.threads = thread_cap();
  o.controls = a.controls.empty() ? nullptr : a.controls.c_str();

  Handle<mf_evaluation, mf_evaluation_free> ev;
  check(mf_evaluate(ds.get(), a.stocks.empty() ? nullptr : a.stocks.c_str(), a.stat_factors.c_str(), &o, ev.out()),
        kExitUsage);
  if (mf_evaluation_stock_count(ev.get()) == 0) {
    throw CliFailure{kExitNoStocks, "no stocks survive the filters (min-obs " + std::to_string(a.min_obs) + ")"};
  }

  const std::vector<std::pair<std::string, mf_histogram_kind>> hists = {
      {"hist_r2_reduced.csv", MF_HIST_R2_REDUCED}, {"hist_r2_full.csv", MF_HIST_R2_FULL},
      {"hist_p_value.csv", MF_HIST_P_VALUE}};
  const auto fits_path = run.output("evaluate_stocks.csv");
  const auto summary_path = run.output("evaluate_summary.json");
  check(mf_evaluation_write_stock_fits(ev.get(), fits_path.c_str()), kExitUsage, kExitUsage);
  check(mf_evaluation_write_summary(ev.get(), summary_path.c_str()), kExitUsage, kExitUsage);
  run.produced(fits_path);
  run.produced(summary_path);
  for (const auto& [name, kind] : hists) {
    check(mf_evaluation_write_histogram(ev.get(), kind, run.output(name).c_str()), kExitUsage, kExitUsage);
    run.produced(run.output(name));
  }
  run.parameters() = {{"dataset", a.dataset},
                      {"stocks", a.stocks.empty() ? json(nullptr) : json(a.stocks)},
                      {"stat_factors", a.stat_factors},
                      {"min_obs", a.min_obs},
                      {"residualize", a.residualize},
                      {"controls", a.controls.empty() ? "Mkt-RF,SMB,HML,Mom" : a.controls},
                      {"threads", o.threads}};
  run.dataset_inputs(a.dataset);
  if (!a.stocks.empty()) run.input(a.stocks);
  run.input(a.stat_factors);
  run.write_manifest();

  const auto* e = ev.get();
  std::cout << "stocks fitted = " << mf_evaluation_stock_count(e) << ", skipped = " << mf_evaluation_skipped_count(e)
            << "\n"
            << "reduced model R2: mean " << mf_evaluation_mean_r2_reduced(e) << ", median "
            << mf_evaluation_median_r2_reduced(e) << "\n"
            << "full model R2:    mean " << mf_evaluation_mean_r2_full(e) << ", median "
            << mf_evaluation_median_r2_full(e) << "\n"
            << "share p < 0.05 = " << mf_evaluation_share_p_below(e, 0.05)
            << ", share p < 0.10 = " << mf_evaluation_share_p_below(e, 0.10) << "\n"
            << "reference only: the original CRSP study reports 68.9% of p-values below 0.05 and 72.4% below 0.10\n";
  return 0;
}

// ---- zoo ------------------------------------------------------------------

struct ZooArgs {
  std::string assets, controls, new_factors, out = ".";
  std::optional<int> folds;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_size;
  std::optional<double> grid_ratio;
};

int cmd_zoo(const ZooArgs& a) {
  Run run("zoo", a.out);
  mf_zoo_options o;
  mf_zoo_options_init(&o);
  if (a.folds) o.folds = *a.folds;
  if (a.seed) o.seed = *a.seed;
  if (a.grid_size) o.grid_size = *a.grid_size;
  if (a.grid_ratio) o.grid_ratio = *a.grid_ratio;

  Handle<mf_zoo, mf_zoo_free> z;
  check(mf_zoo_run(a.assets.c_str(), a.controls.c_str(), a.new_factors.c_str(), &o, z.out()), kExitUsage);
  const auto result_path = run.output("zoo_result.json");
  check(mf_zoo_write_result(z.get(), result_path.c_str()), kExitUsage, kExitUsage);
  run.parameters() = {{"assets", a.assets}, {"controls", a.controls}, {"new_factors", a.new_factors},
                      {"folds", o.folds},   {"seed", o.seed},         {"grid_size", o.grid_size},
                      {"grid_ratio", o.grid_ratio}};
  run.input(a.assets);
  run.input(a.controls);
  run.input(a.new_factors);
  run.produced(result_path);
  run.write_manifest();

  std::vector<double> lambda(static_cast<std::size_t>(mf_zoo_r_new(z.get())));
  check(mf_zoo_lambda_g(z.get(), lambda.data(), lambda.size()));
  std::cout << "lambda_g =";
  for (const double v : lambda) std::cout << ' ' << v;
  std::cout << "\nwald = " << mf_zoo_wald(z.get()) << " (df " << mf_zoo_df(z.get())
            << "), p-value = " << mf_zoo_p_value(z.get()) << "\n"
            << "selected controls: first " << mf_zoo_selected_first_count(z.get()) << ", second "
            << mf_zoo_selected_second_count(z.get()) << ", union " << mf_zoo_selected_union_count(z.get()) << "\n";
  if (mf_zoo_pseudo_inverse(z.get())) std::cout << "warning: singular covariance, pseudo-inverse used\n";
  return 0;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string kind, config, out = ".";
  std::vector<int> dims;
  std::optional<int> periods, n, p, r_new, sparsity;
  std::optional<std::uint64_t> seed;
  std::optional<double> factor_ar, missing_rate, angle, lambda_h_size, gamma0, idio_sd;
  std::optional<std::string> snr;
  std::vector<double> scales, lambda_g;
};

int cmd_simulate(const SimulateArgs& a) {
  Run run("simulate", a.out);
  json config = json::object();
  if (!a.config.empty()) {
    try {
      config = json::parse(slurp(a.config));
    } catch (const json::exception& e) {
      throw CliFailure{kExitUsage, a.config + ": " + e.what()};
    }
    run.input(a.config);
  }
  const auto set = [&](const char* key, const auto& value) {
    if (value) config[key] = *value;
  };
  if (a.kind == "tucker") {
    if (!a.dims.empty()) {
      if (a.dims.size() != 4) throw CliFailure{kExitUsage, "simulate tucker takes N1 N2 R1 R2"};
      config["n1"] = a.dims[0];
      config["n2"] = a.dims[1];
      config["r1"] = a.dims[2];
      config["r2"] = a.dims[3];
    }
  } else if (a.kind == "cp") {
    if (!a.dims.empty()) {
      if (a.dims.size() != 3) throw CliFailure{kExitUsage, "simulate cp takes N1 N2 R"};
      config["n1"] = a.dims[0];
      config["n2"] = a.dims[1];
      config["r"] = a.dims[2];
    }
    set("loading_angle", a.angle);
    if (!a.scales.empty()) config["factor_scales"] = a.scales;
  } else {
    set("n", a.n);
    set("p", a.p);
    set("r_new", a.r_new);
    set("sparsity", a.sparsity);
    set("lambda_h_size", a.lambda_h_size);
    set("gamma0", a.gamma0);
    set("idio_sd", a.idio_sd);
    if (!a.lambda_g.empty()) config["lambda_g"] = a.lambda_g;
  }
  set("t", a.periods);
  set("seed", a.seed);
  if (a.kind != "cross-section") {
    set("factor_ar", a.factor_ar);
    set("missing_rate", a.missing_rate);
    if (a.snr) {
      try {
        std::size_t used = 0;
        const double v = std::stod(*a.snr, &used);
        if (used != a.snr->size() || !std::isfinite(v)) throw std::invalid_argument("not a finite number");
        config["snr"] = v;
      } catch (const std::exception&) {
        config["snr"] = *a.snr;  // "inf" and friends are checked by the library
      }
    }
  }

  Handle<mf_simulation, mf_simulation_free> sim;
  const std::string text = config.dump();
  check(mf_simulate(a.kind.c_str(), text.c_str(), sim.out()), kExitUsage, kExitUsage);
  check(mf_simulation_write(sim.get(), a.out.c_str()), kExitUsage, kExitUsage);
  for (std::size_t i = 0; i < mf_simulation_output_count(sim.get()); ++i) {
    run.produced(run.output(mf_simulation_output_name(sim.get(), i)));
  }
  run.parameters() = {{"kind", a.kind}, {"config", config}};
  run.write_manifest();
  std::cout << "simulated " << a.kind << " data written to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix factor models for asset-pricing panels", "matfactor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mf_version()));

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse French-library files into a dataset directory");
  ingest_cmd->add_option("--portfolios", ingest.portfolios, "Portfolio CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--factors", ingest.factors, "Three-factor CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--momentum", ingest.momentum, "Momentum CSV")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--stocks", ingest.stocks, "Wide stock-return CSV")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--start", ingest.start, "First month, YYYY-MM")->required();
  ingest_cmd->add_option("--end", ingest.end, "Last month, YYYY-MM")->required();
  ingest_cmd->add_option("--exclude", ingest.exclude, "Excluded window YYYY-MM:YYYY-MM (repeatable)");
  ingest_cmd->add_option("--out", ingest.out, "Output directory")->required();
  ingest_cmd->add_option("--n1", ingest.n1, "Panel rows")->capture_default_str();
  ingest_cmd->add_option("--n2", ingest.n2, "Panel columns")->capture_default_str();
  ingest_cmd->add_flag("--equal-weighted", ingest.equal_weighted, "Use the equal-weighted block");

  EstimateArgs tucker;
  auto* tucker_cmd = app.add_subcommand("tucker", "Fit the Tucker matrix factor model");
  tucker_cmd->add_option("--dataset", tucker.dataset, "Dataset directory")->required();
  tucker_cmd->add_option("--ranks", tucker.ranks, "R1 R2")->required()->expected(2);
  tucker_cmd->add_option("--h0", tucker.h0, "Number of lags")->capture_default_str();
  tucker_cmd->add_option("--max-iter", tucker.max_iter, "Iteration cap");
  tucker_cmd->add_option("--tol", tucker.tol, "Convergence tolerance");
  tucker_cmd->add_flag("--no-demean", tucker.no_demean, "Use raw returns");
  tucker_cmd->add_option("--out", tucker.out, "Output directory")->capture_default_str();

  EstimateArgs cp;
  auto* cp_cmd = app.add_subcommand("cp", "Fit the CP matrix factor model");
  cp_cmd->add_option("--dataset", cp.dataset, "Dataset directory")->required();
  cp_cmd->add_option("--rank", cp.rank, "Number of rank-one components")->required();
  cp_cmd->add_option("--h0", cp.h0, "Number of lags")->capture_default_str();
  cp_cmd->add_option("--max-iter", cp.max_iter, "Iteration cap");
  cp_cmd->add_option("--tol", cp.tol, "Convergence tolerance (radians)");
  cp_cmd->add_flag("--no-demean", cp.no_demean, "Use raw returns");
  cp_cmd->add_option("--out", cp.out, "Output directory")->capture_default_str();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare reduced and full stock regressions");
  evaluate_cmd->add_option("--dataset", evaluate.dataset, "Dataset directory")->required();
  evaluate_cmd->add_option("--stocks", evaluate.stocks, "Wide stock-return CSV (default: dataset's)")
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--stat-factors", evaluate.stat_factors, "Factor CSV from tucker or cp")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--min-obs", evaluate.min_obs, "Stocks need more observations than this")
      ->capture_default_str();
  evaluate_cmd->add_flag("--residualize", evaluate.residualize, "Residualize stat factors on the controls");
  evaluate_cmd->add_option("--controls", evaluate.controls, "Comma-separated control factor names");
  evaluate_cmd->add_option("--out", evaluate.out, "Output directory")->capture_default_str();

  ZooArgs zoo;
  auto* zoo_cmd = app.add_subcommand("zoo", "Double-selection LASSO test of new factors");
  zoo_cmd->add_option("--assets", zoo.assets, "Test-asset returns, one row per asset")
      ->required()
      ->check(CLI::ExistingFile);
  zoo_cmd->add_option("--controls", zoo.controls, "Control factors, one row per factor")
      ->required()
      ->check(CLI::ExistingFile);
  zoo_cmd->add_option("--new-factors", zoo.new_factors, "New factors, one row per factor")
      ->required()
      ->check(CLI::ExistingFile);
  zoo_cmd->add_option("--folds", zoo.folds, "Cross-validation folds");
  zoo_cmd->add_option("--seed", zoo.seed, "Fold-assignment seed");
  zoo_cmd->add_option("--grid-size", zoo.grid_size, "Lambda grid points");
  zoo_cmd->add_option("--grid-ratio", zoo.grid_ratio, "Smallest lambda over the largest");
  zoo_cmd->add_option("--out", zoo.out, "Output directory")->capture_default_str();

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate synthetic data with known truth");
  simulate_cmd->require_subcommand(1);
  const auto common = [&](CLI::App* c) {
    c->add_option("--t", sim.periods, "Number of months");
    c->add_option("--seed", sim.seed, "Random seed");
    c->add_option("--config", sim.config, "JSON config; flags override its keys")->check(CLI::ExistingFile);
    c->add_option("--out", sim.out, "Output directory")->capture_default_str();
  };
  auto* sim_tucker = simulate_cmd->add_subcommand("tucker", "Tucker panel");
  sim_tucker->add_option("dims", sim.dims, "N1 N2 R1 R2");
  auto* sim_cp = simulate_cmd->add_subcommand("cp", "CP panel");
  sim_cp->add_option("dims", sim.dims, "N1 N2 R");
  sim_cp->add_option("--angle", sim.angle, "Pairwise loading angle in degrees");
  sim_cp->add_option("--scales", sim.scales, "Factor scales, one per component");
  for (auto* c : {sim_tucker, sim_cp}) {
    c->add_option("--factor-ar", sim.factor_ar, "AR(1) coefficient of the factors");
    c->add_option("--snr", sim.snr, "Signal-to-noise ratio (number or inf)");
    c->add_option("--missing-rate", sim.missing_rate, "Share of cells masked as missing");
    common(c);
  }
  auto* sim_cs = simulate_cmd->add_subcommand("cross-section", "Cross-sectional pricing economy");
  sim_cs->add_option("--n", sim.n, "Test assets");
  sim_cs->add_option("--p", sim.p, "Control factors");
  sim_cs->add_option("--r-new", sim.r_new, "New factors");
  sim_cs->add_option("--lambda-g", sim.lambda_g, "Prices of risk of the new factors");
  sim_cs->add_option("--sparsity", sim.sparsity, "Nonzero control prices of risk");
  sim_cs->add_option("--lambda-h-size", sim.lambda_h_size, "Magnitude of nonzero control prices of risk");
  sim_cs->add_option("--gamma0", sim.gamma0, "Zero-beta rate");
  sim_cs->add_option("--idio-sd", sim.idio_sd, "Idiosyncratic volatility");
  common(sim_cs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest);
    if (*tucker_cmd) return cmd_tucker(tucker);
    if (*cp_cmd) return cmd_cp(cp);
    if (*evaluate_cmd) return cmd_evaluate(evaluate);
    if (*zoo_cmd) return cmd_zoo(zoo);
    if (*simulate_cmd) {
      sim.kind = *sim_tucker ? "tucker" : *sim_cp ? "cp" : "cross-section";
      return cmd_simulate(sim);
    }
  } catch (const CliFailure& f) {
    std::cerr << "matfactor: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "matfactor: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
