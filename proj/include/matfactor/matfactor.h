/* C interface to the matfactor library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an mf_status; on failure the message is
 * available from mf_last_error() on the same thread until the next call.
 * Matrices are copied out column-major. */
#ifndef MATFACTOR_MATFACTOR_H
#define MATFACTOR_MATFACTOR_H

#include <stddef.h>
#include <stdint.h>

#if defined(MATFACTOR_BUILDING_LIBRARY)
#define MF_API __attribute__((visibility("default")))
#else
#define MF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 1..10 follow the library's internal error classes. */
typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_PARSE = 1,
  MF_ERR_STRUCTURAL = 2,
  MF_ERR_SCHEMA = 3,
  MF_ERR_DOMAIN = 4,
  MF_ERR_NUMERIC = 5,
  MF_ERR_DEGENERACY = 6,
  MF_ERR_COLLINEARITY = 7,
  MF_ERR_CONTRACT = 8,
  MF_ERR_DIMENSIONALITY = 9,
  MF_ERR_IO = 10,
  MF_ERR_INVALID_ARGUMENT = 11, /* null handle, bad buffer size, unknown name */
  MF_ERR_INTERNAL = 12
} mf_status;

typedef struct mf_dataset mf_dataset;
typedef struct mf_tucker mf_tucker;
typedef struct mf_cp mf_cp;
typedef struct mf_evaluation mf_evaluation;
typedef struct mf_zoo mf_zoo;
typedef struct mf_simulation mf_simulation;

MF_API const char* mf_version(void);
MF_API const char* mf_status_name(mf_status status);
MF_API const char* mf_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

typedef struct mf_ingest_options {
  const char* portfolios_path; /* French-library portfolio file */
  const char* factors_path;    /* Mkt-RF, SMB, HML, RF */
  const char* momentum_path;   /* Mom; may be NULL */
  const char* stocks_path;     /* wide stock file; may be NULL */
  const char* start;           /* YYYY-MM */
  const char* end;             /* YYYY-MM */
  const char* const* exclusions; /* "YYYY-MM:YYYY-MM" */
  size_t exclusion_count;
  int n1;
  int n2;
  int equal_weighted;
} mf_ingest_options;

MF_API void mf_ingest_options_init(mf_ingest_options* options);
MF_API mf_status mf_ingest(const mf_ingest_options* options, mf_dataset** out);
MF_API mf_status mf_dataset_read(const char* dir, mf_dataset** out);
/* Writes dataset.json, panel.csv, factors.csv and stocks.csv when present. */
MF_API mf_status mf_dataset_write(const mf_dataset* dataset, const char* dir);
MF_API void mf_dataset_free(mf_dataset* dataset);

MF_API size_t mf_dataset_periods(const mf_dataset* dataset);
MF_API int mf_dataset_rows(const mf_dataset* dataset);
MF_API int mf_dataset_cols(const mf_dataset* dataset);
MF_API size_t mf_dataset_missing_cells(const mf_dataset* dataset);
MF_API size_t mf_dataset_factor_count(const mf_dataset* dataset);
MF_API int mf_dataset_has_stocks(const mf_dataset* dataset);
/* YYYYMM of sample month t. */
MF_API mf_status mf_dataset_date(const mf_dataset* dataset, size_t t, int* yyyymm);
/* Panel cell; NaN when missing. */
MF_API mf_status mf_dataset_value(const mf_dataset* dataset, size_t t, int i, int j, double* out);

/* ---- Tucker ------------------------------------------------------------ */

typedef struct mf_tucker_options {
  int r1;
  int r2;
  int h0;
  int max_iter;
  double tol;
  int demean;
} mf_tucker_options;

MF_API void mf_tucker_options_init(mf_tucker_options* options);
MF_API mf_status mf_tucker_fit(const mf_dataset* dataset, const mf_tucker_options* options, mf_tucker** out);
MF_API void mf_tucker_free(mf_tucker* model);
MF_API int mf_tucker_converged(const mf_tucker* model);
MF_API int mf_tucker_iterations(const mf_tucker* model);
MF_API double mf_tucker_last_change(const mf_tucker* model);
/* Eigen-ratio rank suggestion for each mode. */
MF_API mf_status mf_tucker_suggested_ranks(const mf_tucker* model, int* r1, int* r2);
/* n1 x r1 and n2 x r2, column-major; len is the buffer length in doubles. */
MF_API mf_status mf_tucker_row_loadings(const mf_tucker* model, double* out, size_t len);
MF_API mf_status mf_tucker_col_loadings(const mf_tucker* model, double* out, size_t len);
MF_API mf_status mf_tucker_write_model(const mf_tucker* model, const char* path);
/* date,TF1,...,TF(r1*r2) */
MF_API mf_status mf_tucker_write_factors(const mf_tucker* model, const char* path);

/* ---- CP ---------------------------------------------------------------- */

typedef struct mf_cp_options {
  int r;
  int h0;
  int max_iter;
  double tol;
  int demean;
} mf_cp_options;

MF_API void mf_cp_options_init(mf_cp_options* options);
MF_API mf_status mf_cp_fit(const mf_dataset* dataset, const mf_cp_options* options, mf_cp** out);
MF_API void mf_cp_free(mf_cp* model);
MF_API int mf_cp_converged(const mf_cp* model);
/* 1 when the residual safeguard stopped the iteration before convergence. */
MF_API int mf_cp_stalled(const mf_cp* model);
MF_API int mf_cp_iterations(const mf_cp* model);
MF_API double mf_cp_last_change(const mf_cp* model);
/* n1 x r and n2 x r, column-major. */
MF_API mf_status mf_cp_a(const mf_cp* model, double* out, size_t len);
MF_API mf_status mf_cp_b(const mf_cp* model, double* out, size_t len);
MF_API mf_status mf_cp_write_model(const mf_cp* model, const char* path);
/* date,CP1,...,CPr */
MF_API mf_status mf_cp_write_factors(const mf_cp* model, const char* path);

/* ---- stock-level evaluation -------------------------------------------- */

typedef struct mf_evaluate_options {
  int min_obs;
  int residualize;
  unsigned threads;
  const char* controls; /* comma-separated factor names; NULL for Mkt-RF,SMB,HML,Mom */
  const char* risk_free; /* NULL for RF */
} mf_evaluate_options;

MF_API void mf_evaluate_options_init(mf_evaluate_options* options);
/* stocks_path may be NULL to use the dataset's own stock panel. Stock months
 * outside the file count as missing. Zero surviving stocks is not an error;
 * check mf_evaluation_stock_count. */
MF_API mf_status mf_evaluate(const mf_dataset* dataset, const char* stocks_path, const char* stat_factors_path,
                             const mf_evaluate_options* options, mf_evaluation** out);
MF_API void mf_evaluation_free(mf_evaluation* evaluation);
MF_API size_t mf_evaluation_stock_count(const mf_evaluation* evaluation);
MF_API size_t mf_evaluation_skipped_count(const mf_evaluation* evaluation);
MF_API double mf_evaluation_mean_r2_reduced(const mf_evaluation* evaluation);
MF_API double mf_evaluation_median_r2_reduced(const mf_evaluation* evaluation);
MF_API double mf_evaluation_mean_r2_full(const mf_evaluation* evaluation);
MF_API double mf_evaluation_median_r2_full(const mf_evaluation* evaluation);
MF_API double mf_evaluation_share_p_below(const mf_evaluation* evaluation, double cutoff); /* 0.05 or 0.10 */
MF_API mf_status mf_evaluation_write_stock_fits(const mf_evaluation* evaluation, const char* path);
MF_API mf_status mf_evaluation_write_summary(const mf_evaluation* evaluation, const char* path);

typedef enum mf_histogram_kind { MF_HIST_R2_REDUCED = 0, MF_HIST_R2_FULL = 1, MF_HIST_P_VALUE = 2 } mf_histogram_kind;
MF_API mf_status mf_evaluation_write_histogram(const mf_evaluation* evaluation, mf_histogram_kind kind,
                                               const char* path);

/* ---- factor zoo -------------------------------------------------------- */

typedef struct mf_zoo_options {
  int folds;
  uint64_t seed;
  int grid_size;
  double grid_ratio;
} mf_zoo_options;

MF_API void mf_zoo_options_init(mf_zoo_options* options);
/* Three files with one series per row and dates across the header. */
MF_API mf_status mf_zoo_run(const char* assets_path, const char* controls_path, const char* new_factors_path,
                            const mf_zoo_options* options, mf_zoo** out);
MF_API void mf_zoo_free(mf_zoo* result);
MF_API int mf_zoo_r_new(const mf_zoo* result);
MF_API mf_status mf_zoo_lambda_g(const mf_zoo* result, double* out, size_t len);
MF_API double mf_zoo_gamma0(const mf_zoo* result);
MF_API double mf_zoo_wald(const mf_zoo* result);
MF_API int mf_zoo_df(const mf_zoo* result);
MF_API double mf_zoo_p_value(const mf_zoo* result);
MF_API size_t mf_zoo_selected_first_count(const mf_zoo* result);
MF_API size_t mf_zoo_selected_second_count(const mf_zoo* result);
MF_API size_t mf_zoo_selected_union_count(const mf_zoo* result);
MF_API int mf_zoo_pseudo_inverse(const mf_zoo* result);
MF_API mf_status mf_zoo_write_result(const mf_zoo* result, const char* path);

/* ---- simulation -------------------------------------------------------- */

/* kind: "tucker", "cp" or "cross-section"; config is a JSON object whose
 * absent keys take defaults. */
MF_API mf_status mf_simulate(const char* kind, const char* config_json, mf_simulation** out);
MF_API void mf_simulation_free(mf_simulation* simulation);
/* Panels are written as a dataset directory (no factors); cross sections as
 * assets.csv, controls.csv and new_factors.csv. Both add truth.json and
 * config.json. */
MF_API mf_status mf_simulation_write(const mf_simulation* simulation, const char* dir);
MF_API size_t mf_simulation_output_count(const mf_simulation* simulation);
/* File name relative to the output directory. */
MF_API const char* mf_simulation_output_name(const mf_simulation* simulation, size_t index);

#ifdef __cplusplus
}
#endif

#endif /* MATFACTOR_MATFACTOR_H */
