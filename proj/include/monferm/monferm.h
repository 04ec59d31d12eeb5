/* monferm C API: monitored free-fermion trajectory simulation and the
 * correlation-length analysis toolkit behind the monferm CLI.
 *
 * Conventions:
 *  - every function returning mf_status leaves a message retrievable via
 *    mf_last_error() on failure (thread-local, valid until the next call
 *    from the same thread);
 *  - status values match the CLI exit codes: 0 success, 2 configuration
 *    problem, 3 runtime failure; 4 flags API misuse (null handles);
 *  - strings returned through char** are heap-allocated; release them with
 *    mf_string_free().
 */
#ifndef MONFERM_H
#define MONFERM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_CONFIG = 2,
  MF_ERR_RUNTIME = 3,
  MF_ERR_ARGUMENT = 4
} mf_status;

typedef struct mf_config mf_config;
typedef struct mf_ensemble_result mf_ensemble_result;

const char* mf_version(void);
const char* mf_last_error(void);
void mf_string_free(char* s);

/* --- configuration ------------------------------------------------------ */

mf_status mf_config_parse(const char* json_text, mf_config** out);
mf_status mf_config_parse_file(const char* path, mf_config** out);
mf_status mf_config_to_json(const mf_config* config, char** out_json);
mf_status mf_config_digest(const mf_config* config, char** out_digest);
void mf_config_free(mf_config* config);

/* --- simulation --------------------------------------------------------- */

/* Runs the full ensemble described by the config. Blocking; honors the
 * config's worker count (0 = hardware). */
mf_status mf_run_ensemble(const mf_config* config, mf_ensemble_result** out);
void mf_ensemble_result_free(mf_ensemble_result* result);

mf_status mf_result_aggregate_json(const mf_ensemble_result* result, char** out_json);
mf_status mf_result_trajectories_csv(const mf_ensemble_result* result, char** out_csv);
mf_status mf_result_correlations_csv(const mf_ensemble_result* result, char** out_csv);

/* Writes aggregate.json, trajectories.csv and correlations.csv into dir. */
mf_status mf_result_write(const mf_config* config, mf_ensemble_result* result,
                          const char* dir);

/* --- fitting ------------------------------------------------------------ */

typedef struct mf_decay_fit {
  double parameter; /* l_cor (exponential) or the exponent (power law) */
  double amplitude;
  double ci_low;
  double ci_high;
  double rss;
  int n_points;
} mf_decay_fit;

typedef struct mf_scaling_fit {
  double a, b, gamma_c;
  double a_ci_low, a_ci_high;
  double b_ci_low, b_ci_high;
  double gamma_c_ci_low, gamma_c_ci_high;
  double covariance[9]; /* row-major over (a, b, gamma_c) */
  double gamma_min, gamma_max;
  double rss;
  int n_points;
  int gamma_c_fixed; /* boolean */
  int reliable;      /* boolean; see note when 0 */
  char note[160];
} mf_scaling_fit;

/* sigma may be NULL for unweighted fits. Window [r_min, r_max] inclusive. */
mf_status mf_fit_exponential(const double* r, const double* c, const double* sigma,
                             size_t n, double r_min, double r_max, mf_decay_fit* out);
mf_status mf_fit_powerlaw(const double* r, const double* c, const double* sigma,
                          size_t n, double r_min, double r_max, mf_decay_fit* out);

/* Same fits driven by a correlations.csv file; pass r_min = r_max = 0 to let
 * the tail window be chosen automatically. kind: 0 exponential, 1 power law. */
mf_status mf_fit_decay_file(const char* correlations_csv, int kind, double r_min,
                            double r_max, mf_decay_fit* out);

/* fix_gamma_c nonzero pins gamma_c at gamma_c_fixed (two-parameter fit). */
mf_status mf_fit_scaling(const double* gamma, const double* lcor, const double* sigma,
                         size_t n, int fix_gamma_c, double gamma_c_fixed,
                         mf_scaling_fit* out);

/* symmetry_class: 0 clean (BDI), 1 disordered (AIII, Gaussian strength w). */
mf_status mf_theory_lcor(int symmetry_class, double gamma, double w, double* out);

/* --- reporting ---------------------------------------------------------- */

/* Renders the human-readable summary of an aggregate.json file. */
mf_status mf_report(const char* aggregate_json_path, char** out_text);

/* Writes plot-ready tables (per-input |C(r)| tables, a combined
 * lcor-vs-gamma table with a ln(l_cor) column) into outdir.
 * scaling_json_path may be NULL; when given, the file's JSON is embedded as
 * comment lines in the lcor table header. Inputs lacking an l_cor series are
 * listed in the returned summary but do not abort the rest. */
mf_status mf_report_tables(const char* const* aggregate_json_paths, size_t n_paths,
                           const char* scaling_json_path, const char* outdir,
                           char** out_summary);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MONFERM_H */
