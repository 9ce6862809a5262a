#ifndef BLOWUP_H
#define BLOWUP_H

/* C API for the blow-up laboratory: scalar reaction kinetics, block-data
 * norm certificates, growth/well-posedness checks, and a 1-D Dirichlet
 * reaction-diffusion march.
 *
 * Conventions:
 *   - Every fallible call returns 0 on success or a nonzero error code
 *     (see BLOWUP_ERR_*); blowup_last_error() describes the failure for
 *     the calling thread.
 *   - Strings returned through char** are heap-allocated UTF-8 JSON or
 *     text; release them with blowup_string_free().
 *   - Handles are opaque; destroy functions accept NULL.
 */

#ifdef __cplusplus
extern "C" {
#endif

#define BLOWUP_ERR_INVALID_ARGUMENT 1
#define BLOWUP_ERR_DOMAIN 2
#define BLOWUP_ERR_POSITIVITY 3
#define BLOWUP_ERR_RANGE 4
#define BLOWUP_ERR_INSTABILITY 5
#define BLOWUP_ERR_JSON 6
#define BLOWUP_ERR_IO 7
#define BLOWUP_ERR_INTERNAL 8
#define BLOWUP_ERR_EXCEPTION 100
#define BLOWUP_ERR_UNKNOWN 101

typedef struct blowup_source blowup_source;
typedef struct blowup_blocks blowup_blocks;
typedef struct blowup_mesh blowup_mesh;

const char* blowup_version(void);
/* Message for the most recent failure on this thread; empty after success. */
const char* blowup_last_error(void);
void blowup_string_free(char* s);

/* ---- piecewise sources -------------------------------------------------
 * spec: builder name ("example-c", "example-d[:n_max]", "s_squared",
 * "s_log_s", "exp_s", "zero", "constant[:c]", "linear[:a[:b]]"), inline
 * JSON starting with '{', or "@path/to/source.json".
 */
int blowup_source_create(const char* spec, blowup_source** out);
void blowup_source_destroy(blowup_source* s);
int blowup_source_to_json(const blowup_source* s, char** out_json);
int blowup_source_eval(const blowup_source* s, double x, double* out);
/* Best Lipschitz bound on [lo, hi]; *has_jump is set when a value jump
 * makes the bound infinite. */
int blowup_source_lipschitz(const blowup_source* s, double lo, double hi, double* bound,
                            int* has_jump);
/* Integral of 1/f over [a, b]; fails unless f > 0 there. */
int blowup_reciprocal_integral(const blowup_source* s, double a, double b, double tol,
                               double* value, double* err);

/* ---- scalar kinetics u' = f(u) ---------------------------------------- */
/* JSON: {"status", "value", "blowup_time", "t", "pieces_traversed", "err"} */
int blowup_flow(const blowup_source* s, double z0, double t, char** out_json);
/* Escape-time classification T(z0) with evidence; JSON mirrors the verdict:
 * {"verdict": "finite"|"infinite"|"inconclusive", "time", "err",
 *  "lower_bound", "evidence": {"basis", "uniform_lower_bound", "segments"}} */
int blowup_time_classify(const blowup_source* s, double z0, double tol, char** out_json);
/* Smallest level z >= 1 with T(z) = eps. */
int blowup_invert_time(const blowup_source* s, double eps, double tol, double* out_level);
/* Order preservation of three flows on a time grid. */
int blowup_envelope(const blowup_source* s, double x0, double y0, double z0,
                    const double* grid, int n, char** out_json);

/* ---- block data on (0, L] ----------------------------------------------
 * spec: "example-d[:n_max]", inline JSON, or "@path/to/data.json".
 */
int blowup_blocks_create(const char* spec, blowup_blocks** out);
void blowup_blocks_destroy(blowup_blocks* b);
int blowup_blocks_to_json(const blowup_blocks* b, char** out_json);
int blowup_blocks_truncate(const blowup_blocks* b, double M, blowup_blocks** out);
/* L^p series verdict: {"kind": "convergent"|"divergent"|"inconclusive",
 * "sum", "err", "sum_is_upper_bound", "n0", "c", "partial_sums", "terms",
 * "note"} */
int blowup_lp_norm(const blowup_blocks* b, double p, int n_terms, char** out_json);
int blowup_evolve(const blowup_source* s, const blowup_blocks* b, double t, char** out_json);
/* Verdict on ||u(t)||_2^2 for data b evolved along s (same JSON shape as
 * blowup_lp_norm). */
int blowup_certificate(const blowup_source* s, const blowup_blocks* b, double t, int n_probe,
                       char** out_json);
int blowup_onset_measure(const blowup_source* s, const blowup_blocks* b, double t, double tol,
                         char** out_json);
/* Closed-form ||v(t)||_p^p for data x^-r on (0, 1] under u' = u log u. */
int blowup_powerlaw_norm(double r, double p, double t, char** out_json);

/* ---- growth conditions and well-posedness ------------------------------ */
int blowup_growth_check(const blowup_source* s, double p, double C, int n_max,
                        char** out_json);
int blowup_minimal_growth(const blowup_source* s, double C, const double* p_grid, int n,
                          int n_max, char** out_json);
/* q is probed against the window; the result carries "q" and "contains_q". */
int blowup_wellposedness_window(double p, int N, double q, char** out_json);
/* *has_bound = 0 when no uniform Lipschitz bound exists. */
int blowup_uniform_lipschitz(const blowup_source* s, double* bound, int* has_bound);

/* ---- 1-D Dirichlet reaction-diffusion ---------------------------------- */
int blowup_mesh_uniform(double L, int cells, blowup_mesh** out);
int blowup_mesh_graded(double L, double finest, double ratio, double cap, blowup_mesh** out);
void blowup_mesh_destroy(blowup_mesh* m);
int blowup_mesh_to_json(const blowup_mesh* m, char** out_json);
/* config_json keys (all optional): dt, theta, horizon, truncation,
 * norm_exponents, record_dt, overflow_guard, supersolution (bool).
 * Output: {"t_end", "steps", "overflowed", "overflow_time", "domain_clips",
 * "sup_end", "trace": {...}, "supersolution"?: {...}} */
int blowup_rd_solve(const blowup_source* s, const blowup_blocks* b, const blowup_mesh* m,
                    const char* config_json, char** out_json);
/* config_json keys: dt, theta, horizon, levels (array), t0, jobs. */
int blowup_rd_ladder(const blowup_source* s, const blowup_blocks* b, const blowup_mesh* m,
                     const char* config_json, char** out_json);

/* ---- scenarios ---------------------------------------------------------- */
/* Runs a named scenario ("example-a".."example-e"); overrides_json may be
 * NULL or a config fragment merged over the built-in defaults. The manifest
 * JSON lists files written, parameter hash, and check outcomes. */
int blowup_run_scenario(const char* name, const char* overrides_json, const char* out_dir,
                        char** out_manifest_json);
/* Built-in defaults as JSON. */
int blowup_default_config(char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* BLOWUP_H */
