/* C interface to the rome reconciliation library.
 *
 * All functions returning rome_status leave a message retrievable with
 * rome_last_error() (per thread) on failure. Matrices cross the boundary as
 * row-major double arrays. Objects returned through out-pointers are owned by
 * the caller and released with the matching *_free function.
 */
#ifndef ROME_ROME_H
#define ROME_ROME_H

#include <stddef.h>
#include <stdint.h>

#if defined(ROME_BUILDING_LIBRARY)
#define ROME_API __attribute__((visibility("default")))
#else
#define ROME_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rome_status {
    ROME_OK = 0,
    ROME_ERR_VALIDATION = 2,
    ROME_ERR_NUMERIC = 3,
    ROME_ERR_IO = 4,
    ROME_ERR_INTERNAL = 5
} rome_status;

typedef enum rome_loss { ROME_LOSS_LS = 0, ROME_LOSS_LAD, ROME_LOSS_HUBER, ROME_LOSS_LP, ROME_LOSS_QUANTILE } rome_loss;

typedef enum rome_cov {
    ROME_COV_OLS = 0,
    ROME_COV_WLSV,
    ROME_COV_WLSS,
    ROME_COV_SAMPLE,
    ROME_COV_SHRINK,
    ROME_COV_CUSTOM /* rome_options.custom_w */
} rome_cov;

typedef enum rome_method { ROME_METHOD_BU = 0, ROME_METHOD_MINT, ROME_METHOD_ROME, ROME_METHOD_COMBINE } rome_method;

typedef enum rome_pattern { ROME_PATTERN_AVERAGE = 0, ROME_PATTERN_ONE_WAY, ROME_PATTERN_TWO_WAY } rome_pattern;

typedef enum rome_init { ROME_INIT_ZERO = 0, ROME_INIT_BASE_PROJECTION } rome_init;

typedef enum rome_lad_mode { ROME_LAD_HUBER_APPROX = 0, ROME_LAD_PERTURBATION } rome_lad_mode;

typedef enum rome_format { ROME_FORMAT_CSV = 0, ROME_FORMAT_JSON } rome_format;

typedef struct rome_hierarchy rome_hierarchy;
typedef struct rome_table rome_table;
typedef struct rome_result rome_result;
typedef struct rome_report rome_report;

ROME_API const char* rome_version(void);
ROME_API const char* rome_last_error(void);
ROME_API void rome_string_free(char* s);

/* Hierarchies */
ROME_API rome_status rome_hierarchy_from_json(const char* json, rome_hierarchy** out);
ROME_API rome_status rome_hierarchy_load(const char* path, rome_hierarchy** out);
/* Three-level tree: `bottom` leaves grouped `fan_out` at a time under one root. */
ROME_API rome_status rome_hierarchy_regular(size_t bottom, size_t fan_out, rome_hierarchy** out);
ROME_API rome_status rome_hierarchy_to_json(const rome_hierarchy* h, char** out);
ROME_API void rome_hierarchy_free(rome_hierarchy* h);
ROME_API size_t rome_hierarchy_size(const rome_hierarchy* h);
ROME_API size_t rome_hierarchy_bottom_count(const rome_hierarchy* h);
/* Label of series i in hierarchy order, NULL when out of range. */
ROME_API const char* rome_hierarchy_label(const rome_hierarchy* h, size_t i);
ROME_API rome_status rome_hierarchy_level_range(const rome_hierarchy* h, const char* level, size_t* first, size_t* count);
/* n x n_b summing matrix. */
ROME_API rome_status rome_hierarchy_summing(const rome_hierarchy* h, double* out);
/* (n - n_b) x n constraint matrix; zero on coherent vectors. */
ROME_API rome_status rome_hierarchy_constraint(const rome_hierarchy* h, double* out);

/* Labelled tables (series x columns) */
ROME_API rome_status rome_table_create(size_t rows, size_t cols, const char* const* row_labels,
                                       const char* const* col_labels, const double* values, rome_table** out);
ROME_API rome_status rome_table_read_csv(const char* path, rome_table** out);
ROME_API rome_status rome_table_parse_csv(const char* text, rome_table** out);
ROME_API rome_status rome_table_write_csv(const rome_table* t, const char* path);
ROME_API rome_status rome_table_to_csv(const rome_table* t, char** out);
ROME_API size_t rome_table_rows(const rome_table* t);
ROME_API size_t rome_table_cols(const rome_table* t);
ROME_API const char* rome_table_row_label(const rome_table* t, size_t i);
ROME_API const char* rome_table_col_label(const rome_table* t, size_t j);
ROME_API double rome_table_get(const rome_table* t, size_t i, size_t j);
ROME_API rome_status rome_table_data(const rome_table* t, double* out);
ROME_API void rome_table_free(rome_table* t);

/* Reconciliation */
typedef struct rome_options {
    rome_method method;
    rome_loss loss;
    rome_cov cov;
    rome_pattern pattern; /* ROME_METHOD_COMBINE only */
    double huber_k;       /* <= 0: 1.345 times the pooled residual scale */
    double lp_p;
    double quantile_q;
    double shrink_lambda; /* < 0: estimated from residuals */
    double kh;
    const double* custom_w; /* n x n, ROME_COV_CUSTOM only */
    double varsigma;
    double epsilon;
    int omega_max;
    rome_init init;
    rome_lad_mode lad_mode;
    double perturbation;
} rome_options;

ROME_API void rome_options_init(rome_options* opts);

/* `residuals` may be NULL when neither the covariance design nor the loss needs it. */
ROME_API rome_status rome_reconcile(const rome_hierarchy* h, const rome_table* base, const rome_table* residuals,
                                    const rome_options* opts, rome_result** out);
ROME_API const rome_table* rome_result_forecasts(const rome_result* r);
ROME_API size_t rome_result_horizons(const rome_result* r);
ROME_API int rome_result_iterations(const rome_result* r, size_t h);
ROME_API int rome_result_converged(const rome_result* r, size_t h);
ROME_API double rome_result_objective(const rome_result* r, size_t h);
/* max over horizons of the constraint residual norm. */
ROME_API double rome_result_coherence(const rome_result* r);
ROME_API void rome_result_free(rome_result* r);

/* Accuracy */
ROME_API rome_status rome_rmse(const double* forecasts, const double* actuals, size_t n, size_t horizons,
                               const size_t* group, size_t group_size, size_t window, double* out);
ROME_API rome_status rome_pct_change(double rmse_method, double rmse_base, double* out);

/* Reports */
typedef struct rome_experiment_options {
    const char* design;
    const char* dist;  /* NULL: every distribution */
    double sigma;      /* <= 0: grid */
    int bottom;        /* <= 0: grid */
    double proportion; /* <= 0: grid */
    double rho;        /* < 0: grid */
    int reps;
    uint64_t seed;
    const char* methods; /* NULL or "": defaults */
    unsigned threads;    /* 0: hardware concurrency */
    int mean_of_pct;
    rome_lad_mode lad_mode;
} rome_experiment_options;

ROME_API void rome_experiment_options_init(rome_experiment_options* opts);
ROME_API rome_status rome_simulate(const rome_experiment_options* opts, rome_report** out);
ROME_API rome_status rome_bench(const char* scenario, int iters, uint64_t seed, rome_report** out);
/* RMSE per hierarchy level and whole set over each window; pct change versus `base` when given. */
ROME_API rome_status rome_evaluate(const rome_hierarchy* h, const rome_table* forecasts, const rome_table* actuals,
                                   const rome_table* base, const int* windows, size_t window_count,
                                   rome_report** out);
ROME_API size_t rome_report_rows(const rome_report* r);
ROME_API rome_status rome_report_to_string(const rome_report* r, rome_format format, char** out);
ROME_API rome_status rome_report_write(const rome_report* r, rome_format format, const char* path);
ROME_API void rome_report_free(rome_report* r);

#ifdef __cplusplus
}
#endif

#endif
