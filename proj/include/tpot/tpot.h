/* C interface to the pipeline search engine.
 *
 * Every function returns a tpot_status. On failure the message is available
 * from tpot_last_error() on the same thread until the next call. Objects
 * are opaque and released with their matching *_free function; strings
 * returned through char** are released with tpot_string_free.
 */
#ifndef TPOT_TPOT_H
#define TPOT_TPOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TPOT_API __declspec(dllexport)
#else
#define TPOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tpot_status {
    TPOT_OK = 0,
    TPOT_ERR_INVALID_ARGUMENT = 1, /* null pointer or bad argument at the boundary */
    TPOT_ERR_USAGE = 2,            /* invalid configuration */
    TPOT_ERR_PARSE = 3,
    TPOT_ERR_SCHEMA = 4,
    TPOT_ERR_IO = 5,
    TPOT_ERR_DATA = 6,             /* contract, shape, split or combine errors */
    TPOT_ERR_GENERATION = 7,       /* data generator could not satisfy its spec */
    TPOT_ERR_TRAINING = 8,
    TPOT_ERR_BUDGET = 9,
    TPOT_ERR_INTERNAL = 10
} tpot_status;

typedef struct tpot_dataset tpot_dataset;
typedef struct tpot_run tpot_run;

TPOT_API const char* tpot_version(void);
TPOT_API const char* tpot_last_error(void);
TPOT_API const char* tpot_status_name(tpot_status status);
TPOT_API void tpot_string_free(char* s);

/* ---- datasets ---- */

TPOT_API tpot_status tpot_dataset_load_csv(const char* path, const char* label_column, tpot_dataset** out);
TPOT_API tpot_status tpot_dataset_write_csv(const tpot_dataset* ds, const char* path);
TPOT_API size_t tpot_dataset_rows(const tpot_dataset* ds);
TPOT_API size_t tpot_dataset_cols(const tpot_dataset* ds);
TPOT_API int tpot_dataset_classes(const tpot_dataset* ds);
/* Row-major copy of the features into buf (rows * cols doubles). */
TPOT_API tpot_status tpot_dataset_copy_values(const tpot_dataset* ds, double* buf, size_t len);
TPOT_API tpot_status tpot_dataset_copy_labels(const tpot_dataset* ds, int32_t* buf, size_t len);
TPOT_API void tpot_dataset_free(tpot_dataset* ds);

typedef struct tpot_epistasis_params {
    double heritability;
    double maf;
    int models;
    int noise_snps;
    size_t sample_size;
    double tolerance;
} tpot_epistasis_params;

TPOT_API void tpot_epistasis_params_default(tpot_epistasis_params* p);
/* metadata_json may be NULL; otherwise receives the sidecar document. */
TPOT_API tpot_status tpot_generate_epistasis(const tpot_epistasis_params* p, uint64_t seed, tpot_dataset** out,
    char** metadata_json);

typedef struct tpot_hill_valley_params {
    size_t samples;
    size_t length;
    double noise_std;
} tpot_hill_valley_params;

TPOT_API void tpot_hill_valley_params_default(tpot_hill_valley_params* p);
TPOT_API tpot_status tpot_generate_hill_valley(const tpot_hill_valley_params* p, uint64_t seed, tpot_dataset** out);

/* ---- search ---- */

typedef enum tpot_mode { TPOT_MODE_STANDARD = 0, TPOT_MODE_PARETO = 1, TPOT_MODE_RANDOM = 2 } tpot_mode;

typedef struct tpot_gp_config {
    size_t population_size;
    size_t generations;
    double mutation_rate;
    double crossover_rate;
    tpot_mode mode;
    double elitism_fraction;
    double parsimony_probability;
    uint64_t seed;
    int max_depth;
    int init_depth;
    size_t max_operators;
    int64_t eval_budget_millis; /* 0 = unbounded */
    size_t workers;
    int resplit_each_generation;
} tpot_gp_config;

TPOT_API void tpot_gp_config_default(tpot_gp_config* cfg);
TPOT_API tpot_status tpot_search(const tpot_dataset* ds, const tpot_gp_config* cfg, tpot_run** out);

/* has_best is set to 0 when no individual evaluated successfully. */
TPOT_API tpot_status tpot_run_best(const tpot_run* run, int* has_best, double* accuracy, size_t* size);
TPOT_API size_t tpot_run_evaluations(const tpot_run* run);
TPOT_API size_t tpot_run_generations(const tpot_run* run);
TPOT_API tpot_status tpot_run_render_best(const tpot_run* run, char** out);
TPOT_API tpot_status tpot_run_to_json(const tpot_run* run, int with_timing, char** out);
TPOT_API tpot_status tpot_run_from_json(const char* text, tpot_run** out);
/* Writes the best pipeline document to path and its rendering to path.txt. */
TPOT_API tpot_status tpot_run_export(const tpot_run* run, const char* path);
TPOT_API void tpot_run_free(tpot_run* run);

/* Balanced accuracy of a RandomForest on an outer 75/25 split drawn from seed. */
TPOT_API tpot_status tpot_rf_baseline(const tpot_dataset* ds, size_t trees, uint64_t seed, double* accuracy);

/* ---- experiments ---- */

/* Runs a "tpot-experiment/1" document. workers > 0 overrides the document;
 * output_dir non-NULL overrides it as well. report_json (may be NULL)
 * receives the report body. */
TPOT_API tpot_status tpot_bench(const char* spec_json, size_t workers, const char* output_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
