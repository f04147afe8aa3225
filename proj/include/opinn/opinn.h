#ifndef OPINN_OPINN_H
#define OPINN_OPINN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum {
    OPINN_OK = 0,
    OPINN_ERR_INVALID_ARGUMENT = 2,
    OPINN_ERR_DATA = 3,
    OPINN_ERR_NUMERIC = 4
} opinn_status;

/* Message of the last failure on this thread; empty string if none. */
const char* opinn_last_error(void);

/* Caps internal linear-algebra worker threads (1 = fully serial). */
void opinn_set_max_threads(int n);

/* Synthetic dataset generation. config_json fields: pattern, nodes, seed and
 * optional overrides (ba_m, lambda, epsilon, eta, raw_steps, target_steps).
 * Writes graph.csv, opinions.csv, meta.json into out_dir. */
opinn_status opinn_generate_dataset(const char* config_json, const char* out_dir);

/* Rolls a mechanical model forward from the first opinion column of the
 * dataset in dataset_dir. config_json fields: model, steps and optional
 * alpha, epsilon, delta, seed. Writes opinions.csv and meta.json. */
opinn_status opinn_simulate(const char* dataset_dir, const char* config_json,
                            const char* out_dir);

/* Trains a forecaster on the dataset. config_json mirrors the model
 * configuration; split_json ({"train":..,"val":..,"test":..}) may be NULL for
 * the standard 0.6/0.2/0.2 chronological split. Writes the checkpoint and a
 * JSON training report. */
opinn_status opinn_train(const char* dataset_dir, const char* config_json,
                         const char* split_json, const char* checkpoint_path,
                         const char* report_path);

/* Scores models on the test span. eval_json fields: context_len, horizons
 * (observed columns), optional split, and models: a list of either
 * {"name":..,"checkpoints":[paths..],"seeds":[..]} or
 * {"name":..,"baseline":"voter|degroot|fj|hk","seeds":[..],"alpha":..,
 *  "epsilon":..}. Either output path may be NULL to skip that format. */
opinn_status opinn_evaluate(const char* dataset_dir, const char* eval_json,
                            const char* report_json_path, const char* report_csv_path);

/* Trains the full model and the three single-branch-removal variants under
 * one configuration and scores them together. ablate_json fields: train
 * (model config), optional split, seeds, horizons, context_len. */
opinn_status opinn_ablate(const char* dataset_dir, const char* ablate_json,
                          const char* report_json_path, const char* report_csv_path);

/* Exhaustive search over space_json: {"learning_rates":[..],
 * "hidden_dims":[..], "batch_sizes":[..]}. Writes the result JSON. */
opinn_status opinn_grid_search(const char* dataset_dir, const char* config_json,
                               const char* space_json, const char* split_json,
                               const char* result_path);

/* Opaque trained-model handle for inference. */
typedef struct opinn_model opinn_model;

/* Loads a checkpoint; the graph comes from dataset_dir. NULL on failure
 * (see opinn_last_error). */
opinn_model* opinn_model_load(const char* checkpoint_path, const char* dataset_dir);
void opinn_model_free(opinn_model* model);

/* context: row-major n x context_len; out: row-major n x horizon_cols.
 * horizon_cols must be a multiple of the configured block length. */
opinn_status opinn_model_forecast(opinn_model* model, const double* context, size_t n,
                                  size_t context_len, size_t horizon_cols, double* out);

/* Transport and reaction gate values (logistic of the raw parameters). */
opinn_status opinn_model_gates(const opinn_model* model, double* omega, double* delta);

#ifdef __cplusplus
}
#endif

#endif /* OPINN_OPINN_H */
