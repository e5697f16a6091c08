#ifndef SWNAV_SWNAV_H
#define SWNAV_SWNAV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SW_API __declspec(dllexport)
#else
#define SW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns SW_OK or an error status; on error sw_last_error()
 * holds a message for the calling thread. Output handles and strings are
 * written only on success. Strings returned through char** are owned by the
 * caller and released with sw_string_free. */
typedef enum sw_status {
  SW_OK = 0,
  SW_ERR_INVALID_ARGUMENT = 1,
  SW_ERR_DIMENSION = 2,
  SW_ERR_CONFIG = 3,
  SW_ERR_FORMAT = 4,
  SW_ERR_IO = 5,
  SW_ERR_VALIDATION = 6,
  SW_ERR_NUMERIC = 7,
  SW_ERR_NO_PATH = 8,
  SW_ERR_GENERATION = 9,
  SW_ERR_NOT_READY = 10,
  SW_ERR_EMPTY_SET = 11,
  SW_ERR_UNDEFINED_DIRECTION = 12,
  SW_ERR_DEGENERATE_DISPARITY = 13,
  SW_ERR_EVALUATION = 14,
  SW_ERR_INTERNAL = 99
} sw_status;

typedef struct sw_world sw_world;
typedef struct sw_dataset sw_dataset;
typedef struct sw_model sw_model;
typedef struct sw_server sw_server;

SW_API const char* sw_version(void);
SW_API const char* sw_status_name(sw_status status);
SW_API const char* sw_last_error(void);
SW_API void sw_string_free(char* s);

/* Worlds. options_json may be NULL:
 * {"size_m", "obstacles", "agents", "min_obstacle_half", "max_obstacle_half"} */
SW_API sw_status sw_world_generate(uint64_t seed, const char* options_json, sw_world** out);
SW_API sw_status sw_world_load(const char* path, sw_world** out);
SW_API sw_status sw_world_save(const sw_world* world, const char* path);
SW_API sw_status sw_world_to_json(const sw_world* world, char** out_json);
SW_API void sw_world_free(sw_world* world);

/* Datasets (SWEP files). options_json may be NULL:
 * {"episodes", "length_s", "seed", "worlds", "agents", "obstacles", "size_m"} */
SW_API sw_status sw_dataset_generate(const char* options_json, sw_dataset** out);
SW_API sw_status sw_dataset_load(const char* path, sw_dataset** out);
SW_API sw_status sw_dataset_save(const sw_dataset* dataset, const char* path);
SW_API sw_status sw_dataset_counts(const sw_dataset* dataset, size_t* episodes, size_t* worlds);
SW_API sw_status sw_dataset_world(const sw_dataset* dataset, size_t index, sw_world** out);
SW_API void sw_dataset_free(sw_dataset* dataset);

/* Models (SWCK files). preset is one of tiny, toy, desk, full. */
SW_API sw_status sw_model_create(const char* preset, uint64_t seed, sw_model** out);
SW_API sw_status sw_model_create_from_config(const char* config_json, uint64_t seed, sw_model** out);
SW_API sw_status sw_model_load(const char* path, sw_model** out);
SW_API sw_status sw_model_save(const sw_model* model, const char* path);
SW_API sw_status sw_model_config_json(const sw_model* model, char** out_json);
/* One /predict request document in, one response document out. */
SW_API sw_status sw_model_predict_json(const sw_model* model, const char* request_json, char** out_response_json);
SW_API void sw_model_free(sw_model* model);

typedef void (*sw_progress_fn)(size_t step, double loss, void* user);

/* options_json may be NULL: {"steps", "batch_size", "lr", "seed",
 * "warmup_steps", "weight_decay", "subgoal_mode": "line_of_sight"|"uniform",
 * "subgoal_seed"}. The summary reports initial and final mean loss. */
SW_API sw_status sw_train(sw_model* model, const sw_dataset* dataset, const char* options_json,
                          sw_progress_fn progress, void* user, char** out_summary_json);

/* options_json may be NULL: {"radius_m", "k", "subgoal_mode", "subgoal_seed"}.
 * Writes the TSV report (and its .json mirror) when report_path is not NULL. */
SW_API sw_status sw_evaluate(const sw_model* model, const sw_dataset* dataset, const char* options_json,
                             const char* report_path, char** out_report_json);

/* options_json may be NULL: {"routes", "seed", "policy": "model"|"oracle"|"zero",
 * "min_separation_m", "step_factor", "step_slack"}. model may be NULL unless
 * the policy is "model". Writes the per-step TSV when trajectory_path is set. */
SW_API sw_status sw_rollout(const sw_model* model, const sw_world* world, const char* options_json,
                            const char* trajectory_path, char** out_summary_json);

/* clips_json: [{"clip_id", "duration_s", "description", "keep"?}].
 * options_json: {"client": "oracle"|"stub"|"http", "answers": {id: text},
 * "host", "port", "timeout_ms"}. */
SW_API sw_status sw_filter_clips(const char* clips_json, const char* options_json, char** out_result_json);

/* Prediction server. checkpoint_path may be NULL (health reports not ready). */
SW_API sw_status sw_server_create(const char* checkpoint_path, sw_server** out);
SW_API sw_status sw_server_load(sw_server* server, const char* checkpoint_path);
/* host NULL means $SW_BIND_ADDR or 127.0.0.1; port 0 picks a free port. */
SW_API sw_status sw_server_bind(sw_server* server, const char* host, int port, int* out_port);
/* Blocks until sw_server_stop is called from another thread. */
SW_API sw_status sw_server_run(sw_server* server);
SW_API sw_status sw_server_stop(sw_server* server);
/* In-process dispatch of "GET /health" or "POST /predict". */
SW_API sw_status sw_server_handle(sw_server* server, const char* method, const char* path, const char* body,
                                  int* out_http_status, char** out_body);
SW_API void sw_server_free(sw_server* server);

#ifdef __cplusplus
}
#endif

#endif
