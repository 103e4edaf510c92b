#ifndef SYNTHGRID_SYNTHGRID_H
#define SYNTHGRID_SYNTHGRID_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SG_API __declspec(dllexport)
#else
#define SG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_PARAMETER = 1,
  SG_ERR_SCHEMA = 2,
  SG_ERR_ROW = 3,
  SG_ERR_CONTRACT = 4,
  SG_ERR_NUMERIC = 5,
  SG_ERR_EMPTY_SET = 6,
  SG_ERR_VALIDATION = 7,
  SG_ERR_DEGENERATE = 8,
  SG_ERR_IO = 9,
  SG_ERR_INTERNAL = 10
} sg_status;

typedef enum sg_channel { SG_CHANNEL_LOAD = 0, SG_CHANNEL_PV = 1, SG_CHANNEL_EV = 2 } sg_channel;

typedef struct sg_profile_set sg_profile_set;
typedef struct sg_gmm sg_gmm;
typedef struct sg_deep_model sg_deep_model;
typedef struct sg_hems_result sg_hems_result;

/* Message of the last failed call on this thread; never NULL. */
SG_API const char* sg_last_error(void);
SG_API const char* sg_version(void);
/* Strings returned through char** out-parameters are freed with this. */
SG_API void sg_string_free(char* s);

/* ---- profile sets (n_days x 96, row-major) ---- */
SG_API sg_status sg_profile_set_create(sg_channel channel, const double* values, size_t n_days,
                                       sg_profile_set** out);
/* Reads a day-matrix CSV plus its sidecar. channel < 0 requires the sidecar. */
SG_API sg_status sg_profile_set_load(const char* csv_path, int channel, sg_profile_set** out);
SG_API sg_status sg_profile_set_save(const sg_profile_set* set, const char* csv_path);
SG_API size_t sg_profile_set_days(const sg_profile_set* set);
SG_API sg_channel sg_profile_set_channel(const sg_profile_set* set);
SG_API int sg_profile_set_is_normalized(const sg_profile_set* set);
/* Copies days*96 values; fails if capacity is too small. */
SG_API sg_status sg_profile_set_values(const sg_profile_set* set, double* out, size_t capacity);
/* Deep copy; `record_from`, when given, lends its normalization record. */
SG_API sg_status sg_profile_set_copy(const sg_profile_set* set, const sg_profile_set* record_from,
                                     sg_profile_set** out);
SG_API void sg_profile_set_free(sg_profile_set* set);

/* ---- ingest ---- */
/* load -> 15-min mean resample -> full days. Column names may be NULL for
   the defaults (timestamp, power_w). days_seen may be NULL. */
SG_API sg_status sg_ingest_power_csv(const char* path, sg_channel channel, const char* timestamp_column,
                                     const char* power_column, sg_profile_set** out, size_t* days_seen);
/* Session CSV -> charging load at level_kw -> full days. */
SG_API sg_status sg_ingest_ev_sessions(const char* path, double level_kw, sg_profile_set** out, size_t* days_seen);
SG_API sg_status sg_split_train_test(const sg_profile_set* set, double ratio, sg_profile_set** train,
                                     sg_profile_set** test);
/* Min-max statistics from `set` itself. */
SG_API sg_status sg_normalize(const sg_profile_set* set, sg_profile_set** out);
/* Statistics taken from the record carried by `reference`. */
SG_API sg_status sg_normalize_with(const sg_profile_set* set, const sg_profile_set* reference,
                                   sg_profile_set** out);
SG_API sg_status sg_denormalize(const sg_profile_set* set, sg_profile_set** out);

/* ---- config validation: kind is "gmm", "deep", "evaluate" or "hems" ---- */
SG_API sg_status sg_config_validate(const char* kind, const char* json);

/* ---- gmm ---- */
SG_API sg_status sg_gmm_fit(const sg_profile_set* normalized_train, const char* config_json, sg_gmm** out);
SG_API sg_status sg_gmm_save(const sg_gmm* model, const char* path);
SG_API sg_status sg_gmm_load(const char* path, sg_gmm** out);
/* Rows in normalized space, clipped to [0,1]. */
SG_API sg_status sg_gmm_sample(const sg_gmm* model, int64_t n_days, uint64_t seed, sg_profile_set** out);
/* {"components", "log_likelihood_trace", "warnings"} */
SG_API sg_status sg_gmm_info_json(const sg_gmm* model, char** out);
SG_API void sg_gmm_free(sg_gmm* model);

/* ---- deep models (vaegan | gan) ---- */
/* checkpoint_dir may be NULL. */
SG_API sg_status sg_deep_train(const sg_profile_set* normalized_train, const char* config_json,
                               const char* checkpoint_dir, sg_deep_model** out);
SG_API sg_status sg_deep_load(const char* checkpoint_dir, sg_deep_model** out);
SG_API sg_status sg_deep_save(const sg_deep_model* model, const char* checkpoint_dir);
SG_API sg_status sg_deep_generate(const sg_deep_model* model, int64_t n_days, uint64_t seed, sg_profile_set** out);
/* {"model_type", "epochs_completed", "loss_history": {name: [..]}} */
SG_API sg_status sg_deep_info_json(const sg_deep_model* model, char** out);
SG_API void sg_deep_free(sg_deep_model* model);

/* ---- metrics ---- */
/* Report JSON for one real/synthetic pair. options_json may be NULL. */
SG_API sg_status sg_evaluate(const sg_profile_set* real, const sg_profile_set* synth, const char* options_json,
                             char** report_json);
/* Table of a JSON array of reports, one CSV row per model. */
SG_API sg_status sg_summary_table(const char* reports_json, char** csv);

/* ---- HEMS ---- */
/* Price schedule JSON {"slots": [{"buy":..,"sell":..} x 96]}; NULL path gives
   the default two-tier schedule. */
SG_API sg_status sg_price_schedule_json(const char* path, char** out);
/* Offline training on the train sets, greedy test on the test sets.
   prices_json may be NULL for the default schedule. */
SG_API sg_status sg_hems_run(const sg_profile_set* train_load, const sg_profile_set* train_pv,
                             const sg_profile_set* train_ev, const sg_profile_set* test_load,
                             const sg_profile_set* test_pv, const sg_profile_set* test_ev, const char* config_json,
                             const char* prices_json, uint64_t seed, sg_hems_result** out);
/* {"episode_rewards", "daily_profit", "total_profit", "optimal_daily_profit",
    "optimal_total_profit"} */
SG_API sg_status sg_hems_result_json(const sg_hems_result* run, char** out);
SG_API sg_status sg_hems_save_qtable(const sg_hems_result* run, const char* bin_path, const char* json_path);
SG_API void sg_hems_result_free(sg_hems_result* run);

#ifdef __cplusplus
}
#endif

#endif
