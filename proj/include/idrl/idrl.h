#ifndef IDRL_IDRL_H
#define IDRL_IDRL_H

#include <stddef.h>
#include <stdint.h>

#if defined(IDRL_BUILDING_LIBRARY)
#define IDRL_API __attribute__((visibility("default")))
#else
#define IDRL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum idrl_status {
  IDRL_OK = 0,
  IDRL_ERR_RUNTIME = 1,     /* numerical failure or other runtime error */
  IDRL_ERR_VALIDATION = 2,  /* bad config, incompatible inputs */
  IDRL_ERR_IO = 3,          /* unreadable/unwritable path, corrupt file */
  IDRL_ERR_ARGUMENT = 4     /* null pointer or bad argument to this API */
} idrl_status;

typedef struct idrl_config idrl_config;
typedef struct idrl_dataset idrl_dataset;

/* Message for the last failing call on this thread ("" after success). */
IDRL_API const char* idrl_last_error(void);
IDRL_API const char* idrl_version(void);
/* Column documentation of metrics.csv. */
IDRL_API const char* idrl_metrics_schema(void);

/* Strings returned through char** are owned by the caller. */
IDRL_API void idrl_string_free(char* s);

/* Config. IDRL_SEED in the environment overrides the file's seed. */
IDRL_API idrl_status idrl_config_load(const char* path, idrl_config** out);
IDRL_API idrl_status idrl_config_parse(const char* toml, idrl_config** out);
IDRL_API void idrl_config_free(idrl_config* cfg);
IDRL_API idrl_status idrl_config_set_seed(idrl_config* cfg, uint64_t seed);
IDRL_API idrl_status idrl_config_get_seed(const idrl_config* cfg, uint64_t* seed);
IDRL_API idrl_status idrl_config_to_toml(const idrl_config* cfg, char** out);

/* Expert datasets. */
IDRL_API idrl_status idrl_dataset_load(const char* path, idrl_dataset** out);
IDRL_API void idrl_dataset_free(idrl_dataset* ds);
IDRL_API idrl_status idrl_dataset_info(const idrl_dataset* ds, size_t* n_trajectories, int* delay, int* state_dim,
                                       int* action_dim);

/* Trains an expert and writes n_traj trajectories (config value when
   n_traj <= 0) to out_path. summary_csv may be NULL. */
IDRL_API idrl_status idrl_cmd_expert(const idrl_config* cfg, int n_traj, const char* out_path,
                                     const char* summary_csv);

/* algo: "idrl", "bc-delayed" or "bc-augmented". expert_path NULL falls back
   to run.expert_path. Artifacts go to out_dir. */
IDRL_API idrl_status idrl_cmd_train(const idrl_config* cfg, const char* algo, const char* expert_path,
                                    const char* out_dir, int resume);

/* Runs the tabular certification suite; writes certificates.csv and
   summary.json into out_dir. failures may be NULL. */
IDRL_API idrl_status idrl_cmd_certify(const idrl_config* cfg, const char* out_dir, int* failures);

/* Each series is "label=dir[,dir...]" or a bare run directory. A series with
   several directories is drawn as the mean and std across them. */
IDRL_API idrl_status idrl_cmd_plot(const char* const* series, size_t n_series, const char* out_svg, const char* title);

/* Deterministic true return of a checkpointed agent or BC policy. */
IDRL_API idrl_status idrl_cmd_eval(const idrl_config* cfg, const char* checkpoint, int episodes, double* mean,
                                   double* std);

#ifdef __cplusplus
}
#endif

#endif
