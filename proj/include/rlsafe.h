/* rlsafe — adversarial grid-world training and probabilistic verification.
 *
 * C interface of the shared library. All objects are opaque handles created
 * and released through the functions below; every fallible call returns an
 * rlsafe_status, and rlsafe_last_error() describes the most recent failure
 * on the calling thread.
 */

#ifndef RLSAFE_H
#define RLSAFE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rlsafe_status {
  RLSAFE_OK = 0,
  RLSAFE_ERR_ARGUMENT = 1,    /* bad argument / configuration value */
  RLSAFE_ERR_PARSE = 2,       /* property or file syntax error */
  RLSAFE_ERR_IO = 3,          /* filesystem failure */
  RLSAFE_ERR_VALIDATION = 4,  /* chain failed structural validation */
  RLSAFE_ERR_CONVERGENCE = 5, /* iterative solver hit its cap */
  RLSAFE_ERR_UNKNOWN = 6
} rlsafe_status;

typedef struct rlsafe_config rlsafe_config;         /* experiment settings */
typedef struct rlsafe_experiment rlsafe_experiment; /* trained runs + metrics */
typedef struct rlsafe_dtmc rlsafe_dtmc;             /* extracted Markov chain */
typedef struct rlsafe_formula rlsafe_formula;       /* parsed PCTL property */
typedef struct rlsafe_result rlsafe_result;         /* verification outcome */

const char* rlsafe_version(void);
const char* rlsafe_status_name(rlsafe_status status);

/* Message for the last failed call on this thread; empty string if none. */
const char* rlsafe_last_error(void);

/* Frees strings returned through char** out-parameters. */
void rlsafe_string_free(char* s);

/* ---- configuration ------------------------------------------------- */

rlsafe_config* rlsafe_config_new(void);
void rlsafe_config_free(rlsafe_config* config);

/* Applies one preset (1..4): learning adversary, agent observations on,
 * defense none / pbrs-distance / pbrs-collision / modified-q. */
rlsafe_status rlsafe_config_scenario(rlsafe_config* config, int scenario);

/* Sets one key (= the config-file key set): runs, episodes, timeout_steps,
 * adversary, observations, defense, adv_penalty, pbrs_literal_sign, alpha,
 * gamma, epsilon_init, epsilon_decay, epsilon_floor, seed, jobs,
 * extract_mode. Unknown keys are errors. */
rlsafe_status rlsafe_config_set(rlsafe_config* config, const char* key,
                                const char* value);
rlsafe_status rlsafe_config_get(const rlsafe_config* config, const char* key,
                                char** value_out);

/* Loads a flat "key = value" file over the defaults. */
rlsafe_status rlsafe_config_load(rlsafe_config* config, const char* path);

/* ---- training ------------------------------------------------------ */

/* Trains runs x episodes. With a non-NULL out_dir, writes metrics.csv,
 * summary.txt, config.txt and per-run q-table CSVs there. */
rlsafe_status rlsafe_run(const rlsafe_config* config, const char* out_dir,
                         rlsafe_experiment** experiment_out);
void rlsafe_experiment_free(rlsafe_experiment* experiment);

int rlsafe_experiment_runs(const rlsafe_experiment* experiment);
int rlsafe_experiment_episodes(const rlsafe_experiment* experiment);

/* Collision rate over the trailing 100 episodes, averaged across runs,
 * plus its across-run standard deviation. */
double rlsafe_experiment_collision_rate(const rlsafe_experiment* experiment);
double rlsafe_experiment_collision_rate_std(const rlsafe_experiment* experiment);

/* Cumulative and final-episode reward aggregates (agent / adversary). */
double rlsafe_experiment_agent_cumulative(const rlsafe_experiment* experiment);
double rlsafe_experiment_adversary_cumulative(const rlsafe_experiment* experiment);
double rlsafe_experiment_agent_final_reward(const rlsafe_experiment* experiment);
double rlsafe_experiment_adversary_final_reward(const rlsafe_experiment* experiment);

/* Human-readable summary table (caller frees with rlsafe_string_free). */
rlsafe_status rlsafe_experiment_summary(const rlsafe_experiment* experiment,
                                        char** text_out);
rlsafe_status rlsafe_experiment_write(const rlsafe_experiment* experiment,
                                      const char* out_dir);

/* Full trace of the final training episode of one run. */
rlsafe_status rlsafe_experiment_trace(const rlsafe_experiment* experiment,
                                      int run_index, char** text_out);

/* ---- chain extraction and files ------------------------------------ */

/* Builds the location chain of a finished run using the configured
 * extraction mode (empirical:N or analytic[:eps]). */
rlsafe_status rlsafe_experiment_extract(const rlsafe_experiment* experiment,
                                        int run_index, rlsafe_dtmc** chain_out);
void rlsafe_dtmc_free(rlsafe_dtmc* chain);

int rlsafe_dtmc_states(const rlsafe_dtmc* chain);
int rlsafe_dtmc_transitions(const rlsafe_dtmc* chain);
int rlsafe_dtmc_initial(const rlsafe_dtmc* chain);

/* Structural validation; on violation returns RLSAFE_ERR_VALIDATION and
 * (optionally) a report listing every violation. */
rlsafe_status rlsafe_dtmc_validate(const rlsafe_dtmc* chain, char** report_out);

/* Writes <prefix>.tra / <prefix>.lab; import reads them back. */
rlsafe_status rlsafe_dtmc_export(const rlsafe_dtmc* chain, const char* path_prefix);
rlsafe_status rlsafe_dtmc_import(const char* path_prefix, rlsafe_dtmc** chain_out);

/* Single-file archival dump. */
rlsafe_status rlsafe_dtmc_write_archive(const rlsafe_dtmc* chain, const char* path);
rlsafe_status rlsafe_dtmc_read_archive(const char* path, rlsafe_dtmc** chain_out);

/* ---- properties and checking --------------------------------------- */

rlsafe_status rlsafe_formula_parse(const char* text, rlsafe_formula** formula_out);
void rlsafe_formula_free(rlsafe_formula* formula);
rlsafe_status rlsafe_formula_print(const rlsafe_formula* formula, char** text_out);

rlsafe_status rlsafe_check(const rlsafe_dtmc* chain, const rlsafe_formula* formula,
                           rlsafe_result** result_out);
void rlsafe_result_free(rlsafe_result* result);

int rlsafe_result_is_boolean(const rlsafe_result* result);
int rlsafe_result_truth(const rlsafe_result* result);          /* initial state */
double rlsafe_result_probability(const rlsafe_result* result); /* initial state */
double rlsafe_result_state_probability(const rlsafe_result* result, int state);
int rlsafe_result_state_truth(const rlsafe_result* result, int state);
long rlsafe_result_iterations(const rlsafe_result* result);
double rlsafe_result_residual(const rlsafe_result* result);

/* ---- one-call pipeline ---------------------------------------------- */

/* Train, extract a chain per run, check every property on it. Writes the
 * training artifacts, per-run .tra/.lab pairs and the verification report
 * under out_dir when non-NULL; the text report is returned through
 * report_out when non-NULL. */
rlsafe_status rlsafe_verify(const rlsafe_config* config,
                            const char* const* properties, size_t n_properties,
                            const char* out_dir, char** report_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RLSAFE_H */
