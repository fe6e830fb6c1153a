#include "rlsafe.h"

#include <cstring>
#include <exception>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rlsafe/dtmc.hpp"
#include "rlsafe/experiment.hpp"
#include "rlsafe/pctl.hpp"

using rlsafe::dtmc::Dtmc;
using rlsafe::harness::ExperimentConfig;
using rlsafe::harness::ExperimentResult;

struct rlsafe_config {
  ExperimentConfig impl;
};

struct rlsafe_experiment {
  ExperimentResult impl;
};

struct rlsafe_dtmc {
  Dtmc impl;
};

struct rlsafe_formula {
  rlsafe::pctl::FormulaPtr impl;
};

struct rlsafe_result {
  rlsafe::pctl::CheckResult impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

rlsafe_status classify(const std::exception& e, rlsafe_status fallback) {
  if (dynamic_cast<const rlsafe::pctl::ParseError*>(&e)) return RLSAFE_ERR_PARSE;
  if (dynamic_cast<const rlsafe::pctl::ConvergenceError*>(&e))
    return RLSAFE_ERR_CONVERGENCE;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return RLSAFE_ERR_ARGUMENT;
  return fallback;
}

template <typename Fn>
rlsafe_status guarded(Fn&& fn, rlsafe_status fallback = RLSAFE_ERR_UNKNOWN) {
  try {
    fn();
    g_last_error.clear();
    return RLSAFE_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return classify(e, fallback);
  } catch (...) {
    set_error("unknown failure");
    return fallback;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* rlsafe_version(void) { return "0.1.0"; }

const char* rlsafe_status_name(rlsafe_status status) {
  switch (status) {
    case RLSAFE_OK: return "ok";
    case RLSAFE_ERR_ARGUMENT: return "argument";
    case RLSAFE_ERR_PARSE: return "parse";
    case RLSAFE_ERR_IO: return "io";
    case RLSAFE_ERR_VALIDATION: return "validation";
    case RLSAFE_ERR_CONVERGENCE: return "convergence";
    case RLSAFE_ERR_UNKNOWN: return "unknown";
  }
  return "?";
}

const char* rlsafe_last_error(void) { return g_last_error.c_str(); }

void rlsafe_string_free(char* s) { delete[] s; }

rlsafe_config* rlsafe_config_new(void) { return new rlsafe_config{}; }

void rlsafe_config_free(rlsafe_config* config) { delete config; }

rlsafe_status rlsafe_config_scenario(rlsafe_config* config, int scenario) {
  if (!config) { set_error("null config"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { config->impl = rlsafe::harness::scenario(scenario); },
                 RLSAFE_ERR_ARGUMENT);
}

rlsafe_status rlsafe_config_set(rlsafe_config* config, const char* key,
                                const char* value) {
  if (!config || !key || !value) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { rlsafe::harness::apply_key_value(config->impl, key, value); },
                 RLSAFE_ERR_ARGUMENT);
}

rlsafe_status rlsafe_config_get(const rlsafe_config* config, const char* key,
                                char** value_out) {
  if (!config || !key || !value_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] { *value_out = copy_string(rlsafe::harness::get_key_value(config->impl, key)); },
      RLSAFE_ERR_ARGUMENT);
}

rlsafe_status rlsafe_config_load(rlsafe_config* config, const char* path) {
  if (!config || !path) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { config->impl = rlsafe::harness::load_config_file(path); },
                 RLSAFE_ERR_IO);
}

rlsafe_status rlsafe_run(const rlsafe_config* config, const char* out_dir,
                         rlsafe_experiment** experiment_out) {
  if (!config || !experiment_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        auto exp = std::make_unique<rlsafe_experiment>();
        exp->impl = rlsafe::harness::run_experiment(config->impl);
        if (out_dir) rlsafe::harness::persist(exp->impl, out_dir);
        *experiment_out = exp.release();
      },
      RLSAFE_ERR_UNKNOWN);
}

void rlsafe_experiment_free(rlsafe_experiment* experiment) { delete experiment; }

int rlsafe_experiment_runs(const rlsafe_experiment* e) {
  return e ? static_cast<int>(e->impl.runs.size()) : 0;
}

int rlsafe_experiment_episodes(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.episodes : 0;
}

double rlsafe_experiment_collision_rate(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.collision_rate_mean : 0.0;
}

double rlsafe_experiment_collision_rate_std(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.collision_rate_std : 0.0;
}

double rlsafe_experiment_agent_cumulative(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.agent_cumulative.mean.back() : 0.0;
}

double rlsafe_experiment_adversary_cumulative(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.adversary_cumulative.mean.back() : 0.0;
}

double rlsafe_experiment_agent_final_reward(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.agent_reward.mean.back() : 0.0;
}

double rlsafe_experiment_adversary_final_reward(const rlsafe_experiment* e) {
  return e ? e->impl.metrics.adversary_reward.mean.back() : 0.0;
}

rlsafe_status rlsafe_experiment_summary(const rlsafe_experiment* e, char** text_out) {
  if (!e || !text_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { *text_out = copy_string(rlsafe::harness::summary_text(e->impl)); });
}

rlsafe_status rlsafe_experiment_write(const rlsafe_experiment* e, const char* out_dir) {
  if (!e || !out_dir) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { rlsafe::harness::persist(e->impl, out_dir); }, RLSAFE_ERR_IO);
}

rlsafe_status rlsafe_experiment_trace(const rlsafe_experiment* e, int run_index,
                                      char** text_out) {
  if (!e || !text_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        if (run_index < 0 || run_index >= static_cast<int>(e->impl.runs.size()))
          throw std::invalid_argument("run index out of range");
        rlsafe::grid::EpisodeRecord record;
        rlsafe::harness::run_single_traced(e->impl.config, run_index, &record);
        *text_out = copy_string(record.to_string());
      },
      RLSAFE_ERR_ARGUMENT);
}

rlsafe_status rlsafe_experiment_extract(const rlsafe_experiment* e, int run_index,
                                        rlsafe_dtmc** chain_out) {
  if (!e || !chain_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        if (run_index < 0 || run_index >= static_cast<int>(e->impl.runs.size()))
          throw std::invalid_argument("run index out of range");
        auto chain = std::make_unique<rlsafe_dtmc>();
        chain->impl = rlsafe::harness::extract_run(e->impl.config,
                                                   e->impl.runs[run_index]);
        *chain_out = chain.release();
      },
      RLSAFE_ERR_ARGUMENT);
}

void rlsafe_dtmc_free(rlsafe_dtmc* chain) { delete chain; }

int rlsafe_dtmc_states(const rlsafe_dtmc* chain) {
  return chain ? chain->impl.n_states : 0;
}

int rlsafe_dtmc_transitions(const rlsafe_dtmc* chain) {
  return chain ? static_cast<int>(chain->impl.transitions.size()) : 0;
}

int rlsafe_dtmc_initial(const rlsafe_dtmc* chain) {
  return chain ? chain->impl.initial : 0;
}

rlsafe_status rlsafe_dtmc_validate(const rlsafe_dtmc* chain, char** report_out) {
  if (!chain) { set_error("null chain"); return RLSAFE_ERR_ARGUMENT; }
  const auto violations = rlsafe::dtmc::validate(chain->impl);
  if (violations.empty()) {
    if (report_out) *report_out = copy_string("");
    g_last_error.clear();
    return RLSAFE_OK;
  }
  std::ostringstream os;
  for (const auto& v : violations) os << v.message << '\n';
  if (report_out) *report_out = copy_string(os.str());
  set_error("chain failed validation");
  return RLSAFE_ERR_VALIDATION;
}

rlsafe_status rlsafe_dtmc_export(const rlsafe_dtmc* chain, const char* path_prefix) {
  if (!chain || !path_prefix) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { rlsafe::dtmc::export_explicit(chain->impl, path_prefix); },
                 RLSAFE_ERR_IO);
}

rlsafe_status rlsafe_dtmc_import(const char* path_prefix, rlsafe_dtmc** chain_out) {
  if (!path_prefix || !chain_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        auto chain = std::make_unique<rlsafe_dtmc>();
        chain->impl = rlsafe::dtmc::import_explicit(path_prefix);
        *chain_out = chain.release();
      },
      RLSAFE_ERR_IO);
}

rlsafe_status rlsafe_dtmc_write_archive(const rlsafe_dtmc* chain, const char* path) {
  if (!chain || !path) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { rlsafe::dtmc::write_archive(chain->impl, path); }, RLSAFE_ERR_IO);
}

rlsafe_status rlsafe_dtmc_read_archive(const char* path, rlsafe_dtmc** chain_out) {
  if (!path || !chain_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        auto chain = std::make_unique<rlsafe_dtmc>();
        chain->impl = rlsafe::dtmc::read_archive(path);
        *chain_out = chain.release();
      },
      RLSAFE_ERR_IO);
}

rlsafe_status rlsafe_formula_parse(const char* text, rlsafe_formula** formula_out) {
  if (!text || !formula_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        auto formula = std::make_unique<rlsafe_formula>();
        formula->impl = rlsafe::pctl::parse(text);
        *formula_out = formula.release();
      },
      RLSAFE_ERR_PARSE);
}

void rlsafe_formula_free(rlsafe_formula* formula) { delete formula; }

rlsafe_status rlsafe_formula_print(const rlsafe_formula* formula, char** text_out) {
  if (!formula || !text_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded([&] { *text_out = copy_string(rlsafe::pctl::to_string(*formula->impl)); });
}

rlsafe_status rlsafe_check(const rlsafe_dtmc* chain, const rlsafe_formula* formula,
                           rlsafe_result** result_out) {
  if (!chain || !formula || !result_out) { set_error("null argument"); return RLSAFE_ERR_ARGUMENT; }
  return guarded(
      [&] {
        auto result = std::make_unique<rlsafe_result>();
        result->impl = rlsafe::pctl::check(chain->impl, *formula->impl);
        *result_out = result.release();
      },
      RLSAFE_ERR_ARGUMENT);
}

void rlsafe_result_free(rlsafe_result* result) { delete result; }

int rlsafe_result_is_boolean(const rlsafe_result* result) {
  return result && result->impl.is_boolean ? 1 : 0;
}

int rlsafe_result_truth(const rlsafe_result* result) {
  return result && result->impl.initial_truth ? 1 : 0;
}

double rlsafe_result_probability(const rlsafe_result* result) {
  return result ? result->impl.initial_probability : 0.0;
}

double rlsafe_result_state_probability(const rlsafe_result* result, int state) {
  if (!result || state < 0 ||
      state >= static_cast<int>(result->impl.probabilities.size()))
    return 0.0;
  return result->impl.probabilities[state];
}

int rlsafe_result_state_truth(const rlsafe_result* result, int state) {
  if (!result || state < 0 || state >= static_cast<int>(result->impl.truth.size()))
    return 0;
  return result->impl.truth[state] ? 1 : 0;
}

long rlsafe_result_iterations(const rlsafe_result* result) {
  return result ? result->impl.solver.iterations : 0;
}

double rlsafe_result_residual(const rlsafe_result* result) {
  return result ? result->impl.solver.residual : 0.0;
}

rlsafe_status rlsafe_verify(const rlsafe_config* config,
                            const char* const* properties, size_t n_properties,
                            const char* out_dir, char** report_out) {
  if (!config || (!properties && n_properties > 0)) {
    set_error("null argument");
    return RLSAFE_ERR_ARGUMENT;
  }
  return guarded(
      [&] {
        std::vector<std::string> props(properties, properties + n_properties);
        const auto report = rlsafe::harness::verify_pipeline(
            config->impl, props, out_dir ? out_dir : "");
        if (report_out) *report_out = copy_string(report.to_text());
      },
      RLSAFE_ERR_UNKNOWN);
}

}  // extern "C"
