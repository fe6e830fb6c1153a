// Command-line front end. Talks to the library exclusively through the C
// interface in rlsafe.h.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "rlsafe.h"

namespace {

struct ConfigDeleter {
  void operator()(rlsafe_config* c) const { rlsafe_config_free(c); }
};
struct ExperimentDeleter {
  void operator()(rlsafe_experiment* e) const { rlsafe_experiment_free(e); }
};
struct DtmcDeleter {
  void operator()(rlsafe_dtmc* d) const { rlsafe_dtmc_free(d); }
};

using ConfigPtr = std::unique_ptr<rlsafe_config, ConfigDeleter>;
using ExperimentPtr = std::unique_ptr<rlsafe_experiment, ExperimentDeleter>;
using DtmcPtr = std::unique_ptr<rlsafe_dtmc, DtmcDeleter>;

struct OwnedString {
  char* value = nullptr;
  ~OwnedString() { rlsafe_string_free(value); }
  char** out() { return &value; }
  const char* get() const { return value ? value : ""; }
};

[[noreturn]] void die(rlsafe_status status, const std::string& context) {
  std::fprintf(stderr, "error (%s): %s: %s\n", rlsafe_status_name(status),
               context.c_str(), rlsafe_last_error());
  std::exit(1);
}

void check(rlsafe_status status, const std::string& context) {
  if (status != RLSAFE_OK) die(status, context);
}

/// Flag values collected per subcommand and replayed onto a config handle.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "flat key = value config file");
    auto track = [this, cmd](const std::string& flag, const std::string& key,
                             const std::string& description) {
      cmd->add_option_function<std::string>(
          flag,
          [this, key](const std::string& value) { overrides.emplace_back(key, value); },
          description);
    };
    // One flag per config key; flags override the file.
    track("--seed", "seed", "master seed");
    track("--runs", "runs", "independent runs");
    track("--episodes", "episodes", "episodes per run");
    track("--timeout-steps", "timeout_steps", "step cap per episode");
    track("--adversary", "adversary", "patrol3 | patrol5 | learning | learning-obs");
    track("--defense", "defense",
          "none | pbrs-distance | pbrs-collision | q-obs | modified-q");
    track("--observations", "observations", "agent sees adjacent cells (true/false)");
    track("--adv-penalty", "adv_penalty", "overlay penalty reward");
    track("--pbrs-literal-sign", "pbrs_literal_sign",
          "use the unnegated distance potential");
    track("--alpha", "alpha", "learning rate");
    track("--gamma", "gamma", "discount factor");
    track("--epsilon-init", "epsilon_init", "initial exploration");
    track("--epsilon-decay", "epsilon_decay", "per-episode decay");
    track("--epsilon-floor", "epsilon_floor", "exploration floor");
    track("--jobs", "jobs", "parallel workers");
    track("--extract-mode", "extract_mode", "empirical[:episodes] | analytic[:epsilon]");
  }

  ConfigPtr build(int scenario = 0) const {
    ConfigPtr config(rlsafe_config_new());
    if (scenario > 0)
      check(rlsafe_config_scenario(config.get(), scenario), "scenario preset");
    if (!config_file.empty())
      check(rlsafe_config_load(config.get(), config_file.c_str()), config_file);
    for (const auto& [key, value] : overrides)
      check(rlsafe_config_set(config.get(), key.c_str(), value.c_str()), "--" + key);
    return config;
  }
};

ExperimentPtr train(const rlsafe_config* config, const std::string& out_dir) {
  rlsafe_experiment* raw = nullptr;
  check(rlsafe_run(config, out_dir.empty() ? nullptr : out_dir.c_str(), &raw),
        "training");
  return ExperimentPtr(raw);
}

void print_summary(const rlsafe_experiment* experiment) {
  OwnedString text;
  check(rlsafe_experiment_summary(experiment, text.out()), "summary");
  std::printf("%s", text.get());
}

int run_train(const ConfigFlags& flags, const std::string& out_dir, bool dump_trace) {
  ConfigPtr config = flags.build();
  ExperimentPtr experiment = train(config.get(), out_dir);
  print_summary(experiment.get());
  if (dump_trace) {
    OwnedString trace;
    check(rlsafe_experiment_trace(experiment.get(), 0, trace.out()), "trace");
    std::printf("\nfinal episode of run 0:\n%s", trace.get());
  }
  if (!out_dir.empty()) std::printf("\nartifacts written to %s\n", out_dir.c_str());
  return 0;
}

int run_verify(const ConfigFlags& flags, const std::vector<std::string>& properties,
               const std::string& out_dir, int scenario = 0) {
  ConfigPtr config = flags.build(scenario);
  std::vector<const char*> props;
  props.reserve(properties.size());
  for (const std::string& p : properties) props.push_back(p.c_str());
  OwnedString report;
  check(rlsafe_verify(config.get(), props.data(), props.size(),
                      out_dir.empty() ? nullptr : out_dir.c_str(), report.out()),
        "verification");
  std::printf("%s", report.get());
  if (!out_dir.empty()) std::printf("\nartifacts written to %s\n", out_dir.c_str());
  return 0;
}

int run_export(const ConfigFlags& flags, const std::string& out_dir) {
  ConfigPtr config = flags.build();
  ExperimentPtr experiment = train(config.get(), out_dir);
  const int runs = rlsafe_experiment_runs(experiment.get());
  for (int r = 0; r < runs; ++r) {
    rlsafe_dtmc* raw = nullptr;
    check(rlsafe_experiment_extract(experiment.get(), r, &raw), "extraction");
    DtmcPtr chain(raw);
    const std::string prefix = out_dir + "/run" + std::to_string(r);
    check(rlsafe_dtmc_export(chain.get(), prefix.c_str()), prefix);
    check(rlsafe_dtmc_write_archive(chain.get(), (prefix + ".dtmc").c_str()), prefix);
  }
  print_summary(experiment.get());
  std::printf("\nexported %d chains to %s\n", runs, out_dir.c_str());
  return 0;
}

int run_sweep(const ConfigFlags& flags, const std::string& out_dir) {
  struct Row {
    const char* name;
    const char* adversary;
    const char* defense;
  };
  const Row adversaries[] = {
      {"5-cell patrol", "patrol5", "none"},
      {"3-cell patrol", "patrol3", "none"},
      {"learning adversary (with obs)", "learning-obs", "none"},
      {"learning adversary", "learning", "none"},
  };
  const Row defenses[] = {
      {"no defense", "learning", "none"},
      {"shaping: distance to goal", "learning", "pbrs-distance"},
      {"shaping: collision-free probability", "learning", "pbrs-collision"},
      {"modified selection", "learning", "modified-q"},
  };

  auto row_result = [&](const Row& row, const std::string& dir) {
    ConfigPtr config = flags.build();
    check(rlsafe_config_set(config.get(), "adversary", row.adversary), row.name);
    check(rlsafe_config_set(config.get(), "defense", row.defense), row.name);
    ExperimentPtr experiment = train(config.get(), dir);
    std::printf("%-38s  collision %.2f +/- %.2f   agent cum %12.2f   adversary cum %12.2f\n",
                row.name, rlsafe_experiment_collision_rate(experiment.get()),
                rlsafe_experiment_collision_rate_std(experiment.get()),
                rlsafe_experiment_agent_cumulative(experiment.get()),
                rlsafe_experiment_adversary_cumulative(experiment.get()));
  };

  std::printf("adversary sweep (observations on, no defense)\n");
  int i = 0;
  for (const Row& row : adversaries)
    row_result(row, out_dir.empty() ? "" : out_dir + "/adversary" + std::to_string(i++));
  std::printf("\ndefense sweep (learning adversary, observations on)\n");
  i = 0;
  for (const Row& row : defenses)
    row_result(row, out_dir.empty() ? "" : out_dir + "/defense" + std::to_string(i++));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial grid-world training with probabilistic verification"};
  app.require_subcommand(1);

  const std::vector<std::string> default_properties = {
      "P>=1 [ G F goal ]", "P=? [ F<=100 goal ]", "P=? [ F goal ]"};

  // train
  auto* train_cmd = app.add_subcommand("train", "train and report metrics");
  ConfigFlags train_flags;
  train_flags.add_flags(train_cmd);
  std::string train_out;
  bool train_trace = false;
  train_cmd->add_option("--out-dir", train_out, "artifact directory");
  train_cmd->add_flag("--dump-trace", train_trace, "print the final episode of run 0");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "train, extract chains, check properties");
  ConfigFlags verify_flags;
  verify_flags.add_flags(verify_cmd);
  std::string verify_out;
  std::vector<std::string> verify_props;
  verify_cmd->add_option("--out-dir", verify_out, "artifact directory");
  verify_cmd->add_option("--property", verify_props,
                         "PCTL property (repeatable; default: the goal-reachability trio)");

  // export
  auto* export_cmd = app.add_subcommand("export", "train and write .tra/.lab chains");
  ConfigFlags export_flags;
  export_flags.add_flags(export_cmd);
  std::string export_out = "out";
  export_cmd->add_option("--out-dir", export_out, "artifact directory");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "adversary and defense comparison tables");
  ConfigFlags sweep_flags;
  sweep_flags.add_flags(sweep_cmd);
  std::string sweep_out;
  sweep_cmd->add_option("--out-dir", sweep_out, "artifact directory");

  // scenario
  auto* scenario_cmd = app.add_subcommand("scenario", "run a preset end to end");
  ConfigFlags scenario_flags;
  scenario_flags.add_flags(scenario_cmd);
  int scenario_n = 1;
  std::string scenario_out;
  std::vector<std::string> scenario_props;
  scenario_cmd->add_option("n", scenario_n, "preset number (1-4)")->required();
  scenario_cmd->add_option("--out-dir", scenario_out, "artifact directory");
  scenario_cmd->add_option("--property", scenario_props, "PCTL property (repeatable)");

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) return run_train(train_flags, train_out, train_trace);
  if (verify_cmd->parsed())
    return run_verify(verify_flags,
                      verify_props.empty() ? default_properties : verify_props,
                      verify_out);
  if (export_cmd->parsed()) return run_export(export_flags, export_out);
  if (sweep_cmd->parsed()) return run_sweep(sweep_flags, sweep_out);
  if (scenario_cmd->parsed())
    return run_verify(scenario_flags,
                      scenario_props.empty() ? default_properties : scenario_props,
                      scenario_out, scenario_n);
  return 0;
}
