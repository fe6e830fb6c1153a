#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rlsafe/defense.hpp"
#include "rlsafe/dtmc.hpp"
#include "rlsafe/grid.hpp"
#include "rlsafe/pctl.hpp"
#include "rlsafe/qlearn.hpp"

namespace rlsafe::harness {

struct ExperimentConfig {
  int runs = 50;
  int episodes = 2000;
  int timeout_steps = 100;
  qlearn::AdversaryKind adversary = qlearn::AdversaryKind::Learning;
  bool agent_observations = true;
  defense::DefenseConfig defense;
  qlearn::LearnerConfig learner;  // shared by the agent and a learning adversary
  std::uint64_t seed = 1;
  int jobs = 1;
  dtmc::ExtractionMode extract_mode;

  grid::EnvConfig env(long patrol_tick = 0) const;
  void validate() const;
};

/// Scenario presets (all against the learning adversary, agent observing):
/// 1 none, 2 distance-potential shaping, 3 collision-potential shaping,
/// 4 modified selection. Throws outside 1..4.
ExperimentConfig scenario(int n);

/// One `key = value` assignment; unknown keys and bad values throw. The key
/// set doubles as the config-file schema and the CLI override set.
void apply_key_value(ExperimentConfig& config, const std::string& key,
                     const std::string& value);
std::string get_key_value(const ExperimentConfig& config, const std::string& key);
std::vector<std::string> config_keys();

/// Flat key = value file, '#' comments and blank lines skipped, optional
/// [section] headers ignored.
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_string(const ExperimentConfig& config);

struct EpisodeMetric {
  bool collision = false;
  double agent_reward = 0.0;      // raw scale
  double adversary_reward = 0.0;
  int steps = 0;
  grid::Terminal cause = grid::Terminal::None;
};

struct RunResult {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::vector<EpisodeMetric> episodes;
  dtmc::FrozenAgent agent;
  dtmc::FrozenAdversary adversary;
  defense::CollisionStats stats;

  /// Mean collision indicator over the trailing window (the window shrinks
  /// for very short runs).
  double collision_rate(int window = 100) const;
  double cumulative_agent_reward() const;
  double cumulative_adversary_reward() const;
};

RunResult run_single(const ExperimentConfig& config, int run_index);

/// Optionally records the full trace of the last episode (for inspection).
RunResult run_single_traced(const ExperimentConfig& config, int run_index,
                            grid::EpisodeRecord* last_episode);

struct SeriesStat {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std across runs
};

struct Metrics {
  int runs = 0;
  int episodes = 0;
  SeriesStat collision;             // per-episode collision indicator
  SeriesStat agent_reward;          // per-episode raw reward
  SeriesStat adversary_reward;
  SeriesStat agent_cumulative;      // running sums per episode
  SeriesStat adversary_cumulative;
  double collision_rate_mean = 0.0; // trailing-window rate, then across runs
  double collision_rate_std = 0.0;
};

Metrics aggregate(const std::vector<RunResult>& runs);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  Metrics metrics;
};

/// Trains `config.runs` independent seeded runs, in parallel up to
/// `config.jobs` workers; results are merged by run index so the level of
/// parallelism never shows in the output.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_metrics_csv(const Metrics& m, std::ostream& os);
std::string summary_text(const ExperimentResult& result);

/// Writes metrics.csv, summary.txt and per-run q-table CSVs under out_dir
/// (created if missing).
void persist(const ExperimentResult& result, const std::string& out_dir);

struct PropertyOutcome {
  std::string property;
  bool is_boolean = false;
  bool truth = false;
  double probability = 0.0;
  long iterations = 0;
  double residual = 0.0;
};

struct VerificationReport {
  std::vector<std::string> properties;
  std::vector<std::vector<PropertyOutcome>> per_run;  // [run][property]

  std::string to_text() const;
  void write_csv(std::ostream& os) const;
};

/// Extracts the chain of a finished run with the configured mode; the
/// evaluation stream is derived from the run seed.
dtmc::Dtmc extract_run(const ExperimentConfig& config, const RunResult& run,
                       dtmc::ExtractionStats* stats = nullptr);

/// Full pipeline: train, freeze, extract a chain per run, check every
/// property on it. With a non-empty out_dir also persists training metrics,
/// verification report (text + CSV) and per-run .tra/.lab exports.
VerificationReport verify_pipeline(const ExperimentConfig& config,
                                   const std::vector<std::string>& properties,
                                   const std::string& out_dir = "",
                                   ExperimentResult* result_out = nullptr);

std::string format_double(double v);

}  // namespace rlsafe::harness
