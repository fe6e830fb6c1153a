#include "rlsafe/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rlsafe::harness {

namespace {

constexpr std::uint64_t kTrainingStream = 0;
constexpr std::uint64_t kExtractionStream = 1;

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + value + "'");
}

qlearn::AdversaryKind adversary_from_name(const std::string& name) {
  if (name == "patrol3") return qlearn::AdversaryKind::Patrol3;
  if (name == "patrol5") return qlearn::AdversaryKind::Patrol5;
  if (name == "learning") return qlearn::AdversaryKind::Learning;
  if (name == "learning-obs") return qlearn::AdversaryKind::LearningWithObservations;
  throw std::invalid_argument("unknown adversary: " + name);
}

dtmc::ExtractionMode extraction_from_name(const std::string& value) {
  dtmc::ExtractionMode mode;
  std::string head = value;
  std::string arg;
  if (const auto colon = value.find(':'); colon != std::string::npos) {
    head = value.substr(0, colon);
    arg = value.substr(colon + 1);
  }
  if (head == "empirical") {
    mode.kind = dtmc::ExtractionMode::Kind::Empirical;
    mode.episodes = arg.empty() ? 100 : std::stoi(arg);
  } else if (head == "analytic") {
    mode.kind = dtmc::ExtractionMode::Kind::Analytic;
    mode.epsilon = arg.empty() ? -1.0 : std::stod(arg);  // -1: use the frozen epsilon
  } else {
    throw std::invalid_argument("unknown extraction mode: " + value);
  }
  if (mode.kind == dtmc::ExtractionMode::Kind::Empirical) mode.validate();
  return mode;
}

std::string extraction_to_string(const dtmc::ExtractionMode& mode) {
  if (mode.kind == dtmc::ExtractionMode::Kind::Empirical)
    return "empirical:" + std::to_string(mode.episodes);
  if (mode.epsilon < 0.0) return "analytic";
  return "analytic:" + format_double(mode.epsilon);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

grid::EnvConfig ExperimentConfig::env(long patrol_tick) const {
  grid::EnvConfig e;
  e.agent_start = {0, 0};
  e.goal = {grid::kGridSize - 1, grid::kGridSize - 1};
  e.adversary_start = qlearn::adversary_is_patrol(adversary)
                          ? qlearn::patrol_position(adversary, patrol_tick)
                          : qlearn::adversary_start(adversary);
  e.timeout_steps = timeout_steps;
  return e;
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (timeout_steps < 1) throw std::invalid_argument("timeout_steps must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  learner.validate();
  defense.validate();
  env().validate();
  if (extract_mode.kind == dtmc::ExtractionMode::Kind::Empirical) extract_mode.validate();
}

ExperimentConfig scenario(int n) {
  if (n < 1 || n > 4) throw std::invalid_argument("scenario must be 1..4");
  ExperimentConfig config;
  config.adversary = qlearn::AdversaryKind::Learning;
  config.agent_observations = true;
  switch (n) {
    case 1: config.defense.mechanism = defense::Mechanism::None; break;
    case 2: config.defense.mechanism = defense::Mechanism::PbrsDistance; break;
    case 3: config.defense.mechanism = defense::Mechanism::PbrsCollisionProb; break;
    case 4: config.defense.mechanism = defense::Mechanism::ModifiedQ; break;
  }
  return config;
}

void apply_key_value(ExperimentConfig& config, const std::string& key,
                     const std::string& value) {
  try {
    if (key == "runs") config.runs = std::stoi(value);
    else if (key == "episodes") config.episodes = std::stoi(value);
    else if (key == "timeout_steps") config.timeout_steps = std::stoi(value);
    else if (key == "adversary") config.adversary = adversary_from_name(value);
    else if (key == "observations") config.agent_observations = parse_bool(value);
    else if (key == "defense") config.defense.mechanism = defense::mechanism_from_name(value);
    else if (key == "adv_penalty") config.defense.adv_penalty = std::stod(value);
    else if (key == "pbrs_literal_sign") config.defense.literal_distance_sign = parse_bool(value);
    else if (key == "alpha") config.learner.alpha = std::stod(value);
    else if (key == "gamma") config.learner.gamma = std::stod(value);
    else if (key == "epsilon_init") config.learner.epsilon.initial = std::stod(value);
    else if (key == "epsilon_decay") config.learner.epsilon.decay = std::stod(value);
    else if (key == "epsilon_floor") config.learner.epsilon.floor = std::stod(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "jobs") config.jobs = std::stoi(value);
    else if (key == "extract_mode") config.extract_mode = extraction_from_name(value);
    else throw std::invalid_argument("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value '" + value + "' for key " + key);
  }
}

std::string get_key_value(const ExperimentConfig& config, const std::string& key) {
  if (key == "runs") return std::to_string(config.runs);
  if (key == "episodes") return std::to_string(config.episodes);
  if (key == "timeout_steps") return std::to_string(config.timeout_steps);
  if (key == "adversary") return qlearn::adversary_name(config.adversary);
  if (key == "observations") return config.agent_observations ? "true" : "false";
  if (key == "defense") return defense::mechanism_name(config.defense.mechanism);
  if (key == "adv_penalty") return format_double(config.defense.adv_penalty);
  if (key == "pbrs_literal_sign") return config.defense.literal_distance_sign ? "true" : "false";
  if (key == "alpha") return format_double(config.learner.alpha);
  if (key == "gamma") return format_double(config.learner.gamma);
  if (key == "epsilon_init") return format_double(config.learner.epsilon.initial);
  if (key == "epsilon_decay") return format_double(config.learner.epsilon.decay);
  if (key == "epsilon_floor") return format_double(config.learner.epsilon.floor);
  if (key == "seed") return std::to_string(config.seed);
  if (key == "jobs") return std::to_string(config.jobs);
  if (key == "extract_mode") return extraction_to_string(config.extract_mode);
  throw std::invalid_argument("unknown config key: " + key);
}

std::vector<std::string> config_keys() {
  return {"runs", "episodes", "timeout_steps", "adversary", "observations",
          "defense", "adv_penalty", "pbrs_literal_sign", "alpha", "gamma",
          "epsilon_init", "epsilon_decay", "epsilon_floor", "seed", "jobs",
          "extract_mode"};
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // cosmetic section
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    try {
      apply_key_value(config, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

std::string config_to_string(const ExperimentConfig& config) {
  std::ostringstream os;
  for (const std::string& key : config_keys())
    os << key << " = " << get_key_value(config, key) << '\n';
  return os.str();
}

double RunResult::collision_rate(int window) const {
  if (episodes.empty()) return 0.0;
  const int n = static_cast<int>(episodes.size());
  const int w = std::min(window, n);
  int collisions = 0;
  for (int i = n - w; i < n; ++i) collisions += episodes[i].collision ? 1 : 0;
  return static_cast<double>(collisions) / w;
}

double RunResult::cumulative_agent_reward() const {
  double sum = 0.0;
  for (const EpisodeMetric& e : episodes) sum += e.agent_reward;
  return sum;
}

double RunResult::cumulative_adversary_reward() const {
  double sum = 0.0;
  for (const EpisodeMetric& e : episodes) sum += e.adversary_reward;
  return sum;
}

namespace {

RunResult run_impl(const ExperimentConfig& config, int run_index,
                   grid::EpisodeRecord* last_episode) {
  const bool learning_adv = !qlearn::adversary_is_patrol(config.adversary);
  const defense::Mechanism mech = config.defense.mechanism;
  const bool observations =
      config.agent_observations || mech == defense::Mechanism::QWithObservations ||
      mech == defense::Mechanism::ModifiedQ;
  const double alpha = config.learner.alpha;
  const double gamma = config.learner.gamma;

  RunResult result;
  result.run_index = run_index;
  result.seed = derive_seed(config.seed, static_cast<std::uint64_t>(run_index),
                            kTrainingStream);
  Rng rng(result.seed);

  qlearn::QTable q;
  defense::ObsOverlay q_obs;
  qlearn::QTable adversary_q;
  defense::CollisionStats stats;

  result.episodes.reserve(config.episodes);
  for (int episode = 0; episode < config.episodes; ++episode) {
    const double epsilon = config.learner.epsilon.at(episode);
    const grid::EnvConfig env = config.env(episode);
    auto [agent_pos, adv_pos] = grid::reset(env);

    EpisodeMetric metric;
    metric.cause = grid::Terminal::Timeout;
    const bool trace = last_episode && episode == config.episodes - 1;
    if (trace) *last_episode = grid::EpisodeRecord{};

    for (int t = 0; t < config.timeout_steps; ++t) {
      // The adversary commits its move first. Normally the agent only sees
      // the adversary's standing position; the exception is a co-located
      // adversary (episode start), whose departure move is in plain sight.
      // Moves still resolve simultaneously: same cell afterwards is a
      // collision, swapping cells is not.
      const int adv_state =
          learning_adv ? qlearn::adversary_state_key(config.adversary, adv_pos, agent_pos)
                       : 0;
      grid::GridPos next_adv = adv_pos;  // patrollers hold their cell all episode
      grid::Action adv_act = grid::Action::Right;
      if (learning_adv) {
        adv_act = qlearn::adversary_action(config.adversary, adv_pos, agent_pos,
                                           adversary_q, epsilon, rng);
        next_adv = grid::apply_move(adv_pos, adv_act);
      }
      const grid::Observation obs =
          grid::observe(agent_pos, adv_pos == agent_pos ? next_adv : adv_pos);
      const grid::Action act =
          defense::select_action(q, q_obs, obs, observations, mech, epsilon, rng,
                                 alpha, gamma, config.defense.adv_penalty);
      const grid::StepOutcome out = grid::step_to(env, agent_pos, next_adv, act, t);
      const bool terminal = out.terminal != grid::Terminal::None;

      stats.record_move(out.next_agent, out.terminal == grid::Terminal::Collision);
      double shaped = out.agent_reward;
      if (defense::mechanism_is_pbrs(mech))
        shaped = defense::shape_reward(out.agent_reward, agent_pos, out.next_agent,
                                       gamma, defense::mechanism_potential(mech), env.goal,
                                       stats, config.defense.literal_distance_sign);
      qlearn::q_update(q, agent_pos.index(), act, shaped, out.next_agent.index(),
                       terminal, alpha, gamma);
      // Surviving a move the overlay had condemned is evidence against the
      // penalty; let it fade toward the live value.
      if (out.terminal != grid::Terminal::Collision)
        q_obs.relax(q, agent_pos.index(), act, alpha);
      if (learning_adv) {
        const int adv_next = qlearn::adversary_state_key(config.adversary,
                                                         out.next_adversary, out.next_agent);
        qlearn::q_update(adversary_q, adv_state, adv_act, out.adversary_reward,
                         adv_next, terminal, alpha, gamma);
      }

      if (trace)
        last_episode->steps.push_back(
            {agent_pos, adv_pos, act, out.agent_reward, shaped});

      metric.agent_reward += out.agent_reward;
      metric.adversary_reward += out.adversary_reward;
      metric.steps = t + 1;
      agent_pos = out.next_agent;
      adv_pos = out.next_adversary;
      if (terminal) {
        metric.cause = out.terminal;
        metric.collision = out.terminal == grid::Terminal::Collision;
        break;
      }
    }
    if (trace) last_episode->cause = metric.cause;
    result.episodes.push_back(metric);
  }

  result.agent.q = std::move(q);
  result.agent.q_obs = std::move(q_obs);
  result.agent.observations = observations;
  result.agent.mechanism = mech;
  result.agent.epsilon = config.learner.epsilon.at(config.episodes);
  result.agent.alpha = alpha;
  result.agent.gamma = gamma;
  result.agent.adv_penalty = config.defense.adv_penalty;
  result.adversary.kind = config.adversary;
  result.adversary.q = std::move(adversary_q);
  result.adversary.epsilon = config.learner.epsilon.at(config.episodes);
  result.adversary.patrol_tick_origin = config.episodes;
  result.stats = std::move(stats);
  return result;
}

}  // namespace

RunResult run_single(const ExperimentConfig& config, int run_index) {
  return run_impl(config, run_index, nullptr);
}

RunResult run_single_traced(const ExperimentConfig& config, int run_index,
                            grid::EpisodeRecord* last_episode) {
  return run_impl(config, run_index, last_episode);
}

namespace {

SeriesStat across_runs(const std::vector<RunResult>& runs, int episodes,
                       double (*value)(const RunResult&, int)) {
  SeriesStat stat;
  stat.mean.resize(episodes);
  stat.stddev.resize(episodes);
  const double n = static_cast<double>(runs.size());
  for (int e = 0; e < episodes; ++e) {
    double sum = 0.0;
    for (const RunResult& r : runs) sum += value(r, e);
    const double mean = sum / n;
    double var = 0.0;
    for (const RunResult& r : runs) {
      const double d = value(r, e) - mean;
      var += d * d;
    }
    stat.mean[e] = mean;
    stat.stddev[e] = std::sqrt(var / n);
  }
  return stat;
}

}  // namespace

Metrics aggregate(const std::vector<RunResult>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  Metrics m;
  m.runs = static_cast<int>(runs.size());
  m.episodes = static_cast<int>(runs.front().episodes.size());

  m.collision = across_runs(runs, m.episodes, [](const RunResult& r, int e) {
    return r.episodes[e].collision ? 1.0 : 0.0;
  });
  m.agent_reward = across_runs(runs, m.episodes, [](const RunResult& r, int e) {
    return r.episodes[e].agent_reward;
  });
  m.adversary_reward = across_runs(runs, m.episodes, [](const RunResult& r, int e) {
    return r.episodes[e].adversary_reward;
  });

  // Running sums need per-run prefix accumulation before the cross-run stats.
  std::vector<std::vector<double>> agent_cum(runs.size()), adv_cum(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    agent_cum[r].resize(m.episodes);
    adv_cum[r].resize(m.episodes);
    double a = 0.0, b = 0.0;
    for (int e = 0; e < m.episodes; ++e) {
      a += runs[r].episodes[e].agent_reward;
      b += runs[r].episodes[e].adversary_reward;
      agent_cum[r][e] = a;
      adv_cum[r][e] = b;
    }
  }
  const auto cum_stat = [&](const std::vector<std::vector<double>>& series) {
    SeriesStat stat;
    stat.mean.resize(m.episodes);
    stat.stddev.resize(m.episodes);
    const double n = static_cast<double>(runs.size());
    for (int e = 0; e < m.episodes; ++e) {
      double sum = 0.0;
      for (const auto& run : series) sum += run[e];
      const double mean = sum / n;
      double var = 0.0;
      for (const auto& run : series) {
        const double d = run[e] - mean;
        var += d * d;
      }
      stat.mean[e] = mean;
      stat.stddev[e] = std::sqrt(var / n);
    }
    return stat;
  };
  m.agent_cumulative = cum_stat(agent_cum);
  m.adversary_cumulative = cum_stat(adv_cum);

  double sum = 0.0;
  for (const RunResult& r : runs) sum += r.collision_rate();
  m.collision_rate_mean = sum / m.runs;
  double var = 0.0;
  for (const RunResult& r : runs) {
    const double d = r.collision_rate() - m.collision_rate_mean;
    var += d * d;
  }
  m.collision_rate_std = std::sqrt(var / m.runs);
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.runs.resize(config.runs);

  const int workers = std::min(config.jobs, config.runs);
  if (workers <= 1) {
    for (int i = 0; i < config.runs; ++i) result.runs[i] = run_single(config, i);
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    int next = 0;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          int i;
          {
            std::lock_guard lock(mu);
            if (next >= config.runs) return;
            i = next++;
          }
          result.runs[i] = run_single(config, i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  result.metrics = aggregate(result.runs);
  return result;
}

void write_metrics_csv(const Metrics& m, std::ostream& os) {
  os << "episode,collision_mean,collision_std,agent_reward_mean,agent_reward_std,"
        "adversary_reward_mean,adversary_reward_std,agent_cumulative_mean,"
        "agent_cumulative_std,adversary_cumulative_mean,adversary_cumulative_std\n";
  for (int e = 0; e < m.episodes; ++e) {
    os << (e + 1) << ',' << format_double(m.collision.mean[e]) << ','
       << format_double(m.collision.stddev[e]) << ','
       << format_double(m.agent_reward.mean[e]) << ','
       << format_double(m.agent_reward.stddev[e]) << ','
       << format_double(m.adversary_reward.mean[e]) << ','
       << format_double(m.adversary_reward.stddev[e]) << ','
       << format_double(m.agent_cumulative.mean[e]) << ','
       << format_double(m.agent_cumulative.stddev[e]) << ','
       << format_double(m.adversary_cumulative.mean[e]) << ','
       << format_double(m.adversary_cumulative.stddev[e]) << '\n';
  }
}

namespace {

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::string summary_text(const ExperimentResult& result) {
  const Metrics& m = result.metrics;
  const int last = m.episodes - 1;
  std::ostringstream os;
  os << "configuration: adversary=" << qlearn::adversary_name(result.config.adversary)
     << " defense=" << defense::mechanism_name(result.config.defense.mechanism)
     << " observations=" << (result.config.agent_observations ? "on" : "off")
     << " runs=" << m.runs << " episodes=" << m.episodes
     << " seed=" << result.config.seed << "\n\n";
  os << "collision rate (last 100 episodes): " << fixed(m.collision_rate_mean)
     << " +/- " << fixed(m.collision_rate_std) << '\n';
  os << "agent cumulative reward:            " << fixed(m.agent_cumulative.mean[last])
     << '\n';
  os << "agent reward at final episode:      " << fixed(m.agent_reward.mean[last])
     << " +/- " << fixed(m.agent_reward.stddev[last]) << '\n';
  os << "adversary cumulative reward:        "
     << fixed(m.adversary_cumulative.mean[last]) << '\n';
  os << "adversary reward at final episode:  " << fixed(m.adversary_reward.mean[last])
     << " +/- " << fixed(m.adversary_reward.stddev[last]) << '\n';
  return os.str();
}

void persist(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream os(fs::path(out_dir) / "metrics.csv");
    if (!os) throw std::runtime_error("cannot write metrics.csv under " + out_dir);
    write_metrics_csv(result.metrics, os);
  }
  {
    std::ofstream os(fs::path(out_dir) / "summary.txt");
    os << summary_text(result);
  }
  {
    std::ofstream os(fs::path(out_dir) / "config.txt");
    os << config_to_string(result.config);
  }
  for (const RunResult& run : result.runs) {
    std::ofstream os(fs::path(out_dir) /
                     ("qtable_run" + std::to_string(run.run_index) + ".csv"));
    run.agent.q.save_csv(os);
  }
}

dtmc::Dtmc extract_run(const ExperimentConfig& config, const RunResult& run,
                       dtmc::ExtractionStats* stats) {
  dtmc::ExtractionMode mode = config.extract_mode;
  if (mode.kind == dtmc::ExtractionMode::Kind::Analytic && mode.epsilon < 0.0)
    mode.epsilon = run.agent.epsilon;
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(run.run_index),
                      kExtractionStream));
  return dtmc::extract(run.agent, config.env(), run.adversary, mode, rng, stats);
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  os << "verification of " << per_run.size() << " runs\n\n";
  os << "run";
  for (const std::string& p : properties) os << "  |  " << p;
  os << '\n';
  for (std::size_t r = 0; r < per_run.size(); ++r) {
    os << r;
    for (const PropertyOutcome& o : per_run[r]) {
      os << "  |  ";
      if (o.is_boolean) os << (o.truth ? "true" : "false");
      else os << format_double(o.probability);
    }
    os << '\n';
  }
  os << "\naggregates across runs\n";
  for (std::size_t p = 0; p < properties.size(); ++p) {
    os << properties[p] << ": ";
    const bool boolean = !per_run.empty() && per_run.front()[p].is_boolean;
    if (boolean) {
      int satisfied = 0;
      for (const auto& run : per_run) satisfied += run[p].truth ? 1 : 0;
      os << satisfied << "/" << per_run.size() << " runs satisfied\n";
    } else {
      std::vector<double> values;
      values.reserve(per_run.size());
      for (const auto& run : per_run) values.push_back(run[p].probability);
      std::sort(values.begin(), values.end());
      const double median = values[values.size() / 2];
      os << "min " << format_double(values.front()) << ", median "
         << format_double(median) << ", max " << format_double(values.back()) << '\n';
    }
  }
  return os.str();
}

void VerificationReport::write_csv(std::ostream& os) const {
  os << "run,property,type,value,iterations,residual\n";
  for (std::size_t r = 0; r < per_run.size(); ++r) {
    for (const PropertyOutcome& o : per_run[r]) {
      os << r << ",\"" << o.property << "\",";
      if (o.is_boolean) os << "bool," << (o.truth ? "true" : "false");
      else os << "prob," << format_double(o.probability);
      os << ',' << o.iterations << ',' << format_double(o.residual) << '\n';
    }
  }
}

VerificationReport verify_pipeline(const ExperimentConfig& config,
                                   const std::vector<std::string>& properties,
                                   const std::string& out_dir,
                                   ExperimentResult* result_out) {
  if (properties.empty())
    throw std::invalid_argument("verification needs at least one property");
  std::vector<pctl::FormulaPtr> formulas;
  formulas.reserve(properties.size());
  for (const std::string& p : properties) formulas.push_back(pctl::parse(p));

  ExperimentResult trained = run_experiment(config);

  VerificationReport report;
  report.properties = properties;
  report.per_run.resize(trained.runs.size());
  for (std::size_t r = 0; r < trained.runs.size(); ++r) {
    const dtmc::Dtmc chain = extract_run(config, trained.runs[r]);
    if (!out_dir.empty()) {
      namespace fs = std::filesystem;
      fs::create_directories(out_dir);
      dtmc::export_explicit(chain,
                            (fs::path(out_dir) / ("run" + std::to_string(r))).string());
    }
    for (std::size_t p = 0; p < formulas.size(); ++p) {
      const pctl::CheckResult res = pctl::check(chain, *formulas[p]);
      PropertyOutcome out;
      out.property = properties[p];
      out.is_boolean = res.is_boolean;
      out.truth = res.initial_truth;
      out.probability = res.is_boolean ? (res.initial_truth ? 1.0 : 0.0)
                                       : res.initial_probability;
      out.iterations = res.solver.iterations;
      out.residual = res.solver.residual;
      report.per_run[r].push_back(std::move(out));
    }
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    persist(trained, out_dir);
    std::ofstream text(fs::path(out_dir) / "verification.txt");
    text << report.to_text();
    std::ofstream csv(fs::path(out_dir) / "verification.csv");
    report.write_csv(csv);
  }
  if (result_out) *result_out = std::move(trained);
  return report;
}

}  // namespace rlsafe::harness
