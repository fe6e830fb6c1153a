#include "rlsafe/dtmc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rlsafe::dtmc {

namespace {

constexpr double kRowSumTolerance = 1e-9;

const std::set<int> kEmptyStateSet;

}  // namespace

std::vector<std::vector<std::pair<int, double>>> Dtmc::rows() const {
  std::vector<std::vector<std::pair<int, double>>> out(n_states);
  for (const Transition& t : transitions) out[t.src].emplace_back(t.dst, t.prob);
  return out;
}

std::vector<std::vector<int>> Dtmc::predecessors() const {
  std::vector<std::vector<int>> out(n_states);
  for (const Transition& t : transitions) out[t.dst].push_back(t.src);
  return out;
}

const std::set<int>& Dtmc::label_states(const std::string& name) const {
  auto it = labels.find(name);
  return it == labels.end() ? kEmptyStateSet : it->second;
}

Dtmc make_dtmc(int n_states, int initial, std::vector<Transition> transitions,
               std::map<std::string, std::set<int>> labels) {
  if (n_states <= 0) throw std::invalid_argument("chain needs at least one state");
  std::sort(transitions.begin(), transitions.end(),
            [](const Transition& a, const Transition& b) {
              return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
            });
  std::vector<Transition> merged;
  merged.reserve(transitions.size());
  for (const Transition& t : transitions) {
    if (!merged.empty() && merged.back().src == t.src && merged.back().dst == t.dst)
      merged.back().prob += t.prob;
    else
      merged.push_back(t);
  }
  std::vector<char> has_out(n_states, 0);
  for (const Transition& t : merged)
    if (t.src >= 0 && t.src < n_states) has_out[t.src] = 1;
  for (int s = 0; s < n_states; ++s)
    if (!has_out[s]) merged.push_back({s, s, 1.0});
  std::sort(merged.begin(), merged.end(), [](const Transition& a, const Transition& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });

  // The standard labels are always declared, possibly empty, so exported
  // files and round-trips agree on the label set.
  labels["init"];
  labels["goal"];
  labels["collision"];

  Dtmc d;
  d.n_states = n_states;
  d.initial = initial;
  d.transitions = std::move(merged);
  d.labels = std::move(labels);
  return d;
}

std::vector<Violation> validate(const Dtmc& d) {
  std::vector<Violation> out;
  if (d.initial < 0 || d.initial >= d.n_states)
    out.push_back({ViolationKind::BadInitial, d.initial,
                   "initial state " + std::to_string(d.initial) + " out of range"});

  std::vector<double> row_sum(std::max(d.n_states, 0), 0.0);
  std::vector<char> has_out(std::max(d.n_states, 0), 0);
  for (const Transition& t : d.transitions) {
    if (t.src < 0 || t.src >= d.n_states || t.dst < 0 || t.dst >= d.n_states) {
      out.push_back({ViolationKind::DanglingTransition, t.src,
                     "transition " + std::to_string(t.src) + " -> " + std::to_string(t.dst) +
                         " references a state outside [0," + std::to_string(d.n_states) + ")"});
      continue;
    }
    if (!(t.prob > 0.0) || t.prob > 1.0 + kRowSumTolerance)
      out.push_back({ViolationKind::ProbRange, t.src,
                     "probability " + std::to_string(t.prob) + " on " + std::to_string(t.src) +
                         " -> " + std::to_string(t.dst) + " outside (0,1]"});
    row_sum[t.src] += t.prob;
    has_out[t.src] = 1;
  }
  for (int s = 0; s < d.n_states; ++s) {
    if (!has_out[s]) {
      out.push_back({ViolationKind::RowSum, s,
                     "state " + std::to_string(s) + " has no outgoing transitions"});
      continue;
    }
    if (std::abs(row_sum[s] - 1.0) > kRowSumTolerance)
      out.push_back({ViolationKind::RowSum, s,
                     "row " + std::to_string(s) + " sums to " + std::to_string(row_sum[s])});
  }
  for (const auto& [name, states] : d.labels)
    for (int s : states)
      if (s < 0 || s >= d.n_states)
        out.push_back({ViolationKind::DanglingLabel, s,
                       "label \"" + name + "\" references state " + std::to_string(s)});
  return out;
}

void ExtractionMode::validate() const {
  if (kind == Kind::Empirical && episodes < 1)
    throw std::invalid_argument("empirical extraction needs at least one episode");
  if (kind == Kind::Analytic && (epsilon < 0.0 || epsilon > 1.0))
    throw std::invalid_argument("analytic extraction epsilon outside [0,1]");
}

namespace {

Dtmc extract_analytic(const FrozenAgent& agent, const grid::EnvConfig& env, double epsilon) {
  std::vector<Transition> transitions;
  const int goal = env.goal.index();
  for (int s = 0; s < grid::kCellCount; ++s) {
    if (s == goal) {
      transitions.push_back({s, s, 1.0});
      continue;
    }
    const grid::GridPos pos = grid::GridPos::from_index(s);
    const int greedy = static_cast<int>(agent.q.argmax(s));
    std::array<double, grid::kCellCount> mass{};
    for (int a = 0; a < grid::kActionCount; ++a) {
      double p = epsilon / grid::kActionCount;
      if (a == greedy) p += 1.0 - epsilon;
      if (p <= 0.0) continue;
      mass[grid::apply_move(pos, static_cast<grid::Action>(a)).index()] += p;
    }
    for (int dst = 0; dst < grid::kCellCount; ++dst)
      if (mass[dst] > 0.0) transitions.push_back({s, dst, mass[dst]});
  }
  std::map<std::string, std::set<int>> labels;
  labels["init"] = {env.agent_start.index()};
  labels["goal"] = {goal};
  labels["collision"] = {};
  return make_dtmc(grid::kCellCount, env.agent_start.index(), std::move(transitions),
                   std::move(labels));
}

Dtmc extract_empirical(const FrozenAgent& agent, const grid::EnvConfig& env,
                       const FrozenAdversary& adversary, int episodes, Rng& rng,
                       ExtractionStats* stats) {
  defense::ObsOverlay overlay = agent.q_obs;  // scratch; frozen original untouched
  const bool patrol = qlearn::adversary_is_patrol(adversary.kind);
  std::vector<std::vector<long>> counts(grid::kCellCount,
                                        std::vector<long>(grid::kCellCount, 0));
  std::vector<long> starts(grid::kCellCount, 0), ends(grid::kCellCount, 0);
  std::set<int> collision_cells;

  for (int e = 0; e < episodes; ++e) {
    grid::GridPos agent_pos = env.agent_start;
    grid::GridPos adv_pos =
        patrol ? qlearn::patrol_position(adversary.kind, adversary.patrol_tick_origin + e)
               : qlearn::adversary_start(adversary.kind);
    starts[agent_pos.index()] += 1;
    for (int t = 0; t < env.timeout_steps; ++t) {
      // Mirrors the training loop: a standing adversary is what the agent
      // sees, except a co-located one whose departure move is visible.
      const grid::GridPos next_adv =
          patrol ? adv_pos
                 : grid::apply_move(adv_pos,
                                    qlearn::adversary_action(adversary.kind, adv_pos,
                                                             agent_pos, adversary.q,
                                                             adversary.epsilon, rng));
      const grid::Observation obs =
          grid::observe(agent_pos, adv_pos == agent_pos ? next_adv : adv_pos);
      const grid::Action act = defense::select_action(
          agent.q, overlay, obs, agent.observations, agent.mechanism, agent.epsilon, rng,
          agent.alpha, agent.gamma, agent.adv_penalty);
      const grid::StepOutcome out = grid::step_to(env, agent_pos, next_adv, act, t);
      counts[agent_pos.index()][out.next_agent.index()] += 1;
      agent_pos = out.next_agent;
      adv_pos = out.next_adversary;
      if (out.terminal == grid::Terminal::Collision) collision_cells.insert(agent_pos.index());
      if (out.terminal != grid::Terminal::None) break;
    }
    ends[agent_pos.index()] += 1;
  }

  const int goal = env.goal.index();
  std::vector<Transition> transitions;
  for (int s = 0; s < grid::kCellCount; ++s) {
    if (s == goal) continue;  // forced absorbing below via the no-outgoing rule
    long total = 0;
    for (long c : counts[s]) total += c;
    if (total == 0) continue;
    for (int dst = 0; dst < grid::kCellCount; ++dst)
      if (counts[s][dst] > 0)
        transitions.push_back({s, dst, static_cast<double>(counts[s][dst]) / total});
  }
  std::map<std::string, std::set<int>> labels;
  labels["init"] = {env.agent_start.index()};
  labels["goal"] = {goal};
  labels["collision"] = collision_cells;

  if (stats) {
    stats->counts = std::move(counts);
    stats->episode_starts = std::move(starts);
    stats->episode_ends = std::move(ends);
  }
  return make_dtmc(grid::kCellCount, env.agent_start.index(), std::move(transitions),
                   std::move(labels));
}

}  // namespace

Dtmc extract(const FrozenAgent& agent, const grid::EnvConfig& env,
             const FrozenAdversary& adversary, const ExtractionMode& mode, Rng& rng,
             ExtractionStats* stats) {
  env.validate();
  mode.validate();
  if (mode.kind == ExtractionMode::Kind::Analytic)
    return extract_analytic(agent, env, mode.epsilon);
  return extract_empirical(agent, env, adversary, mode.episodes, rng, stats);
}

std::string format_probability(double p) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), p);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

namespace {

void throw_on_violations(const Dtmc& d, const std::string& context) {
  const auto violations = validate(d);
  if (violations.empty()) return;
  std::ostringstream os;
  os << context << ": chain fails validation:";
  for (const Violation& v : violations) os << "\n  " << v.message;
  throw std::runtime_error(os.str());
}

/// Label-id assignment shared by export and import: the three standard
/// labels take ids 0..2, anything else follows in name order.
std::vector<std::string> label_order(const Dtmc& d) {
  std::vector<std::string> names{"init", "goal", "collision"};
  for (const auto& [name, states] : d.labels)
    if (name != "init" && name != "goal" && name != "collision") names.push_back(name);
  return names;
}

}  // namespace

void export_explicit(const Dtmc& d, const std::string& path_prefix) {
  throw_on_violations(d, "export");

  std::ofstream tra(path_prefix + ".tra");
  if (!tra) throw std::runtime_error("cannot open " + path_prefix + ".tra for writing");
  tra << d.n_states << ' ' << d.transitions.size() << '\n';
  for (const Transition& t : d.transitions)
    tra << t.src << ' ' << t.dst << ' ' << format_probability(t.prob) << '\n';
  if (!tra.flush()) throw std::runtime_error("write failed: " + path_prefix + ".tra");

  const std::vector<std::string> names = label_order(d);
  std::ofstream lab(path_prefix + ".lab");
  if (!lab) throw std::runtime_error("cannot open " + path_prefix + ".lab for writing");
  for (std::size_t i = 0; i < names.size(); ++i)
    lab << (i ? " " : "") << i << "=\"" << names[i] << '"';
  lab << '\n';
  std::map<int, std::vector<std::size_t>> by_state;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (int s : d.label_states(names[i])) by_state[s].push_back(i);
  for (const auto& [state, ids] : by_state) {
    lab << state << ':';
    for (std::size_t id : ids) lab << ' ' << id;
    lab << '\n';
  }
  if (!lab.flush()) throw std::runtime_error("write failed: " + path_prefix + ".lab");
}

Dtmc import_explicit(const std::string& path_prefix) {
  std::ifstream tra(path_prefix + ".tra");
  if (!tra) throw std::runtime_error("cannot open " + path_prefix + ".tra");
  int n_states = 0;
  long n_transitions = 0;
  if (!(tra >> n_states >> n_transitions))
    throw std::runtime_error("malformed header in " + path_prefix + ".tra");
  std::vector<Transition> transitions;
  transitions.reserve(static_cast<std::size_t>(n_transitions));
  for (long i = 0; i < n_transitions; ++i) {
    Transition t;
    if (!(tra >> t.src >> t.dst >> t.prob))
      throw std::runtime_error("truncated transition list in " + path_prefix + ".tra");
    transitions.push_back(t);
  }

  std::ifstream lab(path_prefix + ".lab");
  if (!lab) throw std::runtime_error("cannot open " + path_prefix + ".lab");
  std::string header;
  std::getline(lab, header);
  std::map<int, std::string> id_to_name;
  {
    std::istringstream hs(header);
    std::string item;
    while (hs >> item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || item.size() < eq + 3 || item[eq + 1] != '"' ||
          item.back() != '"')
        throw std::runtime_error("malformed label declaration: " + item);
      id_to_name[std::stoi(item.substr(0, eq))] =
          item.substr(eq + 2, item.size() - eq - 3);
    }
  }
  std::map<std::string, std::set<int>> labels;
  for (const auto& [id, name] : id_to_name) labels[name];
  std::string line;
  while (std::getline(lab, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("malformed label row: " + line);
    const int state = std::stoi(line.substr(0, colon));
    std::istringstream ids(line.substr(colon + 1));
    int id = 0;
    while (ids >> id) {
      auto it = id_to_name.find(id);
      if (it == id_to_name.end())
        throw std::runtime_error("label row uses undeclared id " + std::to_string(id));
      labels[it->second].insert(state);
    }
  }

  int initial = 0;
  if (auto it = labels.find("init"); it != labels.end() && !it->second.empty())
    initial = *it->second.begin();
  Dtmc d = make_dtmc(n_states, initial, std::move(transitions), std::move(labels));
  throw_on_violations(d, "import");
  return d;
}

void write_archive(const Dtmc& d, const std::string& path) {
  throw_on_violations(d, "archive");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "dtmc states " << d.n_states << " initial " << d.initial << " transitions "
     << d.transitions.size() << '\n';
  for (const Transition& t : d.transitions)
    os << t.src << ' ' << t.dst << ' ' << format_probability(t.prob) << '\n';
  for (const auto& [name, states] : d.labels) {
    os << "label " << name;
    for (int s : states) os << ' ' << s;
    os << '\n';
  }
  if (!os.flush()) throw std::runtime_error("write failed: " + path);
}

Dtmc read_archive(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string word;
  int n_states = 0, initial = 0;
  long n_transitions = 0;
  is >> word;
  if (word != "dtmc") throw std::runtime_error("not a chain archive: " + path);
  is >> word >> n_states >> word >> initial >> word >> n_transitions;
  if (!is) throw std::runtime_error("malformed archive header: " + path);
  std::vector<Transition> transitions;
  for (long i = 0; i < n_transitions; ++i) {
    Transition t;
    if (!(is >> t.src >> t.dst >> t.prob))
      throw std::runtime_error("truncated archive: " + path);
    transitions.push_back(t);
  }
  std::map<std::string, std::set<int>> labels;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, name;
    ls >> tag >> name;
    if (tag != "label") throw std::runtime_error("malformed archive line: " + line);
    auto& states = labels[name];
    int s = 0;
    while (ls >> s) states.insert(s);
  }
  return make_dtmc(n_states, initial, std::move(transitions), std::move(labels));
}

}  // namespace rlsafe::dtmc
