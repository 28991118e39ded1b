#include "mgbid/mg_engine.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "mgbid/csv.hpp"
#include "mgbid/errors.hpp"
#include "mgbid/stats.hpp"

namespace mgbid {

namespace {

// Argmax over valuations; ties broken uniformly at random. Draws from the
// generator only when more than one strategy attains the maximum, so the
// draw count is reproducible from the valuation trajectory alone.
int select_active(const std::vector<double>& valuations, Rng& rng) {
  double best = valuations[0];
  for (double v : valuations)
    if (v > best) best = v;
  std::vector<int> tied;
  for (int a = 0; a < static_cast<int>(valuations.size()); ++a)
    if (valuations[a] == best) tied.push_back(a);
  if (tied.size() == 1) return tied[0];
  return tied[index_draw(rng, tied.size())];
}

}  // namespace

std::vector<std::string> validate(const MgConfig& config) {
  if (config.num_agents < 1) throw ConfigError("num_agents: must be >= 1");
  if (config.memory < 1) throw ConfigError("memory: must be >= 1");
  if (config.memory > 30)
    throw ConfigError("memory: must be <= 30 (2^memory table entries are allocated)");
  if (config.strategies_per_agent < 1)
    throw ConfigError("strategies_per_agent: must be >= 1");
  if (config.rounds < 0) throw ConfigError("rounds: must be >= 0");
  std::vector<std::string> warnings;
  if (config.num_agents % 2 == 0)
    warnings.push_back(
        "num_agents is even: attendance can tie at zero; ties are resolved by "
        "a seeded coin flip and counted in the output metadata");
  return warnings;
}

std::size_t history_index(const std::vector<int>& history) {
  if (history.empty() || history.size() > 30)
    throw ContractError("history_index: length must be in [1, 30]");
  std::size_t idx = 0;
  for (int sign : history) {
    if (sign != 1 && sign != -1)
      throw ContractError("history_index: entries must be +1 or -1");
    idx = (idx << 1) | (sign == 1 ? 1u : 0u);
  }
  return idx;
}

MgGame init_game(const MgConfig& config) {
  MgGame game;
  game.warnings = validate(config);
  game.config = config;
  game.rng.seed(config.seed);

  const std::size_t table_len = std::size_t{1} << config.memory;
  game.agents.resize(static_cast<std::size_t>(config.num_agents));
  for (auto& agent : game.agents) {
    agent.strategies.resize(static_cast<std::size_t>(config.strategies_per_agent));
    for (auto& table : agent.strategies) {
      table.entries.resize(table_len);
      for (auto& e : table.entries)
        e = static_cast<std::int8_t>(sign_draw(game.rng));
    }
    agent.valuations.assign(static_cast<std::size_t>(config.strategies_per_agent), 0.0);
  }

  game.state.history.resize(static_cast<std::size_t>(config.memory));
  for (auto& h : game.state.history) h = sign_draw(game.rng);

  for (auto& agent : game.agents)
    agent.active_strategy = select_active(agent.valuations, game.rng);

  return game;
}

MgRoundOutcome step(MgGame& game) {
  if (game.state.round >= game.config.rounds)
    throw ContractError("step: round limit already reached");

  const std::size_t idx = history_index(game.state.history);

  MgRoundOutcome outcome;
  outcome.actions.resize(game.agents.size());
  long long sum = 0;
  for (std::size_t i = 0; i < game.agents.size(); ++i) {
    const MgAgent& agent = game.agents[i];
    const int action =
        agent.strategies[static_cast<std::size_t>(agent.active_strategy)].entries[idx];
    outcome.actions[i] = action;
    sum += action;
  }
  const double root_n = std::sqrt(static_cast<double>(game.config.num_agents));
  outcome.attendance = static_cast<double>(sum) / root_n;

  int history_sign;
  if (sum == 0) {
    // Tie: neither side is a minority. Pick the winning side by a seeded coin
    // flip and record the opposite as the attendance sign, mirroring the
    // minority_sign = -sign(A) relation of nonzero rounds.
    outcome.minority_sign = sign_draw(game.rng);
    history_sign = -outcome.minority_sign;
    ++game.zero_attendance_rounds;
  } else {
    history_sign = sum > 0 ? 1 : -1;
    outcome.minority_sign = -history_sign;
  }

  // Virtual points: every strategy of every agent is scored against this
  // round's attendance, played or not.
  for (auto& agent : game.agents)
    for (std::size_t a = 0; a < agent.strategies.size(); ++a)
      agent.valuations[a] -= outcome.attendance * agent.strategies[a].entries[idx];

  game.state.history.erase(game.state.history.begin());
  game.state.history.push_back(history_sign);

  for (auto& agent : game.agents)
    agent.active_strategy = select_active(agent.valuations, game.rng);

  game.state.attendance_series.push_back(outcome.attendance);
  ++game.state.round;
  return outcome;
}

MgTimeSeries run(const MgConfig& config) {
  MgGame game = init_game(config);
  MgTimeSeries series;
  series.config = config;
  series.warnings = game.warnings;
  series.attendance.reserve(static_cast<std::size_t>(config.rounds));
  series.minority_signs.reserve(static_cast<std::size_t>(config.rounds));
  series.history_indices.reserve(static_cast<std::size_t>(config.rounds));
  for (int t = 0; t < config.rounds; ++t) {
    const std::uint32_t idx =
        static_cast<std::uint32_t>(history_index(game.state.history));
    const MgRoundOutcome outcome = step(game);
    series.attendance.push_back(outcome.attendance);
    series.minority_signs.push_back(outcome.minority_sign);
    series.history_indices.push_back(idx);
  }
  series.zero_attendance_rounds = game.zero_attendance_rounds;
  series.final_valuations.reserve(game.agents.size());
  for (const auto& agent : game.agents)
    series.final_valuations.push_back(agent.valuations);
  return series;
}

Volatility volatility(const std::vector<double>& attendance_series, int num_agents) {
  if (attendance_series.empty())
    throw ContractError("volatility: empty attendance series");
  if (num_agents < 1) throw ContractError("volatility: num_agents must be >= 1");
  Volatility v;
  v.var_attendance = stats::population_variance(attendance_series);
  std::vector<double> raw(attendance_series);
  const double root_n = std::sqrt(static_cast<double>(num_agents));
  for (double& x : raw) x *= root_n;
  v.var_raw_per_agent =
      stats::population_variance(raw) / static_cast<double>(num_agents);
  return v;
}

void write_attendance_csv(const MgTimeSeries& series, std::ostream& out) {
  out << "round,attendance,minority_sign\n";
  for (std::size_t t = 0; t < series.attendance.size(); ++t)
    out << t << ',' << csv::format_double(series.attendance[t]) << ','
        << series.minority_signs[t] << '\n';
}

void write_metadata_json(const MgTimeSeries& series, std::ostream& out) {
  nlohmann::json j;
  j["config"] = {{"num_agents", series.config.num_agents},
                 {"memory", series.config.memory},
                 {"strategies_per_agent", series.config.strategies_per_agent},
                 {"rounds", series.config.rounds},
                 {"seed", series.config.seed}};
  j["zero_attendance_rounds"] = series.zero_attendance_rounds;
  j["warnings"] = series.warnings;
  if (!series.attendance.empty()) {
    const Volatility v = volatility(series.attendance, series.config.num_agents);
    // The two figures coincide analytically (A is already scaled by sqrt(N));
    // both are reported so downstream tooling never has to guess the scaling.
    j["volatility"] = {{"var_attendance", v.var_attendance},
                       {"var_raw_per_agent", v.var_raw_per_agent}};
  }
  j["final_valuations"] = series.final_valuations;
  out << j.dump(2) << '\n';
}

}  // namespace mgbid
