#include "mgbid/bid_market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "mgbid/errors.hpp"

namespace mgbid {

namespace {

std::string currency(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

// Sum of the trailing `window` win flags.
long long recent_wins(const std::vector<std::uint8_t>& memory, int window) {
  long long sum = 0;
  for (std::size_t i = memory.size() - static_cast<std::size_t>(window);
       i < memory.size(); ++i)
    sum += memory[i];
  return sum;
}

}  // namespace

const char* to_string(AgentKind kind) {
  return kind == AgentKind::minority_adaptive ? "minority_adaptive"
                                              : "majority_tracking";
}

void validate(const SimParams& params) {
  if (params.num_agents < 1) throw ConfigError("num_agents: must be >= 1");
  if (params.num_rounds < 0) throw ConfigError("num_rounds: must be >= 0");
  if (params.history_length < 1) throw ConfigError("history_length: must be >= 1");
  if (!(params.bid_min > 0.0))
    throw ConfigError("bid_min: must be > 0 (efficiency divides by the bid)");
  if (!(params.bid_min < params.bid_max))
    throw ConfigError("bid_min/bid_max: need bid_min < bid_max");
  if (!(params.adjust_min < params.adjust_max))
    throw ConfigError("adjust_min/adjust_max: need adjust_min < adjust_max");
  if (!(params.minority_fraction >= 0.0 && params.minority_fraction <= 1.0))
    throw ConfigError("minority_fraction: must be in [0, 1]");
}

BidSim init_sim(const SimParams& params) {
  validate(params);
  BidSim sim;
  sim.params = params;
  sim.rng.seed(params.seed);
  sim.agents.resize(static_cast<std::size_t>(params.num_agents));
  for (auto& agent : sim.agents)
    agent.bid = uniform_draw(sim.rng, params.bid_min, params.bid_max);

  // Kinds are dealt over a seeded shuffle of the agent ids. The shuffle runs
  // even when the fraction is 0 or 1 so the draw sequence (and hence every
  // bid trajectory) depends only on the seed, not on the kind split.
  std::vector<int> order(sim.agents.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle_draw(sim.rng, order);
  const int minority_count = static_cast<int>(
      std::floor(params.minority_fraction * params.num_agents));
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    sim.agents[static_cast<std::size_t>(order[pos])].kind =
        static_cast<int>(pos) < minority_count ? AgentKind::minority_adaptive
                                               : AgentKind::majority_tracking;
  return sim;
}

std::vector<BidAgentState> init_agents(const SimParams& params) {
  return init_sim(params).agents;
}

double median(std::vector<double> bids) {
  if (bids.empty()) throw ContractError("median: empty input");
  std::sort(bids.begin(), bids.end());
  const std::size_t n = bids.size();
  if (n % 2 == 1) return bids[n / 2];
  return 0.5 * (bids[n / 2 - 1] + bids[n / 2]);
}

RoundRecord run_auction_round(BidSim& sim, const ImpressionModel& model) {
  if (sim.agents.empty()) throw ContractError("run_auction_round: no agents");
  const SimParams& p = sim.params;

  std::vector<double> bids;
  bids.reserve(sim.agents.size());
  for (const auto& agent : sim.agents) bids.push_back(agent.bid);

  RoundRecord rec;
  rec.round = sim.round;
  rec.median_bid = median(bids);
  rec.avg_bid =
      std::accumulate(bids.begin(), bids.end(), 0.0) / static_cast<double>(bids.size());
  {
    std::vector<double> sorted = bids;
    std::sort(sorted.begin(), sorted.end());
    rec.tie_free = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  }

  rec.impressions_awarded.assign(sim.agents.size(), 0);
  for (std::size_t i = 0; i < sim.agents.size(); ++i) {
    const bool won = bids[i] < rec.median_bid;
    if (won) {
      rec.winner_ids.push_back(static_cast<int>(i));
      rec.impressions_awarded[i] = model ? model(bids[i]) : 1;
    }
    sim.agents[i].memory.push_back(won ? 1 : 0);
    if (won) ++sim.agents[i].success_count;
  }
  rec.num_winners = static_cast<int>(rec.winner_ids.size());

  for (auto& agent : sim.agents) {
    if (agent.kind == AgentKind::minority_adaptive) {
      if (agent.memory.size() >= static_cast<std::size_t>(p.history_length) &&
          recent_wins(agent.memory, p.history_length) == 0)
        agent.bid = std::clamp(
            agent.bid + uniform_draw(sim.rng, p.adjust_min, p.adjust_max),
            p.bid_min, p.bid_max);
    } else {
      agent.bid = std::clamp(
          rec.avg_bid + uniform_draw(sim.rng, p.adjust_min, p.adjust_max),
          p.bid_min, p.bid_max);
    }
  }

  ++sim.round;
  return rec;
}

SimOutput run_simulation(const SimParams& params, const ImpressionModel& model) {
  BidSim sim = init_sim(params);
  SimOutput out;
  out.params = params;
  out.bids.assign(sim.agents.size(), {});
  out.efficiency.assign(sim.agents.size(), {});
  for (int t = 0; t < params.num_rounds; ++t) {
    for (std::size_t i = 0; i < sim.agents.size(); ++i)
      out.bids[i].push_back(sim.agents[i].bid);
    RoundRecord rec = run_auction_round(sim, model);
    for (std::size_t i = 0; i < sim.agents.size(); ++i)
      out.efficiency[i].push_back(
          static_cast<double>(rec.impressions_awarded[i]) / out.bids[i].back());
    if (rec.num_winners == 0) ++out.zero_winner_rounds;
    if (!rec.tie_free) ++out.tie_rounds;
    out.rounds.push_back(std::move(rec));
  }
  out.agents = sim.agents;
  return out;
}

double cesaro_average(const std::vector<double>& series, std::size_t tau) {
  if (tau == 0) throw ContractError("cesaro_average: tau must be >= 1");
  if (tau > series.size())
    throw ContractError("cesaro_average: tau exceeds recorded rounds");
  double sum = 0.0;
  for (std::size_t t = 0; t < tau; ++t) sum += series[t];
  return sum / static_cast<double>(tau);
}

std::vector<double> cesaro_averages(const std::vector<std::vector<double>>& per_agent,
                                    std::size_t tau) {
  std::vector<double> out;
  out.reserve(per_agent.size());
  for (const auto& series : per_agent) out.push_back(cesaro_average(series, tau));
  return out;
}

void write_rounds_csv(const SimOutput& output, std::ostream& out) {
  out << "round,median_bid,avg_bid,num_winners\n";
  for (const RoundRecord& rec : output.rounds)
    out << rec.round << ',' << currency(rec.median_bid) << ','
        << currency(rec.avg_bid) << ',' << rec.num_winners << '\n';
}

void write_agents_csv(const SimOutput& output, std::ostream& out) {
  out << "agent_id,kind,final_bid,success_count\n";
  for (std::size_t i = 0; i < output.agents.size(); ++i)
    out << i << ',' << to_string(output.agents[i].kind) << ','
        << currency(output.agents[i].bid) << ',' << output.agents[i].success_count
        << '\n';
}

void write_sim_manifest_json(const SimOutput& output, std::ostream& out) {
  const SimParams& p = output.params;
  nlohmann::json j;
  j["params"] = {{"num_agents", p.num_agents},
                 {"num_rounds", p.num_rounds},
                 {"history_length", p.history_length},
                 {"bid_min", p.bid_min},
                 {"bid_max", p.bid_max},
                 {"adjust_min", p.adjust_min},
                 {"adjust_max", p.adjust_max},
                 {"minority_fraction", p.minority_fraction},
                 {"seed", p.seed}};
  j["rounds_recorded"] = output.rounds.size();
  j["zero_winner_rounds"] = output.zero_winner_rounds;
  j["tie_rounds"] = output.tie_rounds;
  out << j.dump(2) << '\n';
}

}  // namespace mgbid
