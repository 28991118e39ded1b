#pragma once
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mgbid/rng.hpp"

namespace mgbid {

struct SimParams {
  int num_agents = 100;
  int num_rounds = 50;
  int history_length = 5;
  double bid_min = 5.0;
  double bid_max = 10.0;
  double adjust_min = -0.5;
  double adjust_max = 0.5;
  double minority_fraction = 1.0;  // share of agents that adapt on losses
  std::uint64_t seed = 0;
};

enum class AgentKind { minority_adaptive, majority_tracking };

const char* to_string(AgentKind kind);

struct BidAgentState {
  double bid = 0.0;
  std::vector<std::uint8_t> memory;  // win flags, one per round played
  long long success_count = 0;
  AgentKind kind = AgentKind::minority_adaptive;
};

struct RoundRecord {
  int round = 0;
  double median_bid = 0.0;
  double avg_bid = 0.0;  // mean of bids as submitted, before adjustments
  int num_winners = 0;
  std::vector<int> winner_ids;                  // ascending
  std::vector<long long> impressions_awarded;   // dense, indexed by agent id
  bool tie_free = true;  // no two submitted bids equal this round
};

struct BidSim {
  SimParams params;
  std::vector<BidAgentState> agents;
  Rng rng;  // continues past init; draw order is part of the output contract
  int round = 0;
};

struct SimOutput {
  SimParams params;
  std::vector<RoundRecord> rounds;
  std::vector<std::vector<double>> bids;        // [agent][round], as submitted
  std::vector<std::vector<double>> efficiency;  // impressions per unit bid
  std::vector<BidAgentState> agents;            // final states
  int zero_winner_rounds = 0;
  int tie_rounds = 0;
};

// Impressions awarded to a winner as a function of its bid; winners get one
// impression each when absent.
using ImpressionModel = std::function<long long(double)>;

// Throws ConfigError naming the offending field. bid_min must be positive so
// efficiency (impressions per unit bid) stays defined.
void validate(const SimParams& params);

BidSim init_sim(const SimParams& params);
std::vector<BidAgentState> init_agents(const SimParams& params);

// Sort-based: middle element for odd counts, mean of the two middle elements
// for even counts.
double median(std::vector<double> bids);

RoundRecord run_auction_round(BidSim& sim, const ImpressionModel& model = nullptr);

SimOutput run_simulation(const SimParams& params,
                         const ImpressionModel& model = nullptr);

// Mean of the first tau entries. tau must be in [1, series length].
double cesaro_average(const std::vector<double>& series, std::size_t tau);
std::vector<double> cesaro_averages(const std::vector<std::vector<double>>& per_agent,
                                    std::size_t tau);

// CSV header: round,median_bid,avg_bid,num_winners (currency at 4 decimals)
void write_rounds_csv(const SimOutput& output, std::ostream& out);
// CSV header: agent_id,kind,final_bid,success_count
void write_agents_csv(const SimOutput& output, std::ostream& out);
// JSON object: params echo, zero-winner and tie round counts.
void write_sim_manifest_json(const SimOutput& output, std::ostream& out);

}  // namespace mgbid
