#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mgbid/rng.hpp"

namespace mgbid {

struct MgConfig {
  int num_agents = 101;
  int memory = 5;
  int strategies_per_agent = 2;
  int rounds = 1000;
  std::uint64_t seed = 0;
};

// Fixed lookup table: entry per M-bit history string, values in {-1,+1}.
struct StrategyTable {
  std::vector<std::int8_t> entries;
};

struct MgAgent {
  std::vector<StrategyTable> strategies;
  std::vector<double> valuations;
  int active_strategy = 0;
};

struct MgState {
  std::vector<int> history;  // signs of recent attendance, oldest first
  int round = 0;
  std::vector<double> attendance_series;
};

struct MgRoundOutcome {
  double attendance = 0.0;
  int minority_sign = 0;
  std::vector<int> actions;
};

struct MgGame {
  MgConfig config;
  std::vector<MgAgent> agents;
  MgState state;
  Rng rng;  // continues past init; draw order is part of the output contract
  int zero_attendance_rounds = 0;
  std::vector<std::string> warnings;
};

struct MgTimeSeries {
  MgConfig config;
  std::vector<double> attendance;
  std::vector<int> minority_signs;
  std::vector<std::uint32_t> history_indices;  // table index used each round
  std::vector<std::vector<double>> final_valuations;  // [agent][strategy]
  int zero_attendance_rounds = 0;
  std::vector<std::string> warnings;
};

struct Volatility {
  double var_attendance = 0.0;      // Var(A), population
  double var_raw_per_agent = 0.0;   // Var(A*sqrt(N))/N; equals Var(A) analytically
};

// Throws ConfigError naming the offending field; returns warnings (even
// num_agents allows zero-attendance ties, which the engine resolves but flags).
std::vector<std::string> validate(const MgConfig& config);

// Big-endian bit packing: oldest sign is the most significant bit, +1 maps to
// bit 1. Bijective over sign strings of one length.
std::size_t history_index(const std::vector<int>& history);

MgGame init_game(const MgConfig& config);

// pre: game.state.round < game.config.rounds
MgRoundOutcome step(MgGame& game);

MgTimeSeries run(const MgConfig& config);

Volatility volatility(const std::vector<double>& attendance_series, int num_agents);

// CSV header: round,attendance,minority_sign
void write_attendance_csv(const MgTimeSeries& series, std::ostream& out);
// JSON object: config echo, zero-attendance count, volatility, final valuations.
void write_metadata_json(const MgTimeSeries& series, std::ostream& out);

}  // namespace mgbid
