#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mgbid/bid_market.hpp"
#include "mgbid/errors.hpp"

using namespace mgbid;

TEST_CASE("param validation names the offending field") {
  SimParams p;
  p.num_agents = 0;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("num_agents"), ConfigError);
  p = SimParams{};
  p.bid_min = 11.0;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("bid_min"), ConfigError);
  p = SimParams{};
  p.bid_min = 0.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = SimParams{};
  p.adjust_min = 0.5;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("adjust"), ConfigError);
  p = SimParams{};
  p.minority_fraction = 1.5;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("minority_fraction"),
                       ConfigError);
  p = SimParams{};
  p.history_length = 0;
  CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("initial agents: bids in range, memories empty, kinds split by fraction") {
  SimParams p;
  p.seed = 11;
  auto agents = init_agents(p);
  REQUIRE(agents.size() == 100);
  for (const auto& a : agents) {
    CHECK(a.bid >= 5.0);
    CHECK(a.bid <= 10.0);
    CHECK(a.memory.empty());
    CHECK(a.success_count == 0);
    CHECK(a.kind == AgentKind::minority_adaptive);
  }

  p.minority_fraction = 0.0;
  for (const auto& a : init_agents(p))
    CHECK(a.kind == AgentKind::majority_tracking);

  p.minority_fraction = 0.5;
  agents = init_agents(p);
  const auto minority = std::count_if(agents.begin(), agents.end(), [](const auto& a) {
    return a.kind == AgentKind::minority_adaptive;
  });
  CHECK(minority == 50);
}

TEST_CASE("bid trajectories depend only on the seed, not the kind split") {
  SimParams p;
  p.seed = 21;
  const auto all_minority = init_agents(p);
  p.minority_fraction = 0.25;
  const auto mixed = init_agents(p);
  for (std::size_t i = 0; i < all_minority.size(); ++i)
    CHECK(all_minority[i].bid == mixed[i].bid);
}

TEST_CASE("median conventions") {
  CHECK(median({5, 7, 9}) == 7.0);
  CHECK(median({5, 6, 8, 10}) == 7.0);
  CHECK_THROWS_AS(median({}), ContractError);

  Rng rng(3);
  std::vector<double> draws;
  for (int i = 0; i < 100; ++i) draws.push_back(uniform_draw(rng, 5.0, 10.0));
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  CHECK(median(draws) == 0.5 * (sorted[49] + sorted[50]));
}

namespace {

BidSim make_sim_with_bids(const std::vector<double>& bids, SimParams p = {}) {
  p.num_agents = static_cast<int>(bids.size());
  BidSim sim = init_sim(p);
  for (std::size_t i = 0; i < bids.size(); ++i) sim.agents[i].bid = bids[i];
  return sim;
}

}  // namespace

TEST_CASE("strict comparison leaves everyone out on an all-tied round") {
  BidSim sim = make_sim_with_bids(std::vector<double>(100, 7.5));
  const RoundRecord rec = run_auction_round(sim);
  CHECK(rec.median_bid == 7.5);
  CHECK(rec.num_winners == 0);
  CHECK_FALSE(rec.tie_free);
}

TEST_CASE("distinct even-count bids put exactly half below the median") {
  std::vector<double> bids;
  for (int i = 0; i < 100; ++i) bids.push_back(5.0 + i * 0.05);
  BidSim sim = make_sim_with_bids(bids);
  const RoundRecord rec = run_auction_round(sim);
  CHECK(rec.num_winners == 50);
  CHECK(rec.tie_free);
}

TEST_CASE("three bids: only the lowest wins") {
  BidSim sim = make_sim_with_bids({5.0, 6.0, 9.9});
  const RoundRecord rec = run_auction_round(sim);
  CHECK(rec.median_bid == 6.0);
  CHECK(rec.num_winners == 1);
  CHECK(rec.winner_ids == std::vector<int>{0});
  CHECK(rec.impressions_awarded[0] == 1);
  CHECK(rec.impressions_awarded[1] == 0);
}

TEST_CASE("default simulation satisfies the round invariants") {
  SimParams p;
  p.seed = 7;
  const SimOutput out = run_simulation(p);
  REQUIRE(out.rounds.size() == 50);
  REQUIRE(out.bids.size() == 100);

  for (const RoundRecord& rec : out.rounds) {
    CHECK(rec.num_winners <= 50);
    std::vector<bool> is_winner(100, false);
    for (int id : rec.winner_ids) is_winner[static_cast<std::size_t>(id)] = true;
    for (int i = 0; i < 100; ++i) {
      const double bid = out.bids[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(rec.round)];
      CHECK(bid >= 5.0);
      CHECK(bid <= 10.0);
      if (is_winner[static_cast<std::size_t>(i)])
        CHECK(bid < rec.median_bid);
      else
        CHECK(bid >= rec.median_bid);
    }
    // avg_bid recomputed from the submitted-bid matrix
    double sum = 0.0;
    for (int i = 0; i < 100; ++i)
      sum += out.bids[static_cast<std::size_t>(i)][static_cast<std::size_t>(rec.round)];
    CHECK(rec.avg_bid == doctest::Approx(sum / 100.0).epsilon(1e-12));
  }

  for (const auto& agent : out.agents) {
    CHECK(agent.memory.size() == 50);
    long long wins = 0;
    for (auto f : agent.memory) wins += f;
    CHECK(agent.success_count == wins);
  }
}

TEST_CASE("an agent with a recent win holds its bid") {
  SimParams p;
  p.seed = 19;
  const SimOutput out = run_simulation(p);
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    const auto& memory = out.agents[i].memory;
    for (std::size_t t = 4; t + 1 < 50; ++t) {
      long long wins = 0;
      for (std::size_t k = t - 4; k <= t; ++k) wins += memory[k];
      if (wins > 0) CHECK(out.bids[i][t + 1] == out.bids[i][t]);
    }
  }
}

TEST_CASE("no adjustments happen before the memory window fills") {
  SimParams p;
  p.seed = 23;
  const SimOutput out = run_simulation(p);
  for (std::size_t i = 0; i < out.agents.size(); ++i)
    for (std::size_t t = 0; t + 1 < 5; ++t)
      CHECK(out.bids[i][t + 1] == out.bids[i][t]);
}

TEST_CASE("majority agents track the running mean within the noise band") {
  SimParams p;
  p.seed = 29;
  p.minority_fraction = 0.5;
  const SimOutput out = run_simulation(p);
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    if (out.agents[i].kind != AgentKind::majority_tracking) continue;
    for (std::size_t t = 0; t + 1 < out.rounds.size(); ++t) {
      const double mean = out.rounds[t].avg_bid;
      const double lo = std::clamp(mean - 0.5, 5.0, 10.0);
      const double hi = std::clamp(mean + 0.5, 5.0, 10.0);
      CHECK(out.bids[i][t + 1] >= lo - 1e-12);
      CHECK(out.bids[i][t + 1] <= hi + 1e-12);
    }
  }
}

TEST_CASE("zero rounds yields an empty record sequence") {
  SimParams p;
  p.num_rounds = 0;
  const SimOutput out = run_simulation(p);
  CHECK(out.rounds.empty());
  CHECK(out.agents.size() == 100);
}

TEST_CASE("equal seeds reproduce the run exactly") {
  SimParams p;
  p.seed = 31;
  p.minority_fraction = 0.7;
  const SimOutput a = run_simulation(p);
  const SimOutput b = run_simulation(p);
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (std::size_t t = 0; t < a.rounds.size(); ++t) {
    CHECK(a.rounds[t].median_bid == b.rounds[t].median_bid);
    CHECK(a.rounds[t].avg_bid == b.rounds[t].avg_bid);
    CHECK(a.rounds[t].winner_ids == b.rounds[t].winner_ids);
  }
  CHECK(a.bids == b.bids);
}

TEST_CASE("impression model reroutes the efficiency numerator") {
  SimParams p;
  p.seed = 37;
  p.num_rounds = 10;
  const SimOutput out =
      run_simulation(p, [](double bid) { return std::llround(100.0 - bid); });
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    for (std::size_t t = 0; t < 10; ++t) {
      const double bid = out.bids[i][t];
      const long long imps = out.rounds[t].impressions_awarded[i];
      if (imps > 0) CHECK(imps == std::llround(100.0 - bid));
      CHECK(out.efficiency[i][t] ==
            static_cast<double>(imps) / bid);
    }
  }
}

TEST_CASE("cesaro averages") {
  CHECK(cesaro_average({0.2, 0.2, 0.2}, 3) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(cesaro_average({0.0, 0.4}, 2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(cesaro_average({0.1}, 0), ContractError);
  CHECK_THROWS_AS(cesaro_average({0.1}, 2), ContractError);

  SimParams p;
  p.seed = 41;
  const SimOutput out = run_simulation(p);
  const std::vector<double> avgs = cesaro_averages(out.efficiency, 50);
  REQUIRE(avgs.size() == 100);
  for (std::size_t i = 0; i < avgs.size(); ++i) {
    // compensated-summation oracle
    double sum = 0.0, comp = 0.0;
    for (double e : out.efficiency[i]) {
      const double y = e - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    CHECK(avgs[i] == doctest::Approx(sum / 50.0).epsilon(1e-12));
  }
}

TEST_CASE("average bid declines from the early to the late window") {
  // Ensemble pre-check of the acceptance sweep, at reduced seed count.
  double early_sum = 0.0, late_sum = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    SimParams p;
    p.seed = 1000 + static_cast<std::uint64_t>(s);
    const SimOutput out = run_simulation(p);
    for (int t = 0; t < 5; ++t) early_sum += out.rounds[static_cast<std::size_t>(t)].avg_bid;
    for (int t = 45; t < 50; ++t) late_sum += out.rounds[static_cast<std::size_t>(t)].avg_bid;
  }
  CHECK(late_sum / (5 * seeds) < early_sum / (5 * seeds));
}

TEST_CASE("winner counts stay stable after the burn-in window") {
  int stable = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    SimParams p;
    p.seed = 2000 + static_cast<std::uint64_t>(s);
    const SimOutput out = run_simulation(p);
    std::vector<double> counts;
    for (std::size_t t = 10; t < 50; ++t)
      counts.push_back(static_cast<double>(out.rounds[t].num_winners));
    const double mean =
        std::accumulate(counts.begin(), counts.end(), 0.0) / counts.size();
    double ss = 0.0;
    for (double c : counts) ss += (c - mean) * (c - mean);
    const double sd = std::sqrt(ss / counts.size());
    if (sd <= 2.0) ++stable;
  }
  CHECK(stable >= 19);
}

TEST_CASE("csv and json reports") {
  SimParams p;
  p.seed = 43;
  p.num_rounds = 3;
  const SimOutput out = run_simulation(p);

  std::ostringstream rounds_csv;
  write_rounds_csv(out, rounds_csv);
  const std::string text = rounds_csv.str();
  CHECK(text.rfind("round,median_bid,avg_bid,num_winners\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  std::ostringstream agents_csv;
  write_agents_csv(out, agents_csv);
  CHECK(agents_csv.str().rfind("agent_id,kind,final_bid,success_count\n", 0) == 0);
  CHECK(agents_csv.str().find("minority_adaptive") != std::string::npos);

  std::ostringstream manifest;
  write_sim_manifest_json(out, manifest);
  const nlohmann::json j = nlohmann::json::parse(manifest.str());
  CHECK(j["params"]["num_agents"] == 100);
  CHECK(j["params"]["seed"] == 43);
  CHECK(j["rounds_recorded"] == 3);
  CHECK(j.contains("zero_winner_rounds"));
  CHECK(j.contains("tie_rounds"));
}
