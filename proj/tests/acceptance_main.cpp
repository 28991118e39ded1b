// Acceptance gate: one self-contained check per shipping criterion, each
// printed as a [PASS]/[FAIL] line with its runtime against a fixed budget.
// Exits nonzero when any line fails. Checks 1-11 drive the library directly;
// check 12 shells out to the command-line tool given as argv[1].

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <utility>
#include <vector>

#include "mgbid/analytics.hpp"
#include "mgbid/bid_market.hpp"
#include "mgbid/landscape.hpp"
#include "mgbid/mg_engine.hpp"
#include "mgbid/rng.hpp"
#include "mgbid/stats.hpp"
#include "mgbid/theory.hpp"

namespace fs = std::filesystem;

namespace {

struct CheckResult {
  bool ok = false;
  std::string detail;
};

class Gate {
 public:
  // budget_s <= 0 disables the runtime bound.
  void run(int number, const std::string& name, double budget_s,
           const std::function<CheckResult()>& body) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult result;
    try {
      result = body();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (budget_s > 0.0 && elapsed > budget_s) {
      result.ok = false;
      result.detail += result.detail.empty() ? "" : "; ";
      result.detail += "over runtime budget";
    }
    all_ok_ = all_ok_ && result.ok;
    std::string budget = budget_s > 0.0
                             ? ", budget " + format(budget_s, 0) + "s"
                             : "";
    std::printf("[%s] %02d %s: %s (%.2fs%s)\n", result.ok ? "PASS" : "FAIL",
                number, name.c_str(), result.detail.c_str(), elapsed,
                budget.c_str());
    std::fflush(stdout);
  }

  bool all_ok() const { return all_ok_; }

  static std::string format(double x, int places) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", places, x);
    return buf;
  }

 private:
  bool all_ok_ = true;
};

std::string fmt(double x, int places = 4) { return Gate::format(x, places); }

// --------------------------------------------------------------------------
// 1. Strictly-below-median winners: tie-free rounds seat exactly floor(N/2)
// winners for even N and (N-1)/2 for odd N.

CheckResult check_winner_count() {
  // Adjusted bids accumulate at the clamp boundaries, so later rounds are
  // rarely tie-free; the law is asserted over every tie-free round and each
  // configuration must contribute a non-vacuous sample.
  int violations = 0;
  int tie_free = 0;
  bool sampled = true;
  for (auto [agents, expected, seed] :
       {std::tuple<int, int, std::uint64_t>{100, 50, 101},
        std::tuple<int, int, std::uint64_t>{101, 50, 202},
        std::tuple<int, int, std::uint64_t>{25, 12, 303}}) {
    mgbid::SimParams params;
    params.num_agents = agents;
    params.num_rounds = 1000;
    params.seed = seed;
    const mgbid::SimOutput sim = mgbid::run_simulation(params);
    int config_tie_free = 0;
    for (const auto& round : sim.rounds) {
      if (!round.tie_free) continue;
      ++config_tie_free;
      if (round.num_winners != expected) ++violations;
    }
    tie_free += config_tie_free;
    sampled = sampled && config_tie_free >= 5;
  }
  CheckResult r;
  r.ok = violations == 0 && sampled;
  r.detail = std::to_string(tie_free - violations) + "/" +
             std::to_string(tie_free) + " tie-free rounds seat the lawful count";
  return r;
}

// --------------------------------------------------------------------------
// 2. The ensemble-mean average bid over the last five rounds sits strictly
// below the first five; the paired effect size is reported.

CheckResult check_declining_bid() {
  const int seeds = 120;
  mgbid::stats::MomentAccumulator early_m, late_m, diff_m;
  for (int s = 0; s < seeds; ++s) {
    mgbid::SimParams params;
    params.seed = 1000 + static_cast<std::uint64_t>(s);
    const mgbid::SimOutput sim = mgbid::run_simulation(params);
    double early = 0.0, late = 0.0;
    for (int t = 0; t < 5; ++t) early += sim.rounds[static_cast<std::size_t>(t)].avg_bid;
    for (int t = 45; t < 50; ++t) late += sim.rounds[static_cast<std::size_t>(t)].avg_bid;
    early /= 5.0;
    late /= 5.0;
    early_m.push(early);
    late_m.push(late);
    diff_m.push(early - late);
  }
  const double effect =
      diff_m.mean() / std::sqrt(diff_m.variance_sample());
  CheckResult r;
  r.ok = late_m.mean() < early_m.mean();
  r.detail = std::to_string(seeds) + " seeds: rounds 46-50 mean " +
             fmt(late_m.mean()) + " < rounds 1-5 mean " + fmt(early_m.mean()) +
             ", paired effect size d=" + fmt(effect, 2);
  return r;
}

// --------------------------------------------------------------------------
// 3. Winner counts stay flat: per-seed standard deviation of num_winners over
// rounds 10-50 is at most 2.0 for at least 95% of seeds.

CheckResult check_stable_winner_count() {
  const int seeds = 100;
  int stable = 0;
  double worst = 0.0;
  for (int s = 0; s < seeds; ++s) {
    mgbid::SimParams params;
    params.seed = 5000 + static_cast<std::uint64_t>(s);
    const mgbid::SimOutput sim = mgbid::run_simulation(params);
    mgbid::stats::MomentAccumulator m;
    for (std::size_t t = 9; t < 50; ++t)
      m.push(static_cast<double>(sim.rounds[t].num_winners));
    const double sd = std::sqrt(m.variance_sample());
    worst = std::max(worst, sd);
    if (sd <= 2.0) ++stable;
  }
  CheckResult r;
  r.ok = stable >= 95;
  r.detail = std::to_string(stable) + "/" + std::to_string(seeds) +
             " seeds with winner-count SD <= 2.0 over rounds 10-50 (worst " +
             fmt(worst, 3) + ")";
  return r;
}

// --------------------------------------------------------------------------
// 4. Grid moment signatures on the exhaustive bid column.

CheckResult check_grid_moments() {
  mgbid::GenConfig config;
  config.model = mgbid::SynthModel::grid;
  config.num_ads = 100;
  const mgbid::SynthResult synth = mgbid::synth_generate(config);
  const auto rows = mgbid::summarize(synth.dataset);
  const mgbid::SummaryRow* bid = nullptr;
  for (const auto& row : rows)
    if (row.variable == "bid") bid = &row;
  CheckResult r;
  if (bid == nullptr || bid->n != 49900) {
    r.detail = "bid column missing or wrong length";
    return r;
  }
  const bool mean_ok = std::abs(bid->mean - 25.0) <= 1e-6;
  const bool skew_ok = std::abs(bid->skew) <= 1e-9;
  const bool kurt_ok = std::abs(bid->kurtosis + 1.20) <= 0.01;
  const bool edge_ok =
      bid->min == 0.1 && bid->max == 49.9 && bid->range == 49.8;
  r.ok = mean_ok && skew_ok && kurt_ok && edge_ok;
  r.detail = "n=49900 mean " + fmt(bid->mean, 6) + " skew " +
             fmt(bid->skew, 12) + " excess kurt " + fmt(bid->kurtosis, 6) +
             " extremes " + (edge_ok ? "exact" : "WRONG");
  return r;
}

// --------------------------------------------------------------------------
// 5. Two-regime recovery: k=2 clustering matches the generator labels and the
// minority callout lands on the high-impression regime.

CheckResult check_cluster_recovery() {
  mgbid::GenConfig config;
  config.model = mgbid::SynthModel::two_regime;
  config.rows = 100000;
  config.seed = 42;
  const mgbid::SynthResult synth = mgbid::synth_generate(config);
  const mgbid::ClusterResult clusters =
      mgbid::cluster_dataset(synth.dataset, 2, 7);
  const double ari =
      mgbid::adjusted_rand_index(clusters.assignments, synth.labels);
  const mgbid::MinorityCallout callout =
      mgbid::identify_minority_cluster(clusters);
  CheckResult r;
  if (!callout.cluster.has_value()) {
    r.detail = "minority callout unresolved";
    return r;
  }
  // The high-impression generator component is regime 0; the called-out
  // cluster must be populated predominantly by its rows.
  std::size_t in_cluster = 0, regime0 = 0;
  for (std::size_t i = 0; i < synth.labels.size(); ++i) {
    if (clusters.assignments[i] != *callout.cluster) continue;
    ++in_cluster;
    if (synth.labels[i] == 0) ++regime0;
  }
  const double purity =
      in_cluster ? static_cast<double>(regime0) / static_cast<double>(in_cluster)
                 : 0.0;
  r.ok = ari >= 0.95 && purity > 0.5;
  r.detail = "ARI " + fmt(ari, 4) + ", high-impression purity of callout " +
             fmt(purity, 4);
  return r;
}

// --------------------------------------------------------------------------
// 6. Variance schedule recovery: per-bin bid variance lands within 5% of the
// decreasing 220 -> 80 schedule.

CheckResult check_variance_schedule() {
  mgbid::GenConfig config;
  config.model = mgbid::SynthModel::heteroscedastic;
  config.rows = 100000;
  config.seed = 24;
  const mgbid::SynthResult synth = mgbid::synth_generate(config);
  const mgbid::VarianceScalingReport report =
      mgbid::variance_scaling(synth.dataset, 6, mgbid::BinningMode::quantile);
  CheckResult r;
  if (report.effective_bins != 6) {
    r.detail = "expected 6 effective bins, got " +
               std::to_string(report.effective_bins);
    return r;
  }
  bool within = true, decreasing = true;
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double target = config.bin_bid_variance[i];
    const double got = report.bins[i].bid_variance;
    const double rel = std::abs(got - target) / target;
    worst_rel = std::max(worst_rel, rel);
    if (rel > 0.05) within = false;
    if (i > 0 && !(got < report.bins[i - 1].bid_variance)) decreasing = false;
  }
  r.ok = within && decreasing;
  r.detail = std::string("per-bin variance within 5% of 220->80 schedule ") +
             (within ? "yes" : "NO") + ", strictly decreasing " +
             (decreasing ? "yes" : "NO") + " (worst rel err " +
             fmt(worst_rel, 4) + ")";
  return r;
}

// --------------------------------------------------------------------------
// 7. Minority-bin fuzz against a brute-force occupancy oracle.

std::vector<int> brute_force_minority(const mgbid::BinAssignment& assignment) {
  std::map<int, long long> occupancy;
  for (int bin : assignment.bin_of) ++occupancy[bin];
  long long least = -1;
  for (const auto& [bin, count] : occupancy)
    if (least < 0 || count < least) least = count;
  std::vector<int> bins;
  for (const auto& [bin, count] : occupancy)
    if (count == least) bins.push_back(bin);  // map iterates ascending
  return bins;
}

CheckResult check_minority_bin_fuzz() {
  mgbid::Rng rng(977);
  const int trials = 10000;
  int agreed = 0;
  for (int t = 0; t < trials; ++t) {
    mgbid::BinAssignment assignment;
    const std::size_t agents = 1 + mgbid::index_draw(rng, 1000);
    assignment.num_bins = 1 + static_cast<int>(mgbid::index_draw(rng, 100));
    assignment.bin_of.resize(agents);
    for (auto& bin : assignment.bin_of)
      bin = static_cast<int>(
          mgbid::index_draw(rng, static_cast<std::size_t>(assignment.num_bins)));
    const std::vector<int> got = mgbid::minority_bins(assignment);
    if (!got.empty() && got == brute_force_minority(assignment)) ++agreed;
  }
  CheckResult r;
  r.ok = agreed == trials;
  r.detail = std::to_string(agreed) + "/" + std::to_string(trials) +
             " random assignments match the brute-force oracle";
  return r;
}

// --------------------------------------------------------------------------
// 8. Cesaro gap identity: with a sustained constant tail the running mean
// decomposes exactly into head-sum and tail terms.

CheckResult check_gap_identity_algebra() {
  const std::size_t tau = 10000;
  const std::size_t onset = 100;  // 1-based
  const double eps = 0.05;
  mgbid::Rng rng(31);
  std::vector<double> series(tau);
  for (std::size_t t = 0; t < onset - 1; ++t)
    series[t] = mgbid::uniform_draw(rng, -0.1, 0.1);
  series[onset - 2] = -0.05;  // pins onset detection to the injected round
  for (std::size_t t = onset - 1; t < tau; ++t) series[t] = eps;

  long double head = 0.0L;
  for (std::size_t t = 0; t < onset - 1; ++t) head += series[t];
  const double expected =
      static_cast<double>(head) / static_cast<double>(tau) +
      (static_cast<double>(tau - onset + 1) / static_cast<double>(tau)) * eps;

  const mgbid::GapDecomposition d = mgbid::decompose_gap(series, tau);
  CheckResult r;
  const double residual = std::abs(d.cesaro_gap - expected);
  const double internal = std::abs(d.cesaro_gap - d.reconstructed);
  r.ok = d.onset_found && d.onset == onset && residual <= 1e-9 &&
         internal <= 1e-9;
  r.detail = "onset " + std::to_string(d.onset) + ", identity residual " +
             fmt(residual, 12) + ", reconstruction residual " +
             fmt(internal, 12);
  return r;
}

// --------------------------------------------------------------------------
// 9. Share dynamics on the linear gap 0.5 - a: bisection lands on 0.5 and
// trajectories from both sides converge monotonically.

CheckResult check_share_dynamics_fixed_point() {
  const mgbid::GapFunction gap = [](double a) { return 0.5 - a; };
  const mgbid::BisectionResult root = mgbid::bisect_gap(gap);
  bool ok = root.bracketed && std::abs(root.root - 0.5) <= 1e-6;
  double final_low = 0.0, final_high = 0.0;
  for (double a0 : {0.1, 0.9}) {
    const mgbid::ShareDynamicsResult traj =
        mgbid::share_dynamics(gap, a0, 0.1, 200, 1e-3);
    const double last = traj.trajectory.back();
    if (a0 < 0.5)
      final_low = last;
    else
      final_high = last;
    ok = ok && traj.converged && traj.monotone &&
         std::abs(last - 0.5) <= 1e-3;
  }
  CheckResult r;
  r.ok = ok;
  r.detail = "bisection root " + fmt(root.root, 8) + ", trajectories reach " +
             fmt(final_low, 5) + " / " + fmt(final_high, 5) +
             " monotonically within 200 steps";
  return r;
}

// --------------------------------------------------------------------------
// 10. Shading ledger: with the bid clamp far below the valuation, every agent
// in every seed shades; the pooled margins are exported.

CheckResult check_shading_ledger(const fs::path& scratch) {
  mgbid::SimParams base;
  base.seed = 1;
  const double valuation = 12.0;
  const mgbid::ShadingEnsemble ens =
      mgbid::shading_ensemble(base, valuation, 50);
  std::ofstream out(scratch / "margins.csv");
  mgbid::write_margins_csv(ens, base.seed, out);
  out.close();
  CheckResult r;
  r.ok = ens.violations == 0 && ens.shaded_fraction == 1.0 &&
         ens.margins.size() == 5000 && ens.min_margin > 0.0;
  r.detail = "50 seeds x 100 agents all shade below " + fmt(valuation, 0) +
             " (min margin " + fmt(ens.min_margin) + "), distribution at " +
             (scratch / "margins.csv").string();
  return r;
}

// --------------------------------------------------------------------------
// 11. Engine oracle equivalence: a from-scratch transcription of the game
// rules replays the raw generator word-for-word and must agree element-wise.

struct MgOracle {
  std::vector<double> attendance;
  std::vector<int> minority_signs;
  std::vector<std::uint32_t> history_indices;
  std::vector<std::vector<double>> final_valuations;
};

MgOracle mg_oracle_3_1_2(std::uint64_t seed, int rounds) {
  std::mt19937_64 g(seed);
  const auto sign = [&g] { return (g() & 1ull) ? +1 : -1; };
  const auto pick2 = [&g] { return static_cast<int>(g() % 2); };

  int table[3][2][2];
  for (int i = 0; i < 3; ++i)
    for (int s = 0; s < 2; ++s)
      for (int e = 0; e < 2; ++e) table[i][s][e] = sign();
  int history = sign();
  double val[3][2] = {{0, 0}, {0, 0}, {0, 0}};
  int active[3];
  for (int& a : active) a = pick2();  // fresh scores always tie

  MgOracle out;
  for (int t = 0; t < rounds; ++t) {
    const int idx = history == 1 ? 1 : 0;
    out.history_indices.push_back(static_cast<std::uint32_t>(idx));
    int sum = 0;
    for (int i = 0; i < 3; ++i) sum += table[i][active[i]][idx];
    const double attendance = static_cast<double>(sum) / std::sqrt(3.0);
    out.attendance.push_back(attendance);
    const int majority = sum > 0 ? 1 : -1;  // odd player count: never zero
    out.minority_signs.push_back(-majority);
    for (int i = 0; i < 3; ++i)
      for (int s = 0; s < 2; ++s) val[i][s] -= attendance * table[i][s][idx];
    history = majority;
    for (int i = 0; i < 3; ++i) {
      if (val[i][0] == val[i][1])
        active[i] = pick2();
      else
        active[i] = val[i][0] > val[i][1] ? 0 : 1;
    }
  }
  for (int i = 0; i < 3; ++i)
    out.final_valuations.push_back({val[i][0], val[i][1]});
  return out;
}

CheckResult check_engine_oracle() {
  mgbid::MgConfig config;
  config.num_agents = 3;
  config.memory = 1;
  config.strategies_per_agent = 2;
  config.rounds = 10;
  config.seed = 7;
  const mgbid::MgTimeSeries got = mgbid::run(config);
  const MgOracle want = mg_oracle_3_1_2(config.seed, config.rounds);
  int mismatches = 0;
  for (int t = 0; t < 10; ++t) {
    const auto u = static_cast<std::size_t>(t);
    if (got.attendance[u] != want.attendance[u]) ++mismatches;
    if (got.minority_signs[u] != want.minority_signs[u]) ++mismatches;
    if (got.history_indices[u] != want.history_indices[u]) ++mismatches;
  }
  if (got.final_valuations != want.final_valuations) ++mismatches;
  CheckResult r;
  r.ok = mismatches == 0;
  r.detail = mismatches == 0
                 ? "10-round trajectory and final scores identical to the "
                   "independent transcription"
                 : std::to_string(mismatches) + " element mismatches";
  return r;
}

// --------------------------------------------------------------------------
// 12. Seeded rerun determinism through the CLI: every randomized subcommand,
// run twice with one seed, yields byte-identical primary outputs. Manifests
// are excluded: they carry wall-clock durations by design.

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Relative path -> contents for every file except manifests.
std::map<std::string, std::string> primary_outputs(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "manifest.json") continue;
    files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

CheckResult check_rerun_determinism(const std::string& cli,
                                    const fs::path& scratch) {
  CheckResult r;
  if (cli.empty()) {
    r.detail = "no CLI binary path supplied";
    return r;
  }
  const fs::path dataset_dir = scratch / "det-dataset";
  fs::create_directories(dataset_dir);
  if (run_cli(cli, "generate --model two-regime --rows 3000 --seed 17 --out " +
                       dataset_dir.string()) != 0) {
    r.detail = "dataset generation for the analyze rerun failed";
    return r;
  }
  const std::string dataset = (dataset_dir / "dataset.csv").string();

  const std::vector<std::pair<std::string, std::string>> runs = {
      {"simulate-mg", "simulate-mg --agents 51 --rounds 300 --seed 5"},
      {"simulate-bidding", "simulate-bidding --seed 6"},
      {"bidding-ensemble",
       "simulate-bidding --minority-fraction 0.5 --seeds 3 --threads 2 --seed 7"},
      {"generate-two-regime", "generate --model two-regime --rows 3000 --seed 8"},
      {"generate-heteroscedastic",
       "generate --model heteroscedastic --rows 3000 --seed 9"},
      {"generate-supply-curve",
       "generate --model supply-curve --rows 3000 --seed 10"},
      {"analyze-cluster",
       "analyze cluster --input " + dataset + " --k 2 --seed 11"},
      {"verify-all", "verify all --fuzz 2000 --seeds 5 --seed 12"},
  };

  std::vector<std::string> unstable;
  for (const auto& [name, args] : runs) {
    const fs::path a = scratch / ("det-" + name + "-a");
    const fs::path b = scratch / ("det-" + name + "-b");
    fs::create_directories(a);
    fs::create_directories(b);
    if (run_cli(cli, args + " --out " + a.string()) != 0 ||
        run_cli(cli, args + " --out " + b.string()) != 0) {
      unstable.push_back(name + " (nonzero exit)");
      continue;
    }
    const auto lhs = primary_outputs(a);
    const auto rhs = primary_outputs(b);
    if (lhs.empty() || lhs != rhs) unstable.push_back(name);
  }
  r.ok = unstable.empty();
  if (r.ok) {
    r.detail = std::to_string(runs.size()) +
               " randomized subcommands byte-identical across seeded reruns";
  } else {
    r.detail = "unstable: ";
    for (std::size_t i = 0; i < unstable.size(); ++i)
      r.detail += (i ? ", " : "") + unstable[i];
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path scratch = argc > 2
                               ? fs::path(argv[2])
                               : fs::temp_directory_path() / "mgbid-acceptance";
  std::error_code ec;
  fs::remove_all(scratch, ec);
  fs::create_directories(scratch);

  Gate gate;
  gate.run(1, "winner count law", 5, check_winner_count);
  gate.run(2, "declining average bid", 10, check_declining_bid);
  gate.run(3, "stable winner count", 10, check_stable_winner_count);
  gate.run(4, "grid moment signatures", 1, check_grid_moments);
  gate.run(5, "two-regime cluster recovery", 30, check_cluster_recovery);
  gate.run(6, "variance schedule recovery", 10, check_variance_schedule);
  gate.run(7, "minority bin fuzz", 10, check_minority_bin_fuzz);
  gate.run(8, "cesaro gap identity", 1, check_gap_identity_algebra);
  gate.run(9, "share dynamics fixed point", 1, check_share_dynamics_fixed_point);
  gate.run(10, "shading ledger", 10,
           [&scratch] { return check_shading_ledger(scratch); });
  gate.run(11, "engine oracle equivalence", 1, check_engine_oracle);
  gate.run(12, "seeded rerun determinism", 0,
           [&cli, &scratch] { return check_rerun_determinism(cli, scratch); });

  std::printf("%s\n", gate.all_ok() ? "acceptance: all criteria satisfied"
                                    : "acceptance: FAILURES PRESENT");
  return gate.all_ok() ? 0 : 1;
}
