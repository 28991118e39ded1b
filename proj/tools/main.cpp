#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgbid/analytics.hpp"
#include "mgbid/bid_market.hpp"
#include "mgbid/csv.hpp"
#include "mgbid/errors.hpp"
#include "mgbid/landscape.hpp"
#include "mgbid/mg_engine.hpp"
#include "mgbid/svg.hpp"
#include "mgbid/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mgbid;

namespace {

constexpr const char* kVersion = "0.1.0";

// Set by subcommand callbacks; 1 marks a data or verdict failure.
int g_status = 0;

class Timer {
 public:
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// --out flag wins; MGBID_OUT_DIR is the only environment override; the
// current directory is the fallback. The directory is created on demand.
fs::path resolve_out_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("MGBID_OUT_DIR");
    dir = (env != nullptr && *env != '\0') ? env : ".";
  }
  fs::path path(dir);
  fs::create_directories(path);
  return path;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Draws a seed when the flag was absent and prints it so the run can be
// reproduced afterwards.
std::uint64_t ensure_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
  if (seed_opt->count() > 0) return flag_value;
  std::uint64_t seed = fresh_seed();
  std::cout << "seed: " << seed << '\n';
  return seed;
}

std::ofstream open_artifact(const fs::path& dir, const std::string& name,
                            std::vector<std::string>& artifacts) {
  fs::path path = dir / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  artifacts.push_back(name);
  return out;
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    ordered_json parameters,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& artifacts,
                    long long duration_ms) {
  ordered_json m;
  m["tool"] = "mgbid";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["parameters"] = std::move(parameters);
  m["seeds"] = seeds;
  m["inputs"] = inputs;
  m["artifacts"] = artifacts;
  m["duration_ms"] = duration_ms;
  std::ofstream out(dir / "manifest.json");
  if (!out)
    throw ConfigError("cannot open output file " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

// Bounded worker pool over [0, jobs); the first exception wins and is
// rethrown after all workers join.
void parallel_for(std::size_t jobs, int max_threads,
                  const std::function<void(std::size_t)>& work) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = max_threads > 0
                            ? static_cast<std::size_t>(max_threads)
                            : std::min<std::size_t>(hw == 0 ? 4 : hw, 8);
  workers = std::clamp<std::size_t>(workers, 1, jobs == 0 ? 1 : jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) work(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < jobs; j = next++) {
        try {
          work(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// simulate-mg

void setup_simulate_mg(CLI::App& app) {
  struct Opts {
    MgConfig cfg;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "simulate-mg", "Run the adaptive minority game and export its series");
  cmd->add_option("--agents", opts->cfg.num_agents, "Number of players")
      ->capture_default_str();
  cmd->add_option("--memory", opts->cfg.memory, "Public history length in bits")
      ->capture_default_str();
  cmd->add_option("--strategies", opts->cfg.strategies_per_agent,
                  "Strategy tables per player")
      ->capture_default_str();
  cmd->add_option("--rounds", opts->cfg.rounds, "Iterations to simulate")
      ->capture_default_str();
  auto* seed_opt =
      cmd->add_option("--seed", opts->cfg.seed, "Generator seed (printed if drawn)");
  cmd->add_option("--out", opts->out,
                  "Output directory (default: MGBID_OUT_DIR or .)");

  cmd->callback([opts, seed_opt] {
    Timer timer;
    opts->cfg.seed = ensure_seed(seed_opt, opts->cfg.seed);
    for (const std::string& warning : validate(opts->cfg))
      std::cerr << "warning: " << warning << '\n';
    MgTimeSeries series = run(opts->cfg);
    fs::path dir = resolve_out_dir(opts->out);
    std::vector<std::string> artifacts;
    {
      auto out = open_artifact(dir, "attendance.csv", artifacts);
      write_attendance_csv(series, out);
    }
    {
      auto out = open_artifact(dir, "mg_metadata.json", artifacts);
      write_metadata_json(series, out);
    }
    ordered_json params;
    params["agents"] = opts->cfg.num_agents;
    params["memory"] = opts->cfg.memory;
    params["strategies"] = opts->cfg.strategies_per_agent;
    params["rounds"] = opts->cfg.rounds;
    write_manifest(dir, "simulate-mg", std::move(params), {opts->cfg.seed}, {},
                   artifacts, timer.ms());
  });
}

// ---------------------------------------------------------------------------
// simulate-bidding

ordered_json bidding_params_json(const SimParams& p) {
  ordered_json j;
  j["agents"] = p.num_agents;
  j["rounds"] = p.num_rounds;
  j["history"] = p.history_length;
  j["bid_min"] = p.bid_min;
  j["bid_max"] = p.bid_max;
  j["adjust_min"] = p.adjust_min;
  j["adjust_max"] = p.adjust_max;
  j["minority_fraction"] = p.minority_fraction;
  return j;
}

std::vector<std::string> write_bidding_run(const fs::path& dir,
                                           const SimOutput& output) {
  std::vector<std::string> artifacts;
  {
    auto out = open_artifact(dir, "rounds.csv", artifacts);
    write_rounds_csv(output, out);
  }
  {
    auto out = open_artifact(dir, "agents.csv", artifacts);
    write_agents_csv(output, out);
  }
  {
    auto out = open_artifact(dir, "sim.json", artifacts);
    write_sim_manifest_json(output, out);
  }
  return artifacts;
}

void setup_simulate_bidding(CLI::App& app) {
  struct Opts {
    SimParams params;
    int seeds = 1;
    int threads = 0;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "simulate-bidding",
      "Run the repeated below-median auction over adaptive bidders");
  cmd->add_option("--agents", opts->params.num_agents, "Number of bidders")
      ->capture_default_str();
  cmd->add_option("--rounds", opts->params.num_rounds, "Auction rounds")
      ->capture_default_str();
  cmd->add_option("--history", opts->params.history_length,
                  "Loss-memory window for adaptive bidders")
      ->capture_default_str();
  cmd->add_option("--bid-min", opts->params.bid_min, "Lower bid clamp")
      ->capture_default_str();
  cmd->add_option("--bid-max", opts->params.bid_max, "Upper bid clamp")
      ->capture_default_str();
  cmd->add_option("--adjust-min", opts->params.adjust_min,
                  "Lower bound of the loss adjustment draw")
      ->capture_default_str();
  cmd->add_option("--adjust-max", opts->params.adjust_max,
                  "Upper bound of the loss adjustment draw")
      ->capture_default_str();
  cmd->add_option("--minority-fraction", opts->params.minority_fraction,
                  "Share of bidders that adapt on losses; the rest track the mean")
      ->capture_default_str();
  auto* seed_opt = cmd->add_option("--seed", opts->params.seed,
                                   "Base seed (printed if drawn)");
  cmd->add_option("--seeds", opts->seeds,
                  "Ensemble size; runs seeds base, base+1, ... in seed-<s>/ dirs")
      ->capture_default_str();
  cmd->add_option("--threads", opts->threads,
                  "Worker cap for ensembles (default: hardware, at most 8)");
  cmd->add_option("--out", opts->out,
                  "Output directory (default: MGBID_OUT_DIR or .)");

  cmd->callback([opts, seed_opt] {
    Timer timer;
    opts->params.seed = ensure_seed(seed_opt, opts->params.seed);
    validate(opts->params);
    if (opts->seeds < 1)
      throw ConfigError("seeds must be at least 1");
    fs::path dir = resolve_out_dir(opts->out);
    if (opts->seeds == 1) {
      SimOutput output = run_simulation(opts->params);
      std::vector<std::string> artifacts = write_bidding_run(dir, output);
      write_manifest(dir, "simulate-bidding", bidding_params_json(opts->params),
                     {opts->params.seed}, {}, artifacts, timer.ms());
      return;
    }
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < opts->seeds; ++k)
      seeds.push_back(opts->params.seed + static_cast<std::uint64_t>(k));
    parallel_for(seeds.size(), opts->threads, [&](std::size_t k) {
      Timer run_timer;
      SimParams params = opts->params;
      params.seed = seeds[k];
      fs::path run_dir = dir / ("seed-" + std::to_string(params.seed));
      fs::create_directories(run_dir);
      SimOutput output = run_simulation(params);
      std::vector<std::string> artifacts = write_bidding_run(run_dir, output);
      write_manifest(run_dir, "simulate-bidding", bidding_params_json(params),
                     {params.seed}, {}, artifacts, run_timer.ms());
    });
    std::vector<std::string> artifacts;
    for (std::uint64_t s : seeds) {
      std::string prefix = "seed-" + std::to_string(s) + "/";
      for (const char* name : {"rounds.csv", "agents.csv", "sim.json", "manifest.json"})
        artifacts.push_back(prefix + name);
    }
    ordered_json params = bidding_params_json(opts->params);
    params["ensemble_seeds"] = opts->seeds;
    write_manifest(dir, "simulate-bidding", std::move(params), seeds, {},
                   artifacts, timer.ms());
  });
}

// ---------------------------------------------------------------------------
// generate

void setup_generate(CLI::App& app) {
  struct Opts {
    GenConfig cfg;
    std::string model = "grid";
    int dates = 1;
    int variance_bins = 6;
    double variance_high = 220.0;
    double variance_low = 80.0;
    std::string labels_out;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "generate", "Write a synthetic auction-landscape dataset");
  cmd->add_option("--model", opts->model,
                  "grid | two-regime | supply-curve | heteroscedastic")
      ->capture_default_str();
  cmd->add_option("--rows", opts->cfg.rows,
                  "Rows to sample (ignored by the exhaustive grid)");
  cmd->add_option("--ads", opts->cfg.num_ads, "Distinct ad ids")
      ->capture_default_str();
  cmd->add_option("--date-start", opts->cfg.date_start,
                  "First date serial (1900 epoch)")
      ->capture_default_str();
  cmd->add_option("--dates", opts->dates, "Number of consecutive dates")
      ->capture_default_str();
  auto* vbins = cmd->add_option("--variance-bins", opts->variance_bins,
                                "Bins in the variance schedule");
  auto* vhigh = cmd->add_option("--variance-high", opts->variance_high,
                                "Bid variance target for the first bin");
  auto* vlow = cmd->add_option("--variance-low", opts->variance_low,
                               "Bid variance target for the last bin");
  auto* seed_opt =
      cmd->add_option("--seed", opts->cfg.seed, "Generator seed (printed if drawn)");
  cmd->add_option("--labels-out", opts->labels_out,
                  "Also write per-row generator labels to this file");
  cmd->add_option("--out", opts->out,
                  "Output directory (default: MGBID_OUT_DIR or .)");

  cmd->callback([opts, seed_opt, vbins, vhigh, vlow] {
    Timer timer;
    opts->cfg.model = synth_model_from_string(opts->model);
    opts->cfg.seed = ensure_seed(seed_opt, opts->cfg.seed);
    if (opts->dates < 1) throw ConfigError("dates must be at least 1");
    opts->cfg.date_end = opts->cfg.date_start + opts->dates - 1;
    if (vbins->count() > 0 || vhigh->count() > 0 || vlow->count() > 0) {
      if (opts->variance_bins < 1)
        throw ConfigError("variance-bins must be at least 1");
      std::vector<double> schedule;
      for (int b = 0; b < opts->variance_bins; ++b) {
        double frac = opts->variance_bins == 1
                          ? 0.0
                          : static_cast<double>(b) / (opts->variance_bins - 1);
        schedule.push_back(opts->variance_high +
                           frac * (opts->variance_low - opts->variance_high));
      }
      opts->cfg.bin_bid_variance = std::move(schedule);
    }
    SynthResult result = synth_generate(opts->cfg);
    fs::path dir = resolve_out_dir(opts->out);
    std::vector<std::string> artifacts;
    {
      auto out = open_artifact(dir, "dataset.csv", artifacts);
      write_landscape_csv(result.dataset, out);
    }
    if (!opts->labels_out.empty()) {
      auto out = open_artifact(dir, opts->labels_out, artifacts);
      out << "row,label\n";
      for (std::size_t i = 0; i < result.labels.size(); ++i)
        out << i << ',' << result.labels[i] << '\n';
    }
    ordered_json params;
    params["model"] = opts->model;
    params["rows_requested"] = opts->cfg.rows;
    params["rows_written"] = result.dataset.records.size();
    params["ads"] = opts->cfg.num_ads;
    params["date_start"] = opts->cfg.date_start;
    params["dates"] = opts->dates;
    params["generator"] = ordered_json::parse(result.dataset.generator_manifest);
    write_manifest(dir, "generate", std::move(params), {opts->cfg.seed}, {},
                   artifacts, timer.ms());
  });
}

// ---------------------------------------------------------------------------
// analyze

void setup_analyze(CLI::App& app) {
  struct Opts {
    std::string which;
    std::string input;
    std::string mode = "strict";
    int k = 2;
    std::uint64_t seed = 0;
    int bins = 6;
    std::string binning = "quantile";
    bool svg = false;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "analyze", "Summaries, clustering and variance reports over a dataset");
  cmd->add_option("which", opts->which, "Report to produce")
      ->required()
      ->check(CLI::IsMember({"summary", "cluster", "variance", "scatter"}));
  cmd->add_option("--input", opts->input, "Dataset CSV to analyze")->required();
  cmd->add_option("--mode", opts->mode, "Parse mode")
      ->check(CLI::IsMember({"strict", "lenient"}))
      ->capture_default_str();
  cmd->add_option("--k", opts->k, "Cluster count")->capture_default_str();
  auto* seed_opt = cmd->add_option("--seed", opts->seed,
                                   "Clustering seed (printed if drawn)");
  cmd->add_option("--bins", opts->bins, "Impression bins for the variance report")
      ->capture_default_str();
  cmd->add_option("--binning", opts->binning, "Impression binning rule")
      ->check(CLI::IsMember({"quantile", "equal-width"}))
      ->capture_default_str();
  cmd->add_flag("--svg", opts->svg, "Also render an SVG plot");
  cmd->add_option("--out", opts->out,
                  "Output directory (default: MGBID_OUT_DIR or .)");

  cmd->callback([opts, seed_opt] {
    Timer timer;
    if (opts->which == "cluster")
      opts->seed = ensure_seed(seed_opt, opts->seed);
    ParseMode mode =
        opts->mode == "strict" ? ParseMode::strict : ParseMode::lenient;
    ParseDiagnostics diag;
    LandscapeDataset dataset = load_landscape_csv(opts->input, mode, &diag);
    if (diag.rows_dropped > 0) {
      std::cerr << "dropped " << diag.rows_dropped << " of " << diag.rows_read
                << " rows\n";
      for (const std::string& message : diag.messages)
        std::cerr << "  " << message << '\n';
    }
    fs::path dir = resolve_out_dir(opts->out);
    std::vector<std::string> artifacts;
    ordered_json params;
    params["which"] = opts->which;
    params["mode"] = opts->mode;
    params["rows"] = dataset.records.size();
    std::vector<std::uint64_t> seeds;

    if (opts->which == "summary") {
      std::vector<SummaryRow> rows = summarize(dataset);
      {
        auto out = open_artifact(dir, "summary.csv", artifacts);
        write_summary_csv(rows, out);
      }
      {
        auto out = open_artifact(dir, "summary.json", artifacts);
        write_summary_json(rows, out);
      }
    } else if (opts->which == "cluster") {
      seeds.push_back(opts->seed);
      params["k"] = opts->k;
      ClusterResult result = cluster_dataset(dataset, opts->k, opts->seed);
      {
        auto out = open_artifact(dir, "clusters.csv", artifacts);
        write_cluster_csv(result, out);
      }
      ordered_json report;
      report["k"] = result.k;
      report["sizes"] = result.sizes;
      report["inertia"] = result.inertia;
      report["iterations"] = result.iterations;
      report["converged"] = result.converged;
      ordered_json centroids = ordered_json::array();
      for (const auto& c : result.centroids)
        centroids.push_back({{"bid", c[0]}, {"imps_hour", c[1]}});
      report["centroids"] = centroids;
      report["mean_imps_hour"] = result.mean_imps_hour;
      report["mean_imps_day"] = result.mean_imps_day;
      if (opts->k == 2) {
        MinorityCallout callout = identify_minority_cluster(result);
        report["minority_cluster"] =
            callout.cluster ? ordered_json(*callout.cluster) : ordered_json();
        report["minority_rationale"] = callout.rationale;
        SkewnessReport skew = cluster_skewness(dataset, result);
        report["skewness_verdict"] = skew.verdict;
      }
      {
        auto out = open_artifact(dir, "cluster.json", artifacts);
        out << report.dump(2) << '\n';
      }
      if (opts->svg) {
        std::vector<double> bids, imps;
        for (const auto& r : dataset.records) {
          bids.push_back(r.bid);
          imps.push_back(static_cast<double>(r.imps_hour));
        }
        auto out = open_artifact(dir, "cluster.svg", artifacts);
        out << svg::scatter_svg(bids, imps, result.assignments);
      }
    } else if (opts->which == "variance") {
      params["bins"] = opts->bins;
      params["binning"] = opts->binning;
      BinningMode binning = opts->binning == "quantile"
                                ? BinningMode::quantile
                                : BinningMode::equal_width;
      VarianceScalingReport report =
          variance_scaling(dataset, opts->bins, binning);
      {
        auto out = open_artifact(dir, "variance.csv", artifacts);
        write_variance_csv(report, out);
      }
      if (opts->svg) {
        std::vector<double> xs, ys;
        for (std::size_t b = 0; b < report.bins.size(); ++b) {
          xs.push_back(static_cast<double>(b));
          ys.push_back(report.bins[b].bid_variance);
        }
        auto out = open_artifact(dir, "variance.svg", artifacts);
        out << svg::line_svg(xs, ys);
      }
    } else {  // scatter: per-ad bid and hourly-impression series
      std::vector<std::size_t> order(dataset.records.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return dataset.records[a].adid <
                                dataset.records[b].adid;
                       });
      {
        auto out = open_artifact(dir, "scatter.csv", artifacts);
        out << "adid,bid,imps_hour\n";
        for (std::size_t i : order) {
          const auto& r = dataset.records[i];
          out << r.adid << ',' << csv::format_double(r.bid) << ','
              << r.imps_hour << '\n';
        }
      }
      if (opts->svg) {
        std::vector<double> bids, imps;
        std::vector<int> cls;
        for (std::size_t i : order) {
          const auto& r = dataset.records[i];
          bids.push_back(r.bid);
          imps.push_back(static_cast<double>(r.imps_hour));
          cls.push_back(static_cast<int>(r.adid % 6));
        }
        auto out = open_artifact(dir, "scatter.svg", artifacts);
        out << svg::scatter_svg(bids, imps, cls);
      }
    }
    write_manifest(dir, "analyze", std::move(params), seeds, {opts->input},
                   artifacts, timer.ms());
  });
}

// ---------------------------------------------------------------------------
// verify

void setup_verify(CLI::App& app) {
  struct Opts {
    std::string check;
    int fuzz = 10000;
    int max_agents = 1000;
    int max_bins = 100;
    double upper = 50.0;
    int partition_bins = 5;
    double grid_step = 0.1;
    double eps = 0.05;
    std::size_t t0 = 100;
    std::size_t tau = 10000;
    double valuation = 12.0;
    int seeds = 50;
    double persistence = 0.5;
    bool empirical = false;
    int ensemble_seeds = 10;
    int threads = 0;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "verify", "Run the formal-property checks and write a verdict bundle");
  cmd->add_option("check", opts->check, "Which check to run")
      ->required()
      ->check(CLI::IsMember(
          {"lemma1", "partition", "route-a", "shading", "share-dynamics", "all"}));
  cmd->add_option("--fuzz", opts->fuzz, "Random assignments for the bin check")
      ->capture_default_str();
  cmd->add_option("--max-agents", opts->max_agents,
                  "Largest fuzzed agent set")
      ->capture_default_str();
  cmd->add_option("--max-bins", opts->max_bins, "Largest fuzzed bin set")
      ->capture_default_str();
  cmd->add_option("--upper", opts->upper, "Bid-space upper bound")
      ->capture_default_str();
  cmd->add_option("--partition-bins", opts->partition_bins,
                  "Intervals in the partition check")
      ->capture_default_str();
  cmd->add_option("--grid-step", opts->grid_step, "Bid grid step")
      ->capture_default_str();
  cmd->add_option("--eps", opts->eps, "Injected sustained gap")
      ->capture_default_str();
  cmd->add_option("--t0", opts->t0, "Injected gap onset round")
      ->capture_default_str();
  cmd->add_option("--tau", opts->tau, "Cesàro horizon")->capture_default_str();
  cmd->add_option("--valuation", opts->valuation,
                  "Flat private valuation for the shading ensemble")
      ->capture_default_str();
  cmd->add_option("--seeds", opts->seeds, "Seeds in the shading ensemble")
      ->capture_default_str();
  cmd->add_option("--persistence", opts->persistence,
                  "Win-rate threshold for persistent bidders")
      ->capture_default_str();
  cmd->add_flag("--empirical", opts->empirical,
                "Also estimate the share-gap curve from simulations");
  cmd->add_option("--ensemble-seeds", opts->ensemble_seeds,
                  "Seeds per share for the empirical curve")
      ->capture_default_str();
  cmd->add_option("--threads", opts->threads,
                  "Worker cap for the empirical curve");
  auto* seed_opt =
      cmd->add_option("--seed", opts->seed, "Base seed (printed if drawn)");
  cmd->add_option("--out", opts->out,
                  "Output directory (default: MGBID_OUT_DIR or .)");

  cmd->callback([opts, seed_opt] {
    Timer timer;
    opts->seed = ensure_seed(seed_opt, opts->seed);
    bool all = opts->check == "all";
    fs::path dir = resolve_out_dir(opts->out);
    std::vector<std::string> artifacts;
    std::vector<Verdict> verdicts;

    if (all || opts->check == "lemma1")
      verdicts.push_back(check_minority_bins(opts->fuzz, opts->max_agents,
                                             opts->max_bins, opts->seed));
    if (all || opts->check == "partition")
      verdicts.push_back(
          check_partition(opts->upper, opts->partition_bins, opts->grid_step));
    if (all || opts->check == "route-a")
      verdicts.push_back(
          check_gap_identity(opts->eps, opts->t0, opts->tau, opts->seed));
    if (all || opts->check == "shading") {
      SimParams base;
      base.seed = opts->seed;
      ShadingEnsemble ensemble = shading_ensemble(
          base, opts->valuation, opts->seeds, opts->persistence);
      {
        auto out = open_artifact(dir, "margins.csv", artifacts);
        write_margins_csv(ensemble, base.seed, out);
      }
      verdicts.push_back(shading_verdict(ensemble, opts->valuation));
    }
    if (all || opts->check == "share-dynamics") {
      verdicts.push_back(check_share_dynamics());
      if (opts->empirical) {
        SimParams base;
        base.seed = opts->seed;
        std::vector<double> shares;
        for (int i = 1; i <= 9; ++i) shares.push_back(i / 10.0);
        verdicts.push_back(check_share_dynamics_empirical(
            base, shares, opts->ensemble_seeds, opts->threads));
      }
    }

    std::cout << format_verdict_table(verdicts);
    {
      auto out = open_artifact(dir, "verdicts.json", artifacts);
      write_verdicts_json(verdicts, out);
    }
    ordered_json params;
    params["check"] = opts->check;
    params["fuzz"] = opts->fuzz;
    params["eps"] = opts->eps;
    params["t0"] = opts->t0;
    params["tau"] = opts->tau;
    params["valuation"] = opts->valuation;
    params["seeds"] = opts->seeds;
    params["empirical"] = opts->empirical;
    write_manifest(dir, "verify", std::move(params), {opts->seed}, {},
                   artifacts, timer.ms());
    if (!all_hard_checks_pass(verdicts)) g_status = 1;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minority-strategy auction simulator and bid-landscape analytics"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "",
                 "Flat key=value config file; command-line flags take precedence");
  app.require_subcommand(1);
  setup_simulate_mg(app);
  setup_simulate_bidding(app);
  setup_generate(app);
  setup_analyze(app);
  setup_verify(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return g_status;
}
