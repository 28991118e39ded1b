#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mgbid/bid_market.hpp"

namespace mgbid {

// ---------------------------------------------------------------------------
// Bin occupancy

// Agents and bins are dense indices: agent i sits in bin bin_of[i].
struct BinAssignment {
  int num_bins = 0;
  std::vector<int> bin_of;
};

// Throws ContractError unless every agent maps into [0, num_bins).
void validate(const BinAssignment& assignment);

// Occupancy of one bin. Unknown bin is a contract error.
int bin_count(const BinAssignment& assignment, int bin);

// All occupied bins of minimal occupancy, ascending. Non-empty whenever the
// agent set is; an empty agent set is a contract error.
std::vector<int> minority_bins(const BinAssignment& assignment);

// ---------------------------------------------------------------------------
// Bid-space partition

// Half-open intervals [lo, hi) over [0, upper).
struct BidSpacePartition {
  double upper = 50.0;
  std::vector<std::pair<double, double>> intervals;
};

// num_bins equal-width intervals covering [0, upper) exactly.
BidSpacePartition uniform_partition(double upper, int num_bins);

// Intervals of the given width; a width that does not divide the range
// truncates the last interval at the upper bound.
BidSpacePartition partition_by_width(double upper, double width);

struct PartitionVerdict {
  bool disjoint = true;
  bool covers_grid = true;
  bool ok = true;
  // First overlapping interval pair, when disjointness fails.
  std::optional<std::pair<std::size_t, std::size_t>> overlapping_pair;
  std::size_t uncovered_points = 0;
  std::size_t multiply_covered_points = 0;
  std::vector<double> uncovered_examples;  // at most 5
  std::string note;  // surfaced conventions, e.g. a truncated last interval
};

// Checks pairwise disjointness and that every grid point lies in exactly one
// interval. Failures are encoded in the verdict, never thrown.
PartitionVerdict verify_partition(const BidSpacePartition& partition,
                                  const std::vector<double>& bid_grid);

// Grid points lo + step, lo + 2*step, ..., strictly inside (lo, hi).
std::vector<double> open_bid_grid(double lo, double hi, double step);

// ---------------------------------------------------------------------------
// Bid shading

struct ShadingEntry {
  int agent_id = 0;
  double valuation = 0.0;
  double mean_bid = 0.0;
  double margin = 0.0;  // valuation - mean_bid
  double win_rate = 0.0;
  bool persists = false;  // win_rate >= persistence threshold
};

struct ShadingLedger {
  std::vector<ShadingEntry> entries;
  double persistence_threshold = 0.5;
  int violations = 0;  // agents with mean bid >= valuation
  int persistent_agents = 0;
  bool all_shaded = false;
  double min_margin = std::numeric_limits<double>::quiet_NaN();
  double mean_margin = std::numeric_limits<double>::quiet_NaN();
};

// Per-agent mean submitted bid against a private valuation. Requires one
// positive valuation per agent and at least history_length simulated rounds.
ShadingLedger shading_report(const SimOutput& sim,
                             const std::vector<double>& valuations,
                             double persistence_threshold = 0.5);

// CSV header: agent_id,valuation,mean_bid,margin,win_rate,persists
void write_shading_csv(const ShadingLedger& ledger, std::ostream& out);

// Margins pooled across an ensemble of seeds.
struct ShadingEnsemble {
  int seeds = 0;
  int agents_per_seed = 0;
  std::vector<double> margins;  // seed-major, agent order within a seed
  int violations = 0;
  double shaded_fraction = 0.0;
  double min_margin = std::numeric_limits<double>::quiet_NaN();
  double mean_margin = std::numeric_limits<double>::quiet_NaN();
};

// Runs the bid simulation once per seed (base.seed, base.seed+1, ...) with a
// flat valuation and pools the shading margins.
ShadingEnsemble shading_ensemble(const SimParams& base, double valuation,
                                 int seeds, double persistence_threshold = 0.5);

// CSV header: seed,agent_id,margin
void write_margins_csv(const ShadingEnsemble& ensemble, std::uint64_t base_seed,
                       std::ostream& out);

// ---------------------------------------------------------------------------
// Efficiency comparison

// Cesàro mean of a gap series split into a head constant and a sustained
// tail: mean over 1..tau equals head_sum/tau + ((tau-onset+1)/tau)*tail_gap
// exactly when the tail is constant, and bounds it from below otherwise.
struct GapDecomposition {
  std::size_t tau = 0;
  bool onset_found = false;
  std::size_t onset = 0;       // 1-based first round of the sustained tail
  double tail_gap = 0.0;       // minimum gap over the tail
  double head_sum = 0.0;       // sum of the gap before the onset
  double cesaro_gap = 0.0;     // mean of the gap over rounds 1..tau
  double reconstructed = 0.0;  // head_sum/tau + ((tau-onset+1)/tau)*tail_gap
};

// With no onset given, detects the earliest round from which the gap stays
// strictly positive through tau; if the gap at tau is not positive the tail
// is empty and the head absorbs the whole series.
GapDecomposition decompose_gap(const std::vector<double>& gap, std::size_t tau,
                               std::optional<std::size_t> onset = std::nullopt);

struct EfficiencyComparison {
  std::size_t tau = 0;
  std::size_t pairs = 0;
  double min_gap = 0.0;   // over all (minority, majority) pairs
  double mean_gap = 0.0;
  double max_gap = 0.0;
  std::vector<double> group_gap_series;  // per-round mean(minority)-mean(majority)
  GapDecomposition decomposition;        // of the group gap series at tau
};

// Pairwise Cesàro-average efficiency gaps between two disjoint agent groups.
// Both groups must be non-empty and tau in [1, rounds].
EfficiencyComparison efficiency_compare(
    const std::vector<std::vector<double>>& efficiency,
    const std::vector<int>& minority_ids, const std::vector<int>& majority_ids,
    std::size_t tau);

// Groups taken from the simulated agent kinds (adaptive vs tracking).
EfficiencyComparison efficiency_compare(const SimOutput& sim, std::size_t tau);

struct BootstrapInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double confidence = 0.95;
  int resamples = 0;
};

// Percentile bootstrap for the mean, resampling with replacement.
BootstrapInterval bootstrap_mean_ci(const std::vector<double>& values,
                                    int resamples, double confidence,
                                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Share dynamics

using GapFunction = std::function<double(double)>;

// Calls the gap function and throws EvalError naming the point when the
// result is not finite.
double evaluate_gap(const GapFunction& gap, double share);

struct BisectionResult {
  bool bracketed = false;  // gap(0) > 0 > gap(1)
  double root = std::numeric_limits<double>::quiet_NaN();
  double gap_at_root = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

// Bisection on [0,1]; runs only when the gap brackets a sign change
// downward. Stops once the interval is narrower than tol.
BisectionResult bisect_gap(const GapFunction& gap, double tol = 1e-9,
                           int max_iter = 200);

struct ShareDynamicsResult {
  std::vector<double> trajectory;  // starts at a0, one entry per step after
  BisectionResult bisection;
  bool converged = false;  // final share within convergence_tol of the root
  bool monotone = false;   // trajectory moves toward the root monotonically
  std::string verdict;
};

// Iterates share <- clamp(share + eta * gap(share), 0, 1). a0 must lie in
// [0,1] and eta must be positive.
ShareDynamicsResult share_dynamics(const GapFunction& gap, double a0,
                                   double eta, int iterations,
                                   double convergence_tol = 1e-3);

// Ensemble estimate of the efficiency gap as a function of minority share.
struct GapCurve {
  std::vector<double> shares;      // ascending, each in (0,1)
  std::vector<double> mean_gaps;   // ensemble mean of the group Cesàro gap
  std::vector<double> std_errors;  // standard error of each mean
  std::vector<std::vector<double>> seed_gaps;  // [share][seed]
  int seeds_per_share = 0;
};

// One simulation per (share, seed) with minority_fraction set to the share;
// seeds fan out to a bounded worker pool, aggregation order is fixed.
GapCurve estimate_gap_curve(const SimParams& base,
                            const std::vector<double>& shares,
                            int seeds_per_share, int max_threads = 0);

// Piecewise-linear between grid shares, clamped flat outside them.
double interpolate_gap(const GapCurve& curve, double share);

// The curve as a share -> gap function, for bisection and trajectories.
GapFunction gap_function(const GapCurve& curve);

// CSV header: share,mean_gap,std_error
void write_gap_curve_csv(const GapCurve& curve, std::ostream& out);

// ---------------------------------------------------------------------------
// Verdicts

enum class VerdictStatus { pass, fail, descriptive };

const char* to_string(VerdictStatus status);

struct Verdict {
  std::string check;
  VerdictStatus status = VerdictStatus::descriptive;
  std::string detail;
  // Named numbers backing the verdict, in insertion order.
  std::vector<std::pair<std::string, double>> metrics;
};

// JSON array of {check, status, detail, metrics}.
void write_verdicts_json(const std::vector<Verdict>& verdicts,
                         std::ostream& out);

// Fixed-width table, one verdict per line.
std::string format_verdict_table(const std::vector<Verdict>& verdicts);

// True when no verdict failed; descriptive verdicts never gate.
bool all_hard_checks_pass(const std::vector<Verdict>& verdicts);

// Canned checks backing the command-line verify bundle.

// Random assignments compared against an independent occupancy scan; also
// asserts the returned bins are occupied and minimal.
Verdict check_minority_bins(int assignments, int max_agents, int max_bins,
                            std::uint64_t seed);

// Equal-width partition against the open bid grid with the given step.
Verdict check_partition(double upper, int num_bins, double grid_step);

// Injected gap series: noisy head, constant tail of eps from the onset.
// Passes when the detected decomposition reproduces the Cesàro mean to 1e-9.
Verdict check_gap_identity(double eps, std::size_t onset, std::size_t tau,
                           std::uint64_t seed);

// Shading ensemble summary; fails only when some agent's mean bid reaches
// its valuation, otherwise descriptive.
Verdict check_shading(const SimParams& base, double valuation, int seeds,
                      double persistence_threshold = 0.5);

// The same verdict over an already computed ensemble.
Verdict shading_verdict(const ShadingEnsemble& ensemble, double valuation);

// Closed-form fixtures: linear gap 0.5 - share (root, monotone convergence
// from both sides) and constant -1 gap (no interior equilibrium).
Verdict check_share_dynamics();

// Descriptive: bisection on an ensemble-estimated gap curve; reports the
// root and whether the interpolated gap there sits inside the standard
// error band.
Verdict check_share_dynamics_empirical(const SimParams& base,
                                       const std::vector<double>& shares,
                                       int seeds_per_share,
                                       int max_threads = 0);

}  // namespace mgbid
