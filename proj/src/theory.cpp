#include "mgbid/theory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "mgbid/csv.hpp"
#include "mgbid/errors.hpp"
#include "mgbid/rng.hpp"
#include <json.hpp>

namespace mgbid {

namespace {

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : static_cast<double>(s / v.size());
}

// Type-7 quantile on an already sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted.front();
  double h = p * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bin occupancy

void validate(const BinAssignment& assignment) {
  if (assignment.num_bins < 0)
    throw ContractError("bin assignment: num_bins must be nonnegative");
  for (std::size_t i = 0; i < assignment.bin_of.size(); ++i) {
    int b = assignment.bin_of[i];
    if (b < 0 || b >= assignment.num_bins)
      throw ContractError("bin assignment: agent " + std::to_string(i) +
                          " maps outside [0, num_bins)");
  }
}

int bin_count(const BinAssignment& assignment, int bin) {
  validate(assignment);
  if (bin < 0 || bin >= assignment.num_bins)
    throw ContractError("bin_count: bin " + std::to_string(bin) +
                        " is not in the assignment's bin set");
  return static_cast<int>(
      std::count(assignment.bin_of.begin(), assignment.bin_of.end(), bin));
}

std::vector<int> minority_bins(const BinAssignment& assignment) {
  validate(assignment);
  if (assignment.bin_of.empty())
    throw ContractError("minority_bins: agent set is empty");
  std::vector<int> counts(static_cast<std::size_t>(assignment.num_bins), 0);
  for (int b : assignment.bin_of) ++counts[static_cast<std::size_t>(b)];
  int min_occupied = -1;
  for (int c : counts)
    if (c > 0 && (min_occupied < 0 || c < min_occupied)) min_occupied = c;
  std::vector<int> bins;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] == min_occupied) bins.push_back(static_cast<int>(k));
  return bins;
}

// ---------------------------------------------------------------------------
// Bid-space partition

BidSpacePartition uniform_partition(double upper, int num_bins) {
  if (!(upper > 0.0))
    throw ContractError("uniform_partition: upper bound must be positive");
  if (num_bins < 1)
    throw ContractError("uniform_partition: num_bins must be at least 1");
  BidSpacePartition p;
  p.upper = upper;
  double w = upper / num_bins;
  for (int k = 0; k < num_bins; ++k) {
    double lo = k * w;
    double hi = (k + 1 == num_bins) ? upper : (k + 1) * w;
    p.intervals.emplace_back(lo, hi);
  }
  return p;
}

BidSpacePartition partition_by_width(double upper, double width) {
  if (!(upper > 0.0))
    throw ContractError("partition_by_width: upper bound must be positive");
  if (!(width > 0.0))
    throw ContractError("partition_by_width: width must be positive");
  BidSpacePartition p;
  p.upper = upper;
  for (int k = 0; k * width < upper; ++k)
    p.intervals.emplace_back(k * width, std::min((k + 1) * width, upper));
  return p;
}

PartitionVerdict verify_partition(const BidSpacePartition& partition,
                                  const std::vector<double>& bid_grid) {
  if (partition.intervals.empty())
    throw ContractError("verify_partition: partition has no intervals");
  PartitionVerdict v;
  const auto& iv = partition.intervals;
  for (std::size_t i = 0; i < iv.size() && v.disjoint; ++i) {
    for (std::size_t j = i + 1; j < iv.size(); ++j) {
      // Half-open intervals overlap iff each starts before the other ends.
      if (iv[i].first < iv[j].second && iv[j].first < iv[i].second) {
        v.disjoint = false;
        v.overlapping_pair = {i, j};
        break;
      }
    }
  }
  for (double x : bid_grid) {
    int hits = 0;
    for (const auto& [lo, hi] : iv)
      if (lo <= x && x < hi) ++hits;
    if (hits == 0) {
      ++v.uncovered_points;
      if (v.uncovered_examples.size() < 5) v.uncovered_examples.push_back(x);
    } else if (hits > 1) {
      ++v.multiply_covered_points;
    }
  }
  v.covers_grid = v.uncovered_points == 0 && v.multiply_covered_points == 0;
  v.ok = v.disjoint && v.covers_grid;
  double first_width = iv.front().second - iv.front().first;
  double last_width = iv.back().second - iv.back().first;
  if (iv.size() > 1 && last_width < first_width - 1e-12)
    v.note = "last interval truncated at the upper bound";
  return v;
}

std::vector<double> open_bid_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo))
    throw ContractError("open_bid_grid: needs hi > lo and a positive step");
  long long n = std::llround((hi - lo) / step) - 1;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(std::max(0ll, n)));
  for (long long k = 1; k <= n; ++k) grid.push_back(lo + k * step);
  return grid;
}

// ---------------------------------------------------------------------------
// Bid shading

ShadingLedger shading_report(const SimOutput& sim,
                             const std::vector<double>& valuations,
                             double persistence_threshold) {
  std::size_t n = sim.bids.size();
  if (valuations.size() != n)
    throw ContractError("shading_report: needs one valuation per agent");
  if (sim.rounds.size() <
      static_cast<std::size_t>(std::max(1, sim.params.history_length)))
    throw ContractError(
        "shading_report: simulation ran fewer rounds than the history length");
  if (persistence_threshold < 0.0 || persistence_threshold > 1.0)
    throw ContractError(
        "shading_report: persistence threshold must lie in [0,1]");
  ShadingLedger ledger;
  ledger.persistence_threshold = persistence_threshold;
  double rounds = static_cast<double>(sim.rounds.size());
  long double margin_sum = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(valuations[i] > 0.0))
      throw ContractError("shading_report: valuation of agent " +
                          std::to_string(i) + " must be positive");
    ShadingEntry e;
    e.agent_id = static_cast<int>(i);
    e.valuation = valuations[i];
    e.mean_bid = mean_of(sim.bids[i]);
    e.margin = e.valuation - e.mean_bid;
    e.win_rate = static_cast<double>(sim.agents[i].success_count) / rounds;
    e.persists = e.win_rate >= persistence_threshold;
    if (e.persists) ++ledger.persistent_agents;
    if (e.mean_bid >= e.valuation) ++ledger.violations;
    margin_sum += e.margin;
    if (std::isnan(ledger.min_margin) || e.margin < ledger.min_margin)
      ledger.min_margin = e.margin;
    ledger.entries.push_back(e);
  }
  ledger.all_shaded = ledger.violations == 0;
  if (n > 0) ledger.mean_margin = static_cast<double>(margin_sum / n);
  return ledger;
}

void write_shading_csv(const ShadingLedger& ledger, std::ostream& out) {
  out << "agent_id,valuation,mean_bid,margin,win_rate,persists\n";
  for (const auto& e : ledger.entries) {
    out << e.agent_id << ',' << csv::format_double(e.valuation) << ','
        << csv::format_double(e.mean_bid) << ',' << csv::format_double(e.margin)
        << ',' << csv::format_double(e.win_rate) << ',' << (e.persists ? 1 : 0)
        << '\n';
  }
}

ShadingEnsemble shading_ensemble(const SimParams& base, double valuation,
                                 int seeds, double persistence_threshold) {
  if (seeds < 1)
    throw ContractError("shading_ensemble: needs at least one seed");
  if (!(valuation > 0.0))
    throw ContractError("shading_ensemble: valuation must be positive");
  ShadingEnsemble ens;
  ens.seeds = seeds;
  ens.agents_per_seed = base.num_agents;
  std::vector<double> valuations(static_cast<std::size_t>(base.num_agents),
                                 valuation);
  long double margin_sum = 0.0L;
  for (int s = 0; s < seeds; ++s) {
    SimParams params = base;
    params.seed = base.seed + static_cast<std::uint64_t>(s);
    SimOutput sim = run_simulation(params);
    ShadingLedger ledger =
        shading_report(sim, valuations, persistence_threshold);
    ens.violations += ledger.violations;
    for (const auto& e : ledger.entries) {
      ens.margins.push_back(e.margin);
      margin_sum += e.margin;
      if (std::isnan(ens.min_margin) || e.margin < ens.min_margin)
        ens.min_margin = e.margin;
    }
  }
  std::size_t total = ens.margins.size();
  ens.shaded_fraction =
      total == 0 ? 0.0
                 : 1.0 - static_cast<double>(ens.violations) /
                             static_cast<double>(total);
  if (total > 0) ens.mean_margin = static_cast<double>(margin_sum / total);
  return ens;
}

void write_margins_csv(const ShadingEnsemble& ensemble, std::uint64_t base_seed,
                       std::ostream& out) {
  out << "seed,agent_id,margin\n";
  std::size_t idx = 0;
  for (int s = 0; s < ensemble.seeds; ++s) {
    for (int a = 0; a < ensemble.agents_per_seed; ++a, ++idx) {
      out << (base_seed + static_cast<std::uint64_t>(s)) << ',' << a << ','
          << csv::format_double(ensemble.margins[idx]) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Efficiency comparison

GapDecomposition decompose_gap(const std::vector<double>& gap, std::size_t tau,
                               std::optional<std::size_t> onset) {
  if (tau == 0 || tau > gap.size())
    throw ContractError("decompose_gap: tau must lie in [1, series length]");
  GapDecomposition d;
  d.tau = tau;
  if (onset) {
    if (*onset < 1 || *onset > tau)
      throw ContractError("decompose_gap: onset must lie in [1, tau]");
    d.onset = *onset;
    d.onset_found = true;
  } else {
    // Earliest round from which the gap stays strictly positive through tau.
    std::size_t start = tau;  // 0-based index one past the candidate tail
    while (start > 0 && gap[start - 1] > 0.0) --start;
    if (start == tau) {
      d.onset = tau + 1;  // empty tail; the head absorbs everything
      d.onset_found = false;
    } else {
      d.onset = start + 1;
      d.onset_found = true;
    }
  }
  long double head = 0.0L;
  for (std::size_t t = 0; t + 1 < d.onset; ++t) head += gap[t];
  d.head_sum = static_cast<double>(head);
  double tail_min = 0.0;
  if (d.onset <= tau) {
    tail_min = gap[d.onset - 1];
    for (std::size_t t = d.onset; t < tau; ++t)
      tail_min = std::min(tail_min, gap[t]);
  }
  d.tail_gap = tail_min;
  long double total = head;
  for (std::size_t t = d.onset - 1; t < tau; ++t) total += gap[t];
  d.cesaro_gap = static_cast<double>(total / static_cast<long double>(tau));
  double tail_rounds =
      d.onset <= tau ? static_cast<double>(tau - d.onset + 1) : 0.0;
  d.reconstructed = d.head_sum / static_cast<double>(tau) +
                    tail_rounds / static_cast<double>(tau) * d.tail_gap;
  return d;
}

EfficiencyComparison efficiency_compare(
    const std::vector<std::vector<double>>& efficiency,
    const std::vector<int>& minority_ids, const std::vector<int>& majority_ids,
    std::size_t tau) {
  if (minority_ids.empty() || majority_ids.empty())
    throw ContractError("efficiency_compare: both agent groups must be non-empty");
  std::vector<char> seen(efficiency.size(), 0);
  auto claim = [&](int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= efficiency.size())
      throw ContractError("efficiency_compare: agent id " + std::to_string(id) +
                          " is out of range");
    if (seen[static_cast<std::size_t>(id)])
      throw ContractError("efficiency_compare: agent id " + std::to_string(id) +
                          " listed twice across groups");
    seen[static_cast<std::size_t>(id)] = 1;
  };
  for (int id : minority_ids) claim(id);
  for (int id : majority_ids) claim(id);

  EfficiencyComparison cmp;
  cmp.tau = tau;
  cmp.pairs = minority_ids.size() * majority_ids.size();
  // Per-pair Cesàro gaps reduce to per-agent Cesàro averages: the gap for a
  // pair is the difference of the two agents' averages.
  std::vector<double> mc, jc;
  for (int id : minority_ids)
    mc.push_back(cesaro_average(efficiency[static_cast<std::size_t>(id)], tau));
  for (int id : majority_ids)
    jc.push_back(cesaro_average(efficiency[static_cast<std::size_t>(id)], tau));
  cmp.min_gap = *std::min_element(mc.begin(), mc.end()) -
                *std::max_element(jc.begin(), jc.end());
  cmp.max_gap = *std::max_element(mc.begin(), mc.end()) -
                *std::min_element(jc.begin(), jc.end());
  cmp.mean_gap = mean_of(mc) - mean_of(jc);

  cmp.group_gap_series.reserve(tau);
  for (std::size_t t = 0; t < tau; ++t) {
    long double sm = 0.0L, sj = 0.0L;
    for (int id : minority_ids) sm += efficiency[static_cast<std::size_t>(id)][t];
    for (int id : majority_ids) sj += efficiency[static_cast<std::size_t>(id)][t];
    cmp.group_gap_series.push_back(
        static_cast<double>(sm / static_cast<long double>(minority_ids.size()) -
                            sj / static_cast<long double>(majority_ids.size())));
  }
  cmp.decomposition = decompose_gap(cmp.group_gap_series, tau);
  return cmp;
}

EfficiencyComparison efficiency_compare(const SimOutput& sim, std::size_t tau) {
  std::vector<int> minority_ids, majority_ids;
  for (std::size_t i = 0; i < sim.agents.size(); ++i) {
    if (sim.agents[i].kind == AgentKind::minority_adaptive)
      minority_ids.push_back(static_cast<int>(i));
    else
      majority_ids.push_back(static_cast<int>(i));
  }
  if (minority_ids.empty() || majority_ids.empty())
    throw ContractError(
        "efficiency_compare: needs both agent kinds; set minority_fraction "
        "strictly inside (0,1)");
  return efficiency_compare(sim.efficiency, minority_ids, majority_ids, tau);
}

BootstrapInterval bootstrap_mean_ci(const std::vector<double>& values,
                                    int resamples, double confidence,
                                    std::uint64_t seed) {
  if (values.empty())
    throw ContractError("bootstrap_mean_ci: values must be non-empty");
  if (resamples < 1)
    throw ContractError("bootstrap_mean_ci: needs at least one resample");
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw ContractError("bootstrap_mean_ci: confidence must lie in (0,1)");
  Rng rng(seed);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i)
      s += values[index_draw(rng, values.size())];
    means.push_back(static_cast<double>(s / values.size()));
  }
  std::sort(means.begin(), means.end());
  BootstrapInterval ci;
  ci.mean = mean_of(values);
  ci.confidence = confidence;
  ci.resamples = resamples;
  ci.lo = quantile_sorted(means, (1.0 - confidence) / 2.0);
  ci.hi = quantile_sorted(means, (1.0 + confidence) / 2.0);
  return ci;
}

// ---------------------------------------------------------------------------
// Share dynamics

double evaluate_gap(const GapFunction& gap, double share) {
  double g = gap(share);
  if (!std::isfinite(g))
    throw EvalError("share gap is undefined at share " + fmt6(share));
  return g;
}

BisectionResult bisect_gap(const GapFunction& gap, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ContractError("bisect_gap: tol must be positive");
  if (max_iter < 1)
    throw ContractError("bisect_gap: max_iter must be at least 1");
  BisectionResult r;
  double g0 = evaluate_gap(gap, 0.0);
  double g1 = evaluate_gap(gap, 1.0);
  r.bracketed = g0 > 0.0 && g1 < 0.0;
  if (!r.bracketed) return r;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol && r.iterations < max_iter) {
    double mid = 0.5 * (lo + hi);
    double gm = evaluate_gap(gap, mid);
    ++r.iterations;
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    (gm > 0.0 ? lo : hi) = mid;
  }
  r.root = 0.5 * (lo + hi);
  r.gap_at_root = evaluate_gap(gap, r.root);
  return r;
}

ShareDynamicsResult share_dynamics(const GapFunction& gap, double a0,
                                   double eta, int iterations,
                                   double convergence_tol) {
  if (a0 < 0.0 || a0 > 1.0)
    throw ContractError("share_dynamics: initial share must lie in [0,1]");
  if (!(eta > 0.0))
    throw ContractError("share_dynamics: step size must be positive");
  if (iterations < 0)
    throw ContractError("share_dynamics: iterations must be nonnegative");
  ShareDynamicsResult r;
  r.trajectory.reserve(static_cast<std::size_t>(iterations) + 1);
  double a = a0;
  r.trajectory.push_back(a);
  for (int i = 0; i < iterations; ++i) {
    a = std::clamp(a + eta * evaluate_gap(gap, a), 0.0, 1.0);
    r.trajectory.push_back(a);
  }
  r.bisection = bisect_gap(gap);
  const auto& traj = r.trajectory;
  if (r.bisection.bracketed) {
    double root = r.bisection.root;
    r.converged = std::abs(traj.back() - root) <= convergence_tol;
    // Monotone toward the root: steps never back away and never overshoot.
    r.monotone = true;
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      bool forward = a0 <= root ? traj[t + 1] >= traj[t] - 1e-12
                                : traj[t + 1] <= traj[t] + 1e-12;
      bool inside = a0 <= root ? traj[t + 1] <= root + 1e-9
                               : traj[t + 1] >= root - 1e-9;
      if (!forward || !inside) {
        r.monotone = false;
        break;
      }
    }
    r.verdict = "interior equilibrium at share " + fmt6(root);
    r.verdict += r.converged ? "; trajectory converged"
                             : "; trajectory did not converge";
    if (r.converged && r.monotone) r.verdict += " monotonically";
  } else {
    r.monotone = std::is_sorted(traj.begin(), traj.end()) ||
                 std::is_sorted(traj.rbegin(), traj.rend());
    r.verdict = "no interior equilibrium";
  }
  return r;
}

GapCurve estimate_gap_curve(const SimParams& base,
                            const std::vector<double>& shares,
                            int seeds_per_share, int max_threads) {
  validate(base);
  if (shares.empty())
    throw ContractError("estimate_gap_curve: share grid must be non-empty");
  if (!std::is_sorted(shares.begin(), shares.end()))
    throw ContractError("estimate_gap_curve: share grid must be ascending");
  for (double a : shares) {
    int minority = static_cast<int>(a * base.num_agents);
    if (minority < 1 || minority >= base.num_agents)
      throw ContractError("estimate_gap_curve: share " + fmt6(a) +
                          " leaves one agent group empty");
  }
  if (seeds_per_share < 1)
    throw ContractError("estimate_gap_curve: needs at least one seed per share");

  GapCurve curve;
  curve.shares = shares;
  curve.seeds_per_share = seeds_per_share;
  std::size_t jobs = shares.size() * static_cast<std::size_t>(seeds_per_share);
  std::vector<double> results(jobs, 0.0);

  auto run_job = [&](std::size_t j) {
    std::size_t share_idx = j / static_cast<std::size_t>(seeds_per_share);
    std::size_t seed_idx = j % static_cast<std::size_t>(seeds_per_share);
    SimParams params = base;
    params.minority_fraction = shares[share_idx];
    params.seed = base.seed + seed_idx;
    SimOutput sim = run_simulation(params);
    results[j] = efficiency_compare(sim, sim.rounds.size()).mean_gap;
  };

  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = max_threads > 0
                            ? static_cast<std::size_t>(max_threads)
                            : std::min<std::size_t>(hw == 0 ? 4 : hw, 8);
  workers = std::clamp<std::size_t>(workers, 1, jobs);
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
          try {
            run_job(j);
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

  for (std::size_t s = 0; s < shares.size(); ++s) {
    std::vector<double> gaps(
        results.begin() + static_cast<std::ptrdiff_t>(s * seeds_per_share),
        results.begin() + static_cast<std::ptrdiff_t>((s + 1) * seeds_per_share));
    double m = mean_of(gaps);
    curve.mean_gaps.push_back(m);
    if (gaps.size() < 2) {
      curve.std_errors.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      long double ss = 0.0L;
      for (double g : gaps) ss += (g - m) * (g - m);
      double sd = std::sqrt(static_cast<double>(ss / (gaps.size() - 1)));
      curve.std_errors.push_back(sd / std::sqrt(static_cast<double>(gaps.size())));
    }
    curve.seed_gaps.push_back(std::move(gaps));
  }
  return curve;
}

namespace {

double interpolate_on(const std::vector<double>& xs,
                      const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  std::size_t lo = hi - 1;
  double frac = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + frac * (ys[hi] - ys[lo]);
}

}  // namespace

double interpolate_gap(const GapCurve& curve, double share) {
  if (curve.shares.empty() || curve.shares.size() != curve.mean_gaps.size())
    throw ContractError("interpolate_gap: malformed gap curve");
  return interpolate_on(curve.shares, curve.mean_gaps, share);
}

GapFunction gap_function(const GapCurve& curve) {
  if (curve.shares.empty() || curve.shares.size() != curve.mean_gaps.size())
    throw ContractError("gap_function: malformed gap curve");
  return [curve](double a) { return interpolate_gap(curve, a); };
}

void write_gap_curve_csv(const GapCurve& curve, std::ostream& out) {
  out << "share,mean_gap,std_error\n";
  for (std::size_t i = 0; i < curve.shares.size(); ++i) {
    out << csv::format_double(curve.shares[i]) << ','
        << csv::format_double(curve.mean_gaps[i]) << ','
        << csv::format_double(curve.std_errors[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Verdicts

const char* to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::descriptive: return "descriptive";
  }
  return "unknown";
}

void write_verdicts_json(const std::vector<Verdict>& verdicts,
                         std::ostream& out) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    nlohmann::ordered_json item;
    item["check"] = v.check;
    item["status"] = to_string(v.status);
    item["detail"] = v.detail;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [name, value] : v.metrics) metrics[name] = value;
    item["metrics"] = metrics;
    arr.push_back(item);
  }
  out << arr.dump(2) << '\n';
}

std::string format_verdict_table(const std::vector<Verdict>& verdicts) {
  std::ostringstream out;
  for (const auto& v : verdicts) {
    std::string status = to_string(v.status);
    status.resize(12, ' ');
    std::string check = v.check;
    if (check.size() < 26) check.resize(26, ' ');
    out << status << check << ' ' << v.detail << '\n';
  }
  return out.str();
}

bool all_hard_checks_pass(const std::vector<Verdict>& verdicts) {
  return std::none_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) {
    return v.status == VerdictStatus::fail;
  });
}

// ---------------------------------------------------------------------------
// Canned checks

Verdict check_minority_bins(int assignments, int max_agents, int max_bins,
                            std::uint64_t seed) {
  if (assignments < 1 || max_agents < 1 || max_bins < 1)
    throw ContractError(
        "check_minority_bins: assignments, max_agents and max_bins must be "
        "positive");
  Rng rng(seed);
  int mismatches = 0;
  for (int trial = 0; trial < assignments; ++trial) {
    BinAssignment a;
    std::size_t n = 1 + index_draw(rng, static_cast<std::size_t>(max_agents));
    a.num_bins = 1 + static_cast<int>(
                         index_draw(rng, static_cast<std::size_t>(max_bins)));
    a.bin_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      a.bin_of.push_back(static_cast<int>(
          index_draw(rng, static_cast<std::size_t>(a.num_bins))));

    std::vector<int> got = minority_bins(a);

    // Independent scan: tally occupancy, find the minimal positive count,
    // collect its bins in ascending order.
    std::vector<int> tally(static_cast<std::size_t>(a.num_bins), 0);
    for (int b : a.bin_of) ++tally[static_cast<std::size_t>(b)];
    int best = 0;
    for (int c : tally)
      if (c > 0 && (best == 0 || c < best)) best = c;
    std::vector<int> expected;
    for (int k = 0; k < a.num_bins; ++k)
      if (tally[static_cast<std::size_t>(k)] == best) expected.push_back(k);

    bool ok = !got.empty() && got == expected;
    for (int b : got)
      if (tally[static_cast<std::size_t>(b)] != best) ok = false;
    if (!ok) ++mismatches;
  }
  Verdict v;
  v.check = "minority-bin-existence";
  v.status = mismatches == 0 ? VerdictStatus::pass : VerdictStatus::fail;
  v.detail = std::to_string(assignments - mismatches) + "/" +
             std::to_string(assignments) +
             " random assignments matched the independent occupancy scan";
  v.metrics = {{"assignments", static_cast<double>(assignments)},
               {"max_agents", static_cast<double>(max_agents)},
               {"max_bins", static_cast<double>(max_bins)},
               {"mismatches", static_cast<double>(mismatches)}};
  return v;
}

Verdict check_partition(double upper, int num_bins, double grid_step) {
  BidSpacePartition p = uniform_partition(upper, num_bins);
  std::vector<double> grid = open_bid_grid(0.0, upper, grid_step);
  PartitionVerdict pv = verify_partition(p, grid);
  Verdict v;
  v.check = "bid-space-partition";
  v.status = pv.ok ? VerdictStatus::pass : VerdictStatus::fail;
  if (pv.ok) {
    v.detail = std::to_string(grid.size()) +
               " grid points each fall in exactly one of " +
               std::to_string(num_bins) + " disjoint intervals";
  } else {
    v.detail = "partition failed: " +
               std::string(pv.disjoint ? "" : "overlapping intervals; ") +
               std::to_string(pv.uncovered_points) + " uncovered, " +
               std::to_string(pv.multiply_covered_points) +
               " multiply covered grid points";
  }
  v.metrics = {{"intervals", static_cast<double>(p.intervals.size())},
               {"grid_points", static_cast<double>(grid.size())},
               {"uncovered", static_cast<double>(pv.uncovered_points)},
               {"multiply_covered",
                static_cast<double>(pv.multiply_covered_points)}};
  return v;
}

Verdict check_gap_identity(double eps, std::size_t onset, std::size_t tau,
                           std::uint64_t seed) {
  if (!(eps > 0.0))
    throw ContractError("check_gap_identity: eps must be positive");
  if (onset < 1 || onset > tau)
    throw ContractError("check_gap_identity: onset must lie in [1, tau]");
  Rng rng(seed);
  std::vector<double> series(tau, eps);
  for (std::size_t t = 0; t + 1 < onset; ++t)
    series[t] = uniform_draw(rng, -0.1, 0.1);
  // Anchor the detection: the round before the onset must not be positive.
  if (onset >= 2) series[onset - 2] = -0.05;
  GapDecomposition d = decompose_gap(series, tau);
  double residual = std::abs(d.cesaro_gap - d.reconstructed);
  bool ok = d.onset_found && d.onset == onset && residual <= 1e-9;
  Verdict v;
  v.check = "cesaro-gap-identity";
  v.status = ok ? VerdictStatus::pass : VerdictStatus::fail;
  v.detail = "head constant plus sustained tail reproduces the Cesàro mean "
             "(residual " + csv::format_double(residual) + ")";
  v.metrics = {{"eps", eps},
               {"onset", static_cast<double>(onset)},
               {"detected_onset", static_cast<double>(d.onset)},
               {"tau", static_cast<double>(tau)},
               {"cesaro_gap", d.cesaro_gap},
               {"reconstructed", d.reconstructed},
               {"residual", residual},
               {"tolerance", 1e-9}};
  return v;
}

Verdict check_shading(const SimParams& base, double valuation, int seeds,
                      double persistence_threshold) {
  return shading_verdict(
      shading_ensemble(base, valuation, seeds, persistence_threshold),
      valuation);
}

Verdict shading_verdict(const ShadingEnsemble& ens, double valuation) {
  Verdict v;
  v.check = "bid-shading";
  std::size_t total = ens.margins.size();
  if (ens.violations == 0) {
    v.status = VerdictStatus::descriptive;
    v.detail = "all " + std::to_string(total) +
               " agent runs kept the mean bid below the valuation " +
               csv::format_double(valuation) + " (min margin " +
               csv::format_double(ens.min_margin) + ")";
  } else {
    v.status = VerdictStatus::fail;
    v.detail = std::to_string(ens.violations) + " of " + std::to_string(total) +
               " agent runs reached the valuation " +
               csv::format_double(valuation);
  }
  v.metrics = {{"seeds", static_cast<double>(ens.seeds)},
               {"agents_per_seed", static_cast<double>(ens.agents_per_seed)},
               {"violations", static_cast<double>(ens.violations)},
               {"shaded_fraction", ens.shaded_fraction},
               {"min_margin", ens.min_margin},
               {"mean_margin", ens.mean_margin}};
  return v;
}

Verdict check_share_dynamics() {
  GapFunction linear = [](double a) { return 0.5 - a; };
  ShareDynamicsResult low = share_dynamics(linear, 0.1, 0.1, 200);
  ShareDynamicsResult high = share_dynamics(linear, 0.9, 0.1, 200);
  GapFunction sink = [](double) { return -1.0; };
  ShareDynamicsResult drain = share_dynamics(sink, 0.5, 0.1, 200);

  bool root_ok = low.bisection.bracketed &&
                 std::abs(low.bisection.root - 0.5) <= 1e-6;
  bool trajectories_ok =
      low.converged && low.monotone && high.converged && high.monotone;
  bool drain_ok = !drain.bisection.bracketed &&
                  drain.verdict == "no interior equilibrium" &&
                  drain.trajectory.back() == 0.0;
  bool ok = root_ok && trajectories_ok && drain_ok;

  Verdict v;
  v.check = "share-dynamics";
  v.status = ok ? VerdictStatus::pass : VerdictStatus::fail;
  v.detail = "linear gap: root " + fmt6(low.bisection.root) +
             ", trajectories from 0.1 and 0.9 converged monotonically; "
             "constant negative gap: share sank to " +
             fmt6(drain.trajectory.back());
  v.metrics = {{"root", low.bisection.root},
               {"root_error", std::abs(low.bisection.root - 0.5)},
               {"final_share_from_low", low.trajectory.back()},
               {"final_share_from_high", high.trajectory.back()},
               {"drained_share", drain.trajectory.back()}};
  return v;
}

Verdict check_share_dynamics_empirical(const SimParams& base,
                                       const std::vector<double>& shares,
                                       int seeds_per_share, int max_threads) {
  GapCurve curve =
      estimate_gap_curve(base, shares, seeds_per_share, max_threads);
  BisectionResult b = bisect_gap(gap_function(curve));
  Verdict v;
  v.check = "share-dynamics-empirical";
  v.status = VerdictStatus::descriptive;
  if (!b.bracketed) {
    v.detail = "estimated gap curve does not change sign downward across "
               "[0,1]; no interior equilibrium";
    v.metrics = {{"shares", static_cast<double>(shares.size())},
                 {"seeds_per_share", static_cast<double>(seeds_per_share)},
                 {"gap_at_0", interpolate_gap(curve, 0.0)},
                 {"gap_at_1", interpolate_gap(curve, 1.0)}};
    return v;
  }
  double stderr_at_root =
      interpolate_on(curve.shares, curve.std_errors, b.root);
  bool within = std::abs(b.gap_at_root) <= stderr_at_root;
  v.detail = "estimated gap crosses zero at share " + fmt6(b.root) +
             "; residual gap " + csv::format_double(std::abs(b.gap_at_root)) +
             (within ? " sits inside" : " exceeds") +
             " the standard error band";
  v.metrics = {{"root", b.root},
               {"gap_at_root", b.gap_at_root},
               {"std_error_at_root", stderr_at_root},
               {"shares", static_cast<double>(shares.size())},
               {"seeds_per_share", static_cast<double>(seeds_per_share)}};
  return v;
}

}  // namespace mgbid
