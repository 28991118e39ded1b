#include "mgbid/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "mgbid/csv.hpp"
#include "mgbid/errors.hpp"
#include "mgbid/rng.hpp"
#include "mgbid/stats.hpp"

namespace mgbid {

namespace {

double sqdist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

int nearest_centroid(const std::array<double, 2>& row,
                     const std::vector<std::array<double, 2>>& centroids) {
  int best = 0;
  double best_d = sqdist(row, centroids[0]);
  for (int j = 1; j < static_cast<int>(centroids.size()); ++j) {
    const double d = sqdist(row, centroids[static_cast<std::size_t>(j)]);
    if (d < best_d) {  // strict: ties stay with the lower index
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::string fmt_stat(double x) {
  return std::isnan(x) ? "NaN" : csv::format_double(x);
}

// Type-7 quantile (linear interpolation between order statistics).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

FeatureMatrix extract_features(const LandscapeDataset& dataset) {
  if (dataset.records.empty())
    throw ContractError("extract_features: empty dataset");
  FeatureMatrix m;
  m.rows.reserve(dataset.records.size());
  for (const AuctionRecord& r : dataset.records)
    m.rows.push_back({r.bid, static_cast<double>(r.imps_hour)});
  return m;
}

FeatureMatrix standardize(const FeatureMatrix& features) {
  if (features.rows.empty()) throw ContractError("standardize: empty matrix");
  FeatureMatrix out;
  out.standardized = true;
  const double n = static_cast<double>(features.rows.size());
  for (int c = 0; c < 2; ++c) {
    double sum = 0.0;
    for (const auto& row : features.rows) sum += row[static_cast<std::size_t>(c)];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& row : features.rows) {
      const double d = row[static_cast<std::size_t>(c)] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0))
      throw DataError(std::string("standardize: column ") +
                      (c == 0 ? "bid" : "imps_hour") + " is constant");
    out.mean[static_cast<std::size_t>(c)] = mean;
    out.sd[static_cast<std::size_t>(c)] = sd;
  }
  out.rows.reserve(features.rows.size());
  for (const auto& row : features.rows)
    out.rows.push_back({(row[0] - out.mean[0]) / out.sd[0],
                        (row[1] - out.mean[1]) / out.sd[1]});
  return out;
}

ClusterResult kmeans(const FeatureMatrix& features, int k, std::uint64_t seed,
                     int max_iter, double tol) {
  const auto& rows = features.rows;
  const std::size_t n = rows.size();
  if (k < 1) throw ContractError("kmeans: k must be >= 1");
  if (max_iter < 1) throw ContractError("kmeans: max_iter must be >= 1");
  if (n < static_cast<std::size_t>(k))
    throw ContractError("kmeans: fewer rows than clusters");
  if (k >= 2) {
    bool all_identical = true;
    for (const auto& row : rows)
      if (row != rows[0]) {
        all_identical = false;
        break;
      }
    if (all_identical)
      throw DataError("kmeans: all rows identical; k >= 2 cannot split them");
  }

  Rng rng(seed);
  std::vector<std::array<double, 2>> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  centroids.push_back(rows[index_draw(rng, n)]);
  std::vector<double> weight(n);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = sqdist(rows[i], centroids[0]);
      for (std::size_t j = 1; j < centroids.size(); ++j)
        best = std::min(best, sqdist(rows[i], centroids[j]));
      weight[i] = best;
      total += best;
    }
    if (total > 0.0) {
      const double r = unit_draw(rng) * total;
      double cum = 0.0;
      std::size_t pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += weight[i];
        if (r < cum) {
          pick = i;
          break;
        }
      }
      centroids.push_back(rows[pick]);
    } else {
      // Every remaining point coincides with a chosen centroid.
      centroids.push_back(rows[index_draw(rng, n)]);
    }
  }

  ClusterResult result;
  result.k = k;
  result.assignments.assign(n, 0);
  double prev_inertia = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter; ++iter) {
    result.iterations = iter;
    for (std::size_t i = 0; i < n; ++i)
      result.assignments[i] = nearest_centroid(rows[i], centroids);

    // Re-seed emptied clusters at the point farthest from its own centroid;
    // moving that point's assignment can only lower the objective.
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : result.assignments) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] != 0) continue;
      std::size_t farthest = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = sqdist(
            rows[i],
            centroids[static_cast<std::size_t>(result.assignments[i])]);
        if (d > far_d &&
            counts[static_cast<std::size_t>(result.assignments[i])] > 1) {
          far_d = d;
          farthest = i;
        }
      }
      --counts[static_cast<std::size_t>(result.assignments[farthest])];
      result.assignments[farthest] = c;
      ++counts[static_cast<std::size_t>(c)];
      centroids[static_cast<std::size_t>(c)] = rows[farthest];
    }

    std::vector<std::array<double, 2>> sums(static_cast<std::size_t>(k),
                                            {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(result.assignments[i])][0] += rows[i][0];
      sums[static_cast<std::size_t>(result.assignments[i])][1] += rows[i][1];
    }
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      const double cnt = static_cast<double>(counts[static_cast<std::size_t>(c)]);
      const std::array<double, 2> updated = {sums[static_cast<std::size_t>(c)][0] / cnt,
                                             sums[static_cast<std::size_t>(c)][1] / cnt};
      movement = std::max(
          movement, std::sqrt(sqdist(updated, centroids[static_cast<std::size_t>(c)])));
      centroids[static_cast<std::size_t>(c)] = updated;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += sqdist(rows[i],
                        centroids[static_cast<std::size_t>(result.assignments[i])]);
    // Lloyd's objective cannot rise; a rise means the implementation broke.
    if (inertia > prev_inertia + 1e-9 * (1.0 + prev_inertia))
      throw ContractError("kmeans: objective increased between iterations");
    result.inertia_trace.push_back(inertia);
    prev_inertia = inertia;

    if (movement < tol) {
      result.converged = true;
      break;
    }
  }

  // Final pass: every row points at its nearest final centroid.
  for (std::size_t i = 0; i < n; ++i)
    result.assignments[i] = nearest_centroid(rows[i], centroids);
  result.sizes.assign(static_cast<std::size_t>(k), 0);
  for (int a : result.assignments) ++result.sizes[static_cast<std::size_t>(a)];
  result.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    result.inertia += sqdist(rows[i],
                             centroids[static_cast<std::size_t>(result.assignments[i])]);

  result.centroids.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const auto& raw = centroids[static_cast<std::size_t>(c)];
    if (features.standardized)
      result.centroids[static_cast<std::size_t>(c)] = {
          raw[0] * features.sd[0] + features.mean[0],
          raw[1] * features.sd[1] + features.mean[1]};
    else
      result.centroids[static_cast<std::size_t>(c)] = raw;
  }
  return result;
}

ClusterResult cluster_dataset(const LandscapeDataset& dataset, int k,
                              std::uint64_t seed, int max_iter, double tol) {
  const FeatureMatrix features = standardize(extract_features(dataset));
  ClusterResult result = kmeans(features, k, seed, max_iter, tol);
  std::vector<double> hour_sum(static_cast<std::size_t>(k), 0.0);
  std::vector<double> day_sum(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto c = static_cast<std::size_t>(result.assignments[i]);
    hour_sum[c] += static_cast<double>(dataset.records[i].imps_hour);
    day_sum[c] += static_cast<double>(dataset.records[i].imps_day);
  }
  result.mean_imps_hour.resize(static_cast<std::size_t>(k));
  result.mean_imps_day.resize(static_cast<std::size_t>(k));
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    const double cnt = static_cast<double>(result.sizes[c]);
    result.mean_imps_hour[c] =
        cnt > 0 ? hour_sum[c] / cnt : std::numeric_limits<double>::quiet_NaN();
    result.mean_imps_day[c] =
        cnt > 0 ? day_sum[c] / cnt : std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

MinorityCallout identify_minority_cluster(const ClusterResult& result) {
  if (result.k != 2 || result.mean_imps_hour.size() != 2)
    throw ContractError(
        "identify_minority_cluster: needs a k=2 result with impression means");
  MinorityCallout out;
  const double a = result.mean_imps_hour[0];
  const double b = result.mean_imps_hour[1];
  if (a == b) {
    out.rationale = "unresolved: clusters tie on mean hourly impressions (" +
                    csv::format_double(a) + ")";
    return out;
  }
  out.cluster = a > b ? 0 : 1;
  out.rationale = "cluster " + std::to_string(*out.cluster) +
                  " secures more hourly impressions (" + csv::format_double(a) +
                  " vs " + csv::format_double(b) + ")";
  return out;
}

VarianceScalingReport variance_scaling(const LandscapeDataset& dataset,
                                       int num_bins, BinningMode mode) {
  if (dataset.records.empty()) throw ContractError("variance_scaling: empty dataset");
  if (num_bins < 1) throw ContractError("variance_scaling: num_bins must be >= 1");

  std::vector<double> imps;
  imps.reserve(dataset.records.size());
  for (const AuctionRecord& r : dataset.records)
    imps.push_back(static_cast<double>(r.imps_hour));
  std::vector<double> sorted = imps;
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> edges;
  if (mode == BinningMode::quantile) {
    for (int i = 0; i <= num_bins; ++i)
      edges.push_back(
          quantile_sorted(sorted, static_cast<double>(i) / num_bins));
  } else {
    const double lo = sorted.front(), hi = sorted.back();
    for (int i = 0; i <= num_bins; ++i)
      edges.push_back(lo + (hi - lo) * static_cast<double>(i) / num_bins);
    edges.back() = hi;
  }
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  VarianceScalingReport report;
  report.mode = mode;
  report.requested_bins = num_bins;
  report.effective_bins =
      std::max(1, static_cast<int>(edges.size()) - 1);

  std::vector<std::vector<double>> bin_bids(
      static_cast<std::size_t>(report.effective_bins));
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const double x = imps[i];
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    long long idx = (it - edges.begin()) - 1;
    idx = std::clamp<long long>(idx, 0, report.effective_bins - 1);
    bin_bids[static_cast<std::size_t>(idx)].push_back(dataset.records[i].bid);
  }

  for (int b = 0; b < report.effective_bins; ++b) {
    VarianceBin bin;
    bin.low_edge = edges[static_cast<std::size_t>(b)];
    bin.high_edge = edges.size() > 1 ? edges[static_cast<std::size_t>(b) + 1]
                                     : edges[0];
    const auto& bids = bin_bids[static_cast<std::size_t>(b)];
    bin.count = bids.size();
    if (!bids.empty()) {
      double sum = 0.0;
      for (double v : bids) sum += v;
      bin.mean_bid = sum / static_cast<double>(bids.size());
    } else {
      bin.mean_bid = std::numeric_limits<double>::quiet_NaN();
    }
    bin.bid_variance = stats::sample_variance(bids);
    report.bins.push_back(bin);
  }
  return report;
}

SkewnessReport cluster_skewness(const LandscapeDataset& dataset,
                                const ClusterResult& result) {
  if (result.k != 2)
    throw ContractError("cluster_skewness: needs a k=2 clustering");
  if (result.assignments.size() != dataset.records.size())
    throw ContractError("cluster_skewness: clustering does not match dataset");

  std::vector<std::vector<double>> bids(2);
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    bids[static_cast<std::size_t>(result.assignments[i])].push_back(
        dataset.records[i].bid);

  SkewnessReport report;
  for (int c = 0; c < 2; ++c) {
    auto& values = bids[static_cast<std::size_t>(c)];
    if (values.size() < 3) {
      report.skew.push_back(std::numeric_limits<double>::quiet_NaN());
      report.median_bid.push_back(
          values.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : stats::summarize_column(values).median);
      continue;
    }
    const stats::ColumnSummary s = stats::summarize_column(values);
    report.skew.push_back(s.skew);
    report.median_bid.push_back(s.median);
  }

  // Re-derive impression means so the report works for any k=2 result.
  ClusterResult with_means = result;
  with_means.mean_imps_hour.assign(2, 0.0);
  std::array<double, 2> sums{0.0, 0.0};
  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto c = static_cast<std::size_t>(result.assignments[i]);
    sums[c] += static_cast<double>(dataset.records[i].imps_hour);
    ++counts[c];
  }
  for (std::size_t c = 0; c < 2; ++c)
    with_means.mean_imps_hour[c] =
        counts[c] ? sums[c] / static_cast<double>(counts[c])
                  : std::numeric_limits<double>::quiet_NaN();

  const MinorityCallout callout = identify_minority_cluster(with_means);
  report.minority_cluster = callout.cluster;
  if (!callout.cluster) {
    report.verdict = "unresolved: " + callout.rationale;
    return report;
  }
  const int m = *callout.cluster;
  const int other = 1 - m;
  report.consistent =
      report.median_bid[static_cast<std::size_t>(m)] <
          report.median_bid[static_cast<std::size_t>(other)] &&
      report.skew[static_cast<std::size_t>(m)] > 0.0;
  report.verdict = report.consistent
                       ? "consistent with low-bid concentration"
                       : "not consistent with low-bid concentration";
  return report;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw ContractError("adjusted_rand_index: label vectors differ in length");
  if (a.empty()) throw ContractError("adjusted_rand_index: empty labels");

  std::map<std::pair<int, int>, long long> cells;
  std::map<int, long long> row_sums, col_sums;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++row_sums[a[i]];
    ++col_sums[b[i]];
  }
  auto comb2 = [](long long x) {
    return static_cast<long double>(x) * (x - 1) / 2.0L;
  };
  long double index = 0.0L, sum_a = 0.0L, sum_b = 0.0L;
  for (const auto& [key, count] : cells) index += comb2(count);
  for (const auto& [label, count] : row_sums) sum_a += comb2(count);
  for (const auto& [label, count] : col_sums) sum_b += comb2(count);
  const long double total = comb2(static_cast<long long>(a.size()));
  const long double expected = total > 0 ? sum_a * sum_b / total : 0.0L;
  const long double max_index = (sum_a + sum_b) / 2.0L;
  if (max_index == expected) return 1.0;  // both partitions trivial
  return static_cast<double>((index - expected) / (max_index - expected));
}

void write_cluster_csv(const ClusterResult& result, std::ostream& out) {
  out << "cluster,size,mean_imps_hour,mean_imps_day\n";
  for (int c = 0; c < result.k; ++c)
    out << c << ',' << result.sizes[static_cast<std::size_t>(c)] << ','
        << fmt_stat(result.mean_imps_hour.empty()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : result.mean_imps_hour[static_cast<std::size_t>(c)])
        << ','
        << fmt_stat(result.mean_imps_day.empty()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : result.mean_imps_day[static_cast<std::size_t>(c)])
        << '\n';
}

void write_scatter_csv(const LandscapeDataset& dataset, const ClusterResult& result,
                       std::ostream& out) {
  if (result.assignments.size() != dataset.records.size())
    throw ContractError("write_scatter_csv: clustering does not match dataset");
  out << "bid,imps_hour,cluster\n";
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    out << csv::format_double(dataset.records[i].bid) << ','
        << dataset.records[i].imps_hour << ',' << result.assignments[i] << '\n';
}

void write_variance_csv(const VarianceScalingReport& report, std::ostream& out) {
  out << "bin,low_edge,high_edge,count,bid_variance\n";
  for (std::size_t b = 0; b < report.bins.size(); ++b)
    out << b << ',' << csv::format_double(report.bins[b].low_edge) << ','
        << csv::format_double(report.bins[b].high_edge) << ','
        << report.bins[b].count << ',' << fmt_stat(report.bins[b].bid_variance)
        << '\n';
}

}  // namespace mgbid
