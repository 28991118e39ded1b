#pragma once
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgbid/landscape.hpp"

namespace mgbid {

// Rows of (bid, imps_hour). When standardized, mean/sd record the raw-unit
// transform so centroids can be mapped back exactly.
struct FeatureMatrix {
  std::vector<std::array<double, 2>> rows;
  bool standardized = false;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> sd{1.0, 1.0};
};

FeatureMatrix extract_features(const LandscapeDataset& dataset);
// Zero mean, unit (population) SD per column. DataError on a constant column.
FeatureMatrix standardize(const FeatureMatrix& features);

struct ClusterResult {
  int k = 0;
  std::vector<int> assignments;
  // Raw-unit coordinates when the clustered matrix carried a
  // standardization record, else the clustered space itself.
  std::vector<std::array<double, 2>> centroids;
  std::vector<std::size_t> sizes;
  std::vector<double> mean_imps_hour;  // filled by cluster_dataset
  std::vector<double> mean_imps_day;   // filled by cluster_dataset
  double inertia = 0.0;                // in the clustered space
  std::vector<double> inertia_trace;   // one entry per Lloyd iteration
  int iterations = 0;
  bool converged = false;
};

// Lloyd iteration with seeded kmeans++ initialization. Distance ties assign
// to the lower cluster index; an emptied cluster is re-seeded at the point
// farthest from its own centroid. ContractError when n < k; DataError when
// all rows are identical and k >= 2.
ClusterResult kmeans(const FeatureMatrix& features, int k, std::uint64_t seed,
                     int max_iter = 100, double tol = 1e-7);

// standardize -> kmeans -> per-cluster impression means from the dataset rows.
ClusterResult cluster_dataset(const LandscapeDataset& dataset, int k,
                              std::uint64_t seed, int max_iter = 100,
                              double tol = 1e-7);

struct MinorityCallout {
  std::optional<int> cluster;  // empty when tied
  std::string rationale;
};

// The minority (winning) cluster is the one with strictly greater mean hourly
// impressions. Requires k = 2 with populated impression means.
MinorityCallout identify_minority_cluster(const ClusterResult& result);

enum class BinningMode { quantile, equal_width };

struct VarianceBin {
  double low_edge = 0.0;
  double high_edge = 0.0;  // half-open [low, high), last bin closed
  std::size_t count = 0;
  double mean_bid = 0.0;
  double bid_variance = 0.0;  // sample variance, NaN when count < 2
};

struct VarianceScalingReport {
  BinningMode mode = BinningMode::quantile;
  int requested_bins = 0;
  int effective_bins = 0;  // after collapsing duplicate quantile edges
  std::vector<VarianceBin> bins;
};

VarianceScalingReport variance_scaling(const LandscapeDataset& dataset,
                                       int num_bins = 6,
                                       BinningMode mode = BinningMode::quantile);

struct SkewnessReport {
  std::vector<double> skew;        // per cluster, NaN below 3 rows
  std::vector<double> median_bid;  // per cluster
  std::optional<int> minority_cluster;
  bool consistent = false;
  // "consistent with low-bid concentration" when the minority cluster has the
  // strictly lower median bid and positive skew; "unresolved" on a tie.
  std::string verdict;
};

SkewnessReport cluster_skewness(const LandscapeDataset& dataset,
                                const ClusterResult& result);

// Chance-corrected partition agreement; 1.0 when the pair-counting index has
// a zero denominator (both partitions trivially agree).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// CSV header: cluster,size,mean_imps_hour,mean_imps_day
void write_cluster_csv(const ClusterResult& result, std::ostream& out);
// CSV header: bid,imps_hour,cluster
void write_scatter_csv(const LandscapeDataset& dataset, const ClusterResult& result,
                       std::ostream& out);
// CSV header: bin,low_edge,high_edge,count,bid_variance
void write_variance_csv(const VarianceScalingReport& report, std::ostream& out);

}  // namespace mgbid
