#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mgbid/errors.hpp"

namespace mgbid::stats {

// Streaming central-moment accumulator (n, mean, M2..M4 power sums about the
// running mean). merge() combines two accumulators built over disjoint row
// ranges; the mean/M2 combination is the exact Chan et al. formula, and the
// M3/M4 combination is the Pebay extension:
//   d      = mean_b - mean_a,  n = n_a + n_b
//   M2     = M2a + M2b + d^2 * na*nb/n
//   M3     = M3a + M3b + d^3 * na*nb*(na-nb)/n^2 + 3d * (na*M2b - nb*M2a)/n
//   M4     = M4a + M4b + d^4 * na*nb*(na^2 - na*nb + nb^2)/n^3
//            + 6d^2 * (na^2*M2b + nb^2*M2a)/n^2 + 4d * (na*M3b - nb*M3a)/n
class MomentAccumulator {
 public:
  void push(double x) {
    const double n1 = static_cast<double>(n_);
    n_ += 1;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ -
           4.0 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
    m2_ += term1;
  }

  void merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    const double d2 = d * d;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d * d2 * na * nb * (na - nb) / (n * n) +
                      3.0 * d * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ +
                      d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                      4.0 * d * (na * o.m3_ - nb * m3_) / n;
    mean_ = (na * mean_ + nb * o.mean_) / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    n_ += o.n_;
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Population central moments (n denominators).
  double m2() const { return n_ ? m2_ / static_cast<double>(n_) : 0.0; }
  double m3() const { return n_ ? m3_ / static_cast<double>(n_) : 0.0; }
  double m4() const { return n_ ? m4_ / static_cast<double>(n_) : 0.0; }
  double variance_population() const { return m2(); }
  double variance_sample() const {
    return n_ >= 2 ? m2_ / static_cast<double>(n_ - 1)
                   : std::numeric_limits<double>::quiet_NaN();
  }
  // g1 = m3 / m2^{3/2}; NaN for constant data.
  double skewness() const {
    const double v = m2();
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return m3() / (v * std::sqrt(v));
  }
  // Excess kurtosis g2 = m4 / m2^2 - 3; NaN for constant data.
  double kurtosis_excess() const {
    const double v = m2();
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return m4() / (v * v) - 3.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

// Median of an already-sorted sequence: middle element for odd counts,
// arithmetic mean of the two middle elements for even counts.
inline double median_sorted(const std::vector<double>& sorted) {
  if (sorted.empty()) throw ContractError("median: empty input");
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double population_variance(const std::vector<double>& xs) {
  if (xs.empty()) throw ContractError("population_variance: empty input");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

// Column summary over a sorted copy. Sorting first makes every statistic
// independent of the input row order, bit for bit.
struct ColumnSummary {
  std::size_t n = 0;
  double mean = 0, sd = 0, median = 0, min = 0, max = 0, range = 0;
  double skew = 0, kurtosis = 0;  // NaN markers when undefined
};

inline ColumnSummary summarize_column(std::vector<double> values) {
  if (values.empty()) throw ContractError("summarize_column: empty column");
  std::sort(values.begin(), values.end());
  ColumnSummary s;
  s.n = values.size();
  s.min = values.front();
  s.max = values.back();
  s.range = s.max - s.min;
  s.median = median_sorted(values);
  double sum = 0.0;
  for (double x : values) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  double c2 = 0, c3 = 0, c4 = 0;
  for (double x : values) {
    const double d = x - s.mean;
    const double d2 = d * d;
    c2 += d2;
    c3 += d2 * d;
    c4 += d2 * d2;
  }
  const double n = static_cast<double>(s.n);
  const double m2 = c2 / n;
  s.sd = s.n >= 2 ? std::sqrt(c2 / (n - 1.0))
                  : std::numeric_limits<double>::quiet_NaN();
  if (m2 > 0.0) {
    s.skew = (c3 / n) / (m2 * std::sqrt(m2));
    s.kurtosis = (c4 / n) / (m2 * m2) - 3.0;
  } else {
    s.skew = std::numeric_limits<double>::quiet_NaN();
    s.kurtosis = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

}  // namespace mgbid::stats
