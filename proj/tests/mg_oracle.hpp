#pragma once
// Deliberately naive re-implementation of the minority-game dynamics, written
// as a straight-line transcription of the rules with flat arrays and no code
// shared with the engine. Tests compare engine trajectories against this
// oracle bit for bit. The generator draw protocol (raw mt19937_64 words: low
// bit for signs, modulo for indices) is duplicated inline on purpose.
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mg_oracle {

struct Result {
  std::vector<double> attendance;
  std::vector<int> minority_signs;
  std::vector<std::uint32_t> history_indices;
  std::vector<std::vector<double>> final_valuations;
  int zero_attendance_rounds = 0;
};

inline Result run(int n, int m, int s, int rounds, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto draw_sign = [&]() { return (gen() & 1ull) ? +1 : -1; };
  auto draw_index = [&](std::size_t k) {
    return static_cast<std::size_t>(gen() % k);
  };

  const std::size_t table_len = std::size_t{1} << m;
  // tables[i][a][e] flattened as ((i*s)+a)*table_len + e
  std::vector<int> tables(static_cast<std::size_t>(n) * s * table_len);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
    for (std::size_t a = 0; a < static_cast<std::size_t>(s); ++a)
      for (std::size_t e = 0; e < table_len; ++e)
        tables[(i * s + a) * table_len + e] = draw_sign();

  std::vector<int> history(static_cast<std::size_t>(m));
  for (auto& h : history) h = draw_sign();

  std::vector<std::vector<double>> val(
      static_cast<std::size_t>(n),
      std::vector<double>(static_cast<std::size_t>(s), 0.0));
  std::vector<int> active(static_cast<std::size_t>(n), 0);

  auto pick_active = [&](std::size_t i) {
    double best = val[i][0];
    for (double v : val[i])
      if (v > best) best = v;
    std::vector<int> tied;
    for (int a = 0; a < s; ++a)
      if (val[i][static_cast<std::size_t>(a)] == best) tied.push_back(a);
    if (tied.size() == 1) return tied[0];
    return tied[draw_index(tied.size())];
  };
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
    active[i] = pick_active(i);

  Result res;
  for (int t = 0; t < rounds; ++t) {
    std::uint32_t idx = 0;
    for (int h : history) idx = (idx << 1) | (h == 1 ? 1u : 0u);

    long long sum = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      sum += tables[(i * s + static_cast<std::size_t>(active[i])) * table_len + idx];
    const double attendance =
        static_cast<double>(sum) / std::sqrt(static_cast<double>(n));

    int minority, hist_sign;
    if (sum == 0) {
      minority = draw_sign();
      hist_sign = -minority;
      ++res.zero_attendance_rounds;
    } else {
      hist_sign = sum > 0 ? 1 : -1;
      minority = -hist_sign;
    }

    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      for (std::size_t a = 0; a < static_cast<std::size_t>(s); ++a)
        val[i][a] -= attendance * tables[(i * s + a) * table_len + idx];

    for (std::size_t h = 0; h + 1 < history.size(); ++h) history[h] = history[h + 1];
    history.back() = hist_sign;

    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      active[i] = pick_active(i);

    res.attendance.push_back(attendance);
    res.minority_signs.push_back(minority);
    res.history_indices.push_back(idx);
  }
  res.final_valuations = val;
  return res;
}

}  // namespace mg_oracle
