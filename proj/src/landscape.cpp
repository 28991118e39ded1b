#include "mgbid/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mgbid/csv.hpp"
#include "mgbid/errors.hpp"
#include "mgbid/rng.hpp"
#include "mgbid/stats.hpp"

namespace mgbid {

namespace {

constexpr const char* kCanonicalColumns[] = {
    "date",      "hour",      "adid_anonymized", "bid",        "imps_alltime",
    "imps_hour", "imps_day",  "imps_week",       "imps_month", "imps_year"};
constexpr std::size_t kNumColumns = 10;

std::string fmt_stat(double x) {
  if (std::isnan(x)) return "NaN";
  return csv::format_double(x);
}

bool on_bid_grid(double bid) {
  if (!(bid > 0.0 && bid < 50.0)) return false;
  const double snapped = static_cast<double>(std::llround(bid * 10.0)) / 10.0;
  return std::abs(bid - snapped) <= 1e-9;
}

double snap_to_grid(double bid) {
  long long k = std::llround(bid * 10.0);
  k = std::clamp<long long>(k, 1, 499);
  return static_cast<double>(k) / 10.0;
}

struct RowSink {
  ParseMode mode;
  ParseDiagnostics* diag;

  // Returns false so callers can `return sink.reject(...)` out of a row.
  bool reject(std::size_t line_no, const std::string& reason) {
    if (mode == ParseMode::strict)
      throw SchemaError("line " + std::to_string(line_no) + ": " + reason);
    if (diag) {
      ++diag->rows_dropped;
      ++diag->drop_tally[reason];
      if (diag->messages.size() < 20)
        diag->messages.push_back("line " + std::to_string(line_no) + ": " + reason);
    }
    return false;
  }
};

long long poisson_or_zero(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<long long>(mean)(rng);
}

// Symmetric Beta(alpha, alpha) variate via the two-gamma construction.
double symmetric_beta(Rng& rng, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  const double sum = x + y;
  return sum > 0.0 ? x / sum : 0.5;
}

}  // namespace

LandscapeDataset parse_landscape_csv(std::istream& in, ParseMode mode,
                                     ParseDiagnostics* diag) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty input: missing header row");

  const auto header = csv::split_line(line);
  std::vector<int> column_of(kNumColumns, -1);
  for (std::size_t col = 0; col < header.size(); ++col) {
    const std::string_view name = header[col];
    if (name == "decoded_date") continue;  // regenerated on demand, not stored
    bool known = false;
    for (std::size_t want = 0; want < kNumColumns; ++want) {
      if (name != kCanonicalColumns[want]) continue;
      if (column_of[want] != -1)
        throw SchemaError("duplicate column: " + std::string(name));
      column_of[want] = static_cast<int>(col);
      known = true;
      break;
    }
    if (!known) throw SchemaError("unknown column: " + std::string(name));
  }
  for (std::size_t want = 0; want < kNumColumns; ++want)
    if (column_of[want] == -1)
      throw SchemaError(std::string("missing column: ") + kCanonicalColumns[want]);

  LandscapeDataset dataset;
  RowSink sink{mode, diag};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (diag) ++diag->rows_read;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      sink.reject(line_no, "wrong field count");
      continue;
    }
    auto field = [&](std::size_t want) {
      return fields[static_cast<std::size_t>(column_of[want])];
    };

    AuctionRecord rec;
    long long hour_raw = 0;
    bool ok = csv::parse_long(field(0), rec.date) &&
              csv::parse_long(field(1), hour_raw) &&
              csv::parse_long(field(2), rec.adid) &&
              csv::parse_double(field(3), rec.bid) &&
              csv::parse_long(field(4), rec.imps_alltime) &&
              csv::parse_long(field(5), rec.imps_hour) &&
              csv::parse_long(field(6), rec.imps_day) &&
              csv::parse_long(field(7), rec.imps_week) &&
              csv::parse_long(field(8), rec.imps_month) &&
              csv::parse_long(field(9), rec.imps_year);
    if (!ok) {
      sink.reject(line_no, "unparseable numeric cell");
      continue;
    }
    rec.hour = static_cast<int>(hour_raw);
    if (rec.date <= 0) {
      sink.reject(line_no, "date serial must be positive");
      continue;
    }
    if (hour_raw < 0 || hour_raw > 23) {
      sink.reject(line_no, "hour outside 0..23");
      continue;
    }
    if (!on_bid_grid(rec.bid)) {
      sink.reject(line_no, "bid not on the 0.1 grid inside (0, 50)");
      continue;
    }
    if (rec.imps_alltime < 0 || rec.imps_hour < 0 || rec.imps_day < 0 ||
        rec.imps_week < 0 || rec.imps_month < 0 || rec.imps_year < 0) {
      sink.reject(line_no, "negative impression count");
      continue;
    }
    if (mode == ParseMode::strict &&
        !(rec.imps_hour <= rec.imps_day && rec.imps_day <= rec.imps_week &&
          rec.imps_week <= rec.imps_month && rec.imps_month <= rec.imps_year &&
          rec.imps_year <= rec.imps_alltime)) {
      sink.reject(line_no, "impression horizons out of order");
      continue;
    }
    dataset.records.push_back(rec);
    if (diag) ++diag->rows_kept;
  }
  return dataset;
}

LandscapeDataset load_landscape_csv(const std::string& path, ParseMode mode,
                                    ParseDiagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset file: " + path);
  return parse_landscape_csv(in, mode, diag);
}

void write_landscape_csv(const LandscapeDataset& dataset, std::ostream& out) {
  out << "date,hour,adid_anonymized,bid,imps_alltime,imps_hour,imps_day,"
         "imps_week,imps_month,imps_year\n";
  for (const AuctionRecord& r : dataset.records)
    out << r.date << ',' << r.hour << ',' << r.adid << ','
        << csv::format_double(r.bid) << ',' << r.imps_alltime << ','
        << r.imps_hour << ',' << r.imps_day << ',' << r.imps_week << ','
        << r.imps_month << ',' << r.imps_year << '\n';
}

CivilDate decode_date(long long serial) {
  if (serial <= 0) throw ContractError("decode_date: serial must be positive");
  // Serials 1..59 anchor at 1899-12-31; 60 and later carry the two-day offset
  // from 1899-12-30 that compensates for the fictitious 1900-02-29.
  const long long days = serial <= 60 ? serial - 25568 : serial - 25569;
  // Civil-from-days on the proleptic Gregorian calendar, day 0 = 1970-01-01.
  long long z = days + 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

std::string to_iso(const CivilDate& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
  return buf;
}

std::vector<SummaryRow> summarize(const LandscapeDataset& dataset) {
  if (dataset.records.empty()) throw ContractError("summarize: empty dataset");
  const std::size_t n = dataset.records.size();
  std::vector<SummaryRow> rows;
  auto add = [&](const char* name, auto getter) {
    std::vector<double> column;
    column.reserve(n);
    for (const AuctionRecord& r : dataset.records)
      column.push_back(static_cast<double>(getter(r)));
    const stats::ColumnSummary s = stats::summarize_column(std::move(column));
    SummaryRow row;
    row.variable = name;
    row.n = s.n;
    row.mean = s.mean;
    row.sd = s.sd;
    row.median = s.median;
    row.min = s.min;
    row.max = s.max;
    row.range = s.range;
    row.skew = s.skew;
    row.kurtosis = s.kurtosis;
    rows.push_back(std::move(row));
  };
  add("date", [](const AuctionRecord& r) { return r.date; });
  add("hour", [](const AuctionRecord& r) { return r.hour; });
  add("adid_anonymized", [](const AuctionRecord& r) { return r.adid; });
  add("bid", [](const AuctionRecord& r) { return r.bid; });
  add("imps_alltime", [](const AuctionRecord& r) { return r.imps_alltime; });
  add("imps_hour", [](const AuctionRecord& r) { return r.imps_hour; });
  add("imps_day", [](const AuctionRecord& r) { return r.imps_day; });
  add("imps_week", [](const AuctionRecord& r) { return r.imps_week; });
  add("imps_month", [](const AuctionRecord& r) { return r.imps_month; });
  add("imps_year", [](const AuctionRecord& r) { return r.imps_year; });
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "variable,n,mean,sd,median,min,max,range,skew,kurtosis\n";
  for (const SummaryRow& r : rows)
    out << r.variable << ',' << r.n << ',' << fmt_stat(r.mean) << ','
        << fmt_stat(r.sd) << ',' << fmt_stat(r.median) << ',' << fmt_stat(r.min)
        << ',' << fmt_stat(r.max) << ',' << fmt_stat(r.range) << ','
        << fmt_stat(r.skew) << ',' << fmt_stat(r.kurtosis) << '\n';
}

void write_summary_json(const std::vector<SummaryRow>& rows, std::ostream& out) {
  nlohmann::json j;
  j["conventions"] = {
      {"sd", "sample standard deviation, n-1 denominator; NaN for n = 1"},
      {"skew", "g1 = m3 / m2^1.5 with population central moments"},
      {"kurtosis", "excess g2 = m4 / m2^2 - 3 with population central moments"},
      {"undefined", "JSON null (constant column or single record)"}};
  auto number_or_null = [](double x) {
    return std::isnan(x) ? nlohmann::json() : nlohmann::json(x);
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const SummaryRow& r : rows) {
    arr.push_back({{"variable", r.variable},
                   {"n", r.n},
                   {"mean", number_or_null(r.mean)},
                   {"sd", number_or_null(r.sd)},
                   {"median", number_or_null(r.median)},
                   {"min", number_or_null(r.min)},
                   {"max", number_or_null(r.max)},
                   {"range", number_or_null(r.range)},
                   {"skew", number_or_null(r.skew)},
                   {"kurtosis", number_or_null(r.kurtosis)}});
  }
  j["columns"] = std::move(arr);
  out << j.dump(2) << '\n';
}

const char* to_string(SynthModel model) {
  switch (model) {
    case SynthModel::grid: return "grid";
    case SynthModel::two_regime: return "two_regime";
    case SynthModel::supply_curve: return "supply_curve";
    case SynthModel::heteroscedastic: return "heteroscedastic";
  }
  return "unknown";
}

SynthModel synth_model_from_string(const std::string& name) {
  if (name == "grid") return SynthModel::grid;
  if (name == "two_regime" || name == "two-regime") return SynthModel::two_regime;
  if (name == "supply_curve" || name == "supply-curve")
    return SynthModel::supply_curve;
  if (name == "heteroscedastic") return SynthModel::heteroscedastic;
  throw ConfigError("model: unknown synthetic model '" + name + "'");
}

namespace {

void validate_gen(const GenConfig& c) {
  if (c.num_ads < 1) throw ConfigError("num_ads: must be >= 1");
  if (c.date_start <= 0) throw ConfigError("date_start: must be positive");
  if (c.date_end < c.date_start)
    throw ConfigError("date_end: must be >= date_start");
  if (c.hours.empty()) throw ConfigError("hours: must be non-empty");
  for (int h : c.hours)
    if (h < 0 || h > 23) throw ConfigError("hours: entries must be in 0..23");
  if (c.model != SynthModel::grid && c.rows < 1)
    throw ConfigError("rows: sampled models need rows >= 1");
  if (c.model == SynthModel::two_regime) {
    if (!(c.regime0_weight >= 0.0 && c.regime0_weight <= 1.0))
      throw ConfigError("regime0_weight: must be in [0, 1]");
    for (const RegimeSpec* r : {&c.regime0, &c.regime1}) {
      if (!(r->bid_lo > 0.0 && r->bid_lo < r->bid_hi && r->bid_hi <= 50.0))
        throw ConfigError("regime bid band: need 0 < lo < hi <= 50");
      if (!(r->imps_hour_mean >= 0.0 && r->imps_day_mean >= 0.0))
        throw ConfigError("regime impression means: must be >= 0");
    }
  }
  if (c.model == SynthModel::heteroscedastic) {
    if (c.bin_bid_variance.empty())
      throw ConfigError("bin_bid_variance: must be non-empty");
    for (double v : c.bin_bid_variance)
      if (!(v > 0.0 && v < 620.0))
        throw ConfigError(
            "bin_bid_variance: each target must lie in (0, 620), the variance "
            "range reachable on the 49.8-wide bid support");
  }
}

nlohmann::json gen_manifest(const GenConfig& c, std::size_t rows_emitted) {
  nlohmann::json j;
  j["provenance"] = "synthetic";
  j["model"] = to_string(c.model);
  j["num_ads"] = c.num_ads;
  j["date_start"] = c.date_start;
  j["date_end"] = c.date_end;
  j["hours"] = c.hours;
  j["rows_requested"] = c.rows;
  j["rows_emitted"] = rows_emitted;
  j["seed"] = c.seed;
  if (c.model == SynthModel::two_regime) {
    auto regime = [](const RegimeSpec& r) {
      return nlohmann::json{{"bid_lo", r.bid_lo},
                            {"bid_hi", r.bid_hi},
                            {"imps_hour_mean", r.imps_hour_mean},
                            {"imps_day_mean", r.imps_day_mean}};
    };
    j["regime0"] = regime(c.regime0);
    j["regime1"] = regime(c.regime1);
    j["regime0_weight"] = c.regime0_weight;
  }
  if (c.model == SynthModel::supply_curve || c.model == SynthModel::grid) {
    j["supply_base"] = c.supply_base;
    j["supply_slope"] = c.supply_slope;
  }
  if (c.model == SynthModel::heteroscedastic)
    j["bin_bid_variance"] = c.bin_bid_variance;
  return j;
}

// Deterministic roll-ups keep every record valid under strict parsing: each
// horizon is a fixed multiple of the one below it.
void fill_horizon_chain(AuctionRecord& rec, long long imps_hour, long long imps_day) {
  rec.imps_hour = imps_hour;
  rec.imps_day = std::max(imps_day, imps_hour);
  rec.imps_week = rec.imps_day * 7;
  rec.imps_month = rec.imps_day * 30;
  rec.imps_year = rec.imps_day * 365;
  rec.imps_alltime = rec.imps_year;
}

}  // namespace

SynthResult synth_generate(const GenConfig& config) {
  validate_gen(config);
  SynthResult result;
  auto& records = result.dataset.records;
  Rng rng(config.seed);

  const long long num_dates = config.date_end - config.date_start + 1;
  auto draw_context = [&](AuctionRecord& rec) {
    rec.adid = 1 + static_cast<long long>(index_draw(rng, static_cast<std::size_t>(config.num_ads)));
    rec.date = config.date_start +
               static_cast<long long>(index_draw(rng, static_cast<std::size_t>(num_dates)));
    rec.hour = config.hours[index_draw(rng, config.hours.size())];
  };

  switch (config.model) {
    case SynthModel::grid: {
      // Exhaustive bid grid per (ad, date, hour); impressions follow the
      // supply line deterministically, so grid output is seed-independent.
      for (int ad = 1; ad <= config.num_ads; ++ad)
        for (long long date = config.date_start; date <= config.date_end; ++date)
          for (int hour : config.hours)
            for (int k = 1; k <= 499; ++k) {
              AuctionRecord rec;
              rec.adid = ad;
              rec.date = date;
              rec.hour = hour;
              rec.bid = k / 10.0;
              const double expected =
                  std::max(0.0, config.supply_base + config.supply_slope * rec.bid);
              const long long hour_imps = std::llround(expected);
              fill_horizon_chain(rec, hour_imps, hour_imps * 13);
              records.push_back(rec);
            }
      break;
    }
    case SynthModel::two_regime: {
      for (std::size_t r = 0; r < config.rows; ++r) {
        AuctionRecord rec;
        draw_context(rec);
        const bool low = unit_draw(rng) < config.regime0_weight;
        const RegimeSpec& regime = low ? config.regime0 : config.regime1;
        rec.bid = snap_to_grid(uniform_draw(rng, regime.bid_lo, regime.bid_hi));
        const long long hour_imps = poisson_or_zero(rng, regime.imps_hour_mean);
        const long long day_imps = poisson_or_zero(rng, regime.imps_day_mean);
        fill_horizon_chain(rec, hour_imps, day_imps);
        records.push_back(rec);
        result.labels.push_back(low ? 0 : 1);
      }
      break;
    }
    case SynthModel::supply_curve: {
      for (std::size_t r = 0; r < config.rows; ++r) {
        AuctionRecord rec;
        draw_context(rec);
        rec.bid = static_cast<double>(1 + index_draw(rng, 499)) / 10.0;
        const double expected = config.supply_base + config.supply_slope * rec.bid;
        const long long hour_imps = poisson_or_zero(rng, expected);
        fill_horizon_chain(rec, hour_imps, hour_imps * 13);
        records.push_back(rec);
      }
      break;
    }
    case SynthModel::heteroscedastic: {
      const std::size_t bins = config.bin_bid_variance.size();
      constexpr double kWidth = 49.8;
      std::vector<double> alpha;
      for (double v : config.bin_bid_variance)
        alpha.push_back((kWidth * kWidth / (4.0 * v) - 1.0) / 2.0);
      for (std::size_t r = 0; r < config.rows; ++r) {
        const std::size_t bin = r % bins;
        AuctionRecord rec;
        draw_context(rec);
        // Impression bands 100+200*bin .. 150+200*bin leave gaps between
        // bins, so downstream quantile edges cannot split a band.
        const long long hour_imps =
            100 + 200 * static_cast<long long>(bin) +
            static_cast<long long>(index_draw(rng, 51));
        rec.bid = snap_to_grid(0.1 + kWidth * symmetric_beta(rng, alpha[bin]));
        fill_horizon_chain(rec, hour_imps, hour_imps * 13);
        records.push_back(rec);
        result.labels.push_back(static_cast<int>(bin));
      }
      break;
    }
  }

  result.dataset.provenance = Provenance::synthetic;
  result.dataset.generator_manifest = gen_manifest(config, records.size()).dump(2);
  return result;
}

}  // namespace mgbid
