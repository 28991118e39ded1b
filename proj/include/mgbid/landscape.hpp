#pragma once
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mgbid {

// One bid-landscape row: impressions obtainable at a bid level, per horizon.
struct AuctionRecord {
  long long date = 0;  // spreadsheet serial day number
  int hour = 0;
  long long adid = 0;
  double bid = 0.0;  // on the 0.1 grid, open interval (0, 50)
  long long imps_alltime = 0;
  long long imps_hour = 0;
  long long imps_day = 0;
  long long imps_week = 0;
  long long imps_month = 0;
  long long imps_year = 0;
};

enum class Provenance { real_licensed, synthetic };

struct LandscapeDataset {
  std::vector<AuctionRecord> records;
  Provenance provenance = Provenance::real_licensed;
  std::string generator_manifest;  // JSON text, set for synthetic datasets
};

enum class ParseMode { strict, lenient };

struct ParseDiagnostics {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;
  std::map<std::string, std::size_t> drop_tally;  // reason -> count
  std::vector<std::string> messages;  // line-numbered, first 20 kept verbatim
};

// Column header is mapped by exact name; all ten canonical columns must be
// present, an extra decoded_date column is tolerated and ignored, any other
// extra column is a schema error. STRICT throws a line-numbered SchemaError on
// the first bad row and additionally enforces the horizon chain
// imps_hour <= imps_day <= ... <= imps_alltime; LENIENT drops bad rows into
// the diagnostics tally and does not check the chain.
LandscapeDataset parse_landscape_csv(std::istream& in, ParseMode mode,
                                     ParseDiagnostics* diag = nullptr);
LandscapeDataset load_landscape_csv(const std::string& path, ParseMode mode,
                                    ParseDiagnostics* diag = nullptr);

// Canonical ten-column CSV; numeric round-trip is bit exact.
void write_landscape_csv(const LandscapeDataset& dataset, std::ostream& out);

struct CivilDate {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31
};

// 1900-epoch spreadsheet convention: serial 1 is 1900-01-01. Serial 60 is the
// fictitious 1900-02-29 kept by spreadsheets for Lotus compatibility; it has
// no calendar equivalent and normalizes to 1900-03-01 (colliding with 61).
CivilDate decode_date(long long serial);
std::string to_iso(const CivilDate& date);

struct SummaryRow {
  std::string variable;
  std::size_t n = 0;
  double mean = 0, sd = 0, median = 0, min = 0, max = 0, range = 0;
  double skew = 0, kurtosis = 0;  // NaN when undefined (constant column)
};

// One row per numeric column in canonical column order. Conventions: sample
// SD (n-1), g1/g2 from population central moments, excess kurtosis; a single
// record reports SD as NaN; constant columns report NaN skew/kurtosis.
std::vector<SummaryRow> summarize(const LandscapeDataset& dataset);

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
// JSON includes a "conventions" object naming the estimator choices.
void write_summary_json(const std::vector<SummaryRow>& rows, std::ostream& out);

enum class SynthModel { grid, two_regime, supply_curve, heteroscedastic };

const char* to_string(SynthModel model);
SynthModel synth_model_from_string(const std::string& name);  // ConfigError on unknown

// Uniform bid band plus impression level targets for one mixture component.
struct RegimeSpec {
  double bid_lo = 0.1;
  double bid_hi = 25.0;
  double imps_hour_mean = 74.248105;
  double imps_day_mean = 1143.596414;
};

struct GenConfig {
  SynthModel model = SynthModel::grid;
  int num_ads = 1;
  long long date_start = 43082;
  long long date_end = 43082;  // inclusive
  std::vector<int> hours = {13};
  std::size_t rows = 0;  // sampled models only; grid size is combinatorial
  std::uint64_t seed = 0;

  // two_regime: low-bid/high-impression vs high-bid/low-impression mixture
  RegimeSpec regime0{0.1, 25.0, 74.248105, 1143.596414};
  RegimeSpec regime1{25.0, 50.0, 23.884666, 282.998350};
  double regime0_weight = 0.5;

  // supply_curve: expected hourly impressions = base + slope * bid
  double supply_base = 50.0;
  double supply_slope = 2.0;

  // heteroscedastic: per-impression-bin bid variance schedule; bids are
  // symmetric Beta draws over the full grid width, so each target must lie
  // in (0, 620) = (0, width^2/4)
  std::vector<double> bin_bid_variance = {220, 192, 164, 136, 108, 80};
};

struct SynthResult {
  LandscapeDataset dataset;
  // Generator component per row: regime id (two_regime), variance-bin id
  // (heteroscedastic), empty otherwise.
  std::vector<int> labels;
};

SynthResult synth_generate(const GenConfig& config);

}  // namespace mgbid
