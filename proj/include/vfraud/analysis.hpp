#pragma once

// Scenario-level metrics computed from experiment logs, expectation checks,
// figure tables and the concurrent batch runner.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfraud/engine.hpp"
#include "vfraud/metrics.hpp"

namespace vfraud {

/// Shortest round-trip decimal form; used in every CSV so reruns are
/// byte-identical.
std::string format_double(double v);

// Named metrics (avg over repeats unless suffixed _min/_max):
//   rfn_public/<policy>/<arm>        median daily public R_FN
//   rfn_monetized/<policy>/<arm>     same over ad views, monetized counter
//   rfn_gap/<policy>/<arm>           rfn_monetized - rfn_public
//   rfp/<policy>/<arm>               pooled R_FP of a real-user arm
//   rfn_public_workday|dayoff/...    medians split by the NAT day pattern
//   detection_day/<policy>/<arm>     first day with a discounted view, -1 if none
//   linearity_r2/<policy>/<arm>      R^2 of cumulative counted views vs day
//   daily_public/<policy>/<arm>/<d>  counted views on day d (timeline reports)
//   suspended/<policy>/<arm>         suspension day of the arm's uploader, -1 if none
//   monetized_gross/<policy>/<arm>   monetized views on days with ads delivered
//   public_ads/<policy>/<arm>        public views on the same days
//   monetized_removed/<policy>/<arm> monetized views removed by suspension
//   fit_k|fit_threshold|fit_r2|fit_points/<policy>   decay fit over arms tagged w
struct ScenarioMetrics {
  std::string scenario;
  std::map<std::string, double> values;
  std::vector<std::string> csv_rows;  // without header
  std::vector<std::string> notes;     // e.g. fit failures
};

inline constexpr std::string_view kMetricsColumns =
    "scenario,policy,repeat,arm,day,generated,public_counted,monetized_counted,ad_views,ratio_public,ratio_monetized";

/// All logs must belong to one scenario. Counters come from final_counters.
ScenarioMetrics compute_metrics(const std::vector<ExperimentLog>& logs);
std::string metrics_csv(const ScenarioMetrics& m);

struct ExpectationResult {
  std::string scenario;
  Expectation expectation;
  std::optional<double> measured;
  bool passed = false;
};

/// Value of a metric name, or of "a - b" for two names; nullopt if missing.
std::optional<double> metric_value(const ScenarioMetrics& m, std::string_view expr);

/// A missing metric is a failed check, not an error.
std::vector<ExpectationResult> verify_expectations(const Scenario& s, const ScenarioMetrics& m);
std::string describe(const ExpectationResult& r);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Figure-equivalent tables for one scenario's logs, chosen by the
/// scenario's report layout.
std::vector<Table> report_tables(const std::vector<ExperimentLog>& logs, const ScenarioMetrics& m);

enum class TableFormat : std::uint8_t { Csv, PlotData };
TableFormat parse_table_format(std::string_view s);

/// Writes <dir>/<table>.csv or <dir>/<table>.dat; returns the paths.
std::vector<std::filesystem::path> write_tables(const std::vector<Table>& tables, TableFormat format,
                                                const std::filesystem::path& dir);

/// Reads every run below `log_dir`, groups by scenario and writes tables
/// and metrics.csv under `out_dir/<scenario>/`. Throws Io on an empty or
/// incomplete log tree.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& log_dir, TableFormat format,
                                                const std::filesystem::path& out_dir);

/// Decay fit over the runs below `log_dir` (arms tagged w). With an empty
/// policy the first policy found is used.
FitResult fit_from_logs(const std::filesystem::path& log_dir, const std::string& policy);

struct BatchOptions {
  std::filesystem::path out_dir;  // empty: keep logs in memory only
  int threads = 0;                // 0: hardware concurrency
  bool resume = false;
  bool keep_logs = false;
};

struct ScenarioResult {
  Scenario scenario;
  ScenarioMetrics metrics;
  std::vector<ExpectationResult> checks;
  std::vector<ExperimentLog> logs;  // only with keep_logs
  std::string error;                // non-empty if a run failed
};

/// Runs every (scenario, policy, repeat) concurrently, each with isolated
/// state, then computes metrics and checks per scenario.
std::vector<ScenarioResult> run_batch(const std::vector<Scenario>& scenarios, const BatchOptions& opts);

/// Human-readable summary: one line per expectation plus fit lines.
std::string summarize(const std::vector<ScenarioResult>& results);

}  // namespace vfraud
