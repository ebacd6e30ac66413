#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "vfraud/analysis.hpp"
#include "vfraud/error.hpp"
#include "vfraud/logio.hpp"

namespace vfraud {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> metrics_for(const std::string& layout) {
  if (layout == "portals" || layout == "sweep") return {"rfn_public", "rfn_public_min", "rfn_public_max"};
  if (layout == "bars") return {"rfn_public", "rfn_public_min", "rfn_public_max", "rfp", "rfp_min", "rfp_max"};
  if (layout == "matrix" || layout == "timeline") return {"rfn_public"};
  if (layout == "nat") return {"rfn_public", "rfn_public_workday", "rfn_public_dayoff"};
  if (layout == "monetized") return {"rfn_public", "rfn_monetized", "rfn_gap"};
  if (layout == "advertiser") return {"monetized_gross", "public_ads", "suspended", "monetized_removed"};
  if (layout == "detection" || layout == "prefix") return {"detection_day", "rfn_public"};
  if (layout == "linearity") return {"rfn_public", "linearity_r2"};
  return {"rfn_public", "rfn_monetized", "rfp"};
}

std::vector<std::string> policies_of(const std::vector<ExperimentLog>& logs) {
  std::vector<std::string> out;
  for (const auto& l : logs) {
    if (std::find(out.begin(), out.end(), l.policy) == out.end()) out.push_back(l.policy);
  }
  return out;
}

std::string lookup(const ScenarioMetrics& m, const std::string& name) {
  auto it = m.values.find(name);
  return it == m.values.end() ? std::string() : format_double(it->second);
}

Table arm_table(const std::vector<ExperimentLog>& logs, const ScenarioMetrics& m) {
  const auto& arms = logs.front().arms;
  const std::string layout = logs.front().report;
  std::set<std::string> tag_keys;
  for (const auto& a : arms) {
    for (const auto& [k, _] : a.tags) tag_keys.insert(k);
  }
  Table t;
  t.name = m.scenario;
  t.columns = {"policy", "arm"};
  t.columns.insert(t.columns.end(), tag_keys.begin(), tag_keys.end());
  const auto metric_names = metrics_for(layout);
  t.columns.insert(t.columns.end(), metric_names.begin(), metric_names.end());
  for (const auto& p : policies_of(logs)) {
    for (const auto& a : arms) {
      std::vector<std::string> row = {p, a.label};
      for (const auto& k : tag_keys) {
        auto it = a.tags.find(k);
        row.push_back(it == a.tags.end() ? "" : it->second);
      }
      for (const auto& name : metric_names) row.push_back(lookup(m, name + "/" + p + "/" + a.label));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table timeline_table(const std::vector<ExperimentLog>& logs, const ScenarioMetrics& m) {
  Table t;
  t.name = m.scenario + "-timeline";
  t.columns = {"day"};
  std::vector<std::string> keys;
  for (const auto& p : policies_of(logs)) {
    for (const auto& a : logs.front().arms) keys.push_back(p + "/" + a.label);
  }
  t.columns.insert(t.columns.end(), keys.begin(), keys.end());
  for (int d = 0; d < logs.front().days; ++d) {
    std::vector<std::string> row = {std::to_string(d)};
    for (const auto& k : keys) row.push_back(lookup(m, "daily_public/" + k + "/" + std::to_string(d)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Per-day ratios for distribution plots (NAT boxplots) and cumulative
// counts (linearity).
Table daily_table(const std::vector<ExperimentLog>& logs, const std::string& name, bool cumulative) {
  Table t;
  t.name = name;
  t.columns = {"policy", "arm", "repeat", "day", "active", cumulative ? "cumulative_counted" : "ratio_public"};
  for (const auto& log : logs) {
    const auto fc = final_counters(log);
    for (const auto& a : log.arms) {
      if (a.real) continue;
      std::int64_t cum = 0;
      for (std::int64_t d = 0; d < log.days; ++d) {
        std::int64_t g = 0, c = 0;
        for (const auto& v : a.videos) {
          const auto& x = fc.at({v, d});
          g += x.generated_fake;
          c += x.public_counted;
        }
        cum += c;
        const bool active =
            a.active_pattern.empty() || a.active_pattern[static_cast<std::size_t>(d) % a.active_pattern.size()];
        if (!cumulative && g == 0) continue;
        t.rows.push_back({log.policy, a.label, std::to_string(log.repeat), std::to_string(d), active ? "1" : "0",
                          cumulative ? std::to_string(cum)
                                     : format_double(static_cast<double>(c) / static_cast<double>(g))});
      }
    }
  }
  return t;
}

Table fit_table(const std::vector<ExperimentLog>& logs, const ScenarioMetrics& m) {
  Table t;
  t.name = m.scenario + "-fit";
  t.columns = {"policy", "w", "measured", "fitted"};
  for (const auto& p : policies_of(logs)) {
    auto k = m.values.find("fit_k/" + p);
    auto thr = m.values.find("fit_threshold/" + p);
    for (const auto& a : logs.front().arms) {
      auto w = a.tags.find("w");
      if (w == a.tags.end()) continue;
      std::string fitted;
      if (k != m.values.end() && thr != m.values.end()) {
        const double wv = std::stod(w->second);
        fitted = format_double(wv <= thr->second ? 1.0 : std::exp(-k->second * (wv - thr->second)));
      }
      t.rows.push_back({p, w->second, lookup(m, "rfn_public/" + p + "/" + a.label), fitted});
    }
  }
  return t;
}

std::string plot_cell(const std::string& s) {
  if (s.empty()) return "?";
  if (s.find(' ') != std::string::npos) return "\"" + s + "\"";
  return s;
}

}  // namespace

std::vector<Table> report_tables(const std::vector<ExperimentLog>& logs, const ScenarioMetrics& m) {
  std::vector<Table> out;
  if (logs.empty()) return out;
  const std::string layout = logs.front().report;
  out.push_back(arm_table(logs, m));
  if (layout == "timeline") out.push_back(timeline_table(logs, m));
  if (layout == "nat") out.push_back(daily_table(logs, m.scenario + "-daily", false));
  if (layout == "linearity") out.push_back(daily_table(logs, m.scenario + "-cumulative", true));
  if (layout == "sweep") out.push_back(fit_table(logs, m));
  return out;
}

TableFormat parse_table_format(std::string_view s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "plotdata") return TableFormat::PlotData;
  fail(ErrorCode::InvalidArgument, "unknown format '" + std::string(s) + "' (expected csv or plotdata)");
}

std::vector<fs::path> write_tables(const std::vector<Table>& tables, TableFormat format, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (const auto& t : tables) {
    const fs::path p = dir / (t.name + (format == TableFormat::Csv ? ".csv" : ".dat"));
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Io, "cannot write " + p.string());
    if (format == TableFormat::Csv) {
      for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
      f << '\n';
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
        f << '\n';
      }
    } else {
      // gnuplot layout: one index block per value of the first column
      f << "# " << t.name << '\n' << "#";
      for (const auto& c : t.columns) f << ' ' << c;
      f << '\n';
      std::string block;
      bool first = true;
      for (const auto& r : t.rows) {
        if (!first && !r.empty() && r.front() != block) f << "\n\n";
        if (!r.empty() && (first || r.front() != block)) f << "# block " << plot_cell(r.front()) << '\n';
        if (!r.empty()) block = r.front();
        first = false;
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? " " : "") << plot_cell(r[i]);
        f << '\n';
      }
    }
    if (!f) fail(ErrorCode::Io, "write failed: " + p.string());
    out.push_back(p);
  }
  return out;
}

namespace {

std::map<std::string, std::vector<ExperimentLog>> load_grouped(const fs::path& log_dir) {
  const auto dirs = find_log_dirs(log_dir);
  if (dirs.empty()) fail(ErrorCode::Io, "no experiment logs found under " + log_dir.string());
  std::map<std::string, std::vector<ExperimentLog>> groups;
  for (const auto& d : dirs) {
    auto log = read_log(d);
    groups[log.scenario].push_back(std::move(log));
  }
  for (auto& [_, logs] : groups) {
    std::stable_sort(logs.begin(), logs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.policy, a.repeat) < std::tie(b.policy, b.repeat);
    });
  }
  return groups;
}

}  // namespace

std::vector<fs::path> write_report(const fs::path& log_dir, TableFormat format, const fs::path& out_dir) {
  std::vector<fs::path> out;
  for (const auto& [scenario, logs] : load_grouped(log_dir)) {
    const auto m = compute_metrics(logs);
    const fs::path dir = out_dir / scenario;
    auto written = write_tables(report_tables(logs, m), format, dir);
    out.insert(out.end(), written.begin(), written.end());
    std::ofstream f(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    f << metrics_csv(m);
    if (!f) fail(ErrorCode::Io, "cannot write metrics.csv in " + dir.string());
    out.push_back(dir / "metrics.csv");
  }
  return out;
}

FitResult fit_from_logs(const fs::path& log_dir, const std::string& policy) {
  std::vector<std::pair<double, double>> points;
  for (const auto& [scenario, logs] : load_grouped(log_dir)) {
    const auto m = compute_metrics(logs);
    const std::string p = policy.empty() ? logs.front().policy : policy;
    for (const auto& a : logs.front().arms) {
      auto w = a.tags.find("w");
      auto v = m.values.find("rfn_public/" + p + "/" + a.label);
      if (w != a.tags.end() && v != m.values.end()) points.emplace_back(std::stod(w->second), v->second);
    }
  }
  if (points.empty()) fail(ErrorCode::Fit, "no rate sweep (arms tagged w) in " + log_dir.string());
  return fit_exponential_decay(points);
}

}  // namespace vfraud
