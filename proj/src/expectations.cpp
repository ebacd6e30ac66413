#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "vfraud/analysis.hpp"
#include "vfraud/error.hpp"

namespace vfraud {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(ErrorCode::Format, "cannot format number");
  return std::string(buf, ptr);
}

namespace {

struct ArmDaily {
  std::vector<DayTally> pub;
  std::vector<DayTally> mon;  // generated = ad views
  std::int64_t ads = 0;
  std::int64_t generated = 0;
  std::int64_t counted = 0;
};

ArmDaily tally(const ExperimentLog& log, const ArmInfo& arm,
               const std::map<std::pair<VideoId, std::int64_t>, FinalCounter>& fc) {
  ArmDaily out;
  for (std::int64_t d = 0; d < log.days; ++d) {
    DayTally p{d, 0, 0}, m{d, 0, 0};
    for (const auto& v : arm.videos) {
      auto it = fc.find({v, d});
      if (it == fc.end()) continue;
      const auto& c = it->second;
      p.generated += arm.real ? c.generated_real : c.generated_fake;
      p.counted += c.public_counted;
      m.generated += c.ad_views;
      m.counted += c.monetized_counted;
    }
    out.ads += m.generated;
    out.generated += p.generated;
    out.counted += p.counted;
    out.pub.push_back(p);
    out.mon.push_back(m);
  }
  return out;
}

std::string cell(std::int64_t v) { return std::to_string(v); }

void put_aggregate(ScenarioMetrics& m, const std::string& name, const std::vector<double>& per_repeat) {
  if (per_repeat.empty()) return;
  const auto a = aggregate_values(per_repeat);
  m.values[name] = a.avg;
  const auto slash = name.find('/');
  m.values[name.substr(0, slash) + "_min" + name.substr(slash)] = a.min;
  m.values[name.substr(0, slash) + "_max" + name.substr(slash)] = a.max;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::optional<double> metric_value(const ScenarioMetrics& m, std::string_view expr) {
  // "a - b" compares two metrics
  const auto minus = expr.find(" - ");
  if (minus != std::string_view::npos) {
    auto a = metric_value(m, expr.substr(0, minus));
    auto b = metric_value(m, expr.substr(minus + 3));
    if (!a || !b) return std::nullopt;
    return *a - *b;
  }
  auto it = m.values.find(std::string(expr));
  if (it == m.values.end()) return std::nullopt;
  return it->second;
}

ScenarioMetrics compute_metrics(const std::vector<ExperimentLog>& all) {
  ScenarioMetrics m;
  if (all.empty()) return m;
  m.scenario = all.front().scenario;

  // policies in first-seen order, repeats sorted
  std::vector<std::string> policies;
  for (const auto& l : all) {
    if (l.scenario != m.scenario) fail(ErrorCode::InvalidArgument, "compute_metrics: logs of several scenarios");
    if (std::find(policies.begin(), policies.end(), l.policy) == policies.end()) policies.push_back(l.policy);
  }

  for (const auto& policy : policies) {
    std::vector<const ExperimentLog*> logs;
    for (const auto& l : all) {
      if (l.policy == policy) logs.push_back(&l);
    }
    std::sort(logs.begin(), logs.end(), [](auto* a, auto* b) { return a->repeat < b->repeat; });
    std::vector<std::map<std::pair<VideoId, std::int64_t>, FinalCounter>> fcs;
    for (const auto* l : logs) fcs.push_back(final_counters(*l));

    std::vector<std::pair<double, double>> sweep;
    for (const auto& arm : logs.front()->arms) {
      const std::string key = policy + "/" + arm.label;
      std::vector<double> pub_med, mon_med, rfp, det, lin, work, off, gross, pub_ads, removed, susp;
      std::map<std::int64_t, std::vector<double>> daily;
      for (std::size_t r = 0; r < logs.size(); ++r) {
        const auto& log = *logs[r];
        const ArmDaily t = tally(log, arm, fcs[r]);
        const std::string rep = std::to_string(log.repeat);
        for (std::size_t d = 0; d < t.pub.size(); ++d) {
          const auto& p = t.pub[d];
          const auto& q = t.mon[d];
          std::string row = m.scenario + "," + policy + "," + rep + "," + arm.label + "," + cell(p.day) + "," +
                            cell(p.generated) + "," + cell(p.counted) + "," + cell(q.counted) + "," +
                            cell(q.generated) + ",";
          if (p.generated > 0) row += format_double(static_cast<double>(p.counted) / static_cast<double>(p.generated));
          row += ",";
          if (q.generated > 0) row += format_double(static_cast<double>(q.counted) / static_cast<double>(q.generated));
          m.csv_rows.push_back(std::move(row));
          daily[p.day].push_back(static_cast<double>(p.counted));
        }
        if (t.generated == 0) continue;

        if (arm.real) {
          rfp.push_back(false_positive_rate(t.counted, t.generated));
          m.csv_rows.push_back(m.scenario + "," + policy + "," + rep + "," + arm.label + ",pooled," +
                               cell(t.generated) + "," + cell(t.counted) + ",,,," );
          continue;
        }
        const MetricSeries ps{t.pub};
        pub_med.push_back(daily_median_rfn(ps));
        std::string row = m.scenario + "," + policy + "," + rep + "," + arm.label + ",median," + cell(t.generated) +
                          "," + cell(t.counted) + ",,," + format_double(pub_med.back()) + ",";
        if (t.ads > 0) {
          mon_med.push_back(daily_median_rfn(MetricSeries{t.mon}));
          row += format_double(mon_med.back());
        }
        m.csv_rows.push_back(std::move(row));

        std::int64_t first_discount = -1;
        for (const auto& p : t.pub) {
          if (p.generated > 0 && p.counted < p.generated) {
            first_discount = p.day;
            break;
          }
        }
        det.push_back(static_cast<double>(first_discount));

        if (t.pub.size() >= 2) {
          std::vector<double> x, y;
          double cum = 0.0;
          for (const auto& p : t.pub) {
            cum += static_cast<double>(p.counted);
            x.push_back(static_cast<double>(p.day));
            y.push_back(cum);
          }
          lin.push_back(linear_r_squared(x, y));
        }

        if (!arm.active_pattern.empty()) {
          std::vector<double> w, o;
          for (const auto& p : t.pub) {
            if (p.generated == 0) continue;
            const bool active = arm.active_pattern[static_cast<std::size_t>(p.day) % arm.active_pattern.size()];
            (active ? w : o).push_back(static_cast<double>(p.counted) / static_cast<double>(p.generated));
          }
          if (!w.empty()) work.push_back(median(w));
          if (!o.empty()) off.push_back(median(o));
        }

        if (t.ads > 0) {
          std::int64_t sday = -1;
          std::int64_t rem = 0;
          for (const auto& a : log.adjustments) {
            if (a.cause != AdjustmentCause::Suspension) continue;
            if (std::find(arm.videos.begin(), arm.videos.end(), a.video) == arm.videos.end()) continue;
            sday = sday < 0 ? a.applied_day : std::min(sday, a.applied_day);
            rem -= a.delta;
          }
          // monetized verdicts before removal, over the days ads were delivered
          std::int64_t g = 0, pa = 0;
          const std::int64_t end = sday < 0 ? log.days : sday;
          std::set<VideoId> vids(arm.videos.begin(), arm.videos.end());
          for (std::size_t i = 0; i < log.events.size(); ++i) {
            const auto& e = log.events[i];
            if (e.time.day < end && log.verdicts[i].count_monetized && vids.count(e.video)) ++g;
          }
          for (std::int64_t d = 0; d < end; ++d) pa += t.pub[static_cast<std::size_t>(d)].counted;
          gross.push_back(static_cast<double>(g));
          pub_ads.push_back(static_cast<double>(pa));
          removed.push_back(static_cast<double>(rem));
          susp.push_back(static_cast<double>(sday));
        }
      }

      put_aggregate(m, "rfn_public/" + key, pub_med);
      put_aggregate(m, "rfn_monetized/" + key, mon_med);
      put_aggregate(m, "rfp/" + key, rfp);
      if (!pub_med.empty() && !mon_med.empty()) m.values["rfn_gap/" + key] = mean_of(mon_med) - mean_of(pub_med);
      if (!det.empty()) m.values["detection_day/" + key] = mean_of(det);
      if (!lin.empty()) m.values["linearity_r2/" + key] = mean_of(lin);
      if (!work.empty()) m.values["rfn_public_workday/" + key] = mean_of(work);
      if (!off.empty()) m.values["rfn_public_dayoff/" + key] = mean_of(off);
      if (!gross.empty()) {
        m.values["monetized_gross/" + key] = mean_of(gross);
        m.values["public_ads/" + key] = mean_of(pub_ads);
        m.values["monetized_removed/" + key] = mean_of(removed);
        m.values["suspended/" + key] = mean_of(susp);
      }
      if (logs.front()->report == "timeline") {
        for (const auto& [d, v] : daily) m.values["daily_public/" + key + "/" + std::to_string(d)] = mean_of(v);
      }
      auto w = arm.tags.find("w");
      if (w != arm.tags.end() && !pub_med.empty()) sweep.emplace_back(std::stod(w->second), mean_of(pub_med));
    }

    if (logs.front()->report == "sweep") {
      try {
        const FitResult f = fit_exponential_decay(sweep);
        m.values["fit_k/" + policy] = f.rate_est;
        m.values["fit_threshold/" + policy] = f.threshold_est;
        m.values["fit_r2/" + policy] = f.r_squared;
        m.values["fit_points/" + policy] = static_cast<double>(f.points_used);
      } catch (const Error& e) {
        m.notes.push_back("fit " + policy + ": " + e.what());
      }
    }
  }
  return m;
}

std::string metrics_csv(const ScenarioMetrics& m) {
  std::string out(kMetricsColumns);
  out += '\n';
  for (const auto& r : m.csv_rows) {
    out += r;
    out += '\n';
  }
  // aggregate rows: one per named metric
  for (const auto& [name, v] : m.values) {
    out += m.scenario + ",,aggregate," + name + ",,,,,," + format_double(v) + ",\n";
  }
  return out;
}

std::vector<ExpectationResult> verify_expectations(const Scenario& s, const ScenarioMetrics& m) {
  std::vector<ExpectationResult> out;
  for (const auto& e : s.expected) {
    ExpectationResult r;
    r.scenario = s.name;
    r.expectation = e;
    r.measured = metric_value(m, e.metric);
    if (r.measured) {
      const double v = *r.measured;
      constexpr double eps = 1e-9;
      switch (e.op) {
        case CompareOp::Approx: r.passed = std::fabs(v - e.target) <= e.tolerance + eps; break;
        case CompareOp::Le: r.passed = v <= e.target + e.tolerance + eps; break;
        case CompareOp::Ge: r.passed = v >= e.target - e.tolerance - eps; break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string describe(const ExpectationResult& r) {
  const auto& e = r.expectation;
  std::string s = r.passed ? "PASS " : "FAIL ";
  s += r.scenario + " " + e.metric + " ";
  switch (e.op) {
    case CompareOp::Approx: s += "~ " + format_double(e.target) + " +/- " + format_double(e.tolerance); break;
    case CompareOp::Le: s += "<= " + format_double(e.target + e.tolerance); break;
    case CompareOp::Ge: s += ">= " + format_double(e.target - e.tolerance); break;
  }
  s += " measured ";
  s += r.measured ? format_double(*r.measured) : std::string("missing");
  return s;
}

}  // namespace vfraud
