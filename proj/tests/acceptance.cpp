// Acceptance run: executes the whole catalog once, then prints one PASS/FAIL
// line per criterion. Exit status is nonzero if any criterion fails.
//
// usage: vfraud_acceptance [out_dir]

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vfraud/analysis.hpp"
#include "vfraud/audit.hpp"
#include "vfraud/catalog.hpp"
#include "vfraud/logio.hpp"
#include "vfraud/traffic.hpp"

using namespace vfraud;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

const ScenarioResult& result(const std::vector<ScenarioResult>& rs, const std::string& name) {
  for (const auto& r : rs) {
    if (r.scenario.name == name) return r;
  }
  throw std::runtime_error("scenario missing from run: " + name);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// All expectations of the named scenarios.
Outcome expectations(const std::vector<ScenarioResult>& rs, std::initializer_list<const char*> names) {
  Outcome o;
  std::size_t passed = 0, total = 0;
  std::string failures;
  for (const char* n : names) {
    const auto& r = result(rs, n);
    if (!r.error.empty()) {
      o.ok = false;
      failures += std::string(" [") + n + " error: " + r.error + "]";
    }
    for (const auto& c : r.checks) {
      ++total;
      if (c.passed) {
        ++passed;
      } else {
        o.ok = false;
        failures += " [" + describe(c) + "]";
      }
    }
  }
  if (total == 0) o.ok = false;
  o.detail = std::to_string(passed) + "/" + std::to_string(total) + " expectations" + failures;
  return o;
}

double metric(const std::vector<ScenarioResult>& rs, const std::string& scenario, const std::string& name) {
  auto v = metric_value(result(rs, scenario).metrics, name);
  return v ? *v : std::nan("");
}

void add(Outcome& o, const std::string& s) { o.detail += "; " + s; }

// --- criterion 9: randomized prefix isolation ---------------------------

Outcome prefix_property(const std::vector<ScenarioResult>& rs) {
  Outcome o = expectations(rs, {"prefix"});
  std::mt19937_64 g(9);
  int pairs = 0, broken = 0;
  for (int bits = 24; bits <= 30; ++bits) {
    for (int t = 0; t < 30; ++t, ++pairs) {
      const std::uint32_t span = 1u << (32 - bits);
      const std::uint32_t base = ((198u << 24) | (18u << 16) | (static_cast<std::uint32_t>(g() % 256) << 8)) & ~(span - 1);
      const std::uint32_t oa = static_cast<std::uint32_t>(g() % span);
      std::uint32_t ob = oa;
      while (ob == oa) ob = static_cast<std::uint32_t>(g() % span);
      const Ipv4 a{base | oa}, b{base | ob};
      const int days = 3 + static_cast<int>(g() % 8);
      const auto hist = static_cast<IpHistory>(g() % 3);

      auto mk = [&](BehaviorConfig beh, Ipv4 ip, const char* video) {
        TrafficSpec s;
        s.label = video;
        s.behavior = beh;
        s.ip_pool = {IpIdentity{ip, std::nullopt, hist}};
        s.target_videos = {video};
        s.days = days;
        s.seed = g();
        return generate_traffic(s);
      };
      auto bad = BehaviorConfig::aggressive();
      bad.views_per_day = 30 + static_cast<int>(g() % 90);
      const auto sa = mk(bad, a, "a:v0");
      const auto sb = mk(BehaviorConfig::deterministic(1 + static_cast<int>(g() % 40)), b, "b:v0");
      std::vector<ViewEvent> both = sa;
      both.insert(both.end(), sb.begin(), sb.end());
      std::stable_sort(both.begin(), both.end(), [](const auto& x, const auto& y) { return x.time < y.time; });

      auto verdicts = [&](const std::vector<ViewEvent>& s) {
        auto p = make_policy(PortalKind::YouTubeLike);
        p->register_ip({a, std::nullopt, hist});
        p->register_ip({b, std::nullopt, hist});
        std::vector<std::string> out;
        std::int64_t open = 0;
        for (const auto& e : s) {
          while (open < e.time.day) {
            for (const auto& adj : p->end_of_day(open++)) {
              if (adj.video == "b:v0") out.push_back(adjustment_line(adj));
            }
          }
          const Verdict v = p->ingest(e);
          if (e.source_ip == b) out.push_back(verdict_line(0, v));
        }
        while (open < days) {
          for (const auto& adj : p->end_of_day(open++)) {
            if (adj.video == "b:v0") out.push_back(adjustment_line(adj));
          }
        }
        return out;
      };
      if (verdicts(sb) != verdicts(both)) ++broken;
    }
  }
  if (broken) o.ok = false;
  add(o, std::to_string(pairs - broken) + "/" + std::to_string(pairs) + " random /24../30 pairs isolated");
  return o;
}

// --- criterion 12: brute-force oracle and replay ------------------------

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::vector<std::string> out;
  for (std::string l; std::getline(f, l);) out.push_back(l);
  return out;
}

std::map<std::string, std::string> fields(const std::string& line) {
  std::map<std::string, std::string> m;
  std::istringstream ss(line);
  for (std::string kv; std::getline(ss, kv, '\t');) {
    const auto eq = kv.find('=');
    if (eq != std::string::npos) m[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return m;
}

struct Tally {
  std::int64_t pub = 0, mon = 0, fake = 0, real = 0, ads = 0;
  bool operator==(const Tally&) const = default;
};

struct ScannedRun {
  std::string scenario, policy;
  int repeat = 0, days = 0;
  std::vector<std::pair<std::string, std::vector<std::string>>> arms;  // label, videos
  std::set<std::string> real_arms;
  std::map<std::pair<std::string, std::int64_t>, Tally> as_closed, final_;
};

// Reads the raw log files with nothing but string splitting.
ScannedRun scan(const fs::path& dir) {
  ScannedRun r;
  std::set<std::string> tracked;
  for (const auto& l : lines_of(dir / "meta")) {
    auto f = fields(l);
    if (l.rfind("scenario=", 0) == 0) r.scenario = f["scenario"];
    if (l.rfind("policy=", 0) == 0) r.policy = f["policy"];
    if (l.rfind("repeat=", 0) == 0) r.repeat = std::stoi(f["repeat"]);
    if (l.rfind("days=", 0) == 0) r.days = std::stoi(f["days"]);
    if (l.rfind("arm=", 0) == 0) {
      std::vector<std::string> vids;
      std::istringstream vs(f["videos"]);
      for (std::string v; std::getline(vs, v, ',');) {
        vids.push_back(v);
        tracked.insert(v);
      }
      if (f["real"] == "1") r.real_arms.insert(f["arm"]);
      r.arms.emplace_back(f["arm"], vids);
    }
  }
  for (const auto& v : tracked) {
    for (std::int64_t d = 0; d < r.days; ++d) r.as_closed[{v, d}], r.final_[{v, d}];
  }
  const auto ev = lines_of(dir / "events.log");
  const auto vd = lines_of(dir / "verdicts.log");
  if (ev.size() != vd.size()) throw std::runtime_error("events/verdicts length mismatch in " + dir.string());
  for (std::size_t i = 1; i < ev.size(); ++i) {
    auto e = fields(ev[i]);
    auto v = fields(vd[i]);
    if (std::stoul(v["idx"]) != i - 1) throw std::runtime_error("verdict index mismatch");
    const std::pair<std::string, std::int64_t> key{e["video"], std::stoll(e["time.day"])};
    if (!tracked.count(key.first)) continue;
    for (auto* t : {&r.as_closed[key], &r.final_[key]}) {
      (e["real"] == "1" ? t->real : t->fake) += 1;
      if (e["ad_req"] == "1" && e["ad_full"] == "1") ++t->ads;
      if (v["public"] == "1") ++t->pub;
      if (v["monetized"] == "1") ++t->mon;
    }
  }
  for (std::size_t i = 1; i < lines_of(dir / "adjustments.log").size(); ++i) {
    auto a = fields(lines_of(dir / "adjustments.log")[i]);
    const std::pair<std::string, std::int64_t> key{a["video"], std::stoll(a["ref_day"])};
    if (!tracked.count(key.first)) continue;
    const auto delta = std::stoll(a["delta"]);
    auto& fin = r.final_[key];
    (a["counter"] == "public" ? fin.pub : fin.mon) += delta;
    // a closed day only sees same-day corrections that already apply
    if (std::stoll(a["applied_day"]) <= key.second) {
      auto& c = r.as_closed[key];
      (a["counter"] == "public" ? c.pub : c.mon) += delta;
    }
  }
  return r;
}

double med(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

Outcome oracle(const std::vector<ScenarioResult>& rs, const fs::path& out, const std::vector<Scenario>& scenarios) {
  Outcome o;
  std::size_t runs = 0, cells = 0, metrics_checked = 0;
  std::vector<std::string> problems;
  auto problem = [&](std::string s) {
    o.ok = false;
    if (problems.size() < 5) problems.push_back(std::move(s));
  };

  for (const auto& res : rs) {
    std::vector<ScannedRun> scanned;
    std::vector<ExperimentLog> from_disk;
    for (const auto& dir : find_log_dirs(out / res.scenario.name)) {
      ScannedRun s = scan(dir);
      ++runs;
      // snapshots.csv as written
      const auto snaps = lines_of(dir / "snapshots.csv");
      std::size_t rows = 0;
      for (std::size_t i = 2; i < snaps.size(); ++i) {
        std::istringstream ss(snaps[i]);
        std::vector<std::string> c;
        for (std::string x; std::getline(ss, x, ',');) c.push_back(x);
        const Tally t{std::stoll(c[2]), std::stoll(c[3]), std::stoll(c[4]), std::stoll(c[5]), std::stoll(c[6])};
        if (!(s.as_closed[{c[1], std::stoll(c[0])}] == t)) problem("snapshot " + dir.string() + " " + snaps[i]);
        ++rows;
        ++cells;
      }
      if (rows != s.as_closed.size()) problem("snapshot row count in " + dir.string());
      // engine's final counters from the in-memory log
      const ExperimentLog* mem = nullptr;
      for (const auto& l : res.logs) {
        if (l.policy == s.policy && l.repeat == s.repeat) mem = &l;
      }
      if (!mem) {
        problem("no in-memory log for " + dir.string());
        continue;
      }
      for (const auto& [key, fc] : final_counters(*mem)) {
        const Tally t{fc.public_counted, fc.monetized_counted, fc.generated_fake, fc.generated_real, fc.ad_views};
        if (!(s.final_[key] == t)) problem("final counter " + key.first + " day " + std::to_string(key.second));
      }
      from_disk.push_back(read_log(dir));
      scanned.push_back(std::move(s));
    }

    // metrics recomputed from disk logs by the library: identical map
    const auto again = compute_metrics(from_disk);
    if (again.values != res.metrics.values) problem(res.scenario.name + ": metrics differ when read back");

    // rate metrics recomputed from the scanned counters alone
    std::map<std::string, std::vector<std::pair<int, double>>> pub, mon, fp;
    for (const auto& s : scanned) {
      for (const auto& [arm, vids] : s.arms) {
        std::vector<double> pr, mr;
        std::int64_t gen = 0, cnt = 0, ads = 0;
        for (std::int64_t d = 0; d < s.days; ++d) {
          Tally t;
          for (const auto& v : vids) {
            const auto& x = s.final_.at({v, d});
            t.pub += x.pub;
            t.mon += x.mon;
            t.fake += x.fake;
            t.real += x.real;
            t.ads += x.ads;
          }
          const std::int64_t g = s.real_arms.count(arm) ? t.real : t.fake;
          gen += g;
          cnt += t.pub;
          ads += t.ads;
          if (g > 0) pr.push_back(static_cast<double>(t.pub) / static_cast<double>(g));
          if (t.ads > 0) mr.push_back(static_cast<double>(t.mon) / static_cast<double>(t.ads));
        }
        if (gen == 0) continue;
        const std::string key = s.policy + "/" + arm;
        if (s.real_arms.count(arm)) {
          fp[key].emplace_back(s.repeat, std::max(0.0, 1.0 - static_cast<double>(cnt) / static_cast<double>(gen)));
          continue;
        }
        pub[key].emplace_back(s.repeat, med(pr));
        if (ads > 0) mon[key].emplace_back(s.repeat, med(mr));
      }
    }
    auto compare = [&](const std::string& prefix, std::map<std::string, std::vector<std::pair<int, double>>>& m) {
      for (auto& [key, reps] : m) {
        std::sort(reps.begin(), reps.end());
        double sum = 0.0, lo = reps.front().second, hi = lo;
        for (const auto& [_, v] : reps) {
          sum += v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        const double avg = sum / static_cast<double>(reps.size());
        const std::pair<std::string, double> want[] = {
            {prefix + "/" + key, avg}, {prefix + "_min/" + key, lo}, {prefix + "_max/" + key, hi}};
        for (const auto& [name, v] : want) {
          auto got = metric_value(res.metrics, name);
          ++metrics_checked;
          if (!got || *got != v) problem(res.scenario.name + ": " + name);
        }
      }
    };
    compare("rfn_public", pub);
    compare("rfn_monetized", mon);
    compare("rfp", fp);
  }

  // replay with the same seeds into a second tree: byte-identical
  const fs::path again = out.string() + "-replay";
  fs::remove_all(again);
  BatchOptions b;
  b.out_dir = again;
  run_batch(scenarios, b);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), out);
    if (rel == "verification.txt") continue;
    ++files;
    std::ifstream fa(e.path(), std::ios::binary), fb(again / rel, std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (!fb || sa.str() != sb.str()) problem("replay differs: " + rel.string());
  }
  std::size_t files_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(again)) files_b += e.is_regular_file();
  if (files_b != files) problem("replay produced a different file set");
  fs::remove_all(again);

  o.detail = std::to_string(runs) + " runs, " + std::to_string(cells) + " counter cells, " +
             std::to_string(metrics_checked) + " rate metrics recomputed; " + std::to_string(files) +
             " files replayed byte-identical";
  for (const auto& p : problems) o.detail += " [" + p + "]";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "vfraud-acceptance";
  fs::remove_all(out);

  const auto scenarios = catalog();
  BatchOptions opts;
  opts.out_dir = out;
  opts.keep_logs = true;
  std::vector<ScenarioResult> rs;
  try {
    rs = run_batch(scenarios, opts);
  } catch (const std::exception& e) {
    std::printf("acceptance run failed: %s\n", e.what());
    return 1;
  }

  std::vector<std::pair<std::string, Outcome>> crit;
  auto guard = [&](const std::string& name, auto f) {
    try {
      crit.emplace_back(name, f());
    } catch (const std::exception& e) {
      crit.emplace_back(name, Outcome{false, std::string("error: ") + e.what()});
    }
  };

  guard("decay knee and fit", [&] {
    Outcome o = expectations(rs, {"decay-curve"});
    add(o, "k=" + num(metric(rs, "decay-curve", "fit_k/youtube")) +
               " R2=" + num(metric(rs, "decay-curve", "fit_r2/youtube")) +
               " T=" + num(metric(rs, "decay-curve", "fit_threshold/youtube")) +
               " points=" + num(metric(rs, "decay-curve", "fit_points/youtube")));
    return o;
  });
  guard("probe behaviors", [&] {
    Outcome o = expectations(rs, {"behaviors"});
    add(o, "C=" + num(metric(rs, "behaviors", "rfn_public/youtube/C")) +
               " D=" + num(metric(rs, "behaviors", "rfn_public/youtube/D")) +
               " SV=" + num(metric(rs, "behaviors", "rfn_public/youtube/SV")) +
               " B=" + num(metric(rs, "behaviors", "rfn_public/youtube/B")));
    return o;
  });
  guard("portal comparison", [&] { return expectations(rs, {"portals-public"}); });
  guard("monetized discrepancy", [&] {
    Outcome o = expectations(rs, {"monetized-baseline", "monetized-aggressive"});
    add(o, "baseline public=" + num(metric(rs, "monetized-baseline", "rfn_public/youtube/w20")) +
               " monetized=" + num(metric(rs, "monetized-baseline", "rfn_monetized/youtube/w20")));
    return o;
  });
  guard("blacklisting timeline", [&] { return expectations(rs, {"ip-blacklisting"}); });
  guard("multi-IP", [&] { return expectations(rs, {"multi-ip"}); });
  guard("NAT masking", [&] {
    Outcome o = expectations(rs, {"nat"});
    add(o, "loc1/2/3=" + num(metric(rs, "nat", "rfn_public/youtube/loc1")) + "/" +
               num(metric(rs, "nat", "rfn_public/youtube/loc2")) + "/" +
               num(metric(rs, "nat", "rfn_public/youtube/loc3")) +
               " workday=" + num(metric(rs, "nat", "rfn_public_workday/youtube/loc2-long")) +
               " dayoff=" + num(metric(rs, "nat", "rfn_public_dayoff/youtube/loc2-long")));
    return o;
  });
  guard("detection time", [&] { return expectations(rs, {"detection-time"}); });
  guard("prefix isolation", [&] { return prefix_property(rs); });
  guard("false positives", [&] {
    Outcome o = expectations(rs, {"false-positives"});
    add(o, "yt social/crowd=" + num(metric(rs, "false-positives", "rfp/youtube/social")) + "/" +
               num(metric(rs, "false-positives", "rfp/youtube/crowd")) +
               " dm social/crowd=" + num(metric(rs, "false-positives", "rfp/dailymotion/social")) + "/" +
               num(metric(rs, "false-positives", "rfp/dailymotion/crowd")));
    return o;
  });
  guard("advertiser suspension", [&] { return expectations(rs, {"advertiser"}); });
  guard("oracle equivalence and replay", [&] { return oracle(rs, out, scenarios); });

  int failed = 0;
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const auto& [name, o] = crit[i];
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    failed += !o.ok;
  }
  std::printf("%zu/%zu criteria passed\n", crit.size() - static_cast<std::size_t>(failed), crit.size());
  return failed ? 1 : 0;
}
