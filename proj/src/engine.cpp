#include "vfraud/engine.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "vfraud/error.hpp"
#include "vfraud/rng.hpp"

namespace vfraud {

namespace {

constexpr std::array<std::string_view, 3> kOpNames = {"approx", "le", "ge"};

}  // namespace

std::string_view to_string(CompareOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

CompareOp parse_compare_op(std::string_view s) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == s) return static_cast<CompareOp>(i);
  }
  fail(ErrorCode::Validation, "unknown comparison '" + std::string(s) + "'");
}

void validate(const Scenario& s) {
  const std::string where = "scenario '" + s.name + "': ";
  if (s.name.empty()) fail(ErrorCode::Validation, "scenario name must not be empty");
  if (s.days < 1) fail(ErrorCode::Validation, where + "days must be >= 1");
  if (s.repeats < 1) fail(ErrorCode::Validation, where + "repeats must be >= 1");
  if (static_cast<int>(s.seeds.size()) != s.repeats) fail(ErrorCode::Validation, where + "need one seed per repeat");
  if (s.policies.empty()) fail(ErrorCode::Validation, where + "needs at least one policy");
  std::set<std::string> labels;
  for (const auto& p : s.policies) {
    if (p.label.empty() || !labels.insert(p.label).second) {
      fail(ErrorCode::Validation, where + "policy labels must be unique and non-empty");
    }
    validate(p.params);
  }
  labels.clear();
  std::set<VideoId> videos;
  for (const auto& a : s.arms) {
    if (a.label.empty() || !labels.insert(a.label).second) {
      fail(ErrorCode::Validation, where + "arm labels must be unique and non-empty");
    }
    if (a.label.find_first_of("/\t\n,") != std::string::npos) {
      fail(ErrorCode::Validation, where + "arm label '" + a.label + "' contains a reserved character");
    }
    TrafficSpec t = a.traffic;
    t.days = s.days;
    validate(t);
    for (const auto& v : t.target_videos) {
      if (v.find_first_of("\t\n,") != std::string::npos) fail(ErrorCode::Validation, where + "bad video id");
      if (!videos.insert(v).second) fail(ErrorCode::Validation, where + "video '" + v + "' is shared by two arms");
    }
    for (const auto& [k, v] : a.tags) {
      if ((k + v).find_first_of(":,\t\n") != std::string::npos) fail(ErrorCode::Validation, where + "bad tag");
    }
  }
}

std::vector<std::uint64_t> seeds_for(std::uint64_t base, int repeats) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < repeats; ++i) out.push_back(derive_seed(base, static_cast<std::uint64_t>(i)));
  return out;
}

ExperimentLog run_scenario(const Scenario& s, const PolicyVariant& variant, std::uint64_t seed, int repeat,
                           const RunOptions& opts) {
  validate(s);
  ExperimentLog log;
  log.scenario = s.name;
  log.report = s.report;
  log.policy = variant.label;
  log.portal = variant.portal;
  log.seed = seed;
  log.repeat = repeat;
  log.days = s.days;

  auto policy = make_policy(variant.portal, variant.params);

  // generate and merge; ties keep arm order
  std::vector<std::pair<ViewEvent, std::size_t>> merged;
  std::vector<VideoId> tracked;
  for (std::size_t i = 0; i < s.arms.size(); ++i) {
    const Arm& arm = s.arms[i];
    TrafficSpec spec = arm.traffic;
    spec.days = s.days;
    spec.seed = derive_seed(derive_seed(seed, i + 1), arm.traffic.seed);
    for (const auto& ip : spec.ip_pool) policy->register_ip(ip);
    ArmInfo info;
    info.label = arm.label;
    info.videos = spec.target_videos;
    info.kind = std::string(to_string(spec.behavior.kind));
    info.real = spec.behavior.kind == BehaviorKind::RealUser;
    info.tags = arm.tags;
    if (spec.nat) {
      info.ips.push_back(spec.nat->public_ip.str());
      info.active_pattern = spec.nat->active_day_pattern;
      IpIdentity pub = spec.ip_pool.front();
      pub.address = spec.nat->public_ip;
      policy->register_ip(pub);
    } else {
      for (const auto& ip : spec.ip_pool) info.ips.push_back(ip.address.str());
    }
    log.arms.push_back(std::move(info));
    tracked.insert(tracked.end(), spec.target_videos.begin(), spec.target_videos.end());
    for (auto& e : generate_traffic(spec)) merged.emplace_back(std::move(e), i);
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const auto& a, const auto& b) { return a.first.time < b.first.time; });
  std::sort(tracked.begin(), tracked.end());

  log.events.reserve(merged.size());
  for (auto& [e, _] : merged) {
    if (e.time.day >= s.days) fail(ErrorCode::Scheduling, "generated event beyond the last scenario day");
    log.events.push_back(std::move(e));
  }
  merged.clear();
  log.verdicts.reserve(log.events.size());

  if (opts.sink) opts.sink->begin(log);

  std::size_t next = 0;
  for (std::int64_t day = 0; day < s.days; ++day) {
    const std::size_t first = next;
    std::map<VideoId, CounterSnapshot> snap;
    for (const auto& v : tracked) snap[v] = CounterSnapshot{v, day, 0, 0, 0, 0, 0};
    for (; next < log.events.size() && log.events[next].time.day == day; ++next) {
      const ViewEvent& e = log.events[next];
      const Verdict v = policy->ingest(e);
      log.verdicts.push_back(v);
      auto it = snap.find(e.video);
      if (it == snap.end()) continue;
      auto& c = it->second;
      (e.is_real_user ? c.generated_real : c.generated_fake) += 1;
      if (e.ad_requested && e.ad_watched_fully) ++c.ad_views;
      if (v.count_public) ++c.public_counted;
      if (v.count_monetized) ++c.monetized_counted;
    }
    const auto adjustments = policy->end_of_day(day);
    for (const auto& a : adjustments) {
      if (a.ref_day != day || a.applied_day > day) continue;
      auto it = snap.find(a.video);
      if (it == snap.end()) continue;
      (a.counter == CounterKind::Public ? it->second.public_counted : it->second.monetized_counted) += a.delta;
    }
    const std::size_t snap_first = log.snapshots.size();
    for (auto& [_, c] : snap) log.snapshots.push_back(c);
    const std::size_t adj_first = log.adjustments.size();
    log.adjustments.insert(log.adjustments.end(), adjustments.begin(), adjustments.end());

    if (opts.sink && day >= opts.skip_days) {
      opts.sink->day_closed(day, first,
                            std::span<const ViewEvent>(log.events).subspan(first, next - first),
                            std::span<const Verdict>(log.verdicts).subspan(first, next - first),
                            std::span<const CounterSnapshot>(log.snapshots).subspan(snap_first),
                            std::span<const Adjustment>(log.adjustments).subspan(adj_first));
    }
  }
  if (opts.sink) opts.sink->finish();
  return log;
}

std::map<std::pair<VideoId, std::int64_t>, FinalCounter> final_counters(const ExperimentLog& log) {
  std::map<std::pair<VideoId, std::int64_t>, FinalCounter> out;
  std::set<VideoId> tracked;
  for (const auto& a : log.arms) tracked.insert(a.videos.begin(), a.videos.end());
  for (const auto& v : tracked) {
    for (std::int64_t d = 0; d < log.days; ++d) out[{v, d}];
  }
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    auto it = out.find({e.video, e.time.day});
    if (it == out.end()) continue;
    auto& c = it->second;
    (e.is_real_user ? c.generated_real : c.generated_fake) += 1;
    if (e.ad_requested && e.ad_watched_fully) ++c.ad_views;
    if (log.verdicts[i].count_public) ++c.public_counted;
    if (log.verdicts[i].count_monetized) ++c.monetized_counted;
  }
  for (const auto& a : log.adjustments) {
    auto it = out.find({a.video, a.ref_day});
    if (it == out.end()) continue;
    (a.counter == CounterKind::Public ? it->second.public_counted : it->second.monetized_counted) += a.delta;
  }
  return out;
}

}  // namespace vfraud
