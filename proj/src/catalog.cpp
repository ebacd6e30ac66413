#include "vfraud/catalog.hpp"

#include <algorithm>

#include "vfraud/error.hpp"

namespace vfraud {

namespace {

// Benchmarking range 198.18.0.0/15; every arm gets its own /24 unless the
// scenario places addresses itself.
Ipv4 block(int n) { return Ipv4{(198u << 24) | (18u << 16) | (static_cast<std::uint32_t>(n) << 8) | 1u}; }

std::vector<VideoId> videos_for(const std::string& arm, int n) {
  std::vector<VideoId> out;
  for (int i = 0; i < n; ++i) out.push_back(arm + ":v" + std::to_string(i));
  return out;
}

Arm make_arm(const std::string& label, BehaviorConfig b, std::vector<IpIdentity> pool, int n_videos = 1) {
  Arm a;
  a.label = label;
  a.traffic.label = label;
  a.traffic.behavior = std::move(b);
  a.traffic.ip_pool = std::move(pool);
  a.traffic.target_videos = videos_for(label, n_videos);
  return a;
}

std::vector<IpIdentity> pool(int blk, int count = 1, IpHistory h = IpHistory::SeenClean) {
  return make_ip_pool(block(blk), count, h);
}

PolicyVariant variant(const std::string& label, PortalKind portal) {
  return PolicyVariant{label, portal, PolicyParams::defaults_for(portal)};
}

PolicyVariant youtube() { return variant("youtube", PortalKind::YouTubeLike); }
PolicyVariant dailymotion() { return variant("dailymotion", PortalKind::DailymotionLike); }
PolicyVariant permissive() { return variant("permissive", PortalKind::Permissive); }

Expectation approx(std::string metric, double target, double tol) {
  return Expectation{std::move(metric), CompareOp::Approx, target, tol};
}
Expectation le(std::string metric, double target) { return Expectation{std::move(metric), CompareOp::Le, target, 0.0}; }
Expectation ge(std::string metric, double target) { return Expectation{std::move(metric), CompareOp::Ge, target, 0.0}; }

Scenario base(const std::string& name, const std::string& description, const std::string& report, int days,
              int repeats) {
  Scenario s;
  s.name = name;
  s.description = description;
  s.report = report;
  s.days = days;
  s.repeats = repeats;
  s.seeds = seeds_for(kDefaultBaseSeed, repeats);
  return s;
}

Scenario portals_public() {
  Scenario s = base("portals-public", "one IP, one video, W in {100,400,500} per day under three portals",
                    "portals", 8, 3);
  int blk = 0;
  for (int w : {100, 400, 500}) {
    Arm a = make_arm("w" + std::to_string(w), BehaviorConfig::deterministic(w), pool(blk++));
    a.tags["w"] = std::to_string(w);
    s.arms.push_back(std::move(a));
  }
  s.policies = {youtube(), dailymotion(), permissive()};
  const double dm[] = {1.00, 0.93, 0.85};
  int i = 0;
  for (int w : {100, 400, 500}) {
    const std::string arm = "w" + std::to_string(w);
    s.expected.push_back(le("rfn_public/youtube/" + arm, 0.02));
    s.expected.push_back(approx("rfn_public/dailymotion/" + arm, dm[i++], 0.02));
    s.expected.push_back(ge("rfn_public/permissive/" + arm, 0.95));
  }
  return s;
}

Scenario false_positives() {
  Scenario s = base("false-positives", "real viewers recruited via social media and a crowdsourcing platform",
                    "bars", 4, 3);
  Arm social = make_arm("social", BehaviorConfig::real_user(330, RealUserMix::SocialMedia), pool(0, 200));
  Arm crowd = make_arm("crowd", BehaviorConfig::real_user(599, RealUserMix::Crowdsourcing), pool(1, 40));
  social.tags["source"] = "social-media";
  crowd.tags["source"] = "crowdsourcing";
  s.arms = {social, crowd};
  s.policies = {youtube(), dailymotion()};
  const std::pair<const char*, double> bands[] = {
      {"rfp/youtube/social", 0.024}, {"rfp/youtube/crowd", 0.103},
      {"rfp/dailymotion/social", 0.109}, {"rfp/dailymotion/crowd", 0.122}};
  for (const auto& [m, v] : bands) {
    s.expected.push_back(approx(m, v, 0.05));
    s.expected.push_back(le(m, 0.12));
  }
  return s;
}

Scenario monetized_baseline() {
  Scenario s = base("monetized-baseline", "W=20 views/day with ads on every view, public vs monetized counters",
                    "monetized", 20, 3);
  BehaviorConfig b = BehaviorConfig::deterministic(20);
  b.ad_fill = 1.0;
  s.arms.push_back(make_arm("w20", b, pool(0)));
  s.arms.back().tags["w"] = "20";
  s.policies = {youtube(), dailymotion()};
  s.expected = {approx("rfn_public/youtube/w20", 0.07, 0.04), approx("rfn_monetized/youtube/w20", 0.82, 0.05)};
  return s;
}

Scenario behaviors() {
  Scenario s = base("behaviors", "six probe behaviors at W=20 views/day for 8 days", "bars", 8, 3);
  const std::pair<const char*, BehaviorConfig> kinds[] = {
      {"D", BehaviorConfig::deterministic(20)}, {"B", BehaviorConfig::burst(20)},
      {"P", BehaviorConfig::poisson_wait(20)},  {"SV", BehaviorConfig::short_views(20)},
      {"CK", BehaviorConfig::cookies(20)},      {"C", BehaviorConfig::complete(20)}};
  int blk = 0;
  for (const auto& [label, b] : kinds) {
    s.arms.push_back(make_arm(label, b, pool(blk++)));
    s.arms.back().tags["behavior"] = label;
  }
  s.policies = {youtube()};
  s.expected = {approx("rfn_public/youtube/C", 0.40, 0.05),
                le("rfn_public/youtube/B", 0.04),
                approx("rfn_public/youtube/D", 0.07, 0.04),
                approx("rfn_public/youtube/SV", 0.06, 0.04),
                approx("rfn_public/youtube/CK - rfn_public/youtube/D", 0.0, 0.02)};
  return s;
}

Scenario decay_curve() {
  Scenario s = base("decay-curve", "one IP, one video, W swept from 1 to 60 views/day for 8 days", "sweep", 8, 3);
  int blk = 0;
  for (int w : {1, 4, 7, 8, 9, 10, 20, 30, 40, 50, 60}) {
    const std::string arm = "w" + std::to_string(w);
    s.arms.push_back(make_arm(arm, BehaviorConfig::deterministic(w), pool(blk++)));
    s.arms.back().tags["w"] = std::to_string(w);
    if (w <= 8) s.expected.push_back(approx("rfn_public/youtube/" + arm, 1.0, 0.0));
    if (w >= 30) s.expected.push_back(le("rfn_public/youtube/" + arm, 0.01));
  }
  s.policies = {youtube()};
  s.expected.push_back(approx("fit_k/youtube", 0.455, 0.02));
  s.expected.push_back(ge("fit_r2/youtube", 0.99));
  s.expected.push_back(approx("fit_threshold/youtube", 8.0, 0.0));
  return s;
}

Scenario multi_video() {
  Scenario s = base("multi-video", "one IP spreading W views/day over D videos, 28 (W,D) pairs, 7 days", "matrix",
                    7, 1);
  const int values[] = {1, 3, 5, 7, 10, 15, 20};
  int blk = 0;
  for (int w : values) {
    for (int d : values) {
      if (d > w) continue;
      const std::string arm = "w" + std::to_string(w) + "d" + std::to_string(d);
      BehaviorConfig b = BehaviorConfig::deterministic(w);
      b.videos_per_day = d;
      s.arms.push_back(make_arm(arm, b, pool(blk++), d));
      s.arms.back().tags["w"] = std::to_string(w);
      s.arms.back().tags["d"] = std::to_string(d);
      // no penalization up to 8 views/day, or up to 15 with three or more videos
      if (w <= 8 || (d >= 3 && w <= 15)) s.expected.push_back(approx("rfn_public/youtube/" + arm, 1.0, 0.0));
    }
  }
  s.policies = {youtube()};
  return s;
}

Scenario multi_ip() {
  Scenario s = base("multi-ip", "3 views/day from each of K proxies to one video, K in {10,20,40}", "linearity",
                    10, 3);
  int blk = 0;
  for (int k : {10, 20, 40}) {
    const std::string arm = "k" + std::to_string(k);
    s.arms.push_back(make_arm(arm, BehaviorConfig::deterministic(3 * k), pool(blk++, k)));
    s.arms.back().tags["k"] = std::to_string(k);
    s.expected.push_back(ge("rfn_public/youtube/" + arm, 0.73));
    s.expected.push_back(ge("linearity_r2/youtube/" + arm, 0.99));
  }
  s.policies = {youtube()};
  return s;
}

Scenario ip_blacklisting() {
  Scenario s = base("ip-blacklisting",
                    "conservative probes on two IPs for 34 days, aggressive probe on IP-2 days 8 to 24", "timeline",
                    34, 3);
  const auto ip1 = pool(0);
  const auto ip2 = pool(1);
  s.arms.push_back(make_arm("ip1-conservative", BehaviorConfig::conservative(), ip1));
  s.arms.push_back(make_arm("ip2-conservative", BehaviorConfig::conservative(), ip2));
  BehaviorConfig aggr = BehaviorConfig::aggressive();
  aggr.start_day = 8;
  aggr.end_day = 25;
  s.arms.push_back(make_arm("ip2-aggressive", aggr, ip2));
  s.arms[0].tags["ip"] = "IP-1";
  s.arms[1].tags["ip"] = "IP-2";
  s.arms[2].tags["ip"] = "IP-2";
  s.policies = {youtube()};
  for (int d = 0; d < s.days; ++d) {
    const std::string ds = std::to_string(d);
    s.expected.push_back(approx("daily_public/youtube/ip1-conservative/" + ds, 1.0, 0.0));
    s.expected.push_back(approx("daily_public/youtube/ip2-conservative/" + ds, d >= 9 && d <= 26 ? 0.0 : 1.0, 0.0));
  }
  return s;
}

Scenario nat() {
  Scenario s = base("nat",
                    "probes behind NATs of three sizes for 8 days, and a 194-day run with workdays and days off",
                    "nat", 194, 1);
  struct Loc {
    const char* label;
    int w;
    int users;
    double rfn;
  };
  const Loc locs[] = {{"loc1", 20, 50, 0.90}, {"loc2", 75, 100, 0.43}, {"loc3", 100, 50, 0.36}};
  int blk = 0;
  for (const auto& l : locs) {
    BehaviorConfig b = BehaviorConfig::deterministic(l.w);
    b.end_day = 8;
    Arm a = make_arm(l.label, b, pool(blk));
    NatGroup g;
    g.group_id = std::string("nat-") + l.label;
    g.public_ip = Ipv4{block(blk).value + 100};
    g.background_users = l.users;
    a.traffic.nat = g;
    a.tags["w"] = std::to_string(l.w);
    a.tags["users"] = std::to_string(l.users);
    s.arms.push_back(std::move(a));
    s.expected.push_back(approx(std::string("rfn_public/youtube/") + l.label, l.rfn, 0.03));
    ++blk;
  }
  // five workdays then two days off
  BehaviorConfig b = BehaviorConfig::deterministic(75);
  Arm a = make_arm("loc2-long", b, pool(blk));
  NatGroup g;
  g.group_id = "nat-loc2-long";
  g.public_ip = Ipv4{block(blk).value + 100};
  g.background_users = 132;
  g.active_day_pattern = {true, true, true, true, true, false, false};
  a.traffic.nat = g;
  a.tags["w"] = "75";
  a.tags["users"] = "132";
  s.arms.push_back(std::move(a));
  s.expected.push_back(approx("rfn_public_workday/youtube/loc2-long", 0.60, 0.05));
  s.expected.push_back(le("rfn_public_dayoff/youtube/loc2-long", 0.05));
  s.policies = {youtube()};
  return s;
}

Scenario prefix() {
  Scenario s = base("prefix", "aggressive IP next to a moderate neighbour sharing a /24 to /30 prefix", "prefix", 8,
                    1);
  int blk = 0;
  for (int len = 24; len <= 30; ++len) {
    const Ipv4 a_ip{block(blk).value & ~0xFFu};
    const Ipv4 b_ip{a_ip.value ^ (1u << (31 - len))};
    const std::string l = std::to_string(len);
    s.arms.push_back(make_arm("p" + l + "-aggressive", BehaviorConfig::aggressive(),
                              {IpIdentity{a_ip, std::nullopt, IpHistory::SeenClean}}));
    s.arms.push_back(make_arm("p" + l + "-neighbour", BehaviorConfig::deterministic(8),
                              {IpIdentity{b_ip, std::nullopt, IpHistory::SeenClean}}));
    s.arms[s.arms.size() - 2].tags["prefix"] = l;
    s.arms.back().tags["prefix"] = l;
    s.expected.push_back(approx("rfn_public/youtube/p" + l + "-neighbour", 1.0, 0.0));
    s.expected.push_back(approx("detection_day/youtube/p" + l + "-neighbour", -1.0, 0.0));
    s.expected.push_back(le("rfn_public/youtube/p" + l + "-aggressive", 0.05));
    ++blk;
  }
  s.policies = {youtube()};
  return s;
}

Scenario detection_time() {
  Scenario s = base("detection-time", "seven probes (W = 3..25) on each of three IPs with different histories",
                    "detection", 16, 1);
  const std::pair<const char*, IpHistory> hist[] = {{"clean", IpHistory::NeverSeen},
                                                     {"seen", IpHistory::SeenClean},
                                                     {"misbehaved", IpHistory::SeenMisbehaving}};
  int blk = 0;
  for (const auto& [h, history] : hist) {
    const auto ip = pool(blk++, 1, history);
    for (int w : {3, 5, 7, 10, 15, 20, 25}) {
      const std::string arm = std::string(h) + "-w" + std::to_string(w);
      s.arms.push_back(make_arm(arm, BehaviorConfig::deterministic(w), ip));
      s.arms.back().tags["history"] = h;
      s.arms.back().tags["w"] = std::to_string(w);
      s.expected.push_back(approx("detection_day/youtube/" + arm, history == IpHistory::NeverSeen ? 12.0 : 1.0, 0.0));
    }
  }
  s.policies = {youtube()};
  return s;
}

Scenario monetized_aggressive() {
  Scenario s = base("monetized-aggressive", "one IP, one monetized video, W in {40..150} per day for 10 days",
                    "monetized", 10, 3);
  int blk = 0;
  for (int w : {40, 60, 80, 100, 150}) {
    const std::string arm = "w" + std::to_string(w);
    BehaviorConfig b = BehaviorConfig::deterministic(w);
    b.ad_fill = 1.0;
    s.arms.push_back(make_arm(arm, b, pool(blk++)));
    s.arms.back().tags["w"] = std::to_string(w);
    s.expected.push_back(ge("rfn_monetized/youtube/" + arm, 0.95));
    s.expected.push_back(ge("rfn_gap/youtube/" + arm, 0.75));
  }
  s.policies = {youtube()};
  return s;
}

Scenario advertiser() {
  Scenario s = base("advertiser", "four monetized videos with the IP counts and rates of the ad campaign", "advertiser",
                    8, 1);
  struct Video {
    const char* label;
    int ips;
    int per_ip;
    bool suspended;
  };
  const Video vids[] = {{"video1", 1, 10, false}, {"video2", 1, 20, false}, {"video3", 8, 10, true},
                        {"video4", 2, 70, true}};
  int blk = 0;
  for (const auto& v : vids) {
    BehaviorConfig b = BehaviorConfig::deterministic(v.ips * v.per_ip);
    b.ad_fill = 1.0;
    s.arms.push_back(make_arm(v.label, b, pool(blk++, v.ips)));
    s.arms.back().tags["ips"] = std::to_string(v.ips);
    s.arms.back().tags["per_ip"] = std::to_string(v.per_ip);
    const std::string key = std::string("/youtube/") + v.label;
    s.expected.push_back(ge("monetized_gross" + key + " - public_ads" + key, 0.0));
    if (v.suspended) {
      s.expected.push_back(approx("suspended" + key, 5.0, 0.0));
      s.expected.push_back(ge("monetized_removed" + key, 1.0));
    } else {
      s.expected.push_back(approx("suspended" + key, -1.0, 0.0));
      s.expected.push_back(approx("monetized_removed" + key, 0.0, 0.0));
    }
  }
  s.policies = {youtube()};
  return s;
}

}  // namespace

std::vector<Scenario> catalog() {
  return {portals_public(), false_positives(), monetized_baseline(), behaviors(),      decay_curve(),
          multi_video(),    multi_ip(),        ip_blacklisting(),    nat(),            prefix(),
          detection_time(), monetized_aggressive(), advertiser()};
}

std::vector<std::string> scenario_names(const std::vector<Scenario>& scenarios) {
  std::vector<std::string> out;
  for (const auto& s : scenarios) out.push_back(s.name);
  return out;
}

const Scenario& find_scenario(const std::vector<Scenario>& scenarios, std::string_view name) {
  for (const auto& s : scenarios) {
    if (s.name == name) return s;
  }
  std::string list;
  for (const auto& s : scenarios) list += (list.empty() ? "" : ", ") + s.name;
  fail(ErrorCode::UnknownScenario, "unknown scenario '" + std::string(name) + "' (available: " + list + ")");
}

Scenario with_overrides(Scenario s, std::optional<std::uint64_t> base_seed, std::optional<int> repeats) {
  if (repeats) {
    if (*repeats < 1) fail(ErrorCode::InvalidArgument, "repeats must be >= 1");
    s.repeats = *repeats;
  }
  if (base_seed || repeats) s.seeds = seeds_for(base_seed.value_or(kDefaultBaseSeed), s.repeats);
  return s;
}

std::vector<Scenario> select_scenarios(const std::vector<Scenario>& scenarios,
                                       const std::vector<std::string>& names) {
  if (names.empty() || std::find(names.begin(), names.end(), "all") != names.end()) return scenarios;
  std::vector<Scenario> out;
  for (const auto& n : names) {
    const Scenario& s = find_scenario(scenarios, n);
    if (std::none_of(out.begin(), out.end(), [&](const Scenario& x) { return x.name == s.name; })) out.push_back(s);
  }
  return out;
}

}  // namespace vfraud
