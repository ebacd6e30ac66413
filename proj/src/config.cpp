#include "vfraud/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vfraud/catalog.hpp"
#include "vfraud/error.hpp"

namespace vfraud {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it != j.end()) out = it->get<T>();
}

json anchors_json(const Anchors& a) {
  json out = json::array();
  for (const auto& [x, y] : a) out.push_back({x, y});
  return out;
}

Anchors anchors_from(const json& j) {
  Anchors out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) fail(ErrorCode::Format, "anchor points are [x, y] pairs");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

json params_json(const PolicyParams& p) {
  return json{{"single_video_threshold", p.single_video_threshold},
              {"multi_video_threshold", p.multi_video_threshold},
              {"multi_video_min_d", p.multi_video_min_d},
              {"decay_rate", p.decay_rate},
              {"burst_pass_fraction", p.burst_pass_fraction},
              {"multi_ip_pass_floor", p.multi_ip_pass_floor},
              {"randomized_http_pass", p.randomized_http_pass},
              {"detection_delay_clean", p.detection_delay_clean},
              {"detection_delay_known", p.detection_delay_known},
              {"blacklist_release_lag", p.blacklist_release_lag},
              {"nat_calibration", anchors_json(p.nat_calibration)},
              {"blacklist_threshold", p.blacklist_threshold},
              {"burst_min_views", p.burst_min_views},
              {"burst_max_gap_s", p.burst_max_gap_s},
              {"nat_min_clients", p.nat_min_clients},
              {"nat_per_user_rate", p.nat_per_user_rate},
              {"varied_agents_min", p.varied_agents_min},
              {"daily_credit_views", p.daily_credit_views},
              {"monetized_pass", anchors_json(p.monetized_pass)},
              {"suspension_min_ips", p.suspension_min_ips},
              {"suspension_delay_days", p.suspension_delay_days},
              {"public_curve", anchors_json(p.public_curve)},
              {"monetized_constant", p.monetized_constant},
              {"min_watch_s", p.min_watch_s}};
}

void params_from(const json& j, PolicyParams& p) {
  static const std::vector<std::string> known = {
      "single_video_threshold", "multi_video_threshold", "multi_video_min_d", "decay_rate",
      "burst_pass_fraction", "multi_ip_pass_floor", "randomized_http_pass", "detection_delay_clean",
      "detection_delay_known", "blacklist_release_lag", "nat_calibration", "blacklist_threshold",
      "burst_min_views", "burst_max_gap_s", "nat_min_clients", "nat_per_user_rate", "varied_agents_min",
      "daily_credit_views", "monetized_pass", "suspension_min_ips", "suspension_delay_days", "public_curve",
      "monetized_constant", "min_watch_s"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) fail(ErrorCode::Format, "unknown policy param '" + k + "'");
  }
  get_if(j, "single_video_threshold", p.single_video_threshold);
  get_if(j, "multi_video_threshold", p.multi_video_threshold);
  get_if(j, "multi_video_min_d", p.multi_video_min_d);
  get_if(j, "decay_rate", p.decay_rate);
  get_if(j, "burst_pass_fraction", p.burst_pass_fraction);
  get_if(j, "multi_ip_pass_floor", p.multi_ip_pass_floor);
  get_if(j, "randomized_http_pass", p.randomized_http_pass);
  get_if(j, "detection_delay_clean", p.detection_delay_clean);
  get_if(j, "detection_delay_known", p.detection_delay_known);
  get_if(j, "blacklist_release_lag", p.blacklist_release_lag);
  if (j.contains("nat_calibration")) p.nat_calibration = anchors_from(j["nat_calibration"]);
  get_if(j, "blacklist_threshold", p.blacklist_threshold);
  get_if(j, "burst_min_views", p.burst_min_views);
  get_if(j, "burst_max_gap_s", p.burst_max_gap_s);
  get_if(j, "nat_min_clients", p.nat_min_clients);
  get_if(j, "nat_per_user_rate", p.nat_per_user_rate);
  get_if(j, "varied_agents_min", p.varied_agents_min);
  get_if(j, "daily_credit_views", p.daily_credit_views);
  if (j.contains("monetized_pass")) p.monetized_pass = anchors_from(j["monetized_pass"]);
  get_if(j, "suspension_min_ips", p.suspension_min_ips);
  get_if(j, "suspension_delay_days", p.suspension_delay_days);
  if (j.contains("public_curve")) p.public_curve = anchors_from(j["public_curve"]);
  get_if(j, "monetized_constant", p.monetized_constant);
  get_if(j, "min_watch_s", p.min_watch_s);
}

std::string_view duration_name(DurationMode m) { return m == DurationMode::Fixed ? "fixed" : "exponential"; }
DurationMode parse_duration_mode(const std::string& s) {
  if (s == "fixed") return DurationMode::Fixed;
  if (s == "exponential") return DurationMode::Exponential;
  fail(ErrorCode::Format, "unknown duration mode '" + s + "'");
}
std::string_view wait_name(WaitMode m) { return m == WaitMode::Constant ? "constant" : "poisson"; }
WaitMode parse_wait_mode(const std::string& s) {
  if (s == "constant") return WaitMode::Constant;
  if (s == "poisson") return WaitMode::Poisson;
  fail(ErrorCode::Format, "unknown wait mode '" + s + "'");
}

json behavior_json(const BehaviorConfig& b) {
  json j{{"kind", to_string(b.kind)},
         {"views_per_day", b.views_per_day},
         {"videos_per_day", b.videos_per_day},
         {"duration_mode", duration_name(b.duration_mode)},
         {"fixed_duration_s", b.fixed_duration_s},
         {"video_length_s", b.video_length_s},
         {"wait_mode", wait_name(b.wait_mode)},
         {"constant_wait_s", b.constant_wait_s},
         {"poisson_rate_per_day", b.poisson_rate_per_day},
         {"burst_size", b.burst_size},
         {"burst_gap_s", b.burst_gap_s},
         {"cookies_enabled", b.cookies_enabled},
         {"randomize_http_attrs", b.randomize_http_attrs},
         {"user_agent", to_string(b.user_agent)},
         {"referrer", to_string(b.referrer)},
         {"first_view_offset_s", b.first_view_offset_s},
         {"start_day", b.start_day},
         {"ad_fill", b.ad_fill},
         {"real_user_mix", to_string(b.real_user_mix)},
         {"real_user_count", b.real_user_count}};
  if (b.end_day) j["end_day"] = *b.end_day;
  return j;
}

// Starts from the factory preset of `kind` so short configs stay short.
BehaviorConfig behavior_from(const json& j) {
  const auto kind = parse_behavior_kind(j.value("kind", std::string("Deterministic")));
  const int w = j.value("views_per_day", 20);
  BehaviorConfig b;
  switch (kind) {
    case BehaviorKind::Deterministic: b = BehaviorConfig::deterministic(w); break;
    case BehaviorKind::Burst: b = BehaviorConfig::burst(w); break;
    case BehaviorKind::PoissonWait: b = BehaviorConfig::poisson_wait(w); break;
    case BehaviorKind::ShortViews: b = BehaviorConfig::short_views(w); break;
    case BehaviorKind::Cookies: b = BehaviorConfig::cookies(w); break;
    case BehaviorKind::Complete: b = BehaviorConfig::complete(w); break;
    case BehaviorKind::Conservative: b = BehaviorConfig::conservative(); break;
    case BehaviorKind::Aggressive: b = BehaviorConfig::aggressive(); break;
    case BehaviorKind::RealUser: b = BehaviorConfig::real_user(0, RealUserMix::SocialMedia); break;
  }
  get_if(j, "views_per_day", b.views_per_day);
  get_if(j, "videos_per_day", b.videos_per_day);
  if (j.contains("duration_mode")) b.duration_mode = parse_duration_mode(j["duration_mode"].get<std::string>());
  get_if(j, "fixed_duration_s", b.fixed_duration_s);
  get_if(j, "video_length_s", b.video_length_s);
  if (j.contains("wait_mode")) b.wait_mode = parse_wait_mode(j["wait_mode"].get<std::string>());
  get_if(j, "constant_wait_s", b.constant_wait_s);
  get_if(j, "poisson_rate_per_day", b.poisson_rate_per_day);
  get_if(j, "burst_size", b.burst_size);
  get_if(j, "burst_gap_s", b.burst_gap_s);
  get_if(j, "cookies_enabled", b.cookies_enabled);
  get_if(j, "randomize_http_attrs", b.randomize_http_attrs);
  if (j.contains("user_agent")) b.user_agent = parse_user_agent(j["user_agent"].get<std::string>());
  if (j.contains("referrer")) b.referrer = parse_referrer(j["referrer"].get<std::string>());
  get_if(j, "first_view_offset_s", b.first_view_offset_s);
  get_if(j, "start_day", b.start_day);
  if (j.contains("end_day")) b.end_day = j["end_day"].get<int>();
  get_if(j, "ad_fill", b.ad_fill);
  if (j.contains("real_user_mix")) b.real_user_mix = parse_real_user_mix(j["real_user_mix"].get<std::string>());
  get_if(j, "real_user_count", b.real_user_count);
  return b;
}

// Runs of consecutive addresses with equal attributes collapse to one entry.
json pool_json(const std::vector<IpIdentity>& pool) {
  json out = json::array();
  std::size_t i = 0;
  while (i < pool.size()) {
    std::size_t n = 1;
    while (i + n < pool.size() && pool[i + n].address.value == pool[i].address.value + n &&
           pool[i + n].history == pool[i].history && !pool[i + n].first_seen && !pool[i].first_seen) {
      ++n;
    }
    json e{{"first", pool[i].address.str()}, {"count", n}, {"history", to_string(pool[i].history)}};
    if (pool[i].first_seen) e["first_seen"] = {pool[i].first_seen->day, pool[i].first_seen->second_of_day};
    out.push_back(std::move(e));
    i += n;
  }
  return out;
}

std::vector<IpIdentity> pool_from(const json& j) {
  std::vector<IpIdentity> out;
  for (const auto& e : j) {
    const std::string first = e.contains("address") ? e["address"].get<std::string>() : e.at("first").get<std::string>();
    const int count = e.value("count", 1);
    const IpHistory h = parse_ip_history(e.value("history", std::string("SeenClean")));
    for (auto& ip : make_ip_pool(Ipv4::parse(first), count, h)) {
      if (e.contains("first_seen")) {
        ip.first_seen = SimTime{e["first_seen"][0].get<std::int64_t>(), e["first_seen"][1].get<std::int32_t>()};
      }
      out.push_back(ip);
    }
  }
  return out;
}

json arm_json(const Arm& a) {
  json t{{"behavior", behavior_json(a.traffic.behavior)},
         {"ip_pool", pool_json(a.traffic.ip_pool)},
         {"videos", a.traffic.target_videos},
         {"seed", a.traffic.seed}};
  if (a.traffic.nat) {
    const auto& n = *a.traffic.nat;
    t["nat"] = json{{"group_id", n.group_id},
                    {"public_ip", n.public_ip.str()},
                    {"background_users", n.background_users},
                    {"background_views_per_user_per_day", n.background_views_per_user_per_day},
                    {"active_day_pattern", n.active_day_pattern}};
  }
  json j{{"label", a.label}, {"traffic", t}};
  if (!a.tags.empty()) j["tags"] = a.tags;
  return j;
}

Arm arm_from(const json& j) {
  Arm a;
  a.label = j.at("label").get<std::string>();
  a.traffic.label = a.label;
  get_if(j, "tags", a.tags);
  const json& t = j.at("traffic");
  a.traffic.behavior = behavior_from(t.value("behavior", json::object()));
  a.traffic.ip_pool = pool_from(t.at("ip_pool"));
  a.traffic.target_videos = t.at("videos").get<std::vector<VideoId>>();
  get_if(t, "seed", a.traffic.seed);
  if (t.contains("nat")) {
    const json& n = t["nat"];
    NatGroup g;
    g.group_id = n.at("group_id").get<std::string>();
    g.public_ip = Ipv4::parse(n.at("public_ip").get<std::string>());
    get_if(n, "background_users", g.background_users);
    get_if(n, "background_views_per_user_per_day", g.background_views_per_user_per_day);
    get_if(n, "active_day_pattern", g.active_day_pattern);
    a.traffic.nat = g;
  }
  return a;
}

json scenario_json(const Scenario& s) {
  json arms = json::array(), policies = json::array(), expected = json::array();
  for (const auto& a : s.arms) arms.push_back(arm_json(a));
  for (const auto& p : s.policies) {
    policies.push_back({{"label", p.label}, {"portal", to_string(p.portal)}, {"params", params_json(p.params)}});
  }
  for (const auto& e : s.expected) {
    expected.push_back({{"metric", e.metric}, {"op", to_string(e.op)}, {"target", e.target}, {"tolerance", e.tolerance}});
  }
  return json{{"name", s.name},   {"description", s.description}, {"report", s.report},
              {"days", s.days},   {"repeats", s.repeats},         {"seeds", s.seeds},
              {"arms", arms},     {"policies", policies},         {"expected", expected}};
}

Scenario scenario_from(const json& j) {
  Scenario s;
  s.name = j.at("name").get<std::string>();
  get_if(j, "description", s.description);
  get_if(j, "report", s.report);
  get_if(j, "days", s.days);
  get_if(j, "repeats", s.repeats);
  if (j.contains("seeds")) {
    s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  } else {
    s.seeds = seeds_for(j.value("base_seed", kDefaultBaseSeed), s.repeats);
  }
  for (const auto& a : j.value("arms", json::array())) s.arms.push_back(arm_from(a));
  for (const auto& p : j.value("policies", json::array())) {
    PolicyVariant v;
    v.portal = parse_portal(p.value("portal", std::string("YouTubeLike")));
    v.label = p.value("label", std::string(to_string(v.portal)));
    v.params = PolicyParams::defaults_for(v.portal);
    params_from(p.value("params", json::object()), v.params);
    s.policies.push_back(std::move(v));
  }
  for (const auto& e : j.value("expected", json::array())) {
    s.expected.push_back(Expectation{e.at("metric").get<std::string>(),
                                     parse_compare_op(e.value("op", std::string("approx"))),
                                     e.at("target").get<double>(), e.value("tolerance", 0.0)});
  }
  return s;
}

}  // namespace

std::vector<Scenario> parse_scenarios(std::string_view text, const std::vector<Scenario>& defaults) {
  const auto nl = text.find('\n');
  const std::string_view first = text.substr(0, nl);
  if (first != kScenariosHeader) {
    fail(ErrorCode::Format, "scenario config must start with '" + std::string(kScenariosHeader) + "'");
  }
  std::vector<Scenario> out;
  try {
    const json doc = json::parse(nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1));
    for (const auto& entry : doc.at("scenarios")) {
      json merged = entry;
      const std::string name = entry.at("name").get<std::string>();
      for (const auto& d : defaults) {
        if (d.name != name) continue;
        merged = scenario_json(d);
        // a changed repeat count or base seed re-derives the seeds
        if (!entry.contains("seeds") && (entry.contains("repeats") || entry.contains("base_seed"))) {
          merged.erase("seeds");
        }
        merged.merge_patch(entry);
        break;
      }
      Scenario s = scenario_from(merged);
      validate(s);
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("scenario config: ") + e.what());
  }
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path, const std::vector<Scenario>& defaults) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenarios(ss.str(), defaults);
}

std::string dump_scenarios(const std::vector<Scenario>& scenarios) {
  json arr = json::array();
  for (const auto& s : scenarios) arr.push_back(scenario_json(s));
  return std::string(kScenariosHeader) + "\n" + json{{"scenarios", arr}}.dump(2) + "\n";
}

std::vector<Scenario> merge_scenarios(std::vector<Scenario> defaults, const std::vector<Scenario>& overrides) {
  for (const auto& o : overrides) {
    auto it = std::find_if(defaults.begin(), defaults.end(), [&](const Scenario& s) { return s.name == o.name; });
    if (it != defaults.end()) {
      *it = o;
    } else {
      defaults.push_back(o);
    }
  }
  return defaults;
}

}  // namespace vfraud
