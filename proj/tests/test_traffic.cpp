#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "util.hpp"
#include "vfraud/traffic.hpp"

using namespace vfraud;

namespace {

TrafficSpec spec_for(BehaviorConfig b, int days, int ips = 1, std::uint64_t seed = 7) {
  TrafficSpec s;
  s.label = "t";
  s.behavior = b;
  s.ip_pool = make_ip_pool(Ipv4::parse("198.18.0.1"), ips, IpHistory::NeverSeen);
  s.target_videos = {"t:v0"};
  s.days = days;
  s.seed = seed;
  return s;
}

std::map<std::int64_t, int> per_day(const std::vector<ViewEvent>& s) {
  std::map<std::int64_t, int> m;
  for (const auto& e : s) ++m[e.time.day];
  return m;
}

}  // namespace

TEST_CASE("Deterministic W=20 over 8 days") {
  const auto s = schedule_views(spec_for(BehaviorConfig::deterministic(20), 8));
  REQUIRE(s.size() == 160);
  for (const auto& e : s) CHECK(e.duration_s == 40);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(s[i].time.total_seconds() - s[i - 1].time.total_seconds() == 4320);
  }
}

TEST_CASE("Burst of 20 has zero waits") {
  const auto s = schedule_views(spec_for(BehaviorConfig::burst(20), 1));
  REQUIRE(s.size() == 20);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].time == s[0].time);
}

TEST_CASE("W=0 yields an empty stream") {
  CHECK(schedule_views(spec_for(BehaviorConfig::deterministic(0), 5)).empty());
  CHECK(generate_traffic(spec_for(BehaviorConfig::deterministic(0), 5)).empty());
}

TEST_CASE("ShortViews and Cookies") {
  for (const auto& e : schedule_views(spec_for(BehaviorConfig::short_views(20), 2))) CHECK(e.duration_s == 1);
  const auto ck = schedule_views(spec_for(BehaviorConfig::cookies(20), 3));
  REQUIRE(!ck.empty());
  REQUIRE(ck[0].cookie_id.has_value());
  for (const auto& e : ck) CHECK(e.cookie_id == ck[0].cookie_id);
}

TEST_CASE("Complete varies HTTP attributes") {
  const auto s = schedule_views(spec_for(BehaviorConfig::complete(20), 8));
  std::set<int> agents, refs;
  for (const auto& e : s) {
    agents.insert(static_cast<int>(e.user_agent));
    refs.insert(static_cast<int>(e.referrer));
  }
  CHECK(agents.size() > 1);
  CHECK(refs.size() > 1);
}

TEST_CASE("Poisson waits average the configured rate") {
  const auto s = schedule_views(spec_for(BehaviorConfig::poisson_wait(20.0), 1000));
  const double mean = static_cast<double>(s.size()) / 1000.0;
  CHECK(mean == doctest::Approx(20.0).epsilon(0.01));
  CHECK(std::is_sorted(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.time < b.time; }));
}

TEST_CASE("unschedulable rates are rejected") {
  auto b = BehaviorConfig::deterministic(20);
  b.constant_wait_s = 86400;
  CHECK_VF_ERROR(schedule_views(spec_for(b, 1)), ErrorCode::Scheduling);
}

TEST_CASE("round-robin partition") {
  const auto s30 = generate_traffic(spec_for(BehaviorConfig::deterministic(30), 2, 10));
  std::map<std::pair<std::int64_t, std::uint32_t>, int> c;
  for (const auto& e : s30) ++c[{e.time.day, e.source_ip.value}];
  CHECK(c.size() == 20);
  for (const auto& [k, n] : c) CHECK(n == 3);

  const auto pool = make_ip_pool(Ipv4::parse("198.18.0.1"), 3, IpHistory::NeverSeen);
  const auto s7 = distribute_over_ips(schedule_views(spec_for(BehaviorConfig::deterministic(7), 1)), pool);
  std::vector<int> counts(3);
  for (const auto& e : s7) ++counts[e.source_ip.value - pool[0].address.value];
  CHECK(counts == std::vector<int>{3, 2, 2});

  const auto single = schedule_views(spec_for(BehaviorConfig::deterministic(7), 2));
  const auto one = make_ip_pool(Ipv4::parse("198.18.0.1"), 1, IpHistory::NeverSeen);
  CHECK(distribute_over_ips(single, one) == single);
}

TEST_CASE("NAT cover traffic") {
  NatGroup nat;
  nat.group_id = "loc1";
  nat.public_ip = Ipv4::parse("198.18.100.1");
  nat.background_users = 50;
  const auto probe = schedule_views(spec_for(BehaviorConfig::deterministic(20), 4));
  const auto out = apply_nat(probe, nat, 4, 3);
  for (const auto& e : out) CHECK(e.source_ip == nat.public_ip);
  for (const auto& [day, n] : per_day(out)) {
    const int background = n - 20;
    CHECK(background > 340);
    CHECK(background < 460);
  }

  nat.background_users = 0;
  const auto bare = apply_nat(probe, nat, 4, 3);
  REQUIRE(bare.size() == probe.size());
  for (std::size_t i = 0; i < bare.size(); ++i) {
    ViewEvent e = probe[i];
    e.source_ip = nat.public_ip;
    e.nat_group = nat.group_id;
    CHECK(bare[i] == e);
  }

  nat.background_users = 50;
  nat.active_day_pattern = {true, false};
  const auto offs = apply_nat(probe, nat, 4, 3);
  const auto d = per_day(offs);
  CHECK(d.at(1) == 20);
  CHECK(d.at(3) == 20);
  CHECK(d.at(0) > 20);
}

TEST_CASE("real-user generators") {
  const auto pool = make_ip_pool(Ipv4::parse("198.18.9.1"), 200, IpHistory::NeverSeen);
  const auto social = gen_real_user_views(330, RealUserMix::SocialMedia, 1, pool, "s:v0", 4);
  REQUIRE(social.size() == 330);
  std::set<std::uint32_t> ips;
  for (const auto& e : social) {
    CHECK(e.is_real_user);
    ips.insert(e.source_ip.value);
  }
  CHECK(ips.size() >= 100);

  const auto crowd = gen_real_user_views(599, RealUserMix::Crowdsourcing, 1, pool, "c:v0", 4);
  REQUIRE(crowd.size() == 599);
  std::map<std::uint32_t, int> uses;
  for (const auto& e : crowd) ++uses[e.source_ip.value];
  CHECK(uses.size() <= 60);
  int heaviest = 0;
  for (const auto& [ip, n] : uses) heaviest = std::max(heaviest, n);
  CHECK(heaviest >= 9);

  double social_dur = 0, crowd_dur = 0;
  for (const auto& e : social) social_dur += static_cast<double>(e.duration_s);
  for (const auto& e : crowd) crowd_dur += static_cast<double>(e.duration_s);
  CHECK(crowd_dur / 599.0 < social_dur / 330.0);

  CHECK(gen_real_user_views(0, RealUserMix::SocialMedia, 1, pool, "s:v0", 4).empty());
}

TEST_CASE("same spec and seed give the same stream") {
  auto spec = spec_for(BehaviorConfig::complete(20), 8, 3, 42);
  CHECK(generate_traffic(spec) == generate_traffic(spec));
  auto other = spec;
  other.seed = 43;
  CHECK(generate_traffic(spec) != generate_traffic(other));
}

TEST_CASE("invalid specs") {
  auto s = spec_for(BehaviorConfig::deterministic(20), 1);
  s.ip_pool.clear();
  CHECK_VF_ERROR(generate_traffic(s), ErrorCode::Validation);
  s = spec_for(BehaviorConfig::deterministic(20), 1);
  s.target_videos.clear();
  CHECK_VF_ERROR(generate_traffic(s), ErrorCode::Validation);
}
