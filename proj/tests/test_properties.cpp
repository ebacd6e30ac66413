// Randomized property checks. Inputs come from a fixed-seed generator so
// failures reproduce.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "util.hpp"
#include "vfraud/audit.hpp"
#include "vfraud/metrics.hpp"
#include "vfraud/policies.hpp"
#include "vfraud/traffic.hpp"

using namespace vfraud;

namespace {

constexpr int kTrials = 60;

int uniform(std::mt19937_64& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

BehaviorConfig random_behavior(std::mt19937_64& g) {
  const int w = uniform(g, 1, 60);
  switch (uniform(g, 0, 6)) {
    case 0: return BehaviorConfig::deterministic(w);
    case 1: return BehaviorConfig::burst(uniform(g, 5, 30));
    case 2: return BehaviorConfig::complete(w);
    case 3: return BehaviorConfig::short_views(w);
    case 4: return BehaviorConfig::cookies(w);
    case 5: return BehaviorConfig::aggressive();
    default: return BehaviorConfig::poisson_wait(static_cast<double>(w));
  }
}

IpHistory random_history(std::mt19937_64& g) { return static_cast<IpHistory>(uniform(g, 0, 2)); }

std::vector<Verdict> verdicts_for(const vftest::Replay& r, const std::vector<ViewEvent>& s, Ipv4 ip) {
  std::vector<Verdict> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].source_ip == ip) out.push_back(r.verdicts[i]);
  }
  return out;
}

std::vector<Adjustment> adjustments_for(const vftest::Replay& r, const std::string& video) {
  std::vector<Adjustment> out;
  for (const auto& a : r.adjustments) {
    if (a.video == video) out.push_back(a);
  }
  return out;
}

}  // namespace

TEST_CASE("prefix isolation for /24 to /30 neighbours") {
  std::mt19937_64 g(24);
  for (int bits = 24; bits <= 30; ++bits) {
    for (int t = 0; t < kTrials / 4; ++t) {
      CAPTURE(bits);
      CAPTURE(t);
      const std::uint32_t host_bits = 32 - bits;
      const std::uint32_t net = (198u << 24) | (18u << 16) | (static_cast<std::uint32_t>(uniform(g, 0, 255)) << 8);
      const std::uint32_t base = net & ~((1u << host_bits) - 1u);
      const auto off_a = static_cast<std::uint32_t>(uniform(g, 0, (1 << host_bits) - 1));
      auto off_b = off_a;
      while (off_b == off_a) off_b = static_cast<std::uint32_t>(uniform(g, 0, (1 << host_bits) - 1));
      const Ipv4 a{base | off_a}, b{base | off_b};
      REQUIRE(same_prefix(a, b, bits));

      const int days = uniform(g, 3, 10);
      const IpHistory ha = random_history(g), hb = random_history(g);
      auto bad = BehaviorConfig::aggressive();
      bad.views_per_day = uniform(g, 30, 120);
      const auto sa = generate_traffic(vftest::probe(bad, a.str(), "bad:v0", days, ha, g()));
      const auto sb = generate_traffic(vftest::probe(random_behavior(g), b.str(), "good:v0", days, hb, g()));

      auto alone = make_policy(PortalKind::YouTubeLike);
      alone->register_ip({b, std::nullopt, hb});
      const auto ra = vftest::replay(*alone, sb, days);

      const auto both = vftest::merge(sa, sb);
      auto shared = make_policy(PortalKind::YouTubeLike);
      shared->register_ip({a, std::nullopt, ha});
      shared->register_ip({b, std::nullopt, hb});
      const auto rb = vftest::replay(*shared, both, days);

      CHECK(verdicts_for(rb, both, b) == ra.verdicts);
      CHECK(adjustments_for(rb, "good:v0") == adjustments_for(ra, "good:v0"));
    }
  }
}

TEST_CASE("policy verdicts are deterministic") {
  std::mt19937_64 g(1);
  for (int t = 0; t < kTrials / 3; ++t) {
    const int days = uniform(g, 2, 8);
    const auto s = vftest::merge(
        generate_traffic(vftest::probe(random_behavior(g), "198.18.0.1", "a:v0", days, random_history(g), g())),
        generate_traffic(vftest::probe(random_behavior(g), "198.18.0.2", "b:v0", days, random_history(g), g())));
    for (auto k : {PortalKind::YouTubeLike, PortalKind::DailymotionLike, PortalKind::Permissive}) {
      auto p = make_policy(k);
      auto q = make_policy(k);
      const auto r1 = vftest::replay(*p, s, days);
      const auto r2 = vftest::replay(*q, s, days);
      CHECK(r1.verdicts == r2.verdicts);
      CHECK(r1.adjustments == r2.adjustments);
    }
  }
}

TEST_CASE("traffic generation is deterministic, ordered and conserves counts") {
  std::mt19937_64 g(2);
  for (int t = 0; t < kTrials; ++t) {
    const int days = uniform(g, 1, 12);
    const auto b = random_behavior(g);
    auto spec = vftest::probe(b, "198.18.0.1", "a:v0", days, IpHistory::SeenClean, g());
    const auto s1 = schedule_views(spec);
    const auto s2 = schedule_views(spec);
    CHECK(s1 == s2);
    CHECK(std::is_sorted(s1.begin(), s1.end(), [](const auto& x, const auto& y) { return x.time < y.time; }));
    for (const auto& e : s1) CHECK_NOTHROW(validate(e));
    if (b.kind != BehaviorKind::PoissonWait && b.kind != BehaviorKind::Complete) {
      CHECK(s1.size() == static_cast<std::size_t>(b.views_per_day) * static_cast<std::size_t>(days));
    }
  }
}

TEST_CASE("round-robin keeps per-IP daily rates within one") {
  std::mt19937_64 g(3);
  for (int t = 0; t < kTrials; ++t) {
    const int w = uniform(g, 1, 200), k = uniform(g, 1, 50);
    const auto pool = make_ip_pool(Ipv4::parse("198.18.0.1"), k, IpHistory::SeenClean);
    const auto s = distribute_over_ips(
        schedule_views(vftest::probe(BehaviorConfig::deterministic(w), "198.18.0.1", "a:v0", 2)), pool);
    std::map<std::pair<std::int64_t, std::uint32_t>, int> c;
    for (const auto& e : s) ++c[{e.time.day, e.source_ip.value}];
    for (const auto& [key, n] : c) {
      CHECK(std::abs(n - static_cast<double>(w) / k) < 1.0);
    }
  }
}

TEST_CASE("apply_nat preserves the probe events") {
  std::mt19937_64 g(4);
  for (int t = 0; t < kTrials / 3; ++t) {
    const int days = uniform(g, 1, 8);
    const auto probe = schedule_views(
        vftest::probe(random_behavior(g), "198.18.0.1", "p:v0", days, IpHistory::SeenClean, g()));
    NatGroup nat;
    nat.group_id = "n";
    nat.public_ip = Ipv4::parse("198.18.200.1");
    nat.background_users = uniform(g, 0, 60);
    if (uniform(g, 0, 1)) nat.active_day_pattern = {true, true, false};
    const auto out = apply_nat(probe, nat, days, g());
    std::vector<ViewEvent> kept;
    for (const auto& e : out) {
      CHECK(e.source_ip == nat.public_ip);
      if (e.video == "p:v0") kept.push_back(e);
    }
    std::vector<ViewEvent> want = probe;
    for (auto& e : want) {
      e.source_ip = nat.public_ip;
      e.nat_group = nat.group_id;
    }
    const auto key = [](const ViewEvent& x, const ViewEvent& y) { return to_line(x) < to_line(y); };
    std::sort(kept.begin(), kept.end(), key);
    std::sort(want.begin(), want.end(), key);
    CHECK(kept == want);
  }
}

TEST_CASE("pass fractions are monotone") {
  const auto p = PolicyParams::defaults_for(PortalKind::YouTubeLike);
  for (int d = 1; d <= 8; ++d) {
    double prev = 1.0;
    for (int w = d; w <= 80; ++w) {
      const double f = multi_video_fraction(p, w, d);
      CHECK(f <= prev);
      CHECK(f >= 0.0);
      // single-video penalization is never milder
      CHECK(decay_fraction(p, w) <= f);
      prev = f;
    }
  }
  for (int w = 16; w <= 80; ++w) {
    for (int d = p.multi_video_min_d; d < std::min(w, 10); ++d) {
      CHECK(multi_video_fraction(p, w, d) <= multi_video_fraction(p, w, d + 1));
    }
  }
  double prev = 1.0;
  for (double w = 0; w <= 80; w += 0.25) {
    const double f = decay_fraction(p, w);
    if (w > p.single_video_threshold) {
      CHECK(f < prev);
    } else {
      CHECK(f == 1.0);
    }
    prev = f;
  }
  CHECK(decay_fraction(p, 8.0 + 1e-9) == doctest::Approx(1.0));
}

TEST_CASE("rates are scale invariant") {
  std::mt19937_64 g(5);
  for (int t = 0; t < kTrials * 5; ++t) {
    const int gen = uniform(g, 1, 1000), c = uniform(g, 0, gen), m = uniform(g, 1, 1000);
    CHECK(false_negative_rate(c, gen) == doctest::Approx(false_negative_rate(std::int64_t{c} * m, std::int64_t{gen} * m)));
    CHECK(false_positive_rate(c, gen) == doctest::Approx(false_positive_rate(std::int64_t{c} * m, std::int64_t{gen} * m)));
  }
}

TEST_CASE("median ignores order and bounds a single outlier") {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < kTrials * 3; ++t) {
    std::vector<double> v(static_cast<std::size_t>(uniform(g, 1, 30)));
    for (auto& x : v) x = u(g);
    const double m = median(v);
    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), g);
    CHECK(median(shuffled) == m);

    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n < 4) continue;
    // replacing one value moves the median by at most one order statistic
    const std::size_t h = n / 2;
    const double lo = n % 2 ? sorted[h - 1] : (sorted[h - 2] + sorted[h - 1]) / 2;
    const double hi = n % 2 ? sorted[h + 1] : (sorted[h] + sorted[h + 1]) / 2;
    auto changed = v;
    changed[static_cast<std::size_t>(uniform(g, 0, static_cast<int>(n) - 1))] = uniform(g, 0, 1) ? 1e6 : -1e6;
    const double m2 = median(changed);
    CHECK(m2 >= lo);
    CHECK(m2 <= hi);
  }
}

TEST_CASE("blacklisted IPs are discounted on every video") {
  std::mt19937_64 g(7);
  for (int t = 0; t < kTrials / 3; ++t) {
    const int days = uniform(g, 4, 12);
    auto bad = BehaviorConfig::aggressive();
    bad.views_per_day = uniform(g, 30, 90);
    bad.start_day = uniform(g, 0, 2);
    bad.end_day = uniform(g, bad.start_day + 1, days);
    const auto s = vftest::merge(
        generate_traffic(vftest::probe(bad, "198.18.1.1", "g:v0", days, random_history(g), g())),
        generate_traffic(vftest::probe(BehaviorConfig::deterministic(uniform(g, 1, 6)), "198.18.1.1", "c:v0", days,
                                       IpHistory::SeenClean, g())));
    YouTubeLikePolicy p(PolicyParams::defaults_for(PortalKind::YouTubeLike));
    std::int64_t open = 0;
    for (const auto& e : s) {
      while (open < e.time.day) p.end_of_day(open++);
      const bool listed = p.is_blacklisted(e.source_ip, e.time.day);
      const Verdict v = p.ingest(e);
      if (listed) {
        CHECK_FALSE(v.count_public);
        CHECK(v.reason == Reason::Blacklisted);
      }
    }
  }
}

TEST_CASE("clone then continue equals an uninterrupted run") {
  std::mt19937_64 g(8);
  for (int t = 0; t < kTrials / 3; ++t) {
    const int days = uniform(g, 2, 8);
    const auto s = generate_traffic(vftest::probe(random_behavior(g), "198.18.0.9", "a:v0", days,
                                                  random_history(g), g()));
    auto p = make_policy(PortalKind::YouTubeLike);
    const auto full = vftest::replay(*p, s, days);
    auto q = make_policy(PortalKind::YouTubeLike);
    const std::size_t cut = s.empty() ? 0 : static_cast<std::size_t>(uniform(g, 0, static_cast<int>(s.size()) - 1));
    std::vector<Verdict> v;
    for (std::size_t i = 0; i < cut; ++i) v.push_back(q->ingest(s[i]));
    auto r = q->clone();
    q.reset();
    for (std::size_t i = cut; i < s.size(); ++i) v.push_back(r->ingest(s[i]));
    // days are closed implicitly by later events; compare verdicts only
    CHECK(v == full.verdicts);
  }
}
