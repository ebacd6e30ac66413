#include "vfraud/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vfraud/error.hpp"
#include "vfraud/rng.hpp"

namespace vfraud {

namespace {

// Stream ids for derive_seed, one per independent random concern.
constexpr std::uint64_t kScheduleStream = 1;
constexpr std::uint64_t kCookieStream = 2;
constexpr std::uint64_t kBackgroundStream = 3;

std::int64_t draw_duration(const BehaviorConfig& b, Rng& rng) {
  if (b.duration_mode == DurationMode::Fixed) return b.fixed_duration_s;
  return std::llround(rng.exponential(static_cast<double>(b.video_length_s)));
}

std::string hex_token(std::string_view prefix, std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(prefix) + buf;
}

int last_day(const BehaviorConfig& b, int days) {
  return b.end_day ? std::min(*b.end_day, days) : days;
}

// Seconds-of-day for one day of a fixed-W behavior.
std::vector<std::int64_t> day_offsets(const BehaviorConfig& b, Rng& rng) {
  const int w = b.views_per_day;
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(w));
  if (w == 0) return out;

  if (b.kind == BehaviorKind::Burst) {
    std::int64_t start = b.first_view_offset_s;
    while (static_cast<int>(out.size()) < w) {
      if (start >= kSecondsPerDay) {
        fail(ErrorCode::Scheduling, "burst schedule does not fit in one day");
      }
      for (int i = 0; i < b.burst_size && static_cast<int>(out.size()) < w; ++i) out.push_back(start);
      start += b.burst_gap_s;
    }
    return out;
  }

  if (b.wait_mode == WaitMode::Poisson) {
    // Poisson arrivals conditioned on exactly W views in the day: normalized
    // exponential spacings place W points in [offset, 86400).
    std::vector<double> cumulative(static_cast<std::size_t>(w) + 1);
    double s = 0.0;
    for (auto& c : cumulative) {
      s += rng.exponential(1.0);
      c = s;
    }
    const double span = static_cast<double>(kSecondsPerDay - b.first_view_offset_s);
    for (int i = 0; i < w; ++i) {
      auto t = b.first_view_offset_s +
               static_cast<std::int64_t>(std::floor(span * cumulative[static_cast<std::size_t>(i)] / s));
      out.push_back(std::min<std::int64_t>(t, kSecondsPerDay - 1));
    }
    return out;
  }

  const std::int64_t wait = b.constant_wait_s > 0 ? b.constant_wait_s : kSecondsPerDay / w;
  if (b.first_view_offset_s + static_cast<std::int64_t>(w - 1) * wait >= kSecondsPerDay) {
    fail(ErrorCode::Scheduling, std::to_string(w) + " views at a " + std::to_string(wait) +
                                    " s wait do not fit in one day");
  }
  for (int i = 0; i < w; ++i) out.push_back(b.first_view_offset_s + i * wait);
  return out;
}

ViewEvent make_probe_event(const TrafficSpec& spec, SimTime t, int index_in_day, Rng& rng,
                           const std::optional<std::string>& cookie) {
  const BehaviorConfig& b = spec.behavior;
  ViewEvent e;
  e.time = t;
  e.source_ip = spec.ip_pool.front().address;
  const auto d = static_cast<std::size_t>(b.videos_per_day);
  e.video = spec.target_videos[static_cast<std::size_t>(index_in_day) % d];
  e.duration_s = draw_duration(b, rng);
  if (b.randomize_http_attrs) {
    e.user_agent = static_cast<UserAgent>(rng.below(kUserAgentCount));
    e.referrer = static_cast<Referrer>(rng.below(kReferrerCount));
  } else {
    e.user_agent = b.user_agent;
    e.referrer = b.referrer;
  }
  e.cookie_id = cookie;
  if (b.ad_fill > 0.0 && rng.bernoulli(b.ad_fill)) {
    e.ad_requested = true;
    e.ad_watched_fully = true;
  }
  return e;
}

std::vector<double> zipf_cumulative(int n, double exponent) {
  std::vector<double> c(static_cast<std::size_t>(n));
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    s += std::pow(static_cast<double>(i + 1), -exponent);
    c[static_cast<std::size_t>(i)] = s;
  }
  return c;
}

void sort_by_time(std::vector<ViewEvent>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const ViewEvent& a, const ViewEvent& b) { return a.time < b.time; });
}

}  // namespace

void validate(const TrafficSpec& spec) {
  validate(spec.behavior);
  if (spec.ip_pool.empty()) fail(ErrorCode::Validation, "traffic spec '" + spec.label + "' has an empty IP pool");
  if (spec.target_videos.empty()) {
    fail(ErrorCode::Validation, "traffic spec '" + spec.label + "' has no target videos");
  }
  if (spec.days < 1) fail(ErrorCode::Validation, "traffic spec needs days >= 1");
  if (spec.behavior.kind != BehaviorKind::RealUser &&
      static_cast<std::size_t>(spec.behavior.videos_per_day) > spec.target_videos.size()) {
    fail(ErrorCode::Validation, "videos_per_day exceeds the number of target videos");
  }
  if (spec.nat) {
    if (spec.nat->background_users < 0 || spec.nat->background_views_per_user_per_day < 0.0) {
      fail(ErrorCode::Validation, "NAT background must be non-negative");
    }
    if (spec.nat->group_id.empty()) fail(ErrorCode::Validation, "NAT group needs an id");
  }
}

std::vector<ViewEvent> schedule_views(const TrafficSpec& spec) {
  validate(spec);
  const BehaviorConfig& b = spec.behavior;
  Rng rng(derive_seed(spec.seed, kScheduleStream));
  std::optional<std::string> cookie;
  if (b.cookies_enabled) cookie = hex_token("ck-", derive_seed(spec.seed, kCookieStream));

  std::vector<ViewEvent> out;
  const int end = last_day(b, spec.days);

  if (b.kind == BehaviorKind::PoissonWait) {
    // A single Poisson process over the whole active window; daily counts vary.
    const double mean_gap = static_cast<double>(kSecondsPerDay) / b.poisson_rate_per_day;
    const std::int64_t stop = static_cast<std::int64_t>(end) * kSecondsPerDay;
    std::int64_t t = static_cast<std::int64_t>(b.start_day) * kSecondsPerDay + b.first_view_offset_s;
    std::int64_t day = -1;
    int index_in_day = 0;
    while (true) {
      t += static_cast<std::int64_t>(std::floor(rng.exponential(mean_gap)));
      if (t >= stop) break;
      const SimTime st = SimTime::from_seconds(t);
      if (st.day != day) {
        day = st.day;
        index_in_day = 0;
      }
      out.push_back(make_probe_event(spec, st, index_in_day++, rng, cookie));
    }
    return out;
  }

  for (int day = b.start_day; day < end; ++day) {
    const auto offsets = day_offsets(b, rng);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      out.push_back(make_probe_event(spec, SimTime{day, static_cast<std::int32_t>(offsets[i])},
                                     static_cast<int>(i), rng, cookie));
    }
  }
  return out;
}

std::vector<ViewEvent> distribute_over_ips(std::vector<ViewEvent> stream,
                                           std::span<const IpIdentity> pool) {
  if (pool.empty()) fail(ErrorCode::InvalidArgument, "distribute_over_ips: empty pool");
  std::int64_t day = -1;
  std::size_t index = 0;
  for (auto& e : stream) {
    if (e.time.day != day) {
      day = e.time.day;
      index = 0;
    }
    e.source_ip = pool[index % pool.size()].address;
    ++index;
  }
  return stream;
}

std::vector<ViewEvent> apply_nat(std::vector<ViewEvent> stream, const NatGroup& nat, int days,
                                 std::uint64_t seed) {
  for (auto& e : stream) {
    e.source_ip = nat.public_ip;
    e.nat_group = nat.group_id;
  }
  if (nat.background_users == 0 || nat.background_views_per_user_per_day <= 0.0) return stream;

  static const std::vector<double> catalog = zipf_cumulative(kBackgroundCatalogSize, kBackgroundZipfExponent);
  Rng rng(derive_seed(seed, kBackgroundStream));
  std::vector<ViewEvent> background;
  for (int day = 0; day < days; ++day) {
    if (!nat.active_on(day)) continue;
    for (int u = 0; u < nat.background_users; ++u) {
      const auto n = rng.poisson(nat.background_views_per_user_per_day);
      for (std::int64_t k = 0; k < n; ++k) {
        ViewEvent e;
        e.time = SimTime{day, static_cast<std::int32_t>(rng.below(kSecondsPerDay))};
        e.source_ip = nat.public_ip;
        e.video = "bg:v" + std::to_string(rng.weighted(catalog));
        e.duration_s = std::llround(rng.exponential(kBackgroundMeanDurationS));
        e.user_agent = static_cast<UserAgent>(u % kUserAgentCount);
        e.referrer = static_cast<Referrer>(rng.below(kReferrerCount));
        e.cookie_id = nat.group_id + "-u" + std::to_string(u);
        e.nat_group = nat.group_id;
        e.is_real_user = true;
        background.push_back(std::move(e));
      }
    }
  }
  stream.insert(stream.end(), std::make_move_iterator(background.begin()),
                std::make_move_iterator(background.end()));
  sort_by_time(stream);
  return stream;
}

RealUserShape real_user_shape(RealUserMix mix) {
  if (mix == RealUserMix::SocialMedia) return RealUserShape{100.0, 0.0, 160};
  return RealUserShape{90.0, 0.5, 40};
}

std::vector<ViewEvent> gen_real_user_views(int count, RealUserMix mix, std::uint64_t seed,
                                           std::span<const IpIdentity> pool, const VideoId& video,
                                           int days) {
  if (count < 0) fail(ErrorCode::InvalidArgument, "real-user count must be >= 0");
  if (days < 1) fail(ErrorCode::InvalidArgument, "real-user traffic needs days >= 1");
  std::vector<ViewEvent> out;
  if (count == 0) return out;
  if (pool.empty()) fail(ErrorCode::InvalidArgument, "real-user traffic needs an IP pool");

  const RealUserShape shape = real_user_shape(mix);
  const auto n_ips = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(shape.max_ips));
  std::vector<double> weights(n_ips);
  double s = 0.0;
  for (std::size_t i = 0; i < n_ips; ++i) {
    s += std::pow(static_cast<double>(i + 1), -shape.ip_weight_exponent);
    weights[i] = s;
  }

  Rng rng(derive_seed(seed, kScheduleStream));
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto ip_index = rng.weighted(weights);
    ViewEvent e;
    e.time = SimTime{static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(days))),
                     static_cast<std::int32_t>(rng.below(kSecondsPerDay))};
    e.source_ip = pool[ip_index].address;
    e.video = video;
    e.duration_s = std::llround(rng.exponential(shape.mean_duration_s));
    e.user_agent = static_cast<UserAgent>(ip_index % kUserAgentCount);
    if (mix == RealUserMix::SocialMedia) {
      e.referrer = rng.bernoulli(0.5) ? Referrer::Facebook : Referrer::Twitter;
    } else {
      e.referrer = Referrer::DirectLink;
    }
    e.cookie_id = std::string(mix == RealUserMix::SocialMedia ? "rs-" : "rc-") + std::to_string(ip_index);
    e.is_real_user = true;
    out.push_back(std::move(e));
  }
  sort_by_time(out);
  return out;
}

std::vector<ViewEvent> generate_traffic(const TrafficSpec& spec) {
  validate(spec);
  if (spec.behavior.kind == BehaviorKind::RealUser) {
    return gen_real_user_views(spec.behavior.real_user_count, spec.behavior.real_user_mix, spec.seed,
                               spec.ip_pool, spec.target_videos.front(), spec.days);
  }
  auto stream = schedule_views(spec);
  if (spec.ip_pool.size() > 1) stream = distribute_over_ips(std::move(stream), spec.ip_pool);
  if (spec.nat) stream = apply_nat(std::move(stream), *spec.nat, spec.days, spec.seed);
  return stream;
}

std::vector<IpIdentity> make_ip_pool(Ipv4 first, int count, IpHistory history) {
  std::vector<IpIdentity> pool;
  pool.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    pool.push_back(IpIdentity{Ipv4{first.value + static_cast<std::uint32_t>(i)}, std::nullopt, history});
  }
  return pool;
}

}  // namespace vfraud
