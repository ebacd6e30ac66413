#include <algorithm>
#include <bit>
#include <cmath>

#include "vfraud/error.hpp"
#include "vfraud/policies.hpp"

namespace vfraud {

std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

namespace {

std::uint8_t ua_bit(UserAgent ua) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(ua)); }

std::int64_t thinning_target(double f, std::int64_t seen, int credit) {
  auto t = round_half_up(f * static_cast<double>(seen));
  if (f < 1.0) t = std::max<std::int64_t>(t, std::min<std::int64_t>(credit, seen));
  return t;
}

}  // namespace

YouTubeLikePolicy::YouTubeLikePolicy(PolicyParams params) : params_(std::move(params)) { validate(params_); }

std::unique_ptr<AuditPolicy> YouTubeLikePolicy::clone() const { return std::make_unique<YouTubeLikePolicy>(*this); }

void YouTubeLikePolicy::register_ip(const IpIdentity& ip) {
  auto& st = ips_[ip.address.value];
  st.history = ip.history;
  if (ip.first_seen) st.first_seen_day = ip.first_seen->day;
}

bool YouTubeLikePolicy::randomized(const VideoState& vs) const {
  return std::popcount(vs.ua_mask) >= params_.varied_agents_min ||
         std::popcount(vs.prev_ua_mask) >= params_.varied_agents_min;
}

// Pass fraction of the thinning branch. The NAT branch audits one video
// (`vs`) against the rest of the IP's traffic; the plain branch audits the
// whole IP.
double YouTubeLikePolicy::branch_fraction(const IpState& ip, const VideoState& vs, std::int64_t second, bool final,
                                          bool nat, Reason& reason) const {
  double f;
  bool varied;
  if (nat) {
    const double w = static_cast<double>(std::max(vs.prev_seen, vs.seen));
    double bg = static_cast<double>(ip.total - vs.seen);
    // project the running background volume to a full day
    if (!final) bg = bg * static_cast<double>(kSecondsPerDay) / static_cast<double>(std::max<std::int64_t>(second + 1, 3600));
    f = nat_pass_fraction(params_, w, bg);
    reason = Reason::NatMasked;
    varied = randomized(vs);
  } else {
    const double w = static_cast<double>(std::max(ip.prev_total, ip.total));
    const auto d = static_cast<int>(std::max<std::int64_t>(1, std::max(ip.prev_videos, ip.videos_today)));
    f = multi_video_fraction(params_, w, d);
    reason = d >= params_.multi_video_min_d ? Reason::OverMultiVideoThreshold : Reason::OverSingleVideoThreshold;
    varied = false;
    for (const auto& [_, v] : ip.videos) varied = varied || randomized(v);
  }
  if (varied) f = std::max(f, params_.randomized_http_pass);
  return f;
}

bool YouTubeLikePolicy::monetized(IpState& ip, std::uint32_t addr, const ViewEvent& e, bool public_counted) {
  if (!(e.ad_requested && e.ad_watched_fully)) return false;
  const std::int64_t day = e.time.day;
  auto& up = uploaders_[std::string(uploader_of(e.video))];
  if (up.suspended_from && day >= *up.suspended_from) return false;

  ++ip.mon_seen;
  bool counted = public_counted;
  if (!counted) {
    const double w = static_cast<double>(std::max(ip.prev_total, ip.total));
    const double g = interpolate(params_.monetized_pass, w);
    counted = ip.mon_counted < round_half_up(g * static_cast<double>(ip.mon_seen));
  }
  if (!counted) return false;
  ++ip.mon_counted;
  if (!up.first_ad_day) up.first_ad_day = day;
  up.flagged_ips_today.insert(addr);
  ++up.monetized_views[{day, e.video, addr}];
  return true;
}

Verdict YouTubeLikePolicy::ingest(const ViewEvent& e) {
  validate(e);
  const std::int64_t t = e.time.total_seconds();
  if (t < last_seconds_ || e.time.day < open_day_) {
    fail(ErrorCode::Ordering, "event at day " + std::to_string(e.time.day) + " second " +
                                  std::to_string(e.time.second_of_day) + " arrived out of order");
  }
  while (open_day_ < e.time.day) close_day(open_day_++, pending_);
  last_seconds_ = t;
  const std::int64_t day = e.time.day;
  const std::uint32_t addr = e.source_ip.value;

  auto& ip = ips_[addr];
  if (!ip.first_seen_day) ip.first_seen_day = day;
  auto [it, inserted] = ip.videos.try_emplace(e.video);
  auto& vs = it->second;
  if (vs.seen == 0) ++ip.videos_today;
  ++ip.total;
  ++vs.seen;
  vs.ua_mask |= ua_bit(e.user_agent);
  if (e.cookie_id) {
    ip.cookies.insert(*e.cookie_id);
    if (static_cast<int>(ip.cookies.size()) >= params_.nat_min_clients) ip.nat = true;
  }
  const std::int64_t sec = e.time.second_of_day;
  if (vs.last_second >= 0 && sec - vs.last_second < params_.burst_max_gap_s) {
    ++vs.run;
  } else {
    vs.run = 1;
  }
  vs.last_second = sec;
  if (vs.run >= params_.burst_min_views) vs.bursty = true;
  const bool bursty = vs.bursty || vs.prev_bursty;

  // misbehavior onset starts the detection delay
  if (!ip.onset) {
    bool over;
    if (ip.nat) {
      over = static_cast<double>(std::max(vs.prev_seen, vs.seen)) > params_.single_video_threshold;
    } else {
      const auto d = std::max(ip.prev_videos, ip.videos_today);
      const double thr =
          d >= params_.multi_video_min_d ? params_.multi_video_threshold : params_.single_video_threshold;
      over = static_cast<double>(std::max(ip.prev_total, ip.total)) > thr;
    }
    if (over || bursty) {
      ip.onset = day;
      const bool fresh = ip.history == IpHistory::NeverSeen && ip.first_seen_day == day;
      ip.penalize_from = day + (fresh ? params_.detection_delay_clean : params_.detection_delay_known);
    }
  }

  Verdict v;
  if (!ip.nat && ip.blacklisted_until && day <= *ip.blacklisted_until) {
    v.reason = Reason::Blacklisted;
  } else if (bursty) {
    const auto target = round_half_up(params_.burst_pass_fraction * static_cast<double>(vs.seen));
    v.count_public = vs.counted < target;
    v.reason = v.count_public ? Reason::Pass : Reason::Burst;
  } else if (ip.penalize_from && day < *ip.penalize_from) {
    v.count_public = true;
    v.reason = Reason::DetectionDelayGrace;
  } else {
    Reason r = Reason::Pass;
    const double f = branch_fraction(ip, vs, sec, false, ip.nat, r);
    if (ip.nat) {
      ++vs.nat_seen;
      if (f < 1.0) vs.nat_thinned = true;
      v.count_public = vs.nat_counted < thinning_target(f, vs.nat_seen, params_.daily_credit_views);
      if (v.count_public) ++vs.nat_counted;
    } else {
      ++ip.bucket_seen;
      if (f < 1.0) ip.bucket_thinned = true;
      v.count_public = ip.bucket_counted < thinning_target(f, ip.bucket_seen, params_.daily_credit_views);
      if (v.count_public) {
        ++ip.bucket_counted;
        ip.bucket_order.push_back(e.video);
      }
    }
    v.reason = v.count_public ? Reason::Pass : r;
  }
  if (v.count_public) ++vs.counted;
  v.count_monetized = monetized(ip, addr, e, v.count_public);
  return v;
}

void YouTubeLikePolicy::reconcile(IpState& ip, std::int64_t day, std::vector<Adjustment>& out) {
  std::map<VideoId, std::int64_t> removed;
  std::map<VideoId, std::int64_t> burst_removed;
  if (ip.bucket_thinned) {
    Reason r;
    const VideoState none;
    const double f = branch_fraction(ip, none, kSecondsPerDay - 1, true, false, r);
    const auto target = thinning_target(f, ip.bucket_seen, params_.daily_credit_views);
    while (ip.bucket_counted > target && !ip.bucket_order.empty()) {
      const VideoId video = ip.bucket_order.back();
      ip.bucket_order.pop_back();
      --ip.bucket_counted;
      --ip.videos[video].counted;
      ++removed[video];
    }
  }
  for (auto& [video, vs] : ip.videos) {
    if (vs.nat_thinned) {
      Reason r;
      const double f = branch_fraction(ip, vs, kSecondsPerDay - 1, true, true, r);
      const auto target = thinning_target(f, vs.nat_seen, params_.daily_credit_views);
      if (vs.nat_counted > target) {
        const auto n = std::min(vs.nat_counted - target, vs.counted);
        vs.nat_counted -= n;
        vs.counted -= n;
        removed[video] += n;
      }
    }
    if (vs.bursty) {
      const auto target = round_half_up(params_.burst_pass_fraction * static_cast<double>(vs.seen));
      if (vs.counted > target) {
        burst_removed[video] += vs.counted - target;
        vs.counted = target;
      }
    }
  }
  for (const auto& [video, n] : removed) {
    if (n > 0) out.push_back(Adjustment{day, day, video, CounterKind::Public, -n, AdjustmentCause::Reconcile});
  }
  for (const auto& [video, n] : burst_removed) {
    if (n > 0) out.push_back(Adjustment{day, day, video, CounterKind::Public, -n, AdjustmentCause::Burst});
  }
}

void YouTubeLikePolicy::close_day(std::int64_t day, std::vector<Adjustment>& out) {
  for (auto& [addr, ip] : ips_) {
    if (ip.total > 0) reconcile(ip, day, out);
    if (!ip.nat && static_cast<double>(ip.total) >= params_.blacklist_threshold && ip.penalize_from &&
        day + 1 >= *ip.penalize_from) {
      ip.blacklisted_until = day + params_.blacklist_release_lag;
    }
    // roll today into yesterday
    std::map<VideoId, VideoState> next;
    for (auto& [video, vs] : ip.videos) {
      if (vs.seen == 0) continue;
      VideoState n;
      n.prev_seen = vs.seen;
      n.prev_ua_mask = vs.ua_mask;
      n.prev_bursty = vs.bursty;
      next.emplace(video, n);
    }
    ip.videos = std::move(next);
    ip.prev_total = ip.total;
    ip.prev_videos = ip.videos_today;
    ip.total = 0;
    ip.videos_today = 0;
    ip.cookies.clear();
    ip.bucket_seen = ip.bucket_counted = 0;
    ip.bucket_thinned = false;
    ip.bucket_order.clear();
    ip.mon_seen = ip.mon_counted = 0;
  }

  for (auto& [_, up] : uploaders_) {
    if (!up.suspended_from) {
      int misbehaving = 0;
      for (auto addr : up.flagged_ips_today) {
        const auto& ip = ips_[addr];
        if (ip.onset && *ip.onset <= day) ++misbehaving;
      }
      if (misbehaving >= params_.suspension_min_ips) {
        up.suspended_from = std::max(*up.first_ad_day + params_.suspension_delay_days, day + 1);
      }
    }
    up.flagged_ips_today.clear();
    if (up.suspended_from && !up.removed && *up.suspended_from <= day + 1) {
      // retroactive removal of monetized views from misbehaving IPs
      std::map<std::pair<std::int64_t, VideoId>, std::int64_t> totals;
      for (const auto& [key, n] : up.monetized_views) {
        const auto& [ref_day, video, addr] = key;
        const auto& ip = ips_[addr];
        if (ip.onset) totals[{ref_day, video}] += n;
      }
      for (const auto& [key, n] : totals) {
        out.push_back(Adjustment{*up.suspended_from, key.first, key.second, CounterKind::Monetized, -n,
                                 AdjustmentCause::Suspension});
      }
      up.removed = true;
    }
  }
}

std::vector<Adjustment> YouTubeLikePolicy::end_of_day(std::int64_t day) {
  if (day < open_day_) fail(ErrorCode::Ordering, "day " + std::to_string(day) + " is already closed");
  while (open_day_ <= day) close_day(open_day_++, pending_);
  last_seconds_ = std::max(last_seconds_, open_day_ * kSecondsPerDay);
  std::vector<Adjustment> out;
  out.swap(pending_);
  return out;
}

std::optional<IpReputationView> YouTubeLikePolicy::ip_state(Ipv4 ip) const {
  auto it = ips_.find(ip.value);
  if (it == ips_.end()) return std::nullopt;
  const auto& s = it->second;
  return IpReputationView{s.history, s.first_seen_day, s.onset,    s.penalize_from,
                          s.blacklisted_until, s.nat, s.total, s.prev_total};
}

bool YouTubeLikePolicy::is_blacklisted(Ipv4 ip, std::int64_t day) const {
  auto it = ips_.find(ip.value);
  return it != ips_.end() && !it->second.nat && it->second.blacklisted_until && day <= *it->second.blacklisted_until;
}

std::optional<std::int64_t> YouTubeLikePolicy::suspension_day(std::string_view uploader) const {
  auto it = uploaders_.find(std::string(uploader));
  if (it == uploaders_.end()) return std::nullopt;
  return it->second.suspended_from;
}

std::unique_ptr<AuditPolicy> make_policy(PortalKind portal, const PolicyParams& params) {
  if (portal == PortalKind::YouTubeLike) return std::make_unique<YouTubeLikePolicy>(params);
  return std::make_unique<RateCurvePolicy>(portal, params);
}

}  // namespace vfraud
