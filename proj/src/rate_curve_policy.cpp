#include <algorithm>

#include "vfraud/error.hpp"
#include "vfraud/policies.hpp"

namespace vfraud {

RateCurvePolicy::RateCurvePolicy(PortalKind portal, PolicyParams params) : portal_(portal), params_(std::move(params)) {
  if (portal_ == PortalKind::YouTubeLike) fail(ErrorCode::InvalidArgument, "RateCurvePolicy does not model YouTubeLike");
  validate(params_);
  if (params_.public_curve.empty()) fail(ErrorCode::Validation, "rate-curve portal needs a public curve");
}

std::unique_ptr<AuditPolicy> RateCurvePolicy::clone() const { return std::make_unique<RateCurvePolicy>(*this); }

Verdict RateCurvePolicy::ingest(const ViewEvent& e) {
  validate(e);
  const std::int64_t t = e.time.total_seconds();
  if (t < last_seconds_ || e.time.day < open_day_) fail(ErrorCode::Ordering, "event arrived out of order");
  while (open_day_ < e.time.day) close_day(open_day_++, pending_);
  last_seconds_ = t;

  auto& ip = ips_[e.source_ip.value];
  ++ip.total;
  Verdict v;
  if (e.duration_s < params_.min_watch_s) {
    v.reason = Reason::RealUserDiscount;
    return v;
  }
  const double f = interpolate(params_.public_curve, static_cast<double>(std::max(ip.total, ip.prev_total)));
  ++ip.seen;
  v.count_public = ip.counted < round_half_up(f * static_cast<double>(ip.seen));
  if (v.count_public) {
    ++ip.counted;
    ip.order.push_back(e.video);
  } else {
    v.reason = Reason::OverSingleVideoThreshold;
  }
  if (e.ad_requested && e.ad_watched_fully) {
    ++ip.mon_seen;
    v.count_monetized = ip.mon_counted < round_half_up(params_.monetized_constant * static_cast<double>(ip.mon_seen));
    if (v.count_monetized) ++ip.mon_counted;
  }
  return v;
}

void RateCurvePolicy::close_day(std::int64_t day, std::vector<Adjustment>& out) {
  for (auto& [_, ip] : ips_) {
    const double f = interpolate(params_.public_curve, static_cast<double>(std::max(ip.total, ip.prev_total)));
    const auto target = round_half_up(f * static_cast<double>(ip.seen));
    std::map<VideoId, std::int64_t> removed;
    while (ip.counted > target && !ip.order.empty()) {
      ++removed[ip.order.back()];
      ip.order.pop_back();
      --ip.counted;
    }
    for (const auto& [video, n] : removed) {
      out.push_back(Adjustment{day, day, video, CounterKind::Public, -n, AdjustmentCause::Reconcile});
    }
    ip.prev_total = ip.total;
    ip.total = ip.seen = ip.counted = ip.mon_seen = ip.mon_counted = 0;
    ip.order.clear();
  }
}

std::vector<Adjustment> RateCurvePolicy::end_of_day(std::int64_t day) {
  if (day < open_day_) fail(ErrorCode::Ordering, "day " + std::to_string(day) + " is already closed");
  while (open_day_ <= day) close_day(open_day_++, pending_);
  last_seconds_ = std::max(last_seconds_, open_day_ * kSecondsPerDay);
  std::vector<Adjustment> out;
  out.swap(pending_);
  return out;
}

}  // namespace vfraud
