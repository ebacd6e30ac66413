#include <algorithm>
#include <array>
#include <cmath>

#include "vfraud/audit.hpp"
#include "vfraud/error.hpp"

namespace vfraud {

namespace {

constexpr std::array<std::string_view, 3> kPortalNames = {"YouTubeLike", "DailymotionLike", "Permissive"};
constexpr std::array<std::string_view, 8> kReasonNames = {
    "Pass",        "OverSingleVideoThreshold", "OverMultiVideoThreshold", "Burst",
    "Blacklisted", "DetectionDelayGrace",      "NatMasked",               "RealUserDiscount"};
constexpr std::array<std::string_view, 2> kCounterNames = {"public", "monetized"};
constexpr std::array<std::string_view, 3> kCauseNames = {"reconcile", "burst", "suspension"};

template <std::size_t N>
std::size_t find_name(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return i;
  }
  fail(ErrorCode::Validation, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

void check_curve(const Anchors& a, const char* name, bool strictly_increasing_y) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!is_fraction(a[i].second)) fail(ErrorCode::Validation, std::string(name) + ": values must be in [0,1]");
    if (i == 0) continue;
    if (!(a[i].first > a[i - 1].first)) {
      fail(ErrorCode::Validation, std::string(name) + ": anchors must be strictly increasing in x");
    }
    if (strictly_increasing_y && !(a[i].second > a[i - 1].second)) {
      fail(ErrorCode::Validation, std::string(name) + ": anchors must be strictly increasing in y");
    }
  }
}

}  // namespace

std::string_view to_string(PortalKind p) { return kPortalNames[static_cast<std::size_t>(p)]; }
PortalKind parse_portal(std::string_view s) {
  return static_cast<PortalKind>(find_name(kPortalNames, s, "portal"));
}

std::string_view to_string(Reason r) { return kReasonNames[static_cast<std::size_t>(r)]; }
Reason parse_reason(std::string_view s) { return static_cast<Reason>(find_name(kReasonNames, s, "reason")); }

std::string_view to_string(CounterKind c) { return kCounterNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(AdjustmentCause c) { return kCauseNames[static_cast<std::size_t>(c)]; }
CounterKind parse_counter_kind(std::string_view s) {
  return static_cast<CounterKind>(find_name(kCounterNames, s, "counter"));
}
AdjustmentCause parse_adjustment_cause(std::string_view s) {
  return static_cast<AdjustmentCause>(find_name(kCauseNames, s, "adjustment cause"));
}

double interpolate(const Anchors& anchors, double x) {
  if (anchors.empty()) fail(ErrorCode::InvalidArgument, "interpolate: no anchors");
  if (x <= anchors.front().first) return anchors.front().second;
  if (x >= anchors.back().first) return anchors.back().second;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const auto& [x1, y1] = anchors[i];
    if (x <= x1) {
      const auto& [x0, y0] = anchors[i - 1];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return anchors.back().second;
}

PolicyParams PolicyParams::defaults_for(PortalKind portal) {
  PolicyParams p;
  switch (portal) {
    case PortalKind::YouTubeLike:
      break;
    case PortalKind::DailymotionLike:
      p.public_curve = {{100.0, 1.0}, {400.0, 0.93}, {500.0, 0.85}};
      p.monetized_constant = 0.72;
      p.min_watch_s = 10;
      break;
    case PortalKind::Permissive:
      p.public_curve = {{0.0, 0.97}};
      p.monetized_constant = 0.97;
      break;
  }
  return p;
}

void validate(const PolicyParams& p) {
  if (!(p.single_video_threshold >= 0.0)) fail(ErrorCode::Validation, "T1 must be >= 0");
  if (!(p.multi_video_threshold >= p.single_video_threshold)) fail(ErrorCode::Validation, "T2 must be >= T1");
  if (p.multi_video_min_d < 1) fail(ErrorCode::Validation, "multi_video_min_d must be >= 1");
  if (!(p.decay_rate > 0.0)) fail(ErrorCode::Validation, "decay rate must be > 0");
  for (double f : {p.burst_pass_fraction, p.multi_ip_pass_floor, p.randomized_http_pass, p.monetized_constant}) {
    if (!is_fraction(f)) fail(ErrorCode::Validation, "pass fractions must be in [0,1]");
  }
  if (p.detection_delay_clean < 0 || p.detection_delay_known < 0 || p.blacklist_release_lag < 0) {
    fail(ErrorCode::Validation, "delays must be >= 0");
  }
  if (p.nat_calibration.empty()) fail(ErrorCode::Validation, "NAT calibration needs anchors");
  check_curve(p.nat_calibration, "nat_calibration", true);
  if (p.nat_calibration.front().first <= 0.0) fail(ErrorCode::Validation, "NAT anchors need r > 0");
  check_curve(p.monetized_pass, "monetized_pass", false);
  check_curve(p.public_curve, "public_curve", false);
  if (p.monetized_pass.empty()) fail(ErrorCode::Validation, "monetized_pass needs anchors");
  if (!(p.blacklist_threshold > 0.0)) fail(ErrorCode::Validation, "blacklist threshold must be > 0");
  if (p.burst_min_views < 2 || p.burst_max_gap_s < 0) fail(ErrorCode::Validation, "invalid burst rule");
  if (p.nat_min_clients < 1 || !(p.nat_per_user_rate > 0.0)) fail(ErrorCode::Validation, "invalid NAT rule");
  if (p.varied_agents_min < 1 || p.daily_credit_views < 0) fail(ErrorCode::Validation, "invalid rule counts");
  if (p.suspension_min_ips < 1 || p.suspension_delay_days < 0) fail(ErrorCode::Validation, "invalid suspension rule");
  if (p.min_watch_s < 0) fail(ErrorCode::Validation, "min_watch_s must be >= 0");
}

double decay_fraction(const PolicyParams& p, double w) {
  if (!(w >= 0.0)) fail(ErrorCode::InvalidArgument, "decay_fraction: W must be >= 0");
  if (w <= p.single_video_threshold) return 1.0;
  return std::exp(-p.decay_rate * (w - p.single_video_threshold));
}

double multi_video_fraction(const PolicyParams& p, double w, int d) {
  if (d < 1) fail(ErrorCode::Validation, "multi_video_fraction: D must be >= 1");
  if (w < d) fail(ErrorCode::Validation, "multi_video_fraction: W must be >= D");
  if (d < p.multi_video_min_d) return decay_fraction(p, w);
  if (w <= p.multi_video_threshold) return 1.0;
  return std::exp(-p.decay_rate * (w - p.multi_video_threshold));
}

double nat_pass_fraction(const PolicyParams& p, double probe_w, double background_views) {
  if (!(probe_w > 0.0)) fail(ErrorCode::InvalidArgument, "nat_pass_fraction: probe W must be > 0");
  const double floor = decay_fraction(p, probe_w);
  if (background_views <= 0.0) return floor;
  const double ratio = (background_views / p.nat_per_user_rate) / probe_w;
  Anchors curve;
  curve.reserve(p.nat_calibration.size() + 1);
  curve.emplace_back(0.0, floor);
  curve.insert(curve.end(), p.nat_calibration.begin(), p.nat_calibration.end());
  return std::clamp(interpolate(curve, ratio), floor, 1.0);
}

int detection_delay(const PolicyParams& p, IpHistory history) {
  return history == IpHistory::NeverSeen ? p.detection_delay_clean : p.detection_delay_known;
}

std::unique_ptr<AuditPolicy> make_policy(PortalKind portal) {
  return make_policy(portal, PolicyParams::defaults_for(portal));
}

std::unique_ptr<AuditPolicy> make_policy(std::string_view portal_label) {
  return make_policy(parse_portal(portal_label));
}

}  // namespace vfraud
