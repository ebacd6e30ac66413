#pragma once

// Concrete audit policies. Most callers only need make_policy(); the classes
// are exposed so tests can inspect reputation state.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vfraud/audit.hpp"

namespace vfraud {

/// Read-only view of one IP's reputation state.
struct IpReputationView {
  IpHistory history = IpHistory::NeverSeen;
  std::optional<std::int64_t> first_seen_day;
  std::optional<std::int64_t> suspicious_since;  // misbehavior onset day
  std::optional<std::int64_t> penalize_from;
  std::optional<std::int64_t> blacklisted_until;  // inclusive
  bool nat = false;
  std::int64_t views_today = 0;
  std::int64_t views_yesterday = 0;
};

class YouTubeLikePolicy final : public AuditPolicy {
public:
  explicit YouTubeLikePolicy(PolicyParams params);

  PortalKind portal() const override { return PortalKind::YouTubeLike; }
  const PolicyParams& params() const override { return params_; }
  void register_ip(const IpIdentity& ip) override;
  Verdict ingest(const ViewEvent& event) override;
  std::vector<Adjustment> end_of_day(std::int64_t day) override;
  std::unique_ptr<AuditPolicy> clone() const override;

  std::optional<IpReputationView> ip_state(Ipv4 ip) const;
  bool is_blacklisted(Ipv4 ip, std::int64_t day) const;
  /// Day from which the uploader's monetization is suspended, if flagged.
  std::optional<std::int64_t> suspension_day(std::string_view uploader) const;

private:
  struct VideoState {
    std::int64_t seen = 0;
    std::int64_t counted = 0;  // public, today
    std::int64_t nat_seen = 0;
    std::int64_t nat_counted = 0;
    bool nat_thinned = false;
    std::int64_t last_second = -1;
    int run = 0;
    bool bursty = false;
    std::uint8_t ua_mask = 0;
    std::int64_t prev_seen = 0;
    std::uint8_t prev_ua_mask = 0;
    bool prev_bursty = false;
  };

  struct IpState {
    IpHistory history = IpHistory::NeverSeen;
    std::optional<std::int64_t> first_seen_day;
    bool nat = false;
    std::optional<std::int64_t> onset;
    std::optional<std::int64_t> penalize_from;
    std::optional<std::int64_t> blacklisted_until;
    std::int64_t total = 0;
    std::int64_t prev_total = 0;
    std::int64_t videos_today = 0;
    std::int64_t prev_videos = 0;
    std::set<std::string> cookies;
    // IP-level thinning bucket
    std::int64_t bucket_seen = 0;
    std::int64_t bucket_counted = 0;
    bool bucket_thinned = false;
    std::vector<VideoId> bucket_order;  // counted views, for LIFO reconciliation
    // monetized bucket
    std::int64_t mon_seen = 0;
    std::int64_t mon_counted = 0;
    std::map<VideoId, VideoState> videos;
  };

  struct UploaderState {
    std::optional<std::int64_t> first_ad_day;
    std::optional<std::int64_t> suspended_from;
    bool removed = false;
    std::set<std::uint32_t> flagged_ips_today;
    std::map<std::tuple<std::int64_t, VideoId, std::uint32_t>, std::int64_t> monetized_views;  // (day, video, ip)
  };

  void close_day(std::int64_t day, std::vector<Adjustment>& out);
  void reconcile(IpState& ip, std::int64_t day, std::vector<Adjustment>& out);
  bool monetized(IpState& ip, std::uint32_t addr, const ViewEvent& e, bool public_counted);
  double branch_fraction(const IpState& ip, const VideoState& vs, std::int64_t second, bool final,
                         bool nat, Reason& reason) const;
  bool randomized(const VideoState& vs) const;

  PolicyParams params_;
  std::map<std::uint32_t, IpState> ips_;
  std::map<std::string, UploaderState> uploaders_;
  std::int64_t open_day_ = 0;
  std::int64_t last_seconds_ = 0;
  std::vector<Adjustment> pending_;
};

/// DailymotionLike and Permissive: a public pass curve over the per-IP
/// daily rate, a constant monetized pass fraction and an optional minimum
/// watch time. No delay, no blacklist.
class RateCurvePolicy final : public AuditPolicy {
public:
  RateCurvePolicy(PortalKind portal, PolicyParams params);

  PortalKind portal() const override { return portal_; }
  const PolicyParams& params() const override { return params_; }
  void register_ip(const IpIdentity&) override {}
  Verdict ingest(const ViewEvent& event) override;
  std::vector<Adjustment> end_of_day(std::int64_t day) override;
  std::unique_ptr<AuditPolicy> clone() const override;

private:
  struct IpState {
    std::int64_t total = 0;
    std::int64_t prev_total = 0;
    std::int64_t seen = 0;
    std::int64_t counted = 0;
    std::vector<VideoId> order;
    std::int64_t mon_seen = 0;
    std::int64_t mon_counted = 0;
  };

  void close_day(std::int64_t day, std::vector<Adjustment>& out);

  PortalKind portal_;
  PolicyParams params_;
  std::map<std::uint32_t, IpState> ips_;
  std::int64_t open_day_ = 0;
  std::int64_t last_seconds_ = 0;
  std::vector<Adjustment> pending_;
};

/// floor(x + 0.5); the thinning target rounding.
std::int64_t round_half_up(double x);

}  // namespace vfraud
