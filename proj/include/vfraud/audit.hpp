#pragma once

// View-audit policies. The YouTube-like policy is a fixed-order rule engine
// over per-IP reputation state; the other portals apply calibrated pass
// curves. All policies are deterministic: the same ordered stream always
// yields the same verdicts and adjustments.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vfraud/model.hpp"

namespace vfraud {

enum class PortalKind : std::uint8_t { YouTubeLike, DailymotionLike, Permissive };

std::string_view to_string(PortalKind p);
PortalKind parse_portal(std::string_view s);

/// (x, y) anchors for piecewise-linear curves; x strictly increasing.
using Anchors = std::vector<std::pair<double, double>>;

/// Linear interpolation through `anchors`, flat outside the anchor range.
double interpolate(const Anchors& anchors, double x);

struct PolicyParams {
  // Rate thresholds and decay.
  double single_video_threshold = 8.0;   // T1, views/day
  double multi_video_threshold = 15.0;   // T2, views/day
  int multi_video_min_d = 3;
  double decay_rate = 0.455;             // k, per view beyond the threshold
  double burst_pass_fraction = 0.02;
  double multi_ip_pass_floor = 0.73;     // acceptance reference only, not a rule
  double randomized_http_pass = 0.40;
  int detection_delay_clean = 12;        // days
  int detection_delay_known = 1;         // days
  int blacklist_release_lag = 2;         // days
  Anchors nat_calibration = {{0.5, 0.36}, {1.33, 0.43}, {2.5, 0.90}};

  double blacklist_threshold = 30.0;     // daily IP views that arm the blacklist
  int burst_min_views = 5;
  std::int64_t burst_max_gap_s = 2;
  int nat_min_clients = 10;              // distinct cookies that mark an IP as NAT
  double nat_per_user_rate = 8.0;        // background views per user per day
  int varied_agents_min = 3;             // distinct user agents that mark randomized HTTP
  int daily_credit_views = 1;            // views an IP is always credited per day
  Anchors monetized_pass = {{8.0, 1.0}, {20.0, 0.82}, {40.0, 0.97}};
  int suspension_min_ips = 2;
  int suspension_delay_days = 5;

  // Rate-curve portals (DailymotionLike, Permissive).
  Anchors public_curve;
  double monetized_constant = 1.0;
  std::int64_t min_watch_s = 0;          // shorter views are discounted

  static PolicyParams defaults_for(PortalKind portal);
  bool operator==(const PolicyParams&) const = default;
};

void validate(const PolicyParams& p);

/// 1 up to T1, exp(-k (W - T1)) beyond.
double decay_fraction(const PolicyParams& p, double views_per_day);

/// Single-video decay when D < multi_video_min_d, otherwise the same decay
/// shifted to T2. Throws Validation when W < D.
double multi_video_fraction(const PolicyParams& p, double views_per_day, int videos_per_day);

/// Pass fraction for a probe hidden among `background_views` behind one NAT.
/// The background-to-probe ratio r = (background / nat_per_user_rate) / W is
/// mapped through the calibration anchors (with an implicit (0, decay(W))
/// anchor) and clamped to [decay(W), 1].
double nat_pass_fraction(const PolicyParams& p, double probe_views_per_day, double background_views);

/// Grace period, in days, before a misbehaving IP is penalized.
int detection_delay(const PolicyParams& p, IpHistory history);

enum class Reason : std::uint8_t {
  Pass,
  OverSingleVideoThreshold,
  OverMultiVideoThreshold,
  Burst,
  Blacklisted,
  DetectionDelayGrace,
  NatMasked,
  RealUserDiscount,
};

std::string_view to_string(Reason r);
Reason parse_reason(std::string_view s);

struct Verdict {
  bool count_public = false;
  bool count_monetized = false;
  Reason reason = Reason::Pass;

  bool operator==(const Verdict&) const = default;
};

enum class CounterKind : std::uint8_t { Public, Monetized };
enum class AdjustmentCause : std::uint8_t { Reconcile, Burst, Suspension };

std::string_view to_string(CounterKind c);
std::string_view to_string(AdjustmentCause c);
CounterKind parse_counter_kind(std::string_view s);
AdjustmentCause parse_adjustment_cause(std::string_view s);

/// Post-hoc correction of a closed counter. `applied_day` is the day on
/// which the correction takes effect; `ref_day` is the day it corrects.
struct Adjustment {
  std::int64_t applied_day = 0;
  std::int64_t ref_day = 0;
  VideoId video;
  CounterKind counter = CounterKind::Public;
  std::int64_t delta = 0;  // always negative
  AdjustmentCause cause = AdjustmentCause::Reconcile;

  bool operator==(const Adjustment&) const = default;
};

class AuditPolicy {
public:
  virtual ~AuditPolicy() = default;

  virtual PortalKind portal() const = 0;
  virtual const PolicyParams& params() const = 0;

  /// Declares prior knowledge of an address (its history before the run).
  virtual void register_ip(const IpIdentity& ip) = 0;

  /// Events must arrive in nondecreasing time; otherwise throws Ordering.
  virtual Verdict ingest(const ViewEvent& event) = 0;

  /// Closes `day`. Returns post-hoc adjustments (possibly referencing
  /// earlier days). Days must be closed in increasing order.
  virtual std::vector<Adjustment> end_of_day(std::int64_t day) = 0;

  /// Deep copy of the full mutable state, for checkpointing.
  virtual std::unique_ptr<AuditPolicy> clone() const = 0;
};

std::unique_ptr<AuditPolicy> make_policy(PortalKind portal);
std::unique_ptr<AuditPolicy> make_policy(PortalKind portal, const PolicyParams& params);
std::unique_ptr<AuditPolicy> make_policy(std::string_view portal_label);

}  // namespace vfraud
