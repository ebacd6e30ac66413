#pragma once

// Shared domain vocabulary: simulated clock, IPv4 identities, view events,
// probe behaviors and per-day counter snapshots.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vfraud {

inline constexpr std::int64_t kSecondsPerDay = 86400;

struct SimTime {
  std::int64_t day = 0;
  std::int32_t second_of_day = 0;

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr std::int64_t total_seconds() const { return day * kSecondsPerDay + second_of_day; }
  static SimTime from_seconds(std::int64_t total);
};

/// Shift `time` forward by `delta_s` seconds, rolling over day boundaries.
/// Throws InvalidArgument for negative deltas.
SimTime advance(SimTime time, std::int64_t delta_s);

struct Ipv4 {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const Ipv4&) const = default;

  static Ipv4 parse(std::string_view dotted);
  std::string str() const;
};

struct Prefix24 {
  std::uint32_t value = 0;  // top 24 bits of the address, right-aligned

  constexpr auto operator<=>(const Prefix24&) const = default;
  std::string str() const;  // "10.1.2/24"
};

Prefix24 prefix24_of(Ipv4 ip);
Prefix24 prefix24_of(std::string_view dotted);

/// True when both addresses agree on their first `bits` bits.
bool same_prefix(Ipv4 a, Ipv4 b, int bits);

enum class UserAgent : std::uint8_t {
  LinuxFirefox,
  LinuxChrome,
  WindowsChrome,
  WindowsFirefox,
  WindowsEdge,
  MacSafari,
  AndroidChrome,
  IphoneSafari,
};
inline constexpr int kUserAgentCount = 8;

enum class Referrer : std::uint8_t { Facebook, Twitter, PortalSearch, DirectLink };
inline constexpr int kReferrerCount = 4;

std::string_view to_string(UserAgent ua);
std::string_view to_string(Referrer ref);
UserAgent parse_user_agent(std::string_view s);
Referrer parse_referrer(std::string_view s);

using VideoId = std::string;

/// Uploader account owning a video: the part before ':' when present,
/// otherwise the video id itself.
std::string_view uploader_of(std::string_view video);

struct ViewEvent {
  SimTime time;
  Ipv4 source_ip;
  VideoId video;
  std::int64_t duration_s = 0;
  UserAgent user_agent = UserAgent::LinuxFirefox;
  Referrer referrer = Referrer::DirectLink;
  std::optional<std::string> cookie_id;
  std::optional<std::string> nat_group;
  bool is_real_user = false;
  bool ad_requested = false;
  bool ad_watched_fully = false;

  bool operator==(const ViewEvent&) const = default;
};

/// Throws Validation when an invariant is broken (negative duration, an ad
/// watched without being requested, empty video id).
void validate(const ViewEvent& e);

// Line-delimited record: tab separated key=value pairs in a fixed key order.
inline constexpr std::string_view kEventsHeader = "#vfraud-events v1";
std::string to_line(const ViewEvent& e);
ViewEvent parse_event_line(std::string_view line);

enum class BehaviorKind : std::uint8_t {
  Deterministic,
  Burst,
  PoissonWait,
  ShortViews,
  Cookies,
  Complete,
  Conservative,
  Aggressive,
  RealUser,
};

std::string_view to_string(BehaviorKind k);
BehaviorKind parse_behavior_kind(std::string_view s);

enum class DurationMode : std::uint8_t { Fixed, Exponential };
enum class WaitMode : std::uint8_t { Constant, Poisson };
enum class RealUserMix : std::uint8_t { SocialMedia, Crowdsourcing };

std::string_view to_string(RealUserMix m);
RealUserMix parse_real_user_mix(std::string_view s);

struct BehaviorConfig {
  BehaviorKind kind = BehaviorKind::Deterministic;
  int views_per_day = 20;  // W
  int videos_per_day = 1;  // D
  DurationMode duration_mode = DurationMode::Fixed;
  std::int64_t fixed_duration_s = 40;
  std::int64_t video_length_s = 240;  // mean of exponential durations
  WaitMode wait_mode = WaitMode::Constant;
  std::int64_t constant_wait_s = 0;  // 0 = 86400 / W
  double poisson_rate_per_day = 0.0;
  int burst_size = 20;                  // N
  std::int64_t burst_gap_s = kSecondsPerDay;
  bool cookies_enabled = false;
  bool randomize_http_attrs = false;
  UserAgent user_agent = UserAgent::LinuxFirefox;
  Referrer referrer = Referrer::DirectLink;
  std::int64_t first_view_offset_s = 0;
  int start_day = 0;                  // probe runs on days [start_day, end_day)
  std::optional<int> end_day;
  double ad_fill = 0.0;               // probability that a view is served an ad
  // RealUser only
  RealUserMix real_user_mix = RealUserMix::SocialMedia;
  int real_user_count = 0;

  bool operator==(const BehaviorConfig&) const = default;

  static BehaviorConfig deterministic(int w);
  static BehaviorConfig burst(int n);
  static BehaviorConfig poisson_wait(double rate_per_day);
  static BehaviorConfig short_views(int w);
  static BehaviorConfig cookies(int w);
  static BehaviorConfig complete(int w);
  static BehaviorConfig conservative();
  static BehaviorConfig aggressive();
  static BehaviorConfig real_user(int count, RealUserMix mix);
};

void validate(const BehaviorConfig& b);

enum class IpHistory : std::uint8_t { NeverSeen, SeenClean, SeenMisbehaving };

std::string_view to_string(IpHistory h);
IpHistory parse_ip_history(std::string_view s);

struct IpIdentity {
  Ipv4 address;
  std::optional<SimTime> first_seen;
  IpHistory history = IpHistory::NeverSeen;

  Prefix24 prefix24() const { return prefix24_of(address); }
  bool operator==(const IpIdentity&) const = default;
};

struct NatGroup {
  std::string group_id;
  Ipv4 public_ip;
  int background_users = 0;
  double background_views_per_user_per_day = 8.0;
  // Indexed by day modulo the pattern length; empty means every day active.
  std::vector<bool> active_day_pattern;

  bool active_on(std::int64_t day) const;
  bool operator==(const NatGroup&) const = default;
};

struct CounterSnapshot {
  VideoId video;
  std::int64_t day = 0;
  std::int64_t public_counted = 0;
  std::int64_t monetized_counted = 0;
  std::int64_t generated_fake = 0;
  std::int64_t generated_real = 0;
  std::int64_t ad_views = 0;  // generated views served a fully watched ad

  bool operator==(const CounterSnapshot&) const = default;
};

}  // namespace vfraud
