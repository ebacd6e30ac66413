#include "vfraud/model.hpp"

#include <array>
#include <charconv>

#include "vfraud/error.hpp"

namespace vfraud {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::Ordering: return "ordering error";
    case ErrorCode::Scheduling: return "scheduling error";
    case ErrorCode::UndefinedMetric: return "undefined metric";
    case ErrorCode::Fit: return "fit error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::UnknownScenario: return "unknown scenario";
    case ErrorCode::Format: return "format error";
  }
  return "error";
}

SimTime SimTime::from_seconds(std::int64_t total) {
  if (total < 0) fail(ErrorCode::InvalidArgument, "negative simulated time");
  return SimTime{total / kSecondsPerDay, static_cast<std::int32_t>(total % kSecondsPerDay)};
}

SimTime advance(SimTime time, std::int64_t delta_s) {
  if (delta_s < 0) fail(ErrorCode::InvalidArgument, "advance: negative delta");
  return SimTime::from_seconds(time.total_seconds() + delta_s);
}

namespace {

template <typename T>
bool parse_int(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

constexpr std::array<std::string_view, kUserAgentCount> kAgentNames = {
    "LinuxFirefox", "LinuxChrome", "WindowsChrome", "WindowsFirefox",
    "WindowsEdge",  "MacSafari",   "AndroidChrome", "IphoneSafari"};

constexpr std::array<std::string_view, kReferrerCount> kReferrerNames = {
    "Facebook", "Twitter", "PortalSearch", "DirectLink"};

constexpr std::array<std::string_view, 9> kBehaviorNames = {
    "Deterministic", "Burst",        "PoissonWait", "ShortViews", "Cookies",
    "Complete",      "Conservative", "Aggressive",  "RealUser"};

constexpr std::array<std::string_view, 3> kHistoryNames = {"NeverSeen", "SeenClean",
                                                           "SeenMisbehaving"};

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
                const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  fail(ErrorCode::Validation, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

bool valid_token(std::string_view s) {
  if (s.empty() || s == "-") return false;
  for (char c : s) {
    if (c == '\t' || c == '\n' || c == '\r' || c == '=') return false;
  }
  return true;
}

}  // namespace

Ipv4 Ipv4::parse(std::string_view dotted) {
  std::uint32_t value = 0;
  int parts = 0;
  std::size_t pos = 0;
  while (parts < 4) {
    auto dot = dotted.find('.', pos);
    auto piece = dotted.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    unsigned octet = 0;
    if (piece.empty() || piece.size() > 3 || !parse_int(piece, octet) || octet > 255) {
      fail(ErrorCode::Validation, "malformed IPv4 address '" + std::string(dotted) + "'");
    }
    value = (value << 8) | octet;
    ++parts;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
    if (parts == 4) fail(ErrorCode::Validation, "malformed IPv4 address '" + std::string(dotted) + "'");
  }
  if (parts != 4) fail(ErrorCode::Validation, "malformed IPv4 address '" + std::string(dotted) + "'");
  return Ipv4{value};
}

std::string Ipv4::str() const {
  return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xff) + '.' +
         std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
}

std::string Prefix24::str() const {
  return std::to_string(value >> 16) + '.' + std::to_string((value >> 8) & 0xff) + '.' +
         std::to_string(value & 0xff) + "/24";
}

Prefix24 prefix24_of(Ipv4 ip) { return Prefix24{ip.value >> 8}; }
Prefix24 prefix24_of(std::string_view dotted) { return prefix24_of(Ipv4::parse(dotted)); }

bool same_prefix(Ipv4 a, Ipv4 b, int bits) {
  if (bits <= 0) return true;
  if (bits >= 32) return a.value == b.value;
  const std::uint32_t mask = ~std::uint32_t{0} << (32 - bits);
  return (a.value & mask) == (b.value & mask);
}

std::string_view to_string(UserAgent ua) { return kAgentNames[static_cast<std::size_t>(ua)]; }
std::string_view to_string(Referrer ref) { return kReferrerNames[static_cast<std::size_t>(ref)]; }
UserAgent parse_user_agent(std::string_view s) {
  return parse_enum<UserAgent>(s, kAgentNames, "user agent");
}
Referrer parse_referrer(std::string_view s) {
  return parse_enum<Referrer>(s, kReferrerNames, "referrer");
}

std::string_view uploader_of(std::string_view video) {
  auto colon = video.find(':');
  return colon == std::string_view::npos ? video : video.substr(0, colon);
}

void validate(const ViewEvent& e) {
  if (e.video.empty()) fail(ErrorCode::Validation, "view event without video id");
  if (e.duration_s < 0) fail(ErrorCode::Validation, "negative view duration");
  if (e.ad_watched_fully && !e.ad_requested) {
    fail(ErrorCode::Validation, "ad watched fully but never requested");
  }
  if (e.time.day < 0 || e.time.second_of_day < 0 || e.time.second_of_day >= kSecondsPerDay) {
    fail(ErrorCode::Validation, "simulated time out of range");
  }
  if (!valid_token(e.video)) fail(ErrorCode::Validation, "video id is not a valid token");
  if (e.cookie_id && !valid_token(*e.cookie_id)) fail(ErrorCode::Validation, "bad cookie token");
  if (e.nat_group && !valid_token(*e.nat_group)) fail(ErrorCode::Validation, "bad NAT group token");
}

std::string to_line(const ViewEvent& e) {
  std::string out;
  out.reserve(160);
  out += "time.day=";
  out += std::to_string(e.time.day);
  out += "\ttime.sec=";
  out += std::to_string(e.time.second_of_day);
  out += "\tip=";
  out += e.source_ip.str();
  out += "\tvideo=";
  out += e.video;
  out += "\tdur=";
  out += std::to_string(e.duration_s);
  out += "\tua=";
  out += to_string(e.user_agent);
  out += "\tref=";
  out += to_string(e.referrer);
  out += "\tcookie=";
  out += e.cookie_id ? *e.cookie_id : "-";
  out += "\tnat=";
  out += e.nat_group ? *e.nat_group : "-";
  out += "\treal=";
  out += e.is_real_user ? '1' : '0';
  out += "\tad_req=";
  out += e.ad_requested ? '1' : '0';
  out += "\tad_full=";
  out += e.ad_watched_fully ? '1' : '0';
  return out;
}

ViewEvent parse_event_line(std::string_view line) {
  static constexpr std::array<std::string_view, 12> kKeys = {
      "time.day", "time.sec", "ip",   "video", "dur",    "ua",
      "ref",      "cookie",   "nat",  "real",  "ad_req", "ad_full"};
  std::array<std::string_view, 12> values;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < kKeys.size(); ++i) {
    auto tab = line.find('\t', pos);
    if ((tab == std::string_view::npos) != (i + 1 == kKeys.size())) {
      fail(ErrorCode::Format, "event record has wrong field count");
    }
    auto field = line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos);
    auto eq = field.find('=');
    if (eq == std::string_view::npos || field.substr(0, eq) != kKeys[i]) {
      fail(ErrorCode::Format, "event record: expected key '" + std::string(kKeys[i]) + "'");
    }
    values[i] = field.substr(eq + 1);
    pos = tab + 1;
  }

  auto flag = [](std::string_view v) {
    if (v == "1") return true;
    if (v == "0") return false;
    fail(ErrorCode::Format, "event record: boolean field must be 0 or 1");
  };
  auto optional_token = [](std::string_view v) -> std::optional<std::string> {
    if (v == "-") return std::nullopt;
    return std::string(v);
  };

  ViewEvent e;
  if (!parse_int(values[0], e.time.day) || !parse_int(values[1], e.time.second_of_day) ||
      !parse_int(values[4], e.duration_s)) {
    fail(ErrorCode::Format, "event record: malformed integer field");
  }
  e.source_ip = Ipv4::parse(values[2]);
  e.video = std::string(values[3]);
  e.user_agent = parse_user_agent(values[5]);
  e.referrer = parse_referrer(values[6]);
  e.cookie_id = optional_token(values[7]);
  e.nat_group = optional_token(values[8]);
  e.is_real_user = flag(values[9]);
  e.ad_requested = flag(values[10]);
  e.ad_watched_fully = flag(values[11]);
  validate(e);
  return e;
}

std::string_view to_string(BehaviorKind k) { return kBehaviorNames[static_cast<std::size_t>(k)]; }
BehaviorKind parse_behavior_kind(std::string_view s) {
  return parse_enum<BehaviorKind>(s, kBehaviorNames, "behavior");
}

std::string_view to_string(RealUserMix m) {
  return m == RealUserMix::SocialMedia ? "SocialMedia" : "Crowdsourcing";
}
RealUserMix parse_real_user_mix(std::string_view s) {
  if (s == "SocialMedia") return RealUserMix::SocialMedia;
  if (s == "Crowdsourcing") return RealUserMix::Crowdsourcing;
  fail(ErrorCode::Validation, "unknown real-user mix '" + std::string(s) + "'");
}

std::string_view to_string(IpHistory h) { return kHistoryNames[static_cast<std::size_t>(h)]; }
IpHistory parse_ip_history(std::string_view s) {
  return parse_enum<IpHistory>(s, kHistoryNames, "IP history");
}

BehaviorConfig BehaviorConfig::deterministic(int w) {
  BehaviorConfig b;
  b.kind = BehaviorKind::Deterministic;
  b.views_per_day = w;
  return b;
}

BehaviorConfig BehaviorConfig::burst(int n) {
  BehaviorConfig b = deterministic(n);
  b.kind = BehaviorKind::Burst;
  b.burst_size = n;
  b.burst_gap_s = kSecondsPerDay;
  return b;
}

BehaviorConfig BehaviorConfig::poisson_wait(double rate_per_day) {
  BehaviorConfig b;
  b.kind = BehaviorKind::PoissonWait;
  b.wait_mode = WaitMode::Poisson;
  b.poisson_rate_per_day = rate_per_day;
  b.views_per_day = static_cast<int>(rate_per_day + 0.5);
  return b;
}

BehaviorConfig BehaviorConfig::short_views(int w) {
  BehaviorConfig b = deterministic(w);
  b.kind = BehaviorKind::ShortViews;
  b.fixed_duration_s = 1;
  return b;
}

BehaviorConfig BehaviorConfig::cookies(int w) {
  BehaviorConfig b = deterministic(w);
  b.kind = BehaviorKind::Cookies;
  b.cookies_enabled = true;
  return b;
}

BehaviorConfig BehaviorConfig::complete(int w) {
  BehaviorConfig b = deterministic(w);
  b.kind = BehaviorKind::Complete;
  b.duration_mode = DurationMode::Exponential;
  b.wait_mode = WaitMode::Poisson;
  b.poisson_rate_per_day = w;
  b.randomize_http_attrs = true;
  return b;
}

BehaviorConfig BehaviorConfig::conservative() {
  BehaviorConfig b = deterministic(1);
  b.kind = BehaviorKind::Conservative;
  return b;
}

BehaviorConfig BehaviorConfig::aggressive() {
  BehaviorConfig b = deterministic(30);
  b.kind = BehaviorKind::Aggressive;
  return b;
}

BehaviorConfig BehaviorConfig::real_user(int count, RealUserMix mix) {
  BehaviorConfig b;
  b.kind = BehaviorKind::RealUser;
  b.real_user_count = count;
  b.real_user_mix = mix;
  b.duration_mode = DurationMode::Exponential;
  return b;
}

void validate(const BehaviorConfig& b) {
  if (b.views_per_day < 0) fail(ErrorCode::Validation, "views_per_day must be >= 0");
  if (b.videos_per_day < 1) fail(ErrorCode::Validation, "videos_per_day must be >= 1");
  if (b.kind != BehaviorKind::RealUser && b.views_per_day > 0 && b.views_per_day < b.videos_per_day) {
    fail(ErrorCode::Validation, "behavior requires W >= D");
  }
  if (b.fixed_duration_s < 0 || b.video_length_s <= 0) {
    fail(ErrorCode::Validation, "view durations must be non-negative");
  }
  if (b.constant_wait_s < 0 || b.burst_gap_s <= 0) fail(ErrorCode::Validation, "waits must be positive");
  if (b.wait_mode == WaitMode::Poisson && !(b.poisson_rate_per_day > 0.0) && b.views_per_day > 0) {
    fail(ErrorCode::Validation, "Poisson wait needs a positive rate");
  }
  if (b.kind == BehaviorKind::Burst && b.burst_size < 1) fail(ErrorCode::Validation, "burst size must be >= 1");
  if (b.kind == BehaviorKind::Deterministic &&
      (b.duration_mode != DurationMode::Fixed || b.fixed_duration_s != 40 || b.wait_mode != WaitMode::Constant)) {
    fail(ErrorCode::Validation, "Deterministic behavior uses fixed 40 s views and constant waits");
  }
  if (b.kind == BehaviorKind::ShortViews && b.fixed_duration_s != 1) {
    fail(ErrorCode::Validation, "ShortViews behavior uses 1 s views");
  }
  if (!(b.ad_fill >= 0.0 && b.ad_fill <= 1.0)) fail(ErrorCode::Validation, "ad_fill must be in [0,1]");
  if (b.start_day < 0 || (b.end_day && *b.end_day < b.start_day)) {
    fail(ErrorCode::Validation, "invalid active day window");
  }
  if (b.first_view_offset_s < 0 || b.first_view_offset_s >= kSecondsPerDay) {
    fail(ErrorCode::Validation, "first view offset must fall within a day");
  }
  if (b.kind == BehaviorKind::RealUser && b.real_user_count < 0) {
    fail(ErrorCode::Validation, "real-user count must be >= 0");
  }
}

bool NatGroup::active_on(std::int64_t day) const {
  if (active_day_pattern.empty()) return true;
  return active_day_pattern[static_cast<std::size_t>(day % static_cast<std::int64_t>(active_day_pattern.size()))];
}

}  // namespace vfraud
