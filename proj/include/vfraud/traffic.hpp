#pragma once

// Seeded generators for probe traffic, multi-IP partitioning, NAT cover
// traffic and legitimate viewers. Every generator is a pure function of its
// inputs: the same spec and seed always yield the same stream.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfraud/model.hpp"

namespace vfraud {

struct TrafficSpec {
  std::string label;
  BehaviorConfig behavior;
  std::vector<IpIdentity> ip_pool;
  std::vector<VideoId> target_videos;
  int days = 1;
  std::uint64_t seed = 0;
  std::optional<NatGroup> nat;

  bool operator==(const TrafficSpec&) const = default;
};

void validate(const TrafficSpec& spec);

/// Single-source schedule for `spec.behavior`, attributed to ip_pool[0].
/// Throws Scheduling when W views do not fit in a day at the configured wait.
std::vector<ViewEvent> schedule_views(const TrafficSpec& spec);

/// Round-robin by within-day event index: the i-th view of a day goes to
/// pool[i % K].
std::vector<ViewEvent> distribute_over_ips(std::vector<ViewEvent> stream,
                                           std::span<const IpIdentity> pool);

/// Rewrites probe events to the NAT's public address and interleaves
/// background viewers on active days.
std::vector<ViewEvent> apply_nat(std::vector<ViewEvent> stream, const NatGroup& nat, int days,
                                 std::uint64_t seed);

/// Legitimate viewers of `video`, spread over `days`. IPs come from `pool`;
/// Crowdsourcing concentrates views on fewer, heavier IPs and shorter views.
std::vector<ViewEvent> gen_real_user_views(int count, RealUserMix mix, std::uint64_t seed,
                                           std::span<const IpIdentity> pool, const VideoId& video,
                                           int days);

/// Full pipeline for one spec: schedule, partition over the pool, apply NAT
/// (or the real-user generator for RealUser behaviors).
std::vector<ViewEvent> generate_traffic(const TrafficSpec& spec);

/// `count` consecutive addresses starting at `first`, all with `history`.
std::vector<IpIdentity> make_ip_pool(Ipv4 first, int count, IpHistory history);

// Real-user generator parameters (exposed for tests and documentation).
struct RealUserShape {
  double mean_duration_s;
  double ip_weight_exponent;  // weight of the i-th IP is (i + 1)^-exponent
  int max_ips;
};
RealUserShape real_user_shape(RealUserMix mix);

inline constexpr int kBackgroundCatalogSize = 20000;
inline constexpr double kBackgroundZipfExponent = 0.7;
inline constexpr double kBackgroundMeanDurationS = 180.0;

}  // namespace vfraud
