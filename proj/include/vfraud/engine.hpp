#pragma once

// Scenario runner: merges the traffic of every arm on one simulated clock,
// feeds it through a policy, closes each day and records the full log.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfraud/audit.hpp"
#include "vfraud/model.hpp"
#include "vfraud/traffic.hpp"

namespace vfraud {

inline constexpr std::string_view kVersion = "1.0.0";

/// One traffic source of a scenario. Tags carry the values a report needs
/// (e.g. w=20, d=3, location=loc1); they are not interpreted by the runner.
struct Arm {
  std::string label;
  TrafficSpec traffic;
  std::map<std::string, std::string> tags;

  bool operator==(const Arm&) const = default;
};

struct PolicyVariant {
  std::string label;
  PortalKind portal = PortalKind::YouTubeLike;
  PolicyParams params;

  bool operator==(const PolicyVariant&) const = default;
};

enum class CompareOp : std::uint8_t { Approx, Le, Ge };
std::string_view to_string(CompareOp op);
CompareOp parse_compare_op(std::string_view s);

struct Expectation {
  std::string metric;
  CompareOp op = CompareOp::Approx;
  double target = 0.0;
  double tolerance = 0.0;

  bool operator==(const Expectation&) const = default;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string report;  // table layout used by the report command
  int days = 1;
  int repeats = 1;
  std::vector<std::uint64_t> seeds;  // one per repeat
  std::vector<Arm> arms;
  std::vector<PolicyVariant> policies;
  std::vector<Expectation> expected;

  bool operator==(const Scenario&) const = default;
};

/// Throws Validation on inconsistent scenarios (seed count, duplicate arm
/// labels or policy labels, arms sharing a video, invalid traffic).
void validate(const Scenario& s);

/// Seeds 0..repeats-1 derived from `base`.
std::vector<std::uint64_t> seeds_for(std::uint64_t base, int repeats);

struct ArmInfo {
  std::string label;
  std::vector<VideoId> videos;
  std::vector<std::string> ips;
  std::string kind;
  bool real = false;
  std::vector<bool> active_pattern;  // NAT day pattern, empty if none
  std::map<std::string, std::string> tags;

  bool operator==(const ArmInfo&) const = default;
};

struct ExperimentLog {
  std::string scenario;
  std::string report;
  std::string policy;
  PortalKind portal = PortalKind::YouTubeLike;
  std::uint64_t seed = 0;
  int repeat = 0;
  int days = 0;
  std::vector<ArmInfo> arms;
  std::vector<ViewEvent> events;
  std::vector<Verdict> verdicts;
  std::vector<CounterSnapshot> snapshots;  // as closed, day-major, video order
  std::vector<Adjustment> adjustments;
};

/// Receives each closed day; used to persist logs incrementally.
class DaySink {
public:
  virtual ~DaySink() = default;
  virtual void begin(const ExperimentLog& header) = 0;
  /// `first_index` is the stream index of events[0].
  virtual void day_closed(std::int64_t day, std::size_t first_index, std::span<const ViewEvent> events,
                          std::span<const Verdict> verdicts,
                          std::span<const CounterSnapshot> snapshots, std::span<const Adjustment> adjustments) = 0;
  virtual void finish() = 0;
};

struct RunOptions {
  int skip_days = 0;         // days already persisted (resume): replayed, not re-emitted
  DaySink* sink = nullptr;
};

/// Runs one (scenario, policy variant, seed). Deterministic per seed.
ExperimentLog run_scenario(const Scenario& s, const PolicyVariant& policy, std::uint64_t seed, int repeat = 0,
                           const RunOptions& opts = {});

/// Counters with every adjustment applied, keyed by (video, day).
struct FinalCounter {
  std::int64_t public_counted = 0;
  std::int64_t monetized_counted = 0;
  std::int64_t generated_fake = 0;
  std::int64_t generated_real = 0;
  std::int64_t ad_views = 0;
};
std::map<std::pair<VideoId, std::int64_t>, FinalCounter> final_counters(const ExperimentLog& log);

}  // namespace vfraud
