#pragma once

#include <doctest.h>

#include <algorithm>

#include "vfraud/error.hpp"

// Asserts that `expr` throws vfraud::Error with `code`.
#define CHECK_VF_ERROR(expr, expected_code)                                        \
  do {                                                                             \
    bool thrown_ = false;                                                          \
    try {                                                                          \
      (void)(expr);                                                                \
    } catch (const vfraud::Error& e_) {                                            \
      thrown_ = true;                                                              \
      CHECK_MESSAGE(e_.code() == (expected_code), "wrong error code: " << e_.what()); \
    }                                                                              \
    CHECK_MESSAGE(thrown_, "expected vfraud::Error from " #expr);                  \
  } while (0)

#include <map>
#include <vector>

#include "vfraud/audit.hpp"
#include "vfraud/traffic.hpp"

namespace vftest {

struct Replay {
  std::vector<vfraud::Verdict> verdicts;
  std::vector<vfraud::Adjustment> adjustments;
};

// Feeds `stream` through `p`, closing every day up to `days - 1`.
inline Replay replay(vfraud::AuditPolicy& p, const std::vector<vfraud::ViewEvent>& stream, int days) {
  Replay r;
  std::int64_t open = 0;
  for (const auto& e : stream) {
    while (open < e.time.day) {
      auto adj = p.end_of_day(open++);
      r.adjustments.insert(r.adjustments.end(), adj.begin(), adj.end());
    }
    r.verdicts.push_back(p.ingest(e));
  }
  while (open < days) {
    auto adj = p.end_of_day(open++);
    r.adjustments.insert(r.adjustments.end(), adj.begin(), adj.end());
  }
  return r;
}

// Public counts per day for events matching `video` (all videos when empty),
// adjustments applied.
inline std::map<std::int64_t, std::int64_t> daily_public(const Replay& r, const std::vector<vfraud::ViewEvent>& stream,
                                                         const std::string& video = {}) {
  std::map<std::int64_t, std::int64_t> out;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!video.empty() && stream[i].video != video) continue;
    out[stream[i].time.day] += 0;
    if (r.verdicts[i].count_public) ++out[stream[i].time.day];
  }
  for (const auto& a : r.adjustments) {
    if (a.counter == vfraud::CounterKind::Public && (video.empty() || a.video == video)) out[a.ref_day] += a.delta;
  }
  return out;
}

inline std::vector<vfraud::ViewEvent> merge(std::vector<vfraud::ViewEvent> a, const std::vector<vfraud::ViewEvent>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::stable_sort(a.begin(), a.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
  return a;
}

inline vfraud::TrafficSpec probe(vfraud::BehaviorConfig b, const std::string& ip, const std::string& video, int days,
                                 vfraud::IpHistory h = vfraud::IpHistory::SeenClean, std::uint64_t seed = 11) {
  vfraud::TrafficSpec s;
  s.label = video;
  s.behavior = b;
  s.ip_pool = {vfraud::IpIdentity{vfraud::Ipv4::parse(ip), std::nullopt, h}};
  s.target_videos = {video};
  s.days = days;
  s.seed = seed;
  return s;
}

}  // namespace vftest
