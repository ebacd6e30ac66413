#pragma once

// On-disk experiment logs. One directory per (scenario, policy, seed):
//
//   events.log       ViewEvent records (see model.hpp)
//   verdicts.log     idx, public, monetized, reason
//   snapshots.csv    per (day, video) counters as closed
//   adjustments.log  post-hoc counter corrections
//   meta             run identity and arm definitions
//   progress         last persisted day and file sizes, for resume
//
// Every file starts with a versioned header line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfraud/engine.hpp"

namespace vfraud {

inline constexpr std::string_view kVerdictsHeader = "#vfraud-verdicts v1";
inline constexpr std::string_view kSnapshotsHeader = "#vfraud-snapshots v1";
inline constexpr std::string_view kSnapshotsColumns =
    "day,video,public_counted,monetized_counted,generated_fake,generated_real,ad_views";
inline constexpr std::string_view kAdjustmentsHeader = "#vfraud-adjustments v1";
inline constexpr std::string_view kMetaHeader = "#vfraud-meta v1";
inline constexpr std::string_view kProgressHeader = "#vfraud-progress v1";

std::string verdict_line(std::size_t index, const Verdict& v);
Verdict parse_verdict_line(std::string_view line, std::size_t expected_index);

std::string snapshot_line(const CounterSnapshot& s);
CounterSnapshot parse_snapshot_line(std::string_view line);

std::string adjustment_line(const Adjustment& a);
Adjustment parse_adjustment_line(std::string_view line);

/// Splits "k1=v1<TAB>k2=v2..." and checks the keys against `keys`.
std::vector<std::string_view> split_record(std::string_view line, std::span<const std::string_view> keys,
                                           std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);
std::uint64_t parse_uint(std::string_view s, std::string_view what);

/// Directory of one run below `root`.
std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& scenario,
                                    const std::string& policy, std::uint64_t seed);

/// Number of days already persisted in `dir` (0 if none). Truncates the
/// log files back to the last complete day so a resumed run can append.
int prepare_resume(const std::filesystem::path& dir);

/// DaySink that appends each closed day to the log files in `dir`.
class LogWriter final : public DaySink {
public:
  /// With `resume`, existing files are kept (after prepare_resume).
  LogWriter(std::filesystem::path dir, bool resume);

  void begin(const ExperimentLog& header) override;
  void day_closed(std::int64_t day, std::size_t first_index, std::span<const ViewEvent> events,
                  std::span<const Verdict> verdicts, std::span<const CounterSnapshot> snapshots,
                  std::span<const Adjustment> adjustments) override;
  void finish() override;

private:
  void write_meta(bool complete);
  void write_progress(std::int64_t days_done);

  std::filesystem::path dir_;
  bool resume_;
  ExperimentLog header_;
  std::ofstream events_, verdicts_, snapshots_, adjustments_;
  std::int64_t days_done_ = 0;
};

/// Reads a complete run directory. Throws Io for missing files or missing
/// days, Format for malformed records.
ExperimentLog read_log(const std::filesystem::path& dir);

/// Run directories (those holding a meta file) below `root`, sorted.
std::vector<std::filesystem::path> find_log_dirs(const std::filesystem::path& root);

}  // namespace vfraud
