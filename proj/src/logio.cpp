#include "vfraud/logio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "vfraud/error.hpp"

namespace vfraud {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 4> kVerdictKeys = {"idx", "public", "monetized", "reason"};
constexpr std::array<std::string_view, 6> kAdjustmentKeys = {"applied_day", "ref_day", "video",
                                                             "counter",     "delta",   "cause"};
constexpr std::array<std::string_view, 5> kProgressKeys = {"days", "events", "verdicts", "snapshots",
                                                           "adjustments"};
constexpr std::array<std::string_view, 7> kArmKeys = {"arm", "kind", "real", "videos", "ips", "pattern", "tags"};

bool parse_flag(std::string_view v, std::string_view what) {
  if (v == "1") return true;
  if (v == "0") return false;
  fail(ErrorCode::Format, std::string(what) + ": boolean field must be 0 or 1");
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty() || s == "-") return out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  if (v.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += v[i];
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& p, std::string_view header) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "missing log file: " + p.string());
  std::vector<std::string> lines;
  std::string line;
  if (!std::getline(in, line) || line != header) {
    fail(ErrorCode::Format, p.string() + ": expected header '" + std::string(header) + "'");
  }
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_file_atomic(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(ErrorCode::Io, "write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorCode::Format, std::string(what) + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorCode::Format, std::string(what) + ": not an unsigned integer: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_record(std::string_view line, std::span<const std::string_view> keys,
                                           std::string_view what) {
  std::vector<std::string_view> values;
  values.reserve(keys.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto tab = line.find('\t', pos);
    if ((tab == std::string_view::npos) != (i + 1 == keys.size())) {
      fail(ErrorCode::Format, std::string(what) + " record has wrong field count");
    }
    auto field = line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos);
    auto eq = field.find('=');
    if (eq == std::string_view::npos || field.substr(0, eq) != keys[i]) {
      fail(ErrorCode::Format, std::string(what) + " record: expected key '" + std::string(keys[i]) + "'");
    }
    values.push_back(field.substr(eq + 1));
    pos = tab + 1;
  }
  return values;
}

std::string verdict_line(std::size_t index, const Verdict& v) {
  std::string out = "idx=" + std::to_string(index);
  out += "\tpublic=";
  out += v.count_public ? '1' : '0';
  out += "\tmonetized=";
  out += v.count_monetized ? '1' : '0';
  out += "\treason=";
  out += to_string(v.reason);
  return out;
}

Verdict parse_verdict_line(std::string_view line, std::size_t expected_index) {
  const auto f = split_record(line, kVerdictKeys, "verdict");
  if (static_cast<std::size_t>(parse_uint(f[0], "verdict idx")) != expected_index) {
    fail(ErrorCode::Format, "verdict record out of sequence at index " + std::to_string(expected_index));
  }
  Verdict v;
  v.count_public = parse_flag(f[1], "verdict");
  v.count_monetized = parse_flag(f[2], "verdict");
  v.reason = parse_reason(f[3]);
  return v;
}

std::string snapshot_line(const CounterSnapshot& s) {
  std::ostringstream o;
  o << s.day << ',' << s.video << ',' << s.public_counted << ',' << s.monetized_counted << ',' << s.generated_fake
    << ',' << s.generated_real << ',' << s.ad_views;
  return o.str();
}

CounterSnapshot parse_snapshot_line(std::string_view line) {
  const auto f = split_list(line, ',');
  if (f.size() != 7) fail(ErrorCode::Format, "snapshot row needs 7 columns");
  CounterSnapshot s;
  s.day = parse_int(f[0], "snapshot day");
  s.video = f[1];
  s.public_counted = parse_int(f[2], "snapshot public");
  s.monetized_counted = parse_int(f[3], "snapshot monetized");
  s.generated_fake = parse_int(f[4], "snapshot fake");
  s.generated_real = parse_int(f[5], "snapshot real");
  s.ad_views = parse_int(f[6], "snapshot ad views");
  return s;
}

std::string adjustment_line(const Adjustment& a) {
  std::string out = "applied_day=" + std::to_string(a.applied_day);
  out += "\tref_day=" + std::to_string(a.ref_day);
  out += "\tvideo=" + a.video;
  out += "\tcounter=";
  out += to_string(a.counter);
  out += "\tdelta=" + std::to_string(a.delta);
  out += "\tcause=";
  out += to_string(a.cause);
  return out;
}

Adjustment parse_adjustment_line(std::string_view line) {
  const auto f = split_record(line, kAdjustmentKeys, "adjustment");
  Adjustment a;
  a.applied_day = parse_int(f[0], "adjustment applied_day");
  a.ref_day = parse_int(f[1], "adjustment ref_day");
  a.video = f[2];
  a.counter = parse_counter_kind(f[3]);
  a.delta = parse_int(f[4], "adjustment delta");
  a.cause = parse_adjustment_cause(f[5]);
  if (a.delta >= 0) fail(ErrorCode::Format, "adjustment delta must be negative");
  return a;
}

fs::path run_directory(const fs::path& root, const std::string& scenario, const std::string& policy,
                       std::uint64_t seed) {
  return root / scenario / policy / ("seed-" + std::to_string(seed));
}

int prepare_resume(const fs::path& dir) {
  const fs::path progress = dir / "progress";
  if (!fs::exists(progress)) return 0;
  const auto lines = read_lines(progress, kProgressHeader);
  if (lines.size() != 1) fail(ErrorCode::Format, "progress file needs one record");
  const auto f = split_record(lines[0], kProgressKeys, "progress");
  const auto days = parse_int(f[0], "progress days");
  const std::array<const char*, 4> files = {"events.log", "verdicts.log", "snapshots.csv", "adjustments.log"};
  for (std::size_t i = 0; i < files.size(); ++i) {
    const fs::path p = dir / files[i];
    const auto size = parse_uint(f[i + 1], "progress size");
    if (!fs::exists(p) || fs::file_size(p) < size) fail(ErrorCode::Io, "cannot resume: " + p.string() + " is short");
    fs::resize_file(p, size);
  }
  return static_cast<int>(days);
}

LogWriter::LogWriter(fs::path dir, bool resume) : dir_(std::move(dir)), resume_(resume) {}

void LogWriter::begin(const ExperimentLog& header) {
  header_.scenario = header.scenario;
  header_.report = header.report;
  header_.policy = header.policy;
  header_.portal = header.portal;
  header_.seed = header.seed;
  header_.repeat = header.repeat;
  header_.days = header.days;
  header_.arms = header.arms;
  fs::create_directories(dir_);
  const bool fresh = !resume_ || !fs::exists(dir_ / "events.log") || fs::file_size(dir_ / "events.log") == 0;
  const auto mode = std::ios::binary | (resume_ ? std::ios::app : std::ios::trunc);
  events_.open(dir_ / "events.log", mode);
  verdicts_.open(dir_ / "verdicts.log", mode);
  snapshots_.open(dir_ / "snapshots.csv", mode);
  adjustments_.open(dir_ / "adjustments.log", mode);
  if (!events_ || !verdicts_ || !snapshots_ || !adjustments_) fail(ErrorCode::Io, "cannot open logs in " + dir_.string());
  if (fresh) {
    events_ << kEventsHeader << '\n';
    verdicts_ << kVerdictsHeader << '\n';
    snapshots_ << kSnapshotsHeader << '\n' << kSnapshotsColumns << '\n';
    adjustments_ << kAdjustmentsHeader << '\n';
  }
  write_meta(false);
}

void LogWriter::day_closed(std::int64_t day, std::size_t first_index, std::span<const ViewEvent> events,
                           std::span<const Verdict> verdicts, std::span<const CounterSnapshot> snapshots,
                           std::span<const Adjustment> adjustments) {
  for (const auto& e : events) events_ << to_line(e) << '\n';
  for (std::size_t i = 0; i < verdicts.size(); ++i) verdicts_ << verdict_line(first_index + i, verdicts[i]) << '\n';
  for (const auto& s : snapshots) snapshots_ << snapshot_line(s) << '\n';
  for (const auto& a : adjustments) adjustments_ << adjustment_line(a) << '\n';
  write_progress(day + 1);
}

void LogWriter::finish() {
  write_meta(true);
  events_.close();
  verdicts_.close();
  snapshots_.close();
  adjustments_.close();
}

void LogWriter::write_meta(bool complete) {
  std::ostringstream o;
  o << kMetaHeader << '\n'
    << "version=" << kVersion << '\n'
    << "scenario=" << header_.scenario << '\n'
    << "report=" << (header_.report.empty() ? "-" : header_.report) << '\n'
    << "policy=" << header_.policy << '\n'
    << "portal=" << to_string(header_.portal) << '\n'
    << "seed=" << header_.seed << '\n'
    << "repeat=" << header_.repeat << '\n'
    << "days=" << header_.days << '\n';
  for (const auto& a : header_.arms) {
    std::vector<std::string> tags;
    for (const auto& [k, v] : a.tags) tags.push_back(k + ":" + v);
    std::string pattern;
    for (bool b : a.active_pattern) pattern.push_back(b ? '1' : '0');
    o << "arm=" << a.label << "\tkind=" << a.kind << "\treal=" << (a.real ? 1 : 0) << "\tvideos=" << join(a.videos, ',')
      << "\tips=" << join(a.ips, ',') << "\tpattern=" << (pattern.empty() ? "-" : pattern)
      << "\ttags=" << join(tags, ',') << '\n';
  }
  o << "status=" << (complete ? "complete" : "running") << '\n';
  write_file_atomic(dir_ / "meta", o.str());
}

void LogWriter::write_progress(std::int64_t days_done) {
  for (auto* s : {&events_, &verdicts_, &snapshots_, &adjustments_}) {
    s->flush();
    if (!*s) fail(ErrorCode::Io, "write failed in " + dir_.string());
  }
  days_done_ = days_done;
  std::ostringstream o;
  o << kProgressHeader << '\n'
    << "days=" << days_done << "\tevents=" << fs::file_size(dir_ / "events.log")
    << "\tverdicts=" << fs::file_size(dir_ / "verdicts.log") << "\tsnapshots=" << fs::file_size(dir_ / "snapshots.csv")
    << "\tadjustments=" << fs::file_size(dir_ / "adjustments.log") << '\n';
  write_file_atomic(dir_ / "progress", o.str());
}

ExperimentLog read_log(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, "no log directory: " + dir.string());
  ExperimentLog log;
  bool complete = false;
  for (const auto& line : read_lines(dir / "meta", kMetaHeader)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Format, "meta: bad line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "scenario") log.scenario = value;
    else if (key == "report") log.report = value == "-" ? "" : value;
    else if (key == "policy") log.policy = value;
    else if (key == "portal") log.portal = parse_portal(value);
    else if (key == "seed") log.seed = parse_uint(value, "meta seed");
    else if (key == "repeat") log.repeat = static_cast<int>(parse_int(value, "meta repeat"));
    else if (key == "days") log.days = static_cast<int>(parse_int(value, "meta days"));
    else if (key == "status") complete = value == "complete";
    else if (key == "arm") {
      const auto f = split_record(line, kArmKeys, "meta arm");
      ArmInfo a;
      a.label = f[0];
      a.kind = f[1];
      a.real = parse_flag(f[2], "meta arm");
      a.videos = split_list(f[3], ',');
      a.ips = split_list(f[4], ',');
      if (f[5] != "-") {
        for (char c : f[5]) a.active_pattern.push_back(c == '1');
      }
      for (const auto& t : split_list(f[6], ',')) {
        const auto colon = t.find(':');
        if (colon == std::string::npos) fail(ErrorCode::Format, "meta arm: bad tag '" + t + "'");
        a.tags[t.substr(0, colon)] = t.substr(colon + 1);
      }
      log.arms.push_back(std::move(a));
    }
  }

  // missing-day report
  std::vector<std::int64_t> seen_days;
  auto snap_lines = read_lines(dir / "snapshots.csv", kSnapshotsHeader);
  if (snap_lines.empty() || snap_lines.front() != kSnapshotsColumns) {
    fail(ErrorCode::Format, "snapshots.csv: missing column header");
  }
  for (std::size_t i = 1; i < snap_lines.size(); ++i) {
    log.snapshots.push_back(parse_snapshot_line(snap_lines[i]));
    seen_days.push_back(log.snapshots.back().day);
  }
  std::sort(seen_days.begin(), seen_days.end());
  seen_days.erase(std::unique(seen_days.begin(), seen_days.end()), seen_days.end());
  const bool has_videos = std::any_of(log.arms.begin(), log.arms.end(), [](const auto& a) { return !a.videos.empty(); });
  std::vector<std::int64_t> missing;
  if (has_videos) {
    for (std::int64_t d = 0; d < log.days; ++d) {
      if (!std::binary_search(seen_days.begin(), seen_days.end(), d)) missing.push_back(d);
    }
  }
  if (!missing.empty() || !complete) {
    std::string msg = "incomplete log " + dir.string();
    if (!missing.empty()) {
      msg += ": missing days " + std::to_string(missing.front());
      if (missing.size() > 1) msg += ".." + std::to_string(missing.back());
      msg += " (" + std::to_string(missing.size()) + " of " + std::to_string(log.days) + ")";
    } else {
      msg += ": run did not finish";
    }
    fail(ErrorCode::Io, msg);
  }

  for (const auto& line : read_lines(dir / "events.log", kEventsHeader)) log.events.push_back(parse_event_line(line));
  const auto verdict_lines = read_lines(dir / "verdicts.log", kVerdictsHeader);
  if (verdict_lines.size() != log.events.size()) fail(ErrorCode::Format, "verdict count differs from event count");
  log.verdicts.reserve(verdict_lines.size());
  for (std::size_t i = 0; i < verdict_lines.size(); ++i) log.verdicts.push_back(parse_verdict_line(verdict_lines[i], i));
  for (const auto& line : read_lines(dir / "adjustments.log", kAdjustmentsHeader)) {
    log.adjustments.push_back(parse_adjustment_line(line));
  }
  return log;
}

std::vector<fs::path> find_log_dirs(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  if (fs::is_regular_file(root / "meta")) out.push_back(root);
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "meta" && entry.path().parent_path() != root) {
      out.push_back(entry.path().parent_path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vfraud
