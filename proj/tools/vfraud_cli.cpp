// Command-line front end over the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfraud/vfraud.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

std::string default_out() {
  const char* env = std::getenv("VFRAUD_OUT");
  return env && *env ? env : "vfraud-out";
}

int report_error(const char* what, vfraud_status s) {
  std::fprintf(stderr, "vfraud: %s: %s: %s\n", what, vfraud_status_name(s), vfraud_last_error());
  return s == VFRAUD_E_UNKNOWN_SCENARIO || s == VFRAUD_E_INVALID_ARGUMENT ? kExitUsage : kExitFailed;
}

struct Catalog {
  vfraud_catalog* c = nullptr;
  ~Catalog() { vfraud_catalog_free(c); }
};

struct RunOpts {
  std::vector<std::string> scenarios;
  std::string out;
  std::string config;
  std::uint64_t seed = 0;
  int repeats = 0;
  int threads = 0;
  bool resume = false;
  bool memory = false;
};

int cmd_run(const RunOpts& o, bool has_seed) {
  Catalog cat;
  if (auto s = vfraud_catalog_open(o.config.empty() ? nullptr : o.config.c_str(), &cat.c)) {
    return report_error("config", s);
  }
  std::vector<const char*> names;
  for (const auto& n : o.scenarios) names.push_back(n.c_str());
  if (names.empty()) names.push_back("all");

  const std::string out = o.out.empty() ? default_out() : o.out;
  vfraud_run_options opts{};
  opts.out_dir = o.memory ? nullptr : out.c_str();
  opts.threads = o.threads;
  opts.resume = o.resume ? 1 : 0;
  opts.has_seed = has_seed ? 1 : 0;
  opts.seed = o.seed;
  opts.repeats = o.repeats;
  vfraud_run* run = nullptr;
  if (auto s = vfraud_run_scenarios(cat.c, names.data(), names.size(), &opts, &run)) return report_error("run", s);
  std::fputs(vfraud_run_summary(run), stdout);
  if (!o.memory) {
    std::FILE* f = std::fopen((fs::path(out) / "verification.txt").string().c_str(), "wb");
    if (f) {
      std::fputs(vfraud_run_summary(run), f);
      std::fclose(f);
    }
    std::printf("logs and tables in %s\n", out.c_str());
  }
  const int ok = vfraud_run_all_passed(run);
  vfraud_run_free(run);
  return ok ? 0 : kExitFailed;
}

int cmd_fit(const std::string& logs, const std::string& policy, const std::string& csv) {
  vfraud_fit fit{};
  if (auto s = vfraud_fit_logs(logs.c_str(), policy.empty() ? nullptr : policy.c_str(), &fit)) {
    return report_error("fit", s);
  }
  std::printf("threshold_est = %.17g\nrate_est = %.17g\nr_squared = %.17g\npoints_used = %zu\n", fit.threshold,
              fit.rate, fit.r_squared, fit.points_used);
  if (!csv.empty()) {
    std::ofstream f(csv, std::ios::binary | std::ios::trunc);
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%zu\n", fit.threshold, fit.rate, fit.r_squared,
                  fit.points_used);
    f << "threshold_est,rate_est,r_squared,points_used\n" << line;
    if (!f) {
      std::fprintf(stderr, "vfraud: cannot write %s\n", csv.c_str());
      return kExitFailed;
    }
  }
  return 0;
}

// A scenario name resolves to <root>/<name> when it is not a directory.
std::string resolve_logs(const std::string& target, const std::string& root) {
  if (target.empty()) return root;
  if (fs::is_directory(target)) return target;
  return (fs::path(root) / target).string();
}

int cmd_report(const std::string& logs, const std::string& format, const std::string& dest) {
  char* written = nullptr;
  if (auto s = vfraud_report(logs.c_str(), format.c_str(), dest.c_str(), &written)) return report_error("report", s);
  std::fputs(written, stdout);
  vfraud_string_free(written);
  return 0;
}

int cmd_catalog(const std::string& config, bool dump) {
  Catalog cat;
  if (auto s = vfraud_catalog_open(config.empty() ? nullptr : config.c_str(), &cat.c)) {
    return report_error("config", s);
  }
  if (dump) {
    char* text = nullptr;
    if (auto s = vfraud_catalog_dump(cat.c, &text)) return report_error("catalog", s);
    std::fputs(text, stdout);
    vfraud_string_free(text);
    return 0;
  }
  for (size_t i = 0; i < vfraud_catalog_size(cat.c); ++i) {
    std::printf("%-22s %s\n", vfraud_catalog_name(cat.c, i), vfraud_catalog_description(cat.c, i));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfraud: view-fraud simulator and audit toolkit"};
  app.set_version_flag("--version", std::string(vfraud_version()));
  app.require_subcommand(1);

  RunOpts ro;
  auto* run = app.add_subcommand("run", "run scenarios, write logs, tables and a verification summary");
  run->add_option("names", ro.scenarios, "scenario names or 'all'");
  run->add_option("--scenario", ro.scenarios, "scenario name (repeatable)");
  auto* seed_opt = run->add_option("--seed", ro.seed, "base seed; repeat seeds are derived from it");
  run->add_option("--repeats", ro.repeats, "repeats per scenario")->check(CLI::PositiveNumber);
  run->add_option("--out", ro.out, "output directory (default $VFRAUD_OUT or ./vfraud-out)");
  run->add_option("--config", ro.config, "scenario config file merged over the catalog");
  run->add_option("--threads", ro.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--resume", ro.resume, "continue interrupted runs from their last completed day");
  run->add_flag("--no-logs", ro.memory, "keep logs in memory; only print the summary");

  std::string fit_logs, fit_policy, fit_csv, fit_root;
  auto* fit = app.add_subcommand("fit", "fit the exponential decay model to a rate sweep");
  fit->add_option("logs", fit_logs, "log directory or scenario name")->required();
  fit->add_option("--policy", fit_policy, "policy label (default: first found)");
  fit->add_option("--csv", fit_csv, "also write the fit as CSV to this file");
  fit->add_option("--out", fit_root, "output root used to resolve scenario names");

  std::string rep_logs, rep_format = "csv", rep_root, rep_dest;
  auto* report = app.add_subcommand("report", "write figure tables from experiment logs");
  report->add_option("logs", rep_logs, "log directory or scenario name (default: the whole output root)");
  report->add_option("--format", rep_format, "csv or plotdata")->check(CLI::IsMember({"csv", "plotdata"}));
  report->add_option("--out", rep_root, "output root used to resolve scenario names");
  report->add_option("--dest", rep_dest, "directory for the tables (default <root>/report)");

  std::string cat_config;
  bool cat_dump = false;
  auto* cat = app.add_subcommand("catalog", "list scenarios or print them as a config file");
  cat->add_option("--config", cat_config, "scenario config file merged over the catalog");
  cat->add_flag("--dump", cat_dump, "print the full scenario config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (*run) return cmd_run(ro, seed_opt->count() > 0);
  if (*fit) {
    const std::string root = fit_root.empty() ? default_out() : fit_root;
    return cmd_fit(resolve_logs(fit_logs, root), fit_policy, fit_csv);
  }
  if (*report) {
    const std::string root = rep_root.empty() ? default_out() : rep_root;
    const std::string dest = rep_dest.empty() ? (fs::path(root) / "report").string() : rep_dest;
    return cmd_report(resolve_logs(rep_logs, root), rep_format, dest);
  }
  if (*cat) return cmd_catalog(cat_config, cat_dump);
  return kExitUsage;
}
