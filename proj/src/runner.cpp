#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "vfraud/analysis.hpp"
#include "vfraud/error.hpp"
#include "vfraud/logio.hpp"

namespace vfraud {

namespace fs = std::filesystem;

namespace {

struct Job {
  std::size_t scenario;
  std::size_t policy;
  int repeat;
  ExperimentLog log;
  std::string error;
};

void run_job(const Scenario& s, Job& job, const BatchOptions& opts) {
  const auto& variant = s.policies[job.policy];
  const std::uint64_t seed = s.seeds[static_cast<std::size_t>(job.repeat)];
  if (opts.out_dir.empty()) {
    job.log = run_scenario(s, variant, seed, job.repeat);
    return;
  }
  const fs::path dir = run_directory(opts.out_dir, s.name, variant.label, seed);
  try {
    int skip = 0;
    if (opts.resume) {
      skip = prepare_resume(dir);
    } else if (fs::exists(dir)) {
      fs::remove_all(dir);
    }
    LogWriter writer(dir, skip > 0);
    job.log = run_scenario(s, variant, seed, job.repeat, RunOptions{skip, &writer});
  } catch (...) {
    // partial logs are not kept
    std::error_code ec;
    fs::remove_all(dir, ec);
    throw;
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) fail(ErrorCode::Io, "cannot write " + p.string());
}

}  // namespace

std::vector<ScenarioResult> run_batch(const std::vector<Scenario>& scenarios, const BatchOptions& opts) {
  for (const auto& s : scenarios) validate(s);

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (std::size_t p = 0; p < scenarios[i].policies.size(); ++p) {
      for (int r = 0; r < scenarios[i].repeats; ++r) jobs.push_back(Job{i, p, r, {}, {}});
    }
  }
  // long runs first so they overlap with the many short ones
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scenarios[jobs[a].scenario].days > scenarios[jobs[b].scenario].days;
  });

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < order.size();) {
      Job& job = jobs[order[k]];
      try {
        run_job(scenarios[job.scenario], job, opts);
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  int n = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, std::min<int>(n, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<ScenarioResult> results;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    ScenarioResult res;
    res.scenario = scenarios[i];
    std::vector<ExperimentLog> logs;
    for (auto& job : jobs) {
      if (job.scenario != i) continue;
      if (!job.error.empty()) {
        if (!res.error.empty()) res.error += "; ";
        res.error += scenarios[i].policies[job.policy].label + " repeat " + std::to_string(job.repeat) + ": " +
                     job.error;
      } else {
        logs.push_back(std::move(job.log));
      }
    }
    if (res.error.empty()) {
      try {
        res.metrics = compute_metrics(logs);
        res.metrics.scenario = scenarios[i].name;
        res.checks = verify_expectations(scenarios[i], res.metrics);
        if (!opts.out_dir.empty()) {
          const fs::path dir = opts.out_dir / scenarios[i].name;
          write_text(dir / "metrics.csv", metrics_csv(res.metrics));
          write_tables(report_tables(logs, res.metrics), TableFormat::Csv, dir / "report");
          std::string v;
          for (const auto& c : res.checks) v += describe(c) + "\n";
          write_text(dir / "verification.txt", v);
        }
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
    if (opts.keep_logs) res.logs = std::move(logs);
    results.push_back(std::move(res));
  }
  return results;
}

std::string summarize(const std::vector<ScenarioResult>& results) {
  std::string out;
  std::size_t passed = 0, total = 0, errors = 0;
  for (const auto& r : results) {
    out += "== " + r.scenario.name + " ==\n";
    if (!r.error.empty()) {
      out += "ERROR " + r.error + "\n";
      ++errors;
      continue;
    }
    for (const auto& c : r.checks) {
      out += describe(c) + "\n";
      ++total;
      if (c.passed) ++passed;
    }
    for (const auto& [name, v] : r.metrics.values) {
      if (name.rfind("fit_", 0) == 0) out += "  " + name + " = " + format_double(v) + "\n";
    }
    for (const auto& note : r.metrics.notes) out += "  note: " + note + "\n";
  }
  out += "expectations passed: " + std::to_string(passed) + "/" + std::to_string(total);
  if (errors) out += ", scenarios with errors: " + std::to_string(errors);
  out += "\n";
  return out;
}

}  // namespace vfraud
