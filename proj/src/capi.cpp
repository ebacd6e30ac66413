#include "vfraud/vfraud.h"

#include <cstdlib>
#include <cstring>

#include "vfraud/analysis.hpp"
#include "vfraud/catalog.hpp"
#include "vfraud/config.hpp"
#include "vfraud/error.hpp"
#include "vfraud/logio.hpp"

using namespace vfraud;

struct vfraud_catalog {
  std::vector<Scenario> scenarios;
};

struct vfraud_run {
  std::vector<ScenarioResult> results;
  std::string summary;
  std::vector<std::vector<std::string>> descriptions;
};

struct vfraud_policy {
  std::unique_ptr<AuditPolicy> policy;
};

namespace {

thread_local std::string last_error;

vfraud_status fail_with(vfraud_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

// Runs `f`, mapping exceptions to status codes.
template <typename F>
vfraud_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return VFRAUD_OK;
  } catch (const Error& e) {
    return fail_with(static_cast<vfraud_status>(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail_with(VFRAUD_E_INTERNAL, e.what());
  } catch (...) {
    return fail_with(VFRAUD_E_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace

extern "C" {

const char* vfraud_version(void) { return kVersion.data(); }

const char* vfraud_last_error(void) { return last_error.c_str(); }

const char* vfraud_status_name(vfraud_status s) {
  switch (s) {
    case VFRAUD_OK: return "ok";
    case VFRAUD_E_INVALID_ARGUMENT: return "invalid argument";
    case VFRAUD_E_VALIDATION: return "validation error";
    case VFRAUD_E_ORDERING: return "ordering error";
    case VFRAUD_E_SCHEDULING: return "scheduling error";
    case VFRAUD_E_UNDEFINED_METRIC: return "undefined metric";
    case VFRAUD_E_FIT: return "fit error";
    case VFRAUD_E_IO: return "i/o error";
    case VFRAUD_E_UNKNOWN_SCENARIO: return "unknown scenario";
    case VFRAUD_E_FORMAT: return "format error";
    case VFRAUD_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void vfraud_string_free(char* s) { std::free(s); }

vfraud_status vfraud_catalog_open(const char* config_path, vfraud_catalog** out) {
  return guarded([&] {
    require(out != nullptr, "catalog output pointer is null");
    auto c = std::make_unique<vfraud_catalog>();
    c->scenarios = catalog();
    if (config_path && *config_path) {
      c->scenarios = merge_scenarios(std::move(c->scenarios), load_scenarios(config_path, c->scenarios));
    }
    *out = c.release();
  });
}

void vfraud_catalog_free(vfraud_catalog* c) { delete c; }

size_t vfraud_catalog_size(const vfraud_catalog* c) { return c ? c->scenarios.size() : 0; }

const char* vfraud_catalog_name(const vfraud_catalog* c, size_t i) {
  return c && i < c->scenarios.size() ? c->scenarios[i].name.c_str() : nullptr;
}

const char* vfraud_catalog_description(const vfraud_catalog* c, size_t i) {
  return c && i < c->scenarios.size() ? c->scenarios[i].description.c_str() : nullptr;
}

vfraud_status vfraud_catalog_dump(const vfraud_catalog* c, char** out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = dup(dump_scenarios(c->scenarios));
  });
}

vfraud_status vfraud_run_scenarios(const vfraud_catalog* c, const char* const* names, size_t n_names,
                                   const vfraud_run_options* opts, vfraud_run** out) {
  return guarded([&] {
    require(c && out, "null argument");
    require(names || n_names == 0, "null scenario list");
    std::vector<std::string> wanted;
    for (size_t i = 0; i < n_names; ++i) {
      require(names[i] != nullptr, "null scenario name");
      wanted.emplace_back(names[i]);
    }
    vfraud_run_options o{};
    if (opts) o = *opts;
    require(o.repeats >= 0, "repeats must be >= 0");
    require(o.threads >= 0, "threads must be >= 0");
    std::vector<Scenario> selected = select_scenarios(c->scenarios, wanted);
    for (auto& s : selected) {
      s = with_overrides(std::move(s), o.has_seed ? std::optional<std::uint64_t>(o.seed) : std::nullopt,
                         o.repeats > 0 ? std::optional<int>(o.repeats) : std::nullopt);
    }
    BatchOptions b;
    if (o.out_dir) b.out_dir = o.out_dir;
    b.threads = o.threads;
    b.resume = o.resume != 0;
    auto r = std::make_unique<vfraud_run>();
    r->results = run_batch(selected, b);
    r->summary = summarize(r->results);
    for (const auto& res : r->results) {
      std::vector<std::string> d;
      for (const auto& chk : res.checks) d.push_back(describe(chk));
      r->descriptions.push_back(std::move(d));
    }
    *out = r.release();
  });
}

void vfraud_run_free(vfraud_run* r) { delete r; }

int vfraud_run_all_passed(const vfraud_run* r) {
  if (!r) return 0;
  for (const auto& res : r->results) {
    if (!res.error.empty()) return 0;
    for (const auto& c : res.checks) {
      if (!c.passed) return 0;
    }
  }
  return 1;
}

const char* vfraud_run_summary(const vfraud_run* r) { return r ? r->summary.c_str() : ""; }

size_t vfraud_run_scenario_count(const vfraud_run* r) { return r ? r->results.size() : 0; }

const char* vfraud_run_scenario_name(const vfraud_run* r, size_t i) {
  return r && i < r->results.size() ? r->results[i].scenario.name.c_str() : nullptr;
}

const char* vfraud_run_scenario_error(const vfraud_run* r, size_t i) {
  return r && i < r->results.size() ? r->results[i].error.c_str() : nullptr;
}

size_t vfraud_run_check_count(const vfraud_run* r, size_t scenario) {
  return r && scenario < r->results.size() ? r->results[scenario].checks.size() : 0;
}

vfraud_status vfraud_run_check(const vfraud_run* r, size_t scenario, size_t i, vfraud_check* out) {
  return guarded([&] {
    require(r && out, "null argument");
    require(scenario < r->results.size() && i < r->results[scenario].checks.size(), "index out of range");
    const auto& c = r->results[scenario].checks[i];
    out->metric = c.expectation.metric.c_str();
    out->description = r->descriptions[scenario][i].c_str();
    out->passed = c.passed ? 1 : 0;
    out->has_measured = c.measured ? 1 : 0;
    out->measured = c.measured.value_or(0.0);
  });
}

vfraud_status vfraud_run_metric(const vfraud_run* r, const char* scenario, const char* metric, double* out) {
  return guarded([&] {
    require(r && scenario && metric && out, "null argument");
    for (const auto& res : r->results) {
      if (res.scenario.name != scenario) continue;
      auto v = metric_value(res.metrics, metric);
      if (!v) fail(ErrorCode::UndefinedMetric, std::string("no metric '") + metric + "' in " + scenario);
      *out = *v;
      return;
    }
    fail(ErrorCode::UnknownScenario, std::string("scenario '") + scenario + "' is not part of this run");
  });
}

vfraud_status vfraud_run_metrics_csv(const vfraud_run* r, size_t scenario, char** out) {
  return guarded([&] {
    require(r && out, "null argument");
    require(scenario < r->results.size(), "index out of range");
    *out = dup(metrics_csv(r->results[scenario].metrics));
  });
}

vfraud_status vfraud_fit_points(const double* w, const double* rfn, size_t n, vfraud_fit* out) {
  return guarded([&] {
    require(out && (n == 0 || (w && rfn)), "null argument");
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < n; ++i) pts.emplace_back(w[i], rfn[i]);
    const FitResult f = fit_exponential_decay(std::move(pts));
    *out = vfraud_fit{f.threshold_est, f.rate_est, f.r_squared, f.points_used};
  });
}

vfraud_status vfraud_fit_logs(const char* log_dir, const char* policy, vfraud_fit* out) {
  return guarded([&] {
    require(log_dir && out, "null argument");
    const FitResult f = fit_from_logs(log_dir, policy ? policy : "");
    *out = vfraud_fit{f.threshold_est, f.rate_est, f.r_squared, f.points_used};
  });
}

vfraud_status vfraud_report(const char* log_dir, const char* format, const char* out_dir, char** written) {
  return guarded([&] {
    require(log_dir && out_dir, "null argument");
    const auto files = write_report(log_dir, parse_table_format(format ? format : "csv"), out_dir);
    if (written) {
      std::string list;
      for (const auto& f : files) list += f.string() + "\n";
      *written = dup(list);
    }
  });
}

vfraud_status vfraud_policy_create(const char* portal, vfraud_policy** out) {
  return guarded([&] {
    require(portal && out, "null argument");
    auto p = std::make_unique<vfraud_policy>();
    p->policy = make_policy(std::string_view(portal));
    *out = p.release();
  });
}

void vfraud_policy_free(vfraud_policy* p) { delete p; }

vfraud_status vfraud_policy_register_ip(vfraud_policy* p, const char* ip, const char* history) {
  return guarded([&] {
    require(p && ip && history, "null argument");
    p->policy->register_ip(IpIdentity{Ipv4::parse(ip), std::nullopt, parse_ip_history(history)});
  });
}

vfraud_status vfraud_policy_ingest(vfraud_policy* p, const char* event_line, vfraud_verdict* out) {
  return guarded([&] {
    require(p && event_line && out, "null argument");
    const Verdict v = p->policy->ingest(parse_event_line(event_line));
    out->count_public = v.count_public ? 1 : 0;
    out->count_monetized = v.count_monetized ? 1 : 0;
    out->reason = to_string(v.reason).data();
  });
}

vfraud_status vfraud_policy_end_of_day(vfraud_policy* p, int64_t day, char** adjustments) {
  return guarded([&] {
    require(p, "null argument");
    std::string text;
    for (const auto& a : p->policy->end_of_day(day)) text += adjustment_line(a) + "\n";
    if (adjustments) *adjustments = dup(text);
  });
}

vfraud_status vfraud_false_negative_rate(int64_t counted, int64_t generated, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = false_negative_rate(counted, generated);
  });
}

vfraud_status vfraud_false_positive_rate(int64_t counted, int64_t real_generated, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = false_positive_rate(counted, real_generated);
  });
}

vfraud_status vfraud_median(const double* values, size_t n, double* out) {
  return guarded([&] {
    require(out && (n == 0 || values), "null argument");
    if (n == 0) fail(ErrorCode::UndefinedMetric, "median of an empty list");
    *out = median(std::vector<double>(values, values + n));
  });
}

vfraud_status vfraud_decay_fraction(double views_per_day, double* out) {
  return guarded([&] {
    require(out, "null argument");
    require(views_per_day >= 0.0, "views_per_day must be >= 0");
    *out = decay_fraction(PolicyParams{}, views_per_day);
  });
}

vfraud_status vfraud_multi_video_fraction(double views_per_day, int videos_per_day, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = multi_video_fraction(PolicyParams{}, views_per_day, videos_per_day);
  });
}

}  // extern "C"
