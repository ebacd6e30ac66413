#ifndef VFRAUD_H
#define VFRAUD_H

/* C interface of libvfraud. Objects are opaque handles released with the
 * matching *_free function. Every call returning vfraud_status stores a
 * message for vfraud_last_error() on failure (per thread). Strings returned
 * through char** are heap copies released with vfraud_string_free; const
 * char* results are owned by their handle. */

#include <stddef.h>
#include <stdint.h>

#if defined(VFRAUD_BUILDING_LIBRARY)
#define VFRAUD_API __attribute__((visibility("default")))
#else
#define VFRAUD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vfraud_status {
  VFRAUD_OK = 0,
  VFRAUD_E_INVALID_ARGUMENT = 1,
  VFRAUD_E_VALIDATION = 2,
  VFRAUD_E_ORDERING = 3,
  VFRAUD_E_SCHEDULING = 4,
  VFRAUD_E_UNDEFINED_METRIC = 5,
  VFRAUD_E_FIT = 6,
  VFRAUD_E_IO = 7,
  VFRAUD_E_UNKNOWN_SCENARIO = 8,
  VFRAUD_E_FORMAT = 9,
  VFRAUD_E_INTERNAL = 100
} vfraud_status;

VFRAUD_API const char* vfraud_version(void);
VFRAUD_API const char* vfraud_last_error(void);
VFRAUD_API const char* vfraud_status_name(vfraud_status s);
VFRAUD_API void vfraud_string_free(char* s);

/* Scenario catalog: the built-in scenarios, optionally merged with a config
 * file (NULL for none). */
typedef struct vfraud_catalog vfraud_catalog;
VFRAUD_API vfraud_status vfraud_catalog_open(const char* config_path, vfraud_catalog** out);
VFRAUD_API void vfraud_catalog_free(vfraud_catalog* c);
VFRAUD_API size_t vfraud_catalog_size(const vfraud_catalog* c);
VFRAUD_API const char* vfraud_catalog_name(const vfraud_catalog* c, size_t i);
VFRAUD_API const char* vfraud_catalog_description(const vfraud_catalog* c, size_t i);
/* Scenario config text for the whole catalog. */
VFRAUD_API vfraud_status vfraud_catalog_dump(const vfraud_catalog* c, char** out);

typedef struct vfraud_run_options {
  const char* out_dir; /* NULL or "": keep logs in memory only */
  int threads;         /* 0: hardware concurrency */
  int resume;          /* continue from persisted logs in out_dir */
  int has_seed;
  uint64_t seed;       /* base seed when has_seed */
  int repeats;         /* 0: scenario default */
} vfraud_run_options;

typedef struct vfraud_run vfraud_run;

/* Runs the named scenarios ("all" selects every one). A run that completes
 * is returned even if some scenario errored or an expectation failed. */
VFRAUD_API vfraud_status vfraud_run_scenarios(const vfraud_catalog* c, const char* const* names, size_t n_names,
                                              const vfraud_run_options* opts, vfraud_run** out);
VFRAUD_API void vfraud_run_free(vfraud_run* r);
/* 1 iff every scenario ran and every expectation passed. */
VFRAUD_API int vfraud_run_all_passed(const vfraud_run* r);
VFRAUD_API const char* vfraud_run_summary(const vfraud_run* r);
VFRAUD_API size_t vfraud_run_scenario_count(const vfraud_run* r);
VFRAUD_API const char* vfraud_run_scenario_name(const vfraud_run* r, size_t i);
/* "" when the scenario ran. */
VFRAUD_API const char* vfraud_run_scenario_error(const vfraud_run* r, size_t i);

typedef struct vfraud_check {
  const char* metric;
  const char* description; /* PASS/FAIL line */
  int passed;
  int has_measured;
  double measured;
} vfraud_check;

VFRAUD_API size_t vfraud_run_check_count(const vfraud_run* r, size_t scenario);
VFRAUD_API vfraud_status vfraud_run_check(const vfraud_run* r, size_t scenario, size_t i, vfraud_check* out);
/* Named metric (or "a - b") of one scenario. */
VFRAUD_API vfraud_status vfraud_run_metric(const vfraud_run* r, const char* scenario, const char* metric,
                                           double* out);
VFRAUD_API vfraud_status vfraud_run_metrics_csv(const vfraud_run* r, size_t scenario, char** out);

typedef struct vfraud_fit {
  double threshold;
  double rate;
  double r_squared;
  size_t points_used;
} vfraud_fit;

/* Decay fit over (W, R_FN) points. */
VFRAUD_API vfraud_status vfraud_fit_points(const double* w, const double* rfn, size_t n, vfraud_fit* out);
/* Decay fit over the rate-sweep runs below log_dir; policy may be NULL. */
VFRAUD_API vfraud_status vfraud_fit_logs(const char* log_dir, const char* policy, vfraud_fit* out);

/* Writes report tables for every run below log_dir. format: "csv" or
 * "plotdata". *written receives the file list, one path per line. */
VFRAUD_API vfraud_status vfraud_report(const char* log_dir, const char* format, const char* out_dir,
                                       char** written);

/* A single audit policy fed event by event. portal: "YouTubeLike",
 * "DailymotionLike" or "Permissive". */
typedef struct vfraud_policy vfraud_policy;

typedef struct vfraud_verdict {
  int count_public;
  int count_monetized;
  const char* reason; /* static string */
} vfraud_verdict;

VFRAUD_API vfraud_status vfraud_policy_create(const char* portal, vfraud_policy** out);
VFRAUD_API void vfraud_policy_free(vfraud_policy* p);
/* history: "NeverSeen", "SeenClean" or "SeenMisbehaving". */
VFRAUD_API vfraud_status vfraud_policy_register_ip(vfraud_policy* p, const char* ip, const char* history);
/* event_line: one record of the event log format. */
VFRAUD_API vfraud_status vfraud_policy_ingest(vfraud_policy* p, const char* event_line, vfraud_verdict* out);
/* Adjustment records, one line each (possibly empty). */
VFRAUD_API vfraud_status vfraud_policy_end_of_day(vfraud_policy* p, int64_t day, char** adjustments);

/* Metric helpers. */
VFRAUD_API vfraud_status vfraud_false_negative_rate(int64_t counted, int64_t generated, double* out);
VFRAUD_API vfraud_status vfraud_false_positive_rate(int64_t counted, int64_t real_generated, double* out);
VFRAUD_API vfraud_status vfraud_median(const double* values, size_t n, double* out);
/* Default YouTube-like curves. */
VFRAUD_API vfraud_status vfraud_decay_fraction(double views_per_day, double* out);
VFRAUD_API vfraud_status vfraud_multi_video_fraction(double views_per_day, int videos_per_day, double* out);

#ifdef __cplusplus
}
#endif

#endif
