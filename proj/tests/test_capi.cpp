// Exercises the shared library through the C header only.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "vfraud/vfraud.h"

namespace {

std::string event_line(int day, int sec, const char* ip, const char* video) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "time.day=%d\ttime.sec=%d\tip=%s\tvideo=%s\tdur=40\tua=LinuxFirefox\tref=DirectLink\tcookie=-\tnat=-\t"
                "real=0\tad_req=1\tad_full=1",
                day, sec, ip, video);
  return buf;
}

std::filesystem::path tmp_root() {
  const char* env = std::getenv("VFRAUD_TEST_TMP");
  std::filesystem::path p = env && *env ? env : std::filesystem::temp_directory_path() / "vfraud-capi-test";
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(vfraud_version()) == "1.0.0");
  CHECK(std::string(vfraud_status_name(VFRAUD_E_FIT)) == "fit error");
}

TEST_CASE("catalog handle") {
  vfraud_catalog* c = nullptr;
  REQUIRE(vfraud_catalog_open(nullptr, &c) == VFRAUD_OK);
  CHECK(vfraud_catalog_size(c) == 13);
  CHECK(std::string(vfraud_catalog_name(c, 0)) == "portals-public");
  CHECK(vfraud_catalog_name(c, 13) == nullptr);
  char* text = nullptr;
  REQUIRE(vfraud_catalog_dump(c, &text) == VFRAUD_OK);
  CHECK(std::string(text).rfind("# vfraud-scenarios v1", 0) == 0);
  vfraud_string_free(text);
  vfraud_catalog_free(c);

  CHECK(vfraud_catalog_open("/nonexistent/config", &c) == VFRAUD_E_IO);
  CHECK(std::string(vfraud_last_error()).find("/nonexistent/config") != std::string::npos);
  CHECK(vfraud_catalog_open(nullptr, nullptr) == VFRAUD_E_INVALID_ARGUMENT);
}

TEST_CASE("run in memory and read metrics") {
  vfraud_catalog* c = nullptr;
  REQUIRE(vfraud_catalog_open(nullptr, &c) == VFRAUD_OK);
  const char* names[] = {"decay-curve"};
  vfraud_run* r = nullptr;
  REQUIRE(vfraud_run_scenarios(c, names, 1, nullptr, &r) == VFRAUD_OK);
  CHECK(vfraud_run_all_passed(r) == 1);
  REQUIRE(vfraud_run_scenario_count(r) == 1);
  CHECK(std::string(vfraud_run_scenario_error(r, 0)).empty());
  double k = 0;
  REQUIRE(vfraud_run_metric(r, "decay-curve", "fit_k/youtube", &k) == VFRAUD_OK);
  CHECK(std::fabs(k - 0.455) <= 0.02);
  CHECK(vfraud_run_metric(r, "decay-curve", "nope", &k) == VFRAUD_E_UNDEFINED_METRIC);
  CHECK(vfraud_run_metric(r, "nat", "x", &k) == VFRAUD_E_UNKNOWN_SCENARIO);
  REQUIRE(vfraud_run_check_count(r, 0) > 0);
  vfraud_check chk{};
  REQUIRE(vfraud_run_check(r, 0, 0, &chk) == VFRAUD_OK);
  CHECK(chk.passed == 1);
  CHECK(std::string(chk.description).rfind("PASS", 0) == 0);
  CHECK(vfraud_run_check(r, 0, 100000, &chk) == VFRAUD_E_INVALID_ARGUMENT);
  char* csv = nullptr;
  REQUIRE(vfraud_run_metrics_csv(r, 0, &csv) == VFRAUD_OK);
  CHECK(std::string(csv).rfind("scenario,policy,repeat,arm,day,", 0) == 0);
  vfraud_string_free(csv);
  CHECK(std::string(vfraud_run_summary(r)).find("expectations passed") != std::string::npos);
  vfraud_run_free(r);

  const char* bad[] = {"nosuch"};
  CHECK(vfraud_run_scenarios(c, bad, 1, nullptr, &r) == VFRAUD_E_UNKNOWN_SCENARIO);
  CHECK(std::string(vfraud_last_error()).find("decay-curve") != std::string::npos);
  vfraud_catalog_free(c);
}

TEST_CASE("run to disk, then fit and report from the logs") {
  const auto root = tmp_root();
  vfraud_catalog* c = nullptr;
  REQUIRE(vfraud_catalog_open(nullptr, &c) == VFRAUD_OK);
  const char* names[] = {"decay-curve"};
  const std::string out = (root / "logs").string();
  vfraud_run_options o{};
  o.out_dir = out.c_str();
  o.has_seed = 1;
  o.seed = 5;
  o.repeats = 1;
  vfraud_run* r = nullptr;
  REQUIRE(vfraud_run_scenarios(c, names, 1, &o, &r) == VFRAUD_OK);
  vfraud_run_free(r);
  vfraud_catalog_free(c);

  vfraud_fit fit{};
  REQUIRE(vfraud_fit_logs(out.c_str(), nullptr, &fit) == VFRAUD_OK);
  CHECK(std::fabs(fit.rate - 0.455) <= 0.02);
  CHECK(fit.threshold == 8.0);

  char* written = nullptr;
  const std::string dest = (root / "report").string();
  REQUIRE(vfraud_report(out.c_str(), "plotdata", dest.c_str(), &written) == VFRAUD_OK);
  CHECK(std::string(written).find(".dat") != std::string::npos);
  vfraud_string_free(written);
  CHECK(vfraud_report(out.c_str(), "svg", dest.c_str(), nullptr) != VFRAUD_OK);
  CHECK(vfraud_report((root / "empty").string().c_str(), "csv", dest.c_str(), nullptr) == VFRAUD_E_IO);
}

TEST_CASE("fit from points") {
  std::vector<double> w, rfn;
  for (int i = 1; i <= 30; ++i) {
    w.push_back(i);
    rfn.push_back(i <= 8 ? 1.0 : std::exp(-0.455 * (i - 8)));
  }
  vfraud_fit f{};
  REQUIRE(vfraud_fit_points(w.data(), rfn.data(), w.size(), &f) == VFRAUD_OK);
  CHECK(std::fabs(f.rate - 0.455) < 0.005);
  CHECK(f.threshold == 8.0);
  std::vector<double> ones(w.size(), 1.0);
  CHECK(vfraud_fit_points(w.data(), ones.data(), w.size(), &f) == VFRAUD_E_FIT);
}

TEST_CASE("policy handle") {
  vfraud_policy* p = nullptr;
  CHECK(vfraud_policy_create("Nope", &p) == VFRAUD_E_VALIDATION);
  REQUIRE(vfraud_policy_create("YouTubeLike", &p) == VFRAUD_OK);
  REQUIRE(vfraud_policy_register_ip(p, "198.18.0.1", "SeenClean") == VFRAUD_OK);
  CHECK(vfraud_policy_register_ip(p, "198.18.0", "SeenClean") == VFRAUD_E_VALIDATION);
  vfraud_verdict v{};
  REQUIRE(vfraud_policy_ingest(p, event_line(0, 10, "198.18.0.1", "u:v0").c_str(), &v) == VFRAUD_OK);
  CHECK(v.count_public == 1);
  CHECK(std::string(v.reason) == "Pass");
  CHECK(vfraud_policy_ingest(p, event_line(0, 5, "198.18.0.1", "u:v0").c_str(), &v) == VFRAUD_E_ORDERING);
  CHECK(vfraud_policy_ingest(p, "garbage", &v) == VFRAUD_E_FORMAT);
  char* adj = nullptr;
  REQUIRE(vfraud_policy_end_of_day(p, 0, &adj) == VFRAUD_OK);
  CHECK(std::string(adj).empty());
  vfraud_string_free(adj);
  vfraud_policy_free(p);
}

TEST_CASE("metric helpers") {
  double x = 0;
  REQUIRE(vfraud_false_negative_rate(7, 100, &x) == VFRAUD_OK);
  CHECK(x == doctest::Approx(0.07));
  CHECK(vfraud_false_negative_rate(1, 0, &x) == VFRAUD_E_UNDEFINED_METRIC);
  REQUIRE(vfraud_false_positive_rate(322, 330, &x) == VFRAUD_OK);
  CHECK(x == doctest::Approx(8.0 / 330.0));
  const double vals[] = {1.0, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  REQUIRE(vfraud_median(vals, 8, &x) == VFRAUD_OK);
  CHECK(x == doctest::Approx(0.1));
  CHECK(vfraud_median(vals, 0, &x) == VFRAUD_E_UNDEFINED_METRIC);
  REQUIRE(vfraud_decay_fraction(9, &x) == VFRAUD_OK);
  CHECK(x == doctest::Approx(std::exp(-0.455)));
  REQUIRE(vfraud_multi_video_fraction(15, 3, &x) == VFRAUD_OK);
  CHECK(x == 1.0);
  CHECK(vfraud_multi_video_fraction(2, 3, &x) == VFRAUD_E_VALIDATION);
}
