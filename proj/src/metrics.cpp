#include "vfraud/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vfraud/error.hpp"

namespace vfraud {

double false_negative_rate(std::int64_t counted, std::int64_t generated) {
  if (generated <= 0) fail(ErrorCode::UndefinedMetric, "R_FN undefined: no generated views");
  if (counted < 0) fail(ErrorCode::InvalidArgument, "counted views must be >= 0");
  return static_cast<double>(counted) / static_cast<double>(generated);
}

double false_positive_rate(std::int64_t counted, std::int64_t real_generated) {
  if (real_generated <= 0) fail(ErrorCode::UndefinedMetric, "R_FP undefined: no real views");
  if (counted < 0) fail(ErrorCode::InvalidArgument, "counted views must be >= 0");
  return std::max(0.0, 1.0 - static_cast<double>(counted) / static_cast<double>(real_generated));
}

double median(std::vector<double> v) {
  if (v.empty()) fail(ErrorCode::UndefinedMetric, "median of an empty series");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<double> MetricSeries::ratios() const {
  std::vector<double> out;
  out.reserve(days.size());
  for (const auto& d : days) {
    if (d.generated > 0) out.push_back(false_negative_rate(d.counted, d.generated));
  }
  return out;
}

double MetricSeries::mean() const {
  const auto r = ratios();
  if (r.empty()) fail(ErrorCode::UndefinedMetric, "series has no valid days");
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double MetricSeries::min() const {
  const auto r = ratios();
  if (r.empty()) fail(ErrorCode::UndefinedMetric, "series has no valid days");
  return *std::min_element(r.begin(), r.end());
}

double MetricSeries::max() const {
  const auto r = ratios();
  if (r.empty()) fail(ErrorCode::UndefinedMetric, "series has no valid days");
  return *std::max_element(r.begin(), r.end());
}

double daily_median_rfn(const MetricSeries& series) {
  const auto r = series.ratios();
  if (r.empty()) fail(ErrorCode::UndefinedMetric, "no day with generated views");
  return median(r);
}

double daily_median_rfn(std::span<const double> daily_ratios) {
  return median(std::vector<double>(daily_ratios.begin(), daily_ratios.end()));
}

RepeatAggregate aggregate_values(std::span<const double> m) {
  if (m.empty()) fail(ErrorCode::InvalidArgument, "aggregate over an empty list");
  RepeatAggregate a;
  a.avg = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
  a.min = *std::min_element(m.begin(), m.end());
  a.max = *std::max_element(m.begin(), m.end());
  return a;
}

RepeatAggregate aggregate_repeats(std::span<const MetricSeries> series) {
  if (series.empty()) fail(ErrorCode::InvalidArgument, "aggregate over an empty list");
  std::vector<double> m;
  m.reserve(series.size());
  for (const auto& s : series) m.push_back(daily_median_rfn(s));
  return aggregate_values(m);
}

FitResult fit_exponential_decay(std::vector<std::pair<double, double>> points) {
  if (points.size() < 5) fail(ErrorCode::Fit, "fit needs at least 5 points");
  std::sort(points.begin(), points.end());
  if (points.front().second < 0.99) fail(ErrorCode::Fit, "no plateau: the smallest W is already discounted");

  FitResult out;
  std::size_t i = 0;
  while (i < points.size() && points[i].second >= 0.99) out.threshold_est = points[i++].first;

  double sxy = 0.0, sxx = 0.0;
  std::vector<std::pair<double, double>> used;
  for (; i < points.size(); ++i) {
    const auto [w, r] = points[i];
    // R*W <= 1 is at most one counted view a day: the credit floor, not the curve
    if (!(r > 0.0) || r * w <= 1.0 + 1e-9) continue;
    const double n = w - out.threshold_est;
    const double y = std::log(r);
    sxy += n * y;
    sxx += n * n;
    used.emplace_back(n, y);
  }
  if (used.empty()) fail(ErrorCode::Fit, "no usable points beyond the threshold (all zero or at resolution)");

  out.rate_est = -sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [n, y] : used) {
    const double e = y + out.rate_est * n;
    ss_res += e * e;
    ss_tot += y * y;
  }
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  out.points_used = used.size();
  return out;
}

double linear_r_squared(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "x and y differ in length");
  if (x.size() < 2) fail(ErrorCode::UndefinedMetric, "linear fit needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) fail(ErrorCode::UndefinedMetric, "linear fit needs varying x");
  if (syy == 0.0) return 1.0;
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace vfraud
