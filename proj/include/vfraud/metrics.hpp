#pragma once

// Detection metrics over generated-vs-counted view tallies, and the
// exponential-decay fit of a rate sweep.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace vfraud {

/// counted / generated. Throws UndefinedMetric when generated == 0.
double false_negative_rate(std::int64_t counted, std::int64_t generated);

/// 1 - counted / real_generated, clamped at 0. Throws UndefinedMetric when
/// real_generated == 0.
double false_positive_rate(std::int64_t counted, std::int64_t real_generated);

/// Median with the midpoint convention for even sizes. Throws
/// UndefinedMetric on empty input.
double median(std::vector<double> values);

struct DayTally {
  std::int64_t day = 0;
  std::int64_t generated = 0;
  std::int64_t counted = 0;

  bool operator==(const DayTally&) const = default;
};

struct MetricSeries {
  std::vector<DayTally> days;

  /// Per-day counted/generated over days with generated > 0.
  std::vector<double> ratios() const;
  double mean() const;
  double min() const;
  double max() const;
};

/// Median over the daily ratios. Throws UndefinedMetric if no day has
/// generated views.
double daily_median_rfn(const MetricSeries& series);
double daily_median_rfn(std::span<const double> daily_ratios);

struct RepeatAggregate {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// (avg, min, max) over the per-series medians. Throws InvalidArgument on
/// an empty list.
RepeatAggregate aggregate_repeats(std::span<const MetricSeries> series);
RepeatAggregate aggregate_values(std::span<const double> medians);

struct FitResult {
  double threshold_est = 0.0;
  double rate_est = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;  // post-threshold points entering the fit
};

/// Fits R(W) = 1 for W <= T, exp(-k (W - T)) beyond.
///
/// T is the largest W of the leading run of points with R >= 0.99 (points
/// sorted by W). k is the least-squares slope of ln R against (W - T)
/// through the origin, over post-threshold points with R > 0 and R * W > 1
/// (a point at or under one counted view per day only reflects the count
/// resolution). r_squared is the uncentered coefficient of the log-domain
/// fit. Throws Fit with fewer than 5 points, without a plateau, or without
/// usable post-threshold points.
FitResult fit_exponential_decay(std::vector<std::pair<double, double>> points);

/// Coefficient of determination of the least-squares line y = a + b x.
/// Throws UndefinedMetric for fewer than 2 points or constant x.
double linear_r_squared(std::span<const double> x, std::span<const double> y);

}  // namespace vfraud
