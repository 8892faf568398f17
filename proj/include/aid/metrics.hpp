#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "aid/domain.hpp"

namespace aid {

// GMI(%) = 3.31 + 0.02392 * mean glucose (mg/dl).
inline constexpr double kGmiIntercept = 3.31;
inline constexpr double kGmiSlope = 0.02392;

inline double gmi_percent(double mean_glucose) { return kGmiIntercept + kGmiSlope * mean_glucose; }
inline double mean_for_gmi(double gmi) { return (gmi - kGmiIntercept) / kGmiSlope; }

struct DailyAverage {
  std::string date;  // YYYY-MM-DD, UTC
  double mean_glucose = 0.0;
  std::size_t samples = 0;
};

struct SummaryMetrics {
  std::size_t samples = 0;
  double mean_glucose = 0.0;
  double gmi_percent = 0.0;
  double min_glucose = 0.0;
  double max_glucose = 0.0;
  double tir_tight = 0.0;     // [70, 140]
  double tir_standard = 0.0;  // [70, 180]
  double pct_below_70 = 0.0;
  std::vector<DailyAverage> daily_averages;
};

// Sample-weighted statistics. Throws ValidationError on empty input.
SummaryMetrics compute_metrics(std::span<const GlucoseReading> readings);

struct RollingWindow {
  std::string date;  // last day of the window
  std::size_t days = 0;
  double mean_glucose = 0.0;
  double gmi_percent = 0.0;
  std::size_t samples = 0;
};

// Trailing windows of up to `window_days` calendar days ending on each day
// that has data; sample-weighted across the days in the window.
std::vector<RollingWindow> rolling_windows(std::span<const DailyAverage> daily, std::size_t window_days = 28);

// date,samples,daily_mean,rolling_days,rolling_mean,rolling_gmi
void write_daily_csv(std::ostream& out, const SummaryMetrics& m, std::size_t window_days = 28);

void write_summary_table(std::ostream& out, const SummaryMetrics& m);

}  // namespace aid
