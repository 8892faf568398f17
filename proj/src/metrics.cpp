#include "aid/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>

namespace aid {

SummaryMetrics compute_metrics(std::span<const GlucoseReading> readings) {
  if (readings.empty()) throw ValidationError("readings", "metrics need at least one reading");
  SummaryMetrics m;
  m.samples = readings.size();
  m.min_glucose = readings.front().value;
  m.max_glucose = readings.front().value;
  double sum = 0.0;
  std::size_t tight = 0, standard = 0, low = 0;
  for (const auto& r : readings) {
    sum += r.value;
    m.min_glucose = std::min(m.min_glucose, r.value);
    m.max_glucose = std::max(m.max_glucose, r.value);
    if (r.value >= 70.0 && r.value <= 140.0) ++tight;
    if (r.value >= 70.0 && r.value <= 180.0) ++standard;
    if (r.value < 70.0) ++low;

    const std::string date = format_utc_date(r.at);
    if (m.daily_averages.empty() || m.daily_averages.back().date != date) {
      m.daily_averages.push_back(DailyAverage{date, 0.0, 0});
    }
    auto& day = m.daily_averages.back();
    day.mean_glucose += r.value;  // running sum until the pass ends
    ++day.samples;
  }
  for (auto& day : m.daily_averages) day.mean_glucose /= static_cast<double>(day.samples);

  const double n = static_cast<double>(m.samples);
  m.mean_glucose = sum / n;
  m.gmi_percent = gmi_percent(m.mean_glucose);
  m.tir_tight = static_cast<double>(tight) / n;
  m.tir_standard = static_cast<double>(standard) / n;
  m.pct_below_70 = static_cast<double>(low) / n;
  return m;
}

std::vector<RollingWindow> rolling_windows(std::span<const DailyAverage> daily, std::size_t window_days) {
  using namespace std::chrono;
  std::vector<RollingWindow> out;
  const auto day_number = [](const std::string& date) {
    return floor<days>(parse_utc(date + "T00:00:00Z")).time_since_epoch().count();
  };
  for (std::size_t i = 0; i < daily.size(); ++i) {
    const auto last = day_number(daily[i].date);
    double sum = 0.0;
    std::size_t samples = 0, days_used = 0;
    for (std::size_t j = i + 1; j-- > 0;) {
      if (last - day_number(daily[j].date) >= static_cast<long>(window_days)) break;
      sum += daily[j].mean_glucose * static_cast<double>(daily[j].samples);
      samples += daily[j].samples;
      ++days_used;
    }
    const double mean = sum / static_cast<double>(samples);
    out.push_back(RollingWindow{daily[i].date, days_used, mean, gmi_percent(mean), samples});
  }
  return out;
}

void write_daily_csv(std::ostream& out, const SummaryMetrics& m, std::size_t window_days) {
  out << "date,samples,daily_mean,rolling_days,rolling_mean,rolling_gmi\n";
  const auto rolling = rolling_windows(m.daily_averages, window_days);
  char buf[160];
  for (std::size_t i = 0; i < m.daily_averages.size(); ++i) {
    const auto& d = m.daily_averages[i];
    const auto& r = rolling[i];
    std::snprintf(buf, sizeof buf, "%s,%zu,%.3f,%zu,%.3f,%.3f\n", d.date.c_str(), d.samples, d.mean_glucose, r.days,
                  r.mean_glucose, r.gmi_percent);
    out << buf;
  }
}

void write_summary_table(std::ostream& out, const SummaryMetrics& m) {
  char buf[128];
  const auto row = [&](const char* name, const char* fmt, double v) {
    char value[48];
    std::snprintf(value, sizeof value, fmt, v);
    std::snprintf(buf, sizeof buf, "%-22s %12s\n", name, value);
    out << buf;
  };
  row("samples", "%.0f", static_cast<double>(m.samples));
  row("mean glucose (mg/dl)", "%.1f", m.mean_glucose);
  row("GMI (%)", "%.2f", m.gmi_percent);
  row("min glucose (mg/dl)", "%.1f", m.min_glucose);
  row("max glucose (mg/dl)", "%.1f", m.max_glucose);
  row("TIR 70-140 (%)", "%.1f", 100.0 * m.tir_tight);
  row("TIR 70-180 (%)", "%.1f", 100.0 * m.tir_standard);
  row("below 70 (%)", "%.1f", 100.0 * m.pct_below_70);
}

}  // namespace aid
