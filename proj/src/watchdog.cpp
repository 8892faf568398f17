#include "aid/watchdog.hpp"

#include <algorithm>
#include <vector>

namespace aid {

const char* to_string(AlertKind k) { return k == AlertKind::predicted_low ? "predicted-low" : "predicted-high"; }

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("regression", "need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    sxx += dx * dx;
    sxy += dx * (y[i] - mean_y);
  }
  if (sxx == 0.0) throw ValidationError("regression", "x values are all equal");
  const double slope = sxy / sxx;
  return LineFit{slope, mean_y - slope * mean_x};
}

std::optional<double> predict_glucose(std::span<const GlucoseReading> readings, Minutes horizon, Minutes window,
                                      std::size_t min_points) {
  if (readings.empty()) return std::nullopt;
  const Timestamp latest = readings.back().at;
  const Timestamp cutoff = latest - window;
  auto first = std::find_if(readings.begin(), readings.end(), [&](const GlucoseReading& r) { return r.at > cutoff; });
  const auto count = static_cast<std::size_t>(std::distance(first, readings.end()));
  if (count < std::max<std::size_t>(min_points, 2)) return std::nullopt;

  // x in minutes relative to the newest reading keeps the numbers small.
  std::vector<double> x, y;
  x.reserve(count);
  y.reserve(count);
  for (auto it = first; it != readings.end(); ++it) {
    x.push_back(minutes_between(latest, it->at));
    y.push_back(it->value);
  }
  const LineFit fit = fit_line(x, y);
  return fit.intercept + fit.slope * static_cast<double>(horizon.count());
}

std::optional<AlertKind> classify(double predicted_glucose, double net_iob, const TherapeuticSettings& settings) {
  if (predicted_glucose < settings.low_alert_threshold) return AlertKind::predicted_low;
  const double adjusted = predicted_glucose - std::max(net_iob, 0.0) * settings.insulin_sensitivity;
  if (adjusted > settings.high_alert_threshold) return AlertKind::predicted_high;
  return std::nullopt;
}

std::optional<Alert> Watchdog::evaluate(std::span<const GlucoseReading> readings,
                                        std::span<const InsulinDelivery> history,
                                        const TherapeuticSettings& settings, const ActivationCurve& curve) {
  if (readings.empty()) return std::nullopt;
  const double iob = net_iob(history, settings.baseline_basal_rate, curve, readings.back().at);
  return evaluate_with_iob(readings, iob, settings);
}

std::optional<Alert> Watchdog::evaluate_with_iob(std::span<const GlucoseReading> readings, double net_iob,
                                                 const TherapeuticSettings& settings) {
  const auto prediction = predict_glucose(readings, config_.horizon, config_.window, config_.min_points);
  if (!prediction) return std::nullopt;
  const Timestamp now = readings.back().at;
  const auto kind = classify(*prediction, net_iob, settings);

  auto fire = [&](std::optional<Timestamp>& last, AlertKind k) -> std::optional<Alert> {
    if (last && now - *last < config_.cooldown) return std::nullopt;
    last = now;
    return Alert{now, k, *prediction, config_.horizon};
  };

  if (kind != AlertKind::predicted_low) last_low_.reset();
  if (kind != AlertKind::predicted_high) last_high_.reset();
  if (kind == AlertKind::predicted_low) return fire(last_low_, AlertKind::predicted_low);
  if (kind == AlertKind::predicted_high) return fire(last_high_, AlertKind::predicted_high);
  return std::nullopt;
}

}  // namespace aid
