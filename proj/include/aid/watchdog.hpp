#pragma once

#include <optional>
#include <span>

#include "aid/domain.hpp"
#include "aid/insulin_model.hpp"

namespace aid {

enum class AlertKind { predicted_low, predicted_high };

const char* to_string(AlertKind k);

struct Alert {
  Timestamp at;
  AlertKind kind = AlertKind::predicted_low;
  double predicted_glucose = 0.0;
  Minutes horizon{15};

  friend bool operator==(const Alert&, const Alert&) = default;
};

struct WatchdogConfig {
  Minutes horizon{15};
  Minutes window{30};  // readings strictly newer than latest - window
  std::size_t min_points = 3;
  Minutes cooldown{30};
};

struct LineFit {
  double slope = 0.0;      // per x unit
  double intercept = 0.0;  // value at x = 0
};

// Ordinary least squares of y on x. Requires at least two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Linear-regression forecast `horizon` past the newest reading, using the
// readings inside the regression window. nullopt when fewer than
// `min_points` readings fall in the window. Readings must be time-ordered.
std::optional<double> predict_glucose(std::span<const GlucoseReading> readings, Minutes horizon,
                                      Minutes window = Minutes{30}, std::size_t min_points = 3);

// Threshold test without cooldown. Only positive IOB is credited against a
// high prediction, at full insulin sensitivity.
std::optional<AlertKind> classify(double predicted_glucose, double net_iob, const TherapeuticSettings& settings);

// Stateful evaluator: one alert per kind per cooldown window, re-armed as
// soon as one evaluation finds the condition cleared.
class Watchdog {
 public:
  explicit Watchdog(WatchdogConfig config = {}) : config_(config) {}

  std::optional<Alert> evaluate(std::span<const GlucoseReading> readings, std::span<const InsulinDelivery> history,
                                const TherapeuticSettings& settings, const ActivationCurve& curve);

  // Same decision given an already-computed net IOB.
  std::optional<Alert> evaluate_with_iob(std::span<const GlucoseReading> readings, double net_iob,
                                         const TherapeuticSettings& settings);

  const WatchdogConfig& config() const { return config_; }

 private:
  WatchdogConfig config_;
  std::optional<Timestamp> last_low_;
  std::optional<Timestamp> last_high_;
};

}  // namespace aid
