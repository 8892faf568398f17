#include "aid/domain.hpp"

#include <cmath>

namespace aid {

GlucoseReading GlucoseReading::ingest(Timestamp at, double value) {
  if (!std::isfinite(value) || value < kSensorMinGlucose || value > kSensorMaxGlucose) {
    throw ValidationError("glucose", "reading " + std::to_string(value) + " outside sensor range [40, 400]");
  }
  return GlucoseReading{at, value};
}

std::optional<SettingsError> validate_settings(const TherapeuticSettings& s) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(s.baseline_basal_rate)) return SettingsError{"baseline_basal_rate", "must be > 0"};
  if (!positive(s.insulin_sensitivity)) return SettingsError{"insulin_sensitivity", "must be > 0"};
  if (!(std::isfinite(s.proportional_gain) && s.proportional_gain > 0.0 && s.proportional_gain <= 1.0)) {
    return SettingsError{"proportional_gain", "must be in (0, 1]"};
  }
  if (!positive(s.target_glucose)) return SettingsError{"target_glucose", "must be > 0"};
  if (!positive(s.shutoff_threshold)) return SettingsError{"shutoff_threshold", "must be > 0"};
  if (!positive(s.low_alert_threshold)) return SettingsError{"low_alert_threshold", "must be > 0"};
  if (!positive(s.high_alert_threshold) || s.high_alert_threshold <= s.low_alert_threshold) {
    return SettingsError{"high_alert_threshold", "must be > low_alert_threshold"};
  }
  if (!(std::isfinite(s.max_basal_multiplier) && s.max_basal_multiplier >= 1.0)) {
    return SettingsError{"max_basal_multiplier", "must be >= 1"};
  }
  if (s.temp_duration.count() <= 0) return SettingsError{"temp_duration", "must be > 0 minutes"};
  return std::nullopt;
}

void require_valid(const TherapeuticSettings& s) {
  if (auto err = validate_settings(s)) throw ValidationError(err->field, err->message);
}

InsulinDelivery InsulinDelivery::bolus(Timestamp at, double units) {
  if (!(std::isfinite(units) && units >= 0.0)) throw ValidationError("units", "bolus units must be >= 0");
  return InsulinDelivery{at, DeliveryKind::bolus, units, 0.0, Seconds{0}};
}

InsulinDelivery InsulinDelivery::basal_segment(Timestamp start, double rate, Seconds duration) {
  if (!(std::isfinite(rate) && rate >= 0.0)) throw ValidationError("rate", "basal rate must be >= 0");
  if (duration.count() <= 0) throw ValidationError("duration", "basal segment duration must be > 0");
  const double units = rate * static_cast<double>(duration.count()) / 3600.0;
  return InsulinDelivery{start, DeliveryKind::basal_segment, units, rate, duration};
}

const char* to_string(LoopMode m) { return m == LoopMode::normal ? "normal" : "shutoff"; }

const char* to_string(DeliveryKind k) { return k == DeliveryKind::bolus ? "bolus" : "basal-segment"; }

}  // namespace aid
