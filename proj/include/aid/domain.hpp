#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "aid/time.hpp"

namespace aid {

// CGM reporting range. Values outside are rejected at ingestion, never clamped.
inline constexpr double kSensorMinGlucose = 40.0;
inline constexpr double kSensorMaxGlucose = 400.0;

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct GlucoseReading {
  Timestamp at;
  double value = 0.0;  // mg/dl

  // Throws ValidationError if value is outside the sensor range or not finite.
  static GlucoseReading ingest(Timestamp at, double value);

  friend bool operator==(const GlucoseReading&, const GlucoseReading&) = default;
};

struct TherapeuticSettings {
  double baseline_basal_rate = 1.0;  // U/hr
  double insulin_sensitivity = 42.0;  // mg/dl per U
  double target_glucose = 90.0;
  double shutoff_threshold = 80.0;
  double low_alert_threshold = 70.0;
  double high_alert_threshold = 180.0;
  double max_basal_multiplier = 4.0;
  Minutes temp_duration{30};
  double proportional_gain = 0.5;

  double max_rate() const { return max_basal_multiplier * baseline_basal_rate; }

  friend bool operator==(const TherapeuticSettings&, const TherapeuticSettings&) = default;
};

struct SettingsError {
  std::string field;
  std::string message;
};

// Empty when every invariant holds; otherwise the first violated one.
std::optional<SettingsError> validate_settings(const TherapeuticSettings& s);

// Throws ValidationError naming the first violated invariant.
void require_valid(const TherapeuticSettings& s);

enum class DeliveryKind { bolus, basal_segment };

struct InsulinDelivery {
  Timestamp start;
  DeliveryKind kind = DeliveryKind::bolus;
  double units = 0.0;  // derived for basal segments
  double rate = 0.0;   // U/hr, basal segments only
  Seconds duration{0};  // basal segments only

  static InsulinDelivery bolus(Timestamp at, double units);
  static InsulinDelivery basal_segment(Timestamp start, double rate, Seconds duration);

  Timestamp end() const { return start + duration; }

  friend bool operator==(const InsulinDelivery&, const InsulinDelivery&) = default;
};

enum class LoopMode { normal, shutoff };

struct LoopDecision {
  Timestamp at;
  double glucose = 0.0;
  double net_iob = 0.0;
  double correction_units = 0.0;
  double commanded_rate = 0.0;  // quantized, what the pump is asked for
  LoopMode mode = LoopMode::normal;
  TherapeuticSettings settings;

  friend bool operator==(const LoopDecision&, const LoopDecision&) = default;
};

const char* to_string(LoopMode m);
const char* to_string(DeliveryKind k);

}  // namespace aid
