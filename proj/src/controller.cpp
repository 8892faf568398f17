#include "aid/controller.hpp"

#include <algorithm>

#include "aid/pump.hpp"

namespace aid {

double raw_rate_for(double correction_units, const TherapeuticSettings& settings) {
  const double minutes = static_cast<double>(settings.temp_duration.count());
  return settings.baseline_basal_rate + correction_units * settings.proportional_gain * (60.0 / minutes);
}

LoopDecision decide(Timestamp at, double glucose, double net_iob, const TherapeuticSettings& settings) {
  LoopDecision d;
  d.at = at;
  d.glucose = glucose;
  d.net_iob = net_iob;
  d.settings = settings;
  d.correction_units = (glucose - settings.target_glucose) / settings.insulin_sensitivity - net_iob;
  if (glucose < settings.shutoff_threshold) {
    d.mode = LoopMode::shutoff;
    d.commanded_rate = 0.0;
    return d;
  }
  d.mode = LoopMode::normal;
  const double clamped = std::clamp(raw_rate_for(d.correction_units, settings), 0.0, settings.max_rate());
  d.commanded_rate = quantize_rate(clamped);
  return d;
}

std::optional<TickResult> closed_loop_tick(const ControllerState& state, const GlucoseReading& reading,
                                           std::span<const InsulinDelivery> history,
                                           const TherapeuticSettings& settings, const ActivationCurve& curve) {
  require_valid(settings);
  if (state.last_decision && reading.at <= state.last_decision->at) return std::nullopt;
  const double iob = net_iob(history, settings.baseline_basal_rate, curve, reading.at);
  TickResult out;
  out.decision = decide(reading.at, reading.value, iob, settings);
  out.state.mode = out.decision.mode;
  out.state.last_decision = out.decision;
  return out;
}

}  // namespace aid
