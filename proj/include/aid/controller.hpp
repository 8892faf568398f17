#pragma once

#include <optional>
#include <span>

#include "aid/domain.hpp"
#include "aid/insulin_model.hpp"

namespace aid {

struct ControllerState {
  LoopMode mode = LoopMode::normal;
  std::optional<LoopDecision> last_decision;
};

struct TickResult {
  ControllerState state;
  LoopDecision decision;
};

// Proportional dosing step given glucose and net IOB at time `at`.
//
//   correction = (glucose - target) / sensitivity - net_iob
//   rate       = clamp(B + correction * Kp * 60 / temp_minutes, 0, multiplier * B)
//
// then quantized to pump resolution. Below the shutoff threshold the rate is
// zero regardless of the correction. The correction is logged either way.
LoopDecision decide(Timestamp at, double glucose, double net_iob, const TherapeuticSettings& settings);

// Unquantized, unclamped rate for a correction. Exposed for tests.
double raw_rate_for(double correction_units, const TherapeuticSettings& settings);

// One loop iteration. Returns nullopt when the reading is not newer than the
// last processed one. Throws ValidationError on invalid settings.
std::optional<TickResult> closed_loop_tick(const ControllerState& state, const GlucoseReading& reading,
                                           std::span<const InsulinDelivery> history,
                                           const TherapeuticSettings& settings, const ActivationCurve& curve);

}  // namespace aid
