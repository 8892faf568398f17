#pragma once

#include <optional>
#include <span>
#include <vector>

#include "aid/domain.hpp"

namespace aid {

// Pump rate resolution in U/hr.
inline constexpr double kRateStep = 0.05;

// Rounds a rate down to the pump resolution. Negative input maps to zero.
double quantize_rate(double rate);

enum class CommandStatus {
  accepted,
  disconnected,   // never reached the pump; nothing changed
  over_max,       // refused by the pump's programmed maximum
  negative_rate,  // refused
};

const char* to_string(CommandStatus s);

struct TempBasal {
  double rate = 0.0;
  Timestamp started;
  Seconds duration{0};

  Timestamp ends() const { return started + duration; }

  friend bool operator==(const TempBasal&, const TempBasal&) = default;
};

// Omnipod-style pump: a programmed baseline, a hard maximum, and at most
// one temporary rate that expires back to baseline on its own. Insulin
// actually delivered is materialized into `delivered()` as time advances.
//
// Copies are independent snapshots.
class VirtualPump {
 public:
  VirtualPump(double baseline_rate, double max_rate, Timestamp paired_at);

  // Immediate dose. Throws ValidationError for units <= 0.
  CommandStatus command_bolus(double units, Timestamp at);

  // Cancels any active temp and starts a new one at `at`. The rate is
  // quantized before storage. Throws ValidationError for duration <= 0.
  CommandStatus command_temp_rate(double rate, Seconds duration, Timestamp at);

  // Delivers insulin up to `to` under the on-pump program. Throws
  // ValidationError if `to` is earlier than the pump clock.
  void advance(Timestamp to);

  void set_connected(bool connected) { connected_ = connected; }

  bool connected() const { return connected_; }
  double baseline_rate() const { return baseline_rate_; }
  double max_rate() const { return max_rate_; }
  Timestamp clock() const { return clock_; }
  const std::optional<TempBasal>& active_temp() const { return active_temp_; }

  // Rate in force at t. Meaningful for t >= clock() with no further commands.
  double effective_rate(Timestamp t) const;

  const std::vector<InsulinDelivery>& delivered() const { return delivered_; }

  // Times at which a temp ran to completion, in order.
  const std::vector<Timestamp>& expiries() const { return expiries_; }

 private:
  double baseline_rate_;
  double max_rate_;
  Timestamp clock_;
  bool connected_ = true;
  std::optional<TempBasal> active_temp_;
  std::vector<InsulinDelivery> delivered_;
  std::vector<Timestamp> expiries_;
};

// Insulin delivered in [from, to), summing boluses and basal segments
// clipped to the window.
double delivered_units(std::span<const InsulinDelivery> deliveries, Timestamp from, Timestamp to);

}  // namespace aid
