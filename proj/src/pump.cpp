#include "aid/pump.hpp"

#include <algorithm>
#include <cmath>

namespace aid {

double quantize_rate(double rate) {
  if (!(rate > 0.0)) return 0.0;
  // 2.05 / 0.05 evaluates just below 41.
  const double steps = std::floor(rate / kRateStep + 1e-9);
  return steps / 20.0;
}

const char* to_string(CommandStatus s) {
  switch (s) {
    case CommandStatus::accepted: return "accepted";
    case CommandStatus::disconnected: return "disconnected";
    case CommandStatus::over_max: return "over-max";
    case CommandStatus::negative_rate: return "negative-rate";
  }
  return "unknown";
}

VirtualPump::VirtualPump(double baseline_rate, double max_rate, Timestamp paired_at)
    : baseline_rate_(baseline_rate), max_rate_(max_rate), clock_(paired_at) {
  if (!(std::isfinite(baseline_rate) && baseline_rate >= 0.0)) {
    throw ValidationError("baseline_rate", "must be >= 0");
  }
  if (!(std::isfinite(max_rate) && max_rate >= baseline_rate)) {
    throw ValidationError("max_rate", "must be >= baseline_rate");
  }
}

CommandStatus VirtualPump::command_bolus(double units, Timestamp at) {
  if (!(std::isfinite(units) && units > 0.0)) throw ValidationError("units", "bolus must be > 0 U");
  if (!connected_) return CommandStatus::disconnected;
  advance(at);
  delivered_.push_back(InsulinDelivery::bolus(at, units));
  return CommandStatus::accepted;
}

CommandStatus VirtualPump::command_temp_rate(double rate, Seconds duration, Timestamp at) {
  if (duration.count() <= 0) throw ValidationError("duration", "temp duration must be > 0");
  if (!connected_) return CommandStatus::disconnected;
  if (!(rate >= 0.0)) return CommandStatus::negative_rate;
  if (rate > max_rate_) return CommandStatus::over_max;
  advance(at);
  active_temp_ = TempBasal{quantize_rate(rate), at, duration};
  return CommandStatus::accepted;
}

void VirtualPump::advance(Timestamp to) {
  if (to < clock_) throw ValidationError("time", "pump cannot advance backwards");
  while (clock_ < to) {
    if (active_temp_) {
      const Timestamp stop = std::min(active_temp_->ends(), to);
      delivered_.push_back(InsulinDelivery::basal_segment(clock_, active_temp_->rate, stop - clock_));
      clock_ = stop;
      if (stop == active_temp_->ends()) {
        expiries_.push_back(stop);
        active_temp_.reset();
      }
    } else {
      delivered_.push_back(InsulinDelivery::basal_segment(clock_, baseline_rate_, to - clock_));
      clock_ = to;
    }
  }
  // A temp that ends exactly at the clock has expired even if no time passed.
  if (active_temp_ && active_temp_->ends() <= clock_) {
    expiries_.push_back(active_temp_->ends());
    active_temp_.reset();
  }
}

double VirtualPump::effective_rate(Timestamp t) const {
  if (active_temp_ && t >= active_temp_->started && t < active_temp_->ends()) return active_temp_->rate;
  return baseline_rate_;
}

double delivered_units(std::span<const InsulinDelivery> deliveries, Timestamp from, Timestamp to) {
  double total = 0.0;
  for (const auto& d : deliveries) {
    if (d.kind == DeliveryKind::bolus) {
      if (d.start >= from && d.start < to) total += d.units;
      continue;
    }
    const Timestamp lo = std::max(d.start, from);
    const Timestamp hi = std::min(d.end(), to);
    if (hi > lo) total += d.rate * static_cast<double>((hi - lo).count()) / 3600.0;
  }
  return total;
}

}  // namespace aid
