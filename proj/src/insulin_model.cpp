#include "aid/insulin_model.hpp"

#include <algorithm>
#include <cmath>

namespace aid {

ActivationCurve::ActivationCurve(double peak_minutes, double duration_minutes)
    : peak_(peak_minutes), duration_(duration_minutes) {
  if (!(std::isfinite(peak_) && std::isfinite(duration_) && peak_ > 0.0 && peak_ < duration_ / 2.0)) {
    throw ValidationError("activation_curve", "requires 0 < peak_minutes < duration_minutes / 2");
  }
  tau_ = peak_ * (1.0 - peak_ / duration_) / (1.0 - 2.0 * peak_ / duration_);
  a_ = 2.0 * tau_ / duration_;
  scale_ = 1.0 / (1.0 - a_ + (1.0 + a_) * std::exp(-duration_ / tau_));
}

double ActivationCurve::activity(double t) const {
  if (t <= 0.0 || t >= duration_) return 0.0;
  return scale_ / (tau_ * tau_) * t * (1.0 - t / duration_) * std::exp(-t / tau_);
}

double ActivationCurve::remaining(double t) const {
  if (t <= 0.0) return 1.0;
  if (t >= duration_) return 0.0;
  const double inner = (t * t / (tau_ * duration_ * (1.0 - a_)) - t / tau_ - 1.0) * std::exp(-t / tau_) + 1.0;
  const double r = 1.0 - scale_ * (1.0 - a_) * inner;
  // Rounding can push the closed form a hair outside [0, 1] near the ends.
  return std::clamp(r, 0.0, 1.0);
}

namespace {

// True when every micro-dose of `d` is at least one curve duration old.
bool fully_absorbed(const InsulinDelivery& d, const ActivationCurve& curve, Timestamp now) {
  const Timestamp last_dose = d.kind == DeliveryKind::bolus ? d.start : d.end();
  return minutes_between(last_dose, now) >= curve.duration_minutes() + 1.0;
}

}  // namespace

double net_iob(std::span<const InsulinDelivery> history, double baseline_rate, const ActivationCurve& curve,
               Timestamp now) {
  double total = 0.0;
  for (const auto& d : history) {
    if (fully_absorbed(d, curve, now)) continue;
    for_each_micro_dose(d, baseline_rate, now, [&](Timestamp at, double units) {
      total += units * curve.remaining(minutes_between(at, now));
    });
  }
  return total;
}

double activated_between(std::span<const InsulinDelivery> history, double baseline_rate,
                         const ActivationCurve& curve, Timestamp from, Timestamp to) {
  double total = 0.0;
  for (const auto& d : history) {
    if (fully_absorbed(d, curve, from)) continue;
    for_each_micro_dose(d, baseline_rate, to, [&](Timestamp at, double units) {
      const double before = curve.remaining(minutes_between(at, from));
      const double after = curve.remaining(minutes_between(at, to));
      total += units * (before - after);
    });
  }
  return total;
}

}  // namespace aid
