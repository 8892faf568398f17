#pragma once

#include <algorithm>
#include <span>

#include "aid/domain.hpp"

namespace aid {

// Two-parameter exponential insulin activation curve.
//
// With peak tp and total duration td (minutes):
//   tau = tp (1 - tp/td) / (1 - 2 tp/td)
//   a   = 2 tau / td
//   K   = 1 / (1 - a + (1 + a) e^(-td/tau))
//   activity(t) = K / tau^2 * t (1 - t/td) e^(-t/tau)     for 0 <= t < td
// The activity density integrates to one over [0, td] and peaks at tp.
class ActivationCurve {
 public:
  // Requires 0 < peak < duration / 2; throws ValidationError otherwise.
  explicit ActivationCurve(double peak_minutes = 65.0, double duration_minutes = 360.0);

  double peak_minutes() const { return peak_; }
  double duration_minutes() const { return duration_; }

  // Fraction of a dose absorbed per minute, t minutes after the dose.
  double activity(double t) const;

  // Fraction of a dose not yet absorbed. 1 at t <= 0, 0 at t >= duration.
  double remaining(double t) const;

  friend bool operator==(const ActivationCurve& a, const ActivationCurve& b) {
    return a.peak_ == b.peak_ && a.duration_ == b.duration_;
  }

 private:
  double peak_;
  double duration_;
  double tau_;
  double a_;
  double scale_;
};

inline double activity_density(const ActivationCurve& curve, double minutes) {
  return curve.activity(minutes);
}

inline double iob_fraction(const ActivationCurve& curve, double minutes_since_dose) {
  return curve.remaining(minutes_since_dose);
}

// Basal segments are split into consecutive 60-second micro-doses, each
// placed at the start of its slice. A final partial slice carries the
// remainder. Only slices that have begun by `until` are visited, and a
// slice straddling `until` is truncated there. Each micro-dose amount is the
// deviation (rate - baseline) * slice_seconds / 3600; boluses are a single
// dose of their full units.
template <class Visit>
void for_each_micro_dose(const InsulinDelivery& d, double baseline_rate, Timestamp until, Visit&& visit) {
  if (d.start > until) return;
  if (d.kind == DeliveryKind::bolus) {
    visit(d.start, d.units);
    return;
  }
  const double deviation = d.rate - baseline_rate;
  if (deviation == 0.0) return;
  const Seconds span = std::min(d.duration, until - d.start);
  for (Seconds offset{0}; offset < span; offset += Seconds{60}) {
    const Seconds slice = std::min(Seconds{60}, span - offset);
    visit(d.start + offset, deviation * static_cast<double>(slice.count()) / 3600.0);
  }
}

// Insulin on board relative to the baseline basal rate: boluses count in
// full, basal segments count only their deviation from baseline. Negative
// after a suspension.
double net_iob(std::span<const InsulinDelivery> history, double baseline_rate, const ActivationCurve& curve,
               Timestamp now);

// Deviation insulin (same accounting as net_iob) absorbed during [from, to].
double activated_between(std::span<const InsulinDelivery> history, double baseline_rate,
                         const ActivationCurve& curve, Timestamp from, Timestamp to);

}  // namespace aid
