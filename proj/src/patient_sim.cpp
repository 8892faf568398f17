#include "aid/patient_sim.hpp"

#include <algorithm>
#include <cmath>

namespace aid {

double carbs_absorbed(const Meal& meal, Timestamp from, Timestamp to) {
  const double begin = minutes_between(meal.at, from) - meal.delay_minutes;
  const double end = minutes_between(meal.at, to) - meal.delay_minutes;
  if (meal.absorption_minutes <= 0.0) {
    // Instant absorption at the onset time.
    return (begin <= 0.0 && end > 0.0) ? meal.grams : 0.0;
  }
  const double lo = std::clamp(begin, 0.0, meal.absorption_minutes);
  const double hi = std::clamp(end, 0.0, meal.absorption_minutes);
  return meal.grams * (hi - lo) / meal.absorption_minutes;
}

PatientModel step(const PatientModel& patient, std::span<const InsulinDelivery> deliveries,
                  const ActivationCurve& curve, Timestamp from, Timestamp to) {
  if (to <= from) throw ValidationError("step", "time step must be positive");
  PatientModel next = patient;
  const double hours = minutes_between(from, to) / 60.0;

  double grams = 0.0;
  for (const auto& m : patient.meals) grams += carbs_absorbed(m, from, to);

  const double insulin = activated_between(deliveries, patient.basal_reference, curve, from, to);
  const double delta = (patient.egp_rate - patient.insulin_sensitivity * patient.basal_reference) * hours +
                       patient.carb_factor * grams - patient.insulin_sensitivity * insulin;
  next.true_glucose = std::max(kPlantGlucoseFloor, patient.true_glucose + delta);
  return next;
}

GlucoseReading VirtualCgm::sample(Timestamp at, double true_glucose) {
  double v = true_glucose;
  if (noise_sd_ > 0.0) v += noise_sd_ * normal_(rng_);
  v = std::clamp(v, kSensorMinGlucose, kSensorMaxGlucose);
  v = std::round(v * 1e6) / 1e6;
  return GlucoseReading::ingest(at, v);
}

}  // namespace aid
