#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "aid/domain.hpp"
#include "aid/insulin_model.hpp"

namespace aid {

// Carbs absorbed uniformly over `absorption_minutes`, starting
// `delay_minutes` after `at`.
struct Meal {
  Timestamp at;
  double grams = 0.0;
  double absorption_minutes = 120.0;
  double delay_minutes = 0.0;
};

// Grams of `meal` absorbed during [from, to].
double carbs_absorbed(const Meal& meal, Timestamp from, Timestamp to);

inline constexpr double kPlantGlucoseFloor = 20.0;

// Linear additive glucose plant:
//
//   dG = (egp_rate - S * basal_reference) * dt_hours
//      + carb_factor * grams absorbed
//      - S * (deviation insulin absorbed, relative to basal_reference)
//
// basal_reference is the rate assumed to have run forever before the
// delivery history starts, so exact baseline delivery with
// egp_rate = S * basal_reference holds glucose constant.
struct PatientModel {
  double true_glucose = 90.0;
  double carb_factor = 3.0;          // mg/dl per gram
  double egp_rate = 42.0;            // mg/dl per hour
  double insulin_sensitivity = 42.0;  // mg/dl per U, physiological
  double basal_reference = 1.0;      // U/hr
  std::vector<Meal> meals;
  std::uint64_t noise_seed = 0;
  double noise_sd = 0.0;  // CGM sensor noise only
};

// Advances the plant over [from, to] given every delivery recorded so far.
PatientModel step(const PatientModel& patient, std::span<const InsulinDelivery> deliveries,
                  const ActivationCurve& curve, Timestamp from, Timestamp to);

// Seeded Gaussian sensor. Samples are clamped to the sensor range and
// rounded to the log's 1e-6 resolution.
class VirtualCgm {
 public:
  VirtualCgm(std::uint64_t seed, double noise_sd) : rng_(seed), noise_sd_(noise_sd) {}

  GlucoseReading sample(Timestamp at, double true_glucose);

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double noise_sd_;
};

}  // namespace aid
