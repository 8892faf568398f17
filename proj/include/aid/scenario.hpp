#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aid/controller.hpp"
#include "aid/domain.hpp"
#include "aid/insulin_model.hpp"
#include "aid/metrics.hpp"
#include "aid/patient_sim.hpp"
#include "aid/watchdog.hpp"

namespace aid {

struct DisconnectWindow {
  Timestamp start;
  Timestamp end;
};

struct ScheduledBolus {
  Timestamp at;
  double units = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  Timestamp start;
  TherapeuticSettings settings;
  ActivationCurve curve;
  PatientModel patient;
  Seconds duration{std::chrono::hours{24}};
  Minutes cgm_period{5};
  std::vector<DisconnectWindow> disconnect_windows;
  std::vector<ScheduledBolus> boluses;  // manual doses, issued at tick times
  bool loop_enabled = true;
  bool watchdog_enabled = false;
  double low_treatment_grams = 15.0;  // eaten on each predicted-low alert
  double low_treatment_absorption_minutes = 15.0;
};

// Throws ValidationError naming the offending field.
void validate(const Scenario& s);

// JSON scenario document; see docs/scenario-format.md. Unknown keys are
// rejected. Numeric settings are rounded to the log's 1e-6 resolution so a
// logged snapshot reproduces the run exactly.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

struct TickTrace {
  Timestamp at;
  double true_glucose = 0.0;
  double cgm = 0.0;
  std::optional<LoopDecision> decision;
  double pump_rate = 0.0;  // effective rate right after this tick's commands
  bool connected = true;
  std::optional<Alert> alert;
};

struct RunResult {
  std::filesystem::path log_path;
  SummaryMetrics metrics;
  std::vector<TickTrace> trace;
  std::vector<GlucoseReading> readings;
  double initial_glucose = 0.0;
  double final_glucose = 0.0;  // plant glucose at the end of the run
  double peak_glucose = 0.0;   // max plant glucose over ticks
};

// Runs the closed loop at cgm_period ticks over the scenario duration,
// writing the event log to `log_path`. Per tick: cgm sample, loop decision,
// temp command, manual boluses, watchdog, pump advance, plant step.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& log_path);

}  // namespace aid
