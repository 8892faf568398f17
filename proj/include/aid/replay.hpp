#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aid/event_log.hpp"
#include "aid/pump.hpp"

namespace aid {

// Rebuilds what the loop knew at each point of a log: the active settings,
// the pump program (replayed from accepted commands), and the CGM history.
class LogReplayer {
 public:
  // Applies one record. Returns a non-empty string describing why the record
  // is inconsistent with the reconstructed state, if it is.
  std::optional<std::string> apply(const EventRecord& record);

  const std::optional<SettingsRecord>& settings() const { return settings_; }
  const std::optional<VirtualPump>& pump() const { return pump_; }
  const std::vector<GlucoseReading>& readings() const { return readings_; }

  // Net IOB at `at` from the reconstructed delivery history. Requires
  // settings and a paired pump.
  double net_iob_at(Timestamp at);

 private:
  std::optional<SettingsRecord> settings_;
  std::optional<VirtualPump> pump_;
  std::vector<GlucoseReading> readings_;
};

struct Finding {
  std::int64_t seq = 0;
  std::string rule;
  std::string detail;
};

struct VerifyReport {
  std::size_t records_checked = 0;
  std::size_t loops_checked = 0;
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
};

inline constexpr double kIobTolerance = 1e-6;

// Sanity rules plus recomputation of every loop decision from strictly
// earlier records. Rules: seq-gap, timestamp-regression, cgm-range,
// max-rate, shutoff, mode, glucose, settings, net-iob, correction, rate,
// missing-context, pump-state.
VerifyReport verify_records(std::span<const EventRecord> records);

}  // namespace aid
