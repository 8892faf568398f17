#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aid/domain.hpp"
#include "aid/insulin_model.hpp"
#include "aid/pump.hpp"
#include "aid/watchdog.hpp"

namespace aid {

inline constexpr int kLogSchemaVersion = 1;

enum class EventType { cgm, loop, pump, alert, settings };

struct SettingsRecord {
  TherapeuticSettings settings;
  ActivationCurve curve;

  friend bool operator==(const SettingsRecord&, const SettingsRecord&) = default;
};

enum class PumpEventKind { pair, temp, bolus, expiry, link };

// Only the fields relevant to `event` are serialized:
//   pair:   rate (baseline), max_rate
//   temp:   status, rate, duration, effective_rate
//   bolus:  status, units
//   expiry: effective_rate
//   link:   connected
struct PumpRecord {
  PumpEventKind event = PumpEventKind::temp;
  CommandStatus status = CommandStatus::accepted;
  double rate = 0.0;
  double max_rate = 0.0;
  Minutes duration{0};
  double units = 0.0;
  double effective_rate = 0.0;
  bool connected = true;

  static PumpRecord pair(double baseline_rate, double max_rate);
  static PumpRecord temp(CommandStatus status, double rate, Minutes duration, double effective_rate);
  static PumpRecord bolus(CommandStatus status, double units);
  static PumpRecord expiry(double effective_rate);
  static PumpRecord link(bool connected);

  friend bool operator==(const PumpRecord&, const PumpRecord&) = default;
};

// The timestamp of a cgm/loop/alert payload always equals the record's `at`.
using Payload = std::variant<GlucoseReading, LoopDecision, PumpRecord, Alert, SettingsRecord>;

struct EventRecord {
  std::int64_t seq = 0;
  Timestamp at;
  Payload payload;

  EventType type() const { return static_cast<EventType>(payload.index()); }

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

const char* to_string(EventType t);
const char* to_string(PumpEventKind k);

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by readers; line numbers are 1-based.
class LogFormatError : public LogError {
 public:
  LogFormatError(std::size_t line, const std::string& what)
      : LogError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// One record as a single line of JSON, without the trailing newline. Throws
// LogError on non-finite numbers.
std::string serialize(const EventRecord& record);

// Inverse of serialize. Throws LogFormatError(line_number, ...).
EventRecord parse_record(std::string_view line, std::size_t line_number = 1);

// Numbers are written with at most six fractional digits.
std::string format_number(double v);

// Single-writer append-only log file. Each append writes and flushes one
// complete line before returning.
class EventLogWriter {
 public:
  // Creates or truncates `path`.
  explicit EventLogWriter(const std::filesystem::path& path);

  // Returns the assigned seq. Throws LogError on timestamp regression or
  // unserializable input; nothing is written in that case.
  std::int64_t append(Timestamp at, Payload payload);

  std::int64_t next_seq() const { return next_seq_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::int64_t next_seq_ = 0;
  std::optional<Timestamp> last_at_;
};

// Parses every line without checking cross-record invariants.
std::vector<EventRecord> read_lines(const std::filesystem::path& path);

// Parses and enforces: seq starts at 0 and is gap-free, timestamps never
// decrease.
std::vector<EventRecord> read_all(const std::filesystem::path& path);

}  // namespace aid
