#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "aid/event_log.hpp"
#include "aid/replay.hpp"
#include "aid/scenario.hpp"
#include "temp_dir.hpp"

using namespace aid;
using namespace std::chrono_literals;

namespace {

const Timestamp t0 = parse_utc("2024-03-01T08:00:00Z");

double six_decimals(double v) { return std::round(v * 1e6) / 1e6; }

TherapeuticSettings bob() {
  TherapeuticSettings s;
  s.baseline_basal_rate = 1.0;
  s.insulin_sensitivity = 42.0;
  return s;
}

Payload random_payload(std::mt19937_64& rng, Timestamp at) {
  std::uniform_real_distribution<double> g(40.0, 400.0), iob(-5.0, 10.0), rate(0.0, 4.0);
  std::uniform_int_distribution<int> pick(0, 8);
  auto s = bob();
  s.insulin_sensitivity = six_decimals(std::uniform_real_distribution<double>(10.0, 100.0)(rng));
  switch (pick(rng)) {
    case 0: return GlucoseReading{at, six_decimals(g(rng))};
    case 1: {
      const double glucose = six_decimals(g(rng));
      return LoopDecision{at, glucose, six_decimals(iob(rng)), six_decimals(iob(rng)), std::round(rate(rng) * 20) / 20,
                          glucose < 80 ? LoopMode::shutoff : LoopMode::normal, s};
    }
    case 2: return PumpRecord::temp(CommandStatus::accepted, 1.35, 30min, 1.35);
    case 3: return PumpRecord::temp(CommandStatus::over_max, 9.0, 30min, 1.0);
    case 4: return PumpRecord::bolus(CommandStatus::disconnected, six_decimals(rate(rng)));
    case 5: return PumpRecord::expiry(1.0);
    case 6: return PumpRecord::link(rng() % 2 == 0);
    case 7:
      return Alert{at, rng() % 2 ? AlertKind::predicted_low : AlertKind::predicted_high, six_decimals(g(rng)), 15min};
    default: return SettingsRecord{s, ActivationCurve(55.0, 360.0)};
  }
}

}  // namespace

TEST_CASE("serialized line layout") {
  const EventRecord r{3, t0, GlucoseReading{t0, 123.5}};
  CHECK(serialize(r) ==
        R"({"schema_version":1,"seq":3,"at":"2024-03-01T08:00:00Z","type":"cgm","payload":{"glucose":123.5}})");

  const EventRecord p{4, t0, PumpRecord::temp(CommandStatus::accepted, 2.0, 30min, 2.0)};
  CHECK(serialize(p) == R"({"schema_version":1,"seq":4,"at":"2024-03-01T08:00:00Z","type":"pump","payload":)"
                        R"({"event":"temp","status":"accepted","rate":2,"duration_minutes":30,"effective_rate":2}})");
}

TEST_CASE("number formatting") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0000001) == "0");
  CHECK(format_number(2.1234567) == "2.123457");
  CHECK(format_number(-0.4836669) == "-0.483667");
  CHECK_THROWS_AS(format_number(std::numeric_limits<double>::quiet_NaN()), LogError);
  CHECK_THROWS_AS(format_number(std::numeric_limits<double>::infinity()), LogError);
}

TEST_CASE("writer assigns gap-free sequence numbers from zero") {
  TempDir dir;
  const auto path = dir / "run.log";
  {
    EventLogWriter w(path);
    CHECK(w.append(t0, GlucoseReading{t0, 100.0}) == 0);
    for (int i = 1; i < 1000; ++i) {
      const Timestamp at = t0 + (i / 3) * 5min;
      CHECK(w.append(at, GlucoseReading{at, 100.0 + i % 7}) == i);
    }
  }
  const auto records = read_all(path);
  REQUIRE(records.size() == 1000);
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].seq == static_cast<std::int64_t>(i));
}

TEST_CASE("writer rejects timestamp regression and leaves the file intact") {
  TempDir dir;
  const auto path = dir / "run.log";
  EventLogWriter w(path);
  w.append(t0 + 5min, GlucoseReading{t0 + 5min, 100.0});
  const auto before = slurp(path);
  CHECK_THROWS_AS(w.append(t0, GlucoseReading{t0, 100.0}), LogError);
  CHECK(slurp(path) == before);
  CHECK(w.next_seq() == 1);
  // Equal timestamps are fine.
  CHECK(w.append(t0 + 5min, PumpRecord::expiry(1.0)) == 1);
}

TEST_CASE("non-finite values are never written") {
  TempDir dir;
  const auto path = dir / "run.log";
  EventLogWriter w(path);
  CHECK_THROWS_AS(w.append(t0, GlucoseReading{t0, std::nan("")}), LogError);
  CHECK(slurp(path).empty());
  CHECK(w.append(t0, GlucoseReading{t0, 100.0}) == 0);
}

TEST_CASE("round trip of random records at six-decimal precision") {
  std::mt19937_64 rng(42);
  Timestamp at = t0;
  for (int i = 0; i < 2000; ++i) {
    at += Seconds{static_cast<int>(rng() % 600)};
    const EventRecord r{i, at, random_payload(rng, at)};
    const std::string line = serialize(r);
    const EventRecord back = parse_record(line);
    CHECK(back == r);
    CHECK(serialize(back) == line);
  }
}

TEST_CASE("reader errors name the line") {
  TempDir dir;
  const auto path = dir / "run.log";
  const std::string good0 = serialize(EventRecord{0, t0, GlucoseReading{t0, 100.0}});
  const std::string good1 = serialize(EventRecord{1, t0 + 5min, GlucoseReading{t0 + 5min, 101.0}});

  SUBCASE("truncated final line") {
    spit(path, good0 + "\n" + good1.substr(0, good1.size() / 2));
    try {
      read_lines(path);
      FAIL("expected LogFormatError");
    } catch (const LogFormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("missing terminator on an otherwise complete line") {
    spit(path, good0 + "\n" + good1);
    CHECK_THROWS_AS(read_lines(path), LogFormatError);
  }
  SUBCASE("garbage") {
    spit(path, good0 + "\nnot json\n");
    try {
      read_lines(path);
      FAIL("expected LogFormatError");
    } catch (const LogFormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("wrong schema version") {
    std::string bad = good1;
    bad.replace(bad.find("\"schema_version\":1"), 18, "\"schema_version\":2");
    spit(path, good0 + "\n" + bad + "\n");
    CHECK_THROWS_AS(read_lines(path), LogFormatError);
  }
  SUBCASE("sequence gap is caught by the strict reader only") {
    const std::string good2 = serialize(EventRecord{2, t0 + 10min, GlucoseReading{t0 + 10min, 102.0}});
    spit(path, good0 + "\n" + good2 + "\n");
    CHECK(read_lines(path).size() == 2);
    CHECK_THROWS_AS(read_all(path), LogFormatError);
  }
  SUBCASE("the reading time is the record time") {
    std::string bad = good1;
    bad.replace(bad.find("08:05:00"), 8, "08:04:00");
    spit(path, good0 + "\n" + bad + "\n");
    CHECK(read_lines(path)[1].at == t0 + 4min);
  }
}

TEST_CASE("a simulated day replays cleanly") {
  TempDir dir;
  Scenario s;
  s.start = t0;
  s.settings = bob();
  s.patient.true_glucose = 160.0;
  s.patient.noise_sd = 8.0;
  s.patient.noise_seed = 9;
  s.patient.meals = {Meal{t0 + 4h, 60.0}};
  s.disconnect_windows = {DisconnectWindow{t0 + 10h, t0 + 11h}};
  s.boluses = {ScheduledBolus{t0 + 4h, 2.0}};
  s.watchdog_enabled = true;
  const auto result = run_scenario(s, dir / "day.log");
  const auto records = read_all(result.log_path);
  const auto report = verify_records(records);
  for (const auto& f : report.findings) MESSAGE("seq " << f.seq << " " << f.rule << ": " << f.detail);
  CHECK(report.ok());
  CHECK(report.loops_checked == 288);
}
