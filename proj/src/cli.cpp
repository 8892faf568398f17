#include "aid/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "aid/event_log.hpp"
#include "aid/metrics.hpp"
#include "aid/replay.hpp"
#include "aid/scenario.hpp"

namespace aid::cli {

namespace fs = std::filesystem;

namespace {

struct Failure {
  int code;
  std::string message;
};

void require_readable(const std::string& path) {
  if (!fs::is_regular_file(path)) throw Failure{kValidation, "cannot read '" + path + "'"};
}

std::vector<GlucoseReading> cgm_readings(const std::vector<EventRecord>& records) {
  std::vector<GlucoseReading> out;
  for (const auto& r : records) {
    if (const auto* g = std::get_if<GlucoseReading>(&r.payload)) out.push_back(*g);
  }
  return out;
}

int simulate(const std::string& scenario_path, const std::string& log_path, std::optional<std::uint64_t> seed,
             bool quiet, std::ostream& out) {
  require_readable(scenario_path);
  if (fs::exists(log_path) && fs::equivalent(scenario_path, log_path)) {
    throw Failure{kValidation, "output log would overwrite the scenario file"};
  }
  Scenario s = load_scenario(scenario_path);
  if (seed) s.patient.noise_seed = *seed;
  const RunResult result = run_scenario(s, log_path);
  if (!quiet) {
    out << "scenario " << s.name << ": " << result.trace.size() << " ticks, log written to " << log_path << "\n";
    write_summary_table(out, result.metrics);
  }
  return kOk;
}

int metrics(const std::string& log_path, const std::string& csv_path, bool quiet, std::ostream& out) {
  require_readable(log_path);
  const auto records = read_all(log_path);
  const auto readings = cgm_readings(records);
  if (readings.empty()) throw Failure{kValidation, "log has no cgm records"};
  const SummaryMetrics m = compute_metrics(readings);
  if (!quiet) write_summary_table(out, m);
  if (!csv_path.empty()) {
    if (fs::exists(csv_path) && fs::equivalent(csv_path, log_path)) {
      throw Failure{kValidation, "csv output would overwrite the log"};
    }
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw Failure{kValidation, "cannot write '" + csv_path + "'"};
    write_daily_csv(csv, m);
  }
  return kOk;
}

int watchdog(const std::string& log_path, bool quiet, std::ostream& out) {
  require_readable(log_path);
  const auto records = read_all(log_path);
  LogReplayer replay;
  Watchdog dog;
  std::size_t reevaluated = 0, logged = 0;

  // Evaluate once every record of a tick has been applied, as the simulator does.
  std::optional<Timestamp> pending;
  auto evaluate = [&] {
    const Timestamp at = *pending;
    pending.reset();
    if (!replay.settings() || !replay.pump()) return;
    const double iob = replay.net_iob_at(at);
    auto alert = dog.evaluate_with_iob(replay.readings(), iob, replay.settings()->settings);
    if (!alert) return;
    ++reevaluated;
    if (quiet) return;
    out << format_utc(alert->at) << "  " << to_string(alert->kind) << "  predicted "
        << format_number(std::round(alert->predicted_glucose * 10.0) / 10.0) << " mg/dl in "
        << alert->horizon.count() << " min (net IOB " << format_number(std::round(iob * 1000.0) / 1000.0)
        << " U)\n";
  };

  for (const auto& rec : records) {
    if (pending && rec.at > *pending) evaluate();
    if (std::holds_alternative<Alert>(rec.payload)) ++logged;
    if (auto problem = replay.apply(rec)) {
      throw Failure{kValidation, "seq " + std::to_string(rec.seq) + ": " + *problem};
    }
    if (std::holds_alternative<GlucoseReading>(rec.payload)) pending = rec.at;
  }
  if (pending) evaluate();
  if (!quiet) out << reevaluated << " alerts re-evaluated, " << logged << " alerts in log\n";
  return kOk;
}

int verify(const std::string& log_path, bool quiet, std::ostream& out) {
  require_readable(log_path);
  // Lenient parse: seq and timestamp problems are reported per record.
  const auto records = read_lines(log_path);
  const VerifyReport report = verify_records(records);
  if (!quiet) {
    for (const auto& f : report.findings) out << "seq " << f.seq << ": " << f.rule << ": " << f.detail << "\n";
    out << report.records_checked << " records, " << report.loops_checked << " loop decisions checked, "
        << report.findings.size() << " findings\n";
  }
  return report.ok() ? kOk : kVerificationMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"closed-loop insulin delivery simulator and log tools", "aidctl"};
  app.require_subcommand(1);

  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "suppress standard output");

  std::string scenario_path, log_path, csv_path;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write its event log");
  sim->add_option("scenario", scenario_path, "scenario file")->required();
  sim->add_option("log", log_path, "output event log")->required();
  sim->add_option("--seed", seed, "override the scenario's noise seed");
  sim->add_flag("--quiet,-q", quiet);

  auto* met = app.add_subcommand("metrics", "glycemic summary of a log");
  met->add_option("log", log_path, "event log")->required();
  met->add_option("--csv", csv_path, "write daily and rolling averages as CSV");
  met->add_flag("--quiet,-q", quiet);

  auto* dog = app.add_subcommand("watchdog", "re-evaluate watchdog alerts offline");
  dog->add_option("log", log_path, "event log")->required();
  dog->add_flag("--quiet,-q", quiet);

  auto* ver = app.add_subcommand("verify", "sanity-check a log and recompute every loop decision");
  ver->add_option("log", log_path, "event log")->required();
  ver->add_flag("--quiet,-q", quiet);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "aidctl: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*sim) return simulate(scenario_path, log_path, seed, quiet, out);
    if (*met) return metrics(log_path, csv_path, quiet, out);
    if (*dog) return watchdog(log_path, quiet, out);
    if (*ver) return verify(log_path, quiet, out);
  } catch (const Failure& f) {
    err << "aidctl: " << f.message << "\n";
    return f.code;
  } catch (const ValidationError& e) {
    err << "aidctl: invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const LogError& e) {
    err << "aidctl: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "aidctl: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}

}  // namespace aid::cli
