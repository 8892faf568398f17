#include "aid/replay.hpp"

#include <algorithm>
#include <cmath>

#include "aid/controller.hpp"

namespace aid {

std::optional<std::string> LogReplayer::apply(const EventRecord& record) {
  if (const auto* s = std::get_if<SettingsRecord>(&record.payload)) {
    if (auto err = validate_settings(s->settings)) return "invalid settings: " + err->field + ": " + err->message;
    settings_ = *s;
    return std::nullopt;
  }
  if (const auto* r = std::get_if<GlucoseReading>(&record.payload)) {
    readings_.push_back(*r);
    return std::nullopt;
  }
  const auto* p = std::get_if<PumpRecord>(&record.payload);
  if (!p) return std::nullopt;

  if (p->event == PumpEventKind::pair) {
    try {
      pump_.emplace(p->rate, p->max_rate, record.at);
    } catch (const ValidationError& e) {
      return std::string("invalid pairing: ") + e.what();
    }
    return std::nullopt;
  }
  if (!pump_) return std::string("pump event before pairing");
  if (record.at < pump_->clock()) return std::string("pump event earlier than pump clock");

  switch (p->event) {
    case PumpEventKind::link:
      pump_->set_connected(p->connected);
      break;
    case PumpEventKind::temp: {
      if (p->status != CommandStatus::accepted) break;
      if (p->rate > pump_->max_rate()) return std::string("accepted temp above pump maximum");
      if (p->duration.count() <= 0) return std::string("temp with non-positive duration");
      if (pump_->command_temp_rate(p->rate, Seconds{p->duration}, record.at) != CommandStatus::accepted) {
        return std::string("logged as accepted but the pump would refuse it");
      }
      if (pump_->effective_rate(record.at) != p->effective_rate) return std::string("effective rate mismatch");
      break;
    }
    case PumpEventKind::bolus:
      if (p->status != CommandStatus::accepted) break;
      if (!(p->units > 0.0)) return std::string("bolus with non-positive units");
      if (pump_->command_bolus(p->units, record.at) != CommandStatus::accepted) {
        return std::string("logged as accepted but the pump would refuse it");
      }
      break;
    case PumpEventKind::expiry: {
      const auto before = pump_->expiries().size();
      pump_->advance(record.at);
      const auto& e = pump_->expiries();
      if (e.size() == before || e.back() != record.at) return std::string("expiry without a temp ending here");
      break;
    }
    case PumpEventKind::pair:
      break;
  }
  return std::nullopt;
}

double LogReplayer::net_iob_at(Timestamp at) {
  pump_->advance(at);
  return net_iob(pump_->delivered(), settings_->settings.baseline_basal_rate, settings_->curve, at);
}

namespace {

std::string describe(double logged, double recomputed) {
  return "logged " + format_number(logged) + ", recomputed " + format_number(recomputed);
}

}  // namespace

VerifyReport verify_records(std::span<const EventRecord> records) {
  VerifyReport report;
  LogReplayer replay;
  auto flag = [&](std::int64_t seq, std::string rule, std::string detail) {
    report.findings.push_back(Finding{seq, std::move(rule), std::move(detail)});
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const EventRecord& rec = records[i];
    ++report.records_checked;
    const std::int64_t expected_seq = i == 0 ? 0 : records[i - 1].seq + 1;
    if (rec.seq != expected_seq) {
      flag(rec.seq, "seq-gap", "expected seq " + std::to_string(expected_seq));
    }
    if (i > 0 && rec.at < records[i - 1].at) {
      flag(rec.seq, "timestamp-regression", format_utc(rec.at) + " after " + format_utc(records[i - 1].at));
      // Replaying out-of-order time would corrupt the reconstructed pump.
      continue;
    }

    if (const auto* cgm = std::get_if<GlucoseReading>(&rec.payload)) {
      if (!(cgm->value >= kSensorMinGlucose && cgm->value <= kSensorMaxGlucose)) {
        flag(rec.seq, "cgm-range", "value " + format_number(cgm->value));
      }
    }

    if (const auto* d = std::get_if<LoopDecision>(&rec.payload)) {
      ++report.loops_checked;
      const TherapeuticSettings& s = d->settings;
      if (d->commanded_rate < 0.0 || d->commanded_rate > s.max_rate() + 1e-9) {
        flag(rec.seq, "max-rate", "rate " + format_number(d->commanded_rate) + " outside [0, " +
                                      format_number(s.max_rate()) + "]");
      }
      if (d->glucose < s.shutoff_threshold && (d->commanded_rate != 0.0 || d->mode != LoopMode::shutoff)) {
        flag(rec.seq, "shutoff", "glucose " + format_number(d->glucose) + " below shutoff but insulin not stopped");
      } else if (d->glucose >= s.shutoff_threshold && d->mode == LoopMode::shutoff) {
        flag(rec.seq, "mode", "shutoff mode at glucose " + format_number(d->glucose));
      }

      if (!replay.settings() || !replay.pump()) {
        flag(rec.seq, "missing-context", "loop record without earlier settings and pump pairing");
        continue;
      }
      if (!(replay.settings()->settings == s)) {
        flag(rec.seq, "settings", "snapshot differs from the active settings record");
      }
      const auto& readings = replay.readings();
      if (readings.empty() || readings.back().at != rec.at || readings.back().value != d->glucose) {
        flag(rec.seq, "glucose", "no matching cgm reading at " + format_utc(rec.at));
      }

      if (rec.at < replay.pump()->clock()) {
        flag(rec.seq, "pump-state", "loop record earlier than the replayed pump clock");
        continue;
      }
      const double iob = replay.net_iob_at(rec.at);
      const LoopDecision expect = decide(rec.at, d->glucose, iob, replay.settings()->settings);
      if (std::abs(iob - d->net_iob) > kIobTolerance) flag(rec.seq, "net-iob", describe(d->net_iob, iob));
      if (std::abs(expect.correction_units - d->correction_units) > kIobTolerance) {
        flag(rec.seq, "correction", describe(d->correction_units, expect.correction_units));
      }
      if (expect.commanded_rate != d->commanded_rate) {
        flag(rec.seq, "rate", describe(d->commanded_rate, expect.commanded_rate));
      }
      continue;
    }

    const char* rule = rec.type() == EventType::settings ? "settings" : "pump-state";
    try {
      if (auto problem = replay.apply(rec)) flag(rec.seq, rule, *problem);
    } catch (const ValidationError& e) {
      flag(rec.seq, rule, e.what());
    }
  }
  return report;
}

}  // namespace aid
