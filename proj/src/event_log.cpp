#include "aid/event_log.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace aid {

using nlohmann::json;

const char* to_string(EventType t) {
  switch (t) {
    case EventType::cgm: return "cgm";
    case EventType::loop: return "loop";
    case EventType::pump: return "pump";
    case EventType::alert: return "alert";
    case EventType::settings: return "settings";
  }
  return "unknown";
}

const char* to_string(PumpEventKind k) {
  switch (k) {
    case PumpEventKind::pair: return "pair";
    case PumpEventKind::temp: return "temp";
    case PumpEventKind::bolus: return "bolus";
    case PumpEventKind::expiry: return "expiry";
    case PumpEventKind::link: return "link";
  }
  return "unknown";
}

PumpRecord PumpRecord::pair(double baseline_rate, double max_rate) {
  PumpRecord r;
  r.event = PumpEventKind::pair;
  r.rate = baseline_rate;
  r.max_rate = max_rate;
  r.effective_rate = baseline_rate;
  return r;
}

PumpRecord PumpRecord::temp(CommandStatus status, double rate, Minutes duration, double effective_rate) {
  PumpRecord r;
  r.event = PumpEventKind::temp;
  r.status = status;
  r.rate = rate;
  r.duration = duration;
  r.effective_rate = effective_rate;
  return r;
}

PumpRecord PumpRecord::bolus(CommandStatus status, double units) {
  PumpRecord r;
  r.event = PumpEventKind::bolus;
  r.status = status;
  r.units = units;
  return r;
}

PumpRecord PumpRecord::expiry(double effective_rate) {
  PumpRecord r;
  r.event = PumpEventKind::expiry;
  r.effective_rate = effective_rate;
  return r;
}

PumpRecord PumpRecord::link(bool connected) {
  PumpRecord r;
  r.event = PumpEventKind::link;
  r.connected = connected;
  return r;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw LogError("cannot serialize non-finite number");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

namespace {

// Emits a JSON object with keys in call order.
class ObjectWriter {
 public:
  ObjectWriter& key(std::string_view k) {
    out_ += first_ ? "{" : ",";
    first_ = false;
    out_ += '"';
    out_ += k;
    out_ += "\":";
    return *this;
  }
  ObjectWriter& num(std::string_view k, double v) {
    key(k);
    out_ += format_number(v);
    return *this;
  }
  ObjectWriter& integer(std::string_view k, long long v) {
    key(k);
    out_ += std::to_string(v);
    return *this;
  }
  ObjectWriter& str(std::string_view k, std::string_view v) {
    key(k);
    out_ += '"';
    for (char c : v) {
      if (c == '"' || c == '\\') out_ += '\\';
      out_ += c;
    }
    out_ += '"';
    return *this;
  }
  ObjectWriter& boolean(std::string_view k, bool v) {
    key(k);
    out_ += v ? "true" : "false";
    return *this;
  }
  ObjectWriter& raw(std::string_view k, const std::string& body) {
    key(k);
    out_ += body;
    return *this;
  }
  std::string finish() {
    out_ += first_ ? "{}" : "}";
    return std::move(out_);
  }

 private:
  std::string out_;
  bool first_ = true;
};

std::string settings_object(const TherapeuticSettings& s) {
  return ObjectWriter{}
      .num("baseline_basal_rate", s.baseline_basal_rate)
      .num("insulin_sensitivity", s.insulin_sensitivity)
      .num("target_glucose", s.target_glucose)
      .num("shutoff_threshold", s.shutoff_threshold)
      .num("low_alert_threshold", s.low_alert_threshold)
      .num("high_alert_threshold", s.high_alert_threshold)
      .num("max_basal_multiplier", s.max_basal_multiplier)
      .integer("temp_duration_minutes", s.temp_duration.count())
      .num("proportional_gain", s.proportional_gain)
      .finish();
}

std::string payload_object(const GlucoseReading& r) { return ObjectWriter{}.num("glucose", r.value).finish(); }

std::string payload_object(const LoopDecision& d) {
  return ObjectWriter{}
      .num("glucose", d.glucose)
      .num("net_iob", d.net_iob)
      .num("correction_units", d.correction_units)
      .num("commanded_rate", d.commanded_rate)
      .str("mode", to_string(d.mode))
      .raw("settings", settings_object(d.settings))
      .finish();
}

std::string payload_object(const PumpRecord& p) {
  ObjectWriter w;
  w.str("event", to_string(p.event));
  switch (p.event) {
    case PumpEventKind::pair:
      w.num("baseline_rate", p.rate).num("max_rate", p.max_rate);
      break;
    case PumpEventKind::temp:
      w.str("status", to_string(p.status))
          .num("rate", p.rate)
          .integer("duration_minutes", p.duration.count())
          .num("effective_rate", p.effective_rate);
      break;
    case PumpEventKind::bolus:
      w.str("status", to_string(p.status)).num("units", p.units);
      break;
    case PumpEventKind::expiry:
      w.num("effective_rate", p.effective_rate);
      break;
    case PumpEventKind::link:
      w.boolean("connected", p.connected);
      break;
  }
  return w.finish();
}

std::string payload_object(const Alert& a) {
  return ObjectWriter{}
      .str("kind", to_string(a.kind))
      .num("predicted_glucose", a.predicted_glucose)
      .integer("horizon_minutes", a.horizon.count())
      .finish();
}

std::string payload_object(const SettingsRecord& s) {
  const std::string curve = ObjectWriter{}
                                .num("peak_minutes", s.curve.peak_minutes())
                                .num("duration_minutes", s.curve.duration_minutes())
                                .finish();
  return ObjectWriter{}.raw("settings", settings_object(s.settings)).raw("curve", curve).finish();
}

// ---- parsing ----

struct Reader {
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw LogFormatError(line, what); }

  const json& field(const json& obj, const char* name) const {
    if (!obj.is_object()) fail("expected an object");
    auto it = obj.find(name);
    if (it == obj.end()) fail(std::string("missing field '") + name + "'");
    return *it;
  }
  double number(const json& obj, const char* name) const {
    const json& v = field(obj, name);
    if (!v.is_number()) fail(std::string("field '") + name + "' must be a number");
    return v.get<double>();
  }
  long long integer(const json& obj, const char* name) const {
    const json& v = field(obj, name);
    if (!v.is_number_integer()) fail(std::string("field '") + name + "' must be an integer");
    return v.get<long long>();
  }
  std::string text(const json& obj, const char* name) const {
    const json& v = field(obj, name);
    if (!v.is_string()) fail(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
  }
  bool boolean(const json& obj, const char* name) const {
    const json& v = field(obj, name);
    if (!v.is_boolean()) fail(std::string("field '") + name + "' must be a boolean");
    return v.get<bool>();
  }

  TherapeuticSettings settings(const json& o) const {
    TherapeuticSettings s;
    s.baseline_basal_rate = number(o, "baseline_basal_rate");
    s.insulin_sensitivity = number(o, "insulin_sensitivity");
    s.target_glucose = number(o, "target_glucose");
    s.shutoff_threshold = number(o, "shutoff_threshold");
    s.low_alert_threshold = number(o, "low_alert_threshold");
    s.high_alert_threshold = number(o, "high_alert_threshold");
    s.max_basal_multiplier = number(o, "max_basal_multiplier");
    s.temp_duration = Minutes{integer(o, "temp_duration_minutes")};
    s.proportional_gain = number(o, "proportional_gain");
    return s;
  }

  CommandStatus status(const json& o) const {
    const std::string s = text(o, "status");
    for (auto c : {CommandStatus::accepted, CommandStatus::disconnected, CommandStatus::over_max,
                   CommandStatus::negative_rate}) {
      if (s == to_string(c)) return c;
    }
    fail("unknown pump status '" + s + "'");
  }

  PumpRecord pump(const json& o) const {
    const std::string event = text(o, "event");
    if (event == "pair") return PumpRecord::pair(number(o, "baseline_rate"), number(o, "max_rate"));
    if (event == "temp") {
      return PumpRecord::temp(status(o), number(o, "rate"), Minutes{integer(o, "duration_minutes")},
                              number(o, "effective_rate"));
    }
    if (event == "bolus") return PumpRecord::bolus(status(o), number(o, "units"));
    if (event == "expiry") return PumpRecord::expiry(number(o, "effective_rate"));
    if (event == "link") return PumpRecord::link(boolean(o, "connected"));
    fail("unknown pump event '" + event + "'");
  }

  Payload payload(const std::string& type, const json& o, Timestamp at) const {
    if (!o.is_object()) fail("payload must be an object");
    if (type == "cgm") return GlucoseReading{at, number(o, "glucose")};
    if (type == "loop") {
      LoopDecision d;
      d.at = at;
      d.glucose = number(o, "glucose");
      d.net_iob = number(o, "net_iob");
      d.correction_units = number(o, "correction_units");
      d.commanded_rate = number(o, "commanded_rate");
      const std::string mode = text(o, "mode");
      if (mode == "normal") {
        d.mode = LoopMode::normal;
      } else if (mode == "shutoff") {
        d.mode = LoopMode::shutoff;
      } else {
        fail("unknown loop mode '" + mode + "'");
      }
      d.settings = settings(field(o, "settings"));
      return d;
    }
    if (type == "pump") return pump(o);
    if (type == "alert") {
      Alert a;
      a.at = at;
      const std::string kind = text(o, "kind");
      if (kind == "predicted-low") {
        a.kind = AlertKind::predicted_low;
      } else if (kind == "predicted-high") {
        a.kind = AlertKind::predicted_high;
      } else {
        fail("unknown alert kind '" + kind + "'");
      }
      a.predicted_glucose = number(o, "predicted_glucose");
      a.horizon = Minutes{integer(o, "horizon_minutes")};
      return a;
    }
    if (type == "settings") {
      const json& c = field(o, "curve");
      try {
        return SettingsRecord{settings(field(o, "settings")),
                              ActivationCurve(number(c, "peak_minutes"), number(c, "duration_minutes"))};
      } catch (const ValidationError& e) {
        fail(e.what());
      }
    }
    fail("unknown record type '" + type + "'");
  }
};

}  // namespace

std::string serialize(const EventRecord& record) {
  const std::string body = std::visit([](const auto& p) { return payload_object(p); }, record.payload);
  return ObjectWriter{}
      .integer("schema_version", kLogSchemaVersion)
      .integer("seq", record.seq)
      .str("at", format_utc(record.at))
      .str("type", to_string(record.type()))
      .raw("payload", body)
      .finish();
}

EventRecord parse_record(std::string_view line, std::size_t line_number) {
  const Reader r{line_number};
  json doc;
  try {
    doc = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    r.fail(std::string("malformed record: ") + e.what());
  }
  if (!doc.is_object()) r.fail("record must be an object");
  if (r.integer(doc, "schema_version") != kLogSchemaVersion) r.fail("unsupported schema_version");
  EventRecord rec;
  rec.seq = r.integer(doc, "seq");
  try {
    rec.at = parse_utc(r.text(doc, "at"));
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  rec.payload = r.payload(r.text(doc, "type"), r.field(doc, "payload"), rec.at);
  return rec;
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::out | std::ios::trunc | std::ios::binary) {
  if (!out_) throw LogError("cannot open log for writing: " + path.string());
}

std::int64_t EventLogWriter::append(Timestamp at, Payload payload) {
  if (last_at_ && at < *last_at_) {
    throw LogError("timestamp regression: " + format_utc(at) + " after " + format_utc(*last_at_));
  }
  EventRecord rec{next_seq_, at, std::move(payload)};
  const std::string line = serialize(rec);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw LogError("write failed: " + path_.string());
  last_at_ = at;
  return next_seq_++;
}

std::vector<EventRecord> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open log: " + path.string());
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<EventRecord> out;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < content.size()) {
    ++line_number;
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) throw LogFormatError(line_number, "truncated record (no line terminator)");
    const std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    out.push_back(parse_record(line, line_number));
  }
  return out;
}

std::vector<EventRecord> read_all(const std::filesystem::path& path) {
  auto records = read_lines(path);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto line = i + 1;
    if (records[i].seq != static_cast<std::int64_t>(i)) {
      throw LogFormatError(line, "seq " + std::to_string(records[i].seq) + " where " + std::to_string(i) +
                                     " was expected");
    }
    if (i > 0 && records[i].at < records[i - 1].at) throw LogFormatError(line, "timestamp regression");
  }
  return records;
}

}  // namespace aid
