#include "aid/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "aid/event_log.hpp"
#include "aid/pump.hpp"

namespace aid {

using nlohmann::json;

void validate(const Scenario& s) {
  require_valid(s.settings);
  if (s.duration.count() <= 0) throw ValidationError("duration_hours", "must be > 0");
  if (s.cgm_period.count() <= 0) throw ValidationError("cgm_period_minutes", "must be > 0");
  const auto& p = s.patient;
  if (!(p.true_glucose >= kSensorMinGlucose && p.true_glucose <= kSensorMaxGlucose)) {
    throw ValidationError("patient.initial_glucose", "must be within [40, 400]");
  }
  if (!(std::isfinite(p.carb_factor) && p.carb_factor >= 0.0)) throw ValidationError("patient.carb_factor", "must be >= 0");
  if (!std::isfinite(p.egp_rate)) throw ValidationError("patient.egp_rate", "must be finite");
  if (!(std::isfinite(p.insulin_sensitivity) && p.insulin_sensitivity > 0.0)) {
    throw ValidationError("patient.insulin_sensitivity", "must be > 0");
  }
  if (!(std::isfinite(p.noise_sd) && p.noise_sd >= 0.0)) throw ValidationError("patient.noise_sd", "must be >= 0");
  for (const auto& m : p.meals) {
    if (!(m.grams >= 0.0 && m.absorption_minutes >= 0.0 && m.delay_minutes >= 0.0)) {
      throw ValidationError("patient.meals", "grams, absorption and delay must be >= 0");
    }
  }
  for (const auto& w : s.disconnect_windows) {
    if (w.end <= w.start) throw ValidationError("disconnect_windows", "end must be after start");
  }
  for (const auto& b : s.boluses) {
    if (!(b.units > 0.0)) throw ValidationError("boluses", "units must be > 0");
    if ((b.at - s.start) % s.cgm_period != Seconds{0} || b.at < s.start) {
      throw ValidationError("boluses", "bolus times must fall on cgm ticks");
    }
  }
  if (!(s.low_treatment_grams >= 0.0 && s.low_treatment_absorption_minutes >= 0.0)) {
    throw ValidationError("low_treatment_grams", "must be >= 0");
  }
}

namespace {

double at_log_precision(double v) { return std::round(v * 1e6) / 1e6; }

class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(path_.empty() ? "scenario" : path_, "must be an object");
  }

  // Every key must be consumed by the time this is called.
  void reject_unknown() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ValidationError(qualified(k), "unknown key");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ValidationError(qualified(key), "must be a number");
    return v->get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ValidationError(qualified(key), "must be a number");
    return v->get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ValidationError(qualified(key), "must be an integer");
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ValidationError(qualified(key), "must be true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError(qualified(key), "must be a string");
    return v->get<std::string>();
  }

  const json* array(const std::string& key) {
    const json* v = find(key);
    if (v && !v->is_array()) throw ValidationError(qualified(key), "must be an array");
    return v;
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Seconds minutes_to_seconds(double minutes, const std::string& field) {
  if (!std::isfinite(minutes)) throw ValidationError(field, "must be finite");
  return Seconds{std::llround(minutes * 60.0)};
}

TherapeuticSettings read_settings(const json* node) {
  TherapeuticSettings s;
  if (!node) return s;
  ObjectReader r(*node, "settings");
  s.baseline_basal_rate = at_log_precision(r.number("baseline_basal_rate", s.baseline_basal_rate));
  s.insulin_sensitivity = at_log_precision(r.number("insulin_sensitivity", s.insulin_sensitivity));
  s.target_glucose = at_log_precision(r.number("target_glucose", s.target_glucose));
  s.shutoff_threshold = at_log_precision(r.number("shutoff_threshold", s.shutoff_threshold));
  s.low_alert_threshold = at_log_precision(r.number("low_alert_threshold", s.low_alert_threshold));
  s.high_alert_threshold = at_log_precision(r.number("high_alert_threshold", s.high_alert_threshold));
  s.max_basal_multiplier = at_log_precision(r.number("max_basal_multiplier", s.max_basal_multiplier));
  s.temp_duration = Minutes{r.integer("temp_duration_minutes", s.temp_duration.count())};
  s.proportional_gain = at_log_precision(r.number("proportional_gain", s.proportional_gain));
  r.reject_unknown();
  return s;
}

Meal read_meal(Timestamp at, ObjectReader& r) {
  Meal m;
  m.at = at;
  m.grams = r.number("grams", 0.0);
  m.absorption_minutes = r.number("absorption_minutes", 120.0);
  m.delay_minutes = r.number("delay_minutes", 0.0);
  r.reject_unknown();
  return m;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario", std::string("not valid JSON: ") + e.what());
  }
  Scenario s;
  ObjectReader top(doc, "");
  s.name = top.text("name", s.name);
  try {
    s.start = parse_utc(top.text("start", "2024-01-01T00:00:00Z"));
  } catch (const std::invalid_argument& e) {
    throw ValidationError("start", e.what());
  }
  s.duration = minutes_to_seconds(top.number("duration_hours", 24.0) * 60.0, "duration_hours");
  s.cgm_period = Minutes{top.integer("cgm_period_minutes", 5)};
  s.settings = read_settings(top.find("settings"));

  if (const json* c = top.find("curve")) {
    ObjectReader r(*c, "curve");
    const double peak = r.number("peak_minutes", 65.0);
    const double duration = r.number("duration_minutes", 360.0);
    r.reject_unknown();
    s.curve = ActivationCurve(at_log_precision(peak), at_log_precision(duration));
  }

  auto& p = s.patient;
  p.basal_reference = s.settings.baseline_basal_rate;
  p.insulin_sensitivity = s.settings.insulin_sensitivity;
  p.egp_rate = p.basal_reference * p.insulin_sensitivity;
  if (const json* pn = top.find("patient")) {
    ObjectReader r(*pn, "patient");
    p.true_glucose = r.number("initial_glucose", p.true_glucose);
    p.carb_factor = r.number("carb_factor", p.carb_factor);
    p.insulin_sensitivity = r.number("insulin_sensitivity", p.insulin_sensitivity);
    p.egp_rate = r.optional_number("egp_rate").value_or(p.basal_reference * p.insulin_sensitivity);
    p.noise_seed = static_cast<std::uint64_t>(r.integer("noise_seed", 0));
    p.noise_sd = r.number("noise_sd", 0.0);
    if (const json* meals = r.array("meals")) {
      for (std::size_t i = 0; i < meals->size(); ++i) {
        const std::string path = "patient.meals[" + std::to_string(i) + "]";
        ObjectReader mr((*meals)[i], path);
        const Timestamp at = s.start + minutes_to_seconds(mr.number("at_minutes", 0.0), path + ".at_minutes");
        p.meals.push_back(read_meal(at, mr));
      }
    }
    if (const json* daily = r.array("daily_meals")) {
      const auto days = std::chrono::ceil<std::chrono::days>(s.duration).count();
      for (std::size_t i = 0; i < daily->size(); ++i) {
        const std::string path = "patient.daily_meals[" + std::to_string(i) + "]";
        ObjectReader mr((*daily)[i], path);
        const double minute = mr.number("minute_of_day", 0.0);
        if (!(minute >= 0.0 && minute < 1440.0)) throw ValidationError(path + ".minute_of_day", "must be in [0, 1440)");
        const Meal proto = read_meal(s.start, mr);
        for (long d = 0; d < days; ++d) {
          Meal m = proto;
          m.at = s.start + std::chrono::days{d} + minutes_to_seconds(minute, path);
          if (m.at < s.start + s.duration) p.meals.push_back(m);
        }
      }
      std::stable_sort(p.meals.begin(), p.meals.end(), [](const Meal& a, const Meal& b) { return a.at < b.at; });
    }
    r.reject_unknown();
  }

  if (const json* ws = top.array("disconnect_windows")) {
    for (std::size_t i = 0; i < ws->size(); ++i) {
      const std::string path = "disconnect_windows[" + std::to_string(i) + "]";
      ObjectReader r((*ws)[i], path);
      DisconnectWindow w;
      w.start = s.start + minutes_to_seconds(r.number("start_minutes", 0.0), path);
      w.end = s.start + minutes_to_seconds(r.number("end_minutes", 0.0), path);
      r.reject_unknown();
      s.disconnect_windows.push_back(w);
    }
  }
  if (const json* bs = top.array("boluses")) {
    for (std::size_t i = 0; i < bs->size(); ++i) {
      const std::string path = "boluses[" + std::to_string(i) + "]";
      ObjectReader r((*bs)[i], path);
      ScheduledBolus b;
      b.at = s.start + minutes_to_seconds(r.number("at_minutes", 0.0), path);
      b.units = at_log_precision(r.number("units", 0.0));
      r.reject_unknown();
      s.boluses.push_back(b);
    }
  }
  s.loop_enabled = top.boolean("loop_enabled", s.loop_enabled);
  s.watchdog_enabled = top.boolean("watchdog_enabled", s.watchdog_enabled);
  s.low_treatment_grams = top.number("low_treatment_grams", s.low_treatment_grams);
  s.low_treatment_absorption_minutes = top.number("low_treatment_absorption_minutes", s.low_treatment_absorption_minutes);
  top.reject_unknown();

  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("scenario", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

bool in_disconnect_window(const Scenario& s, Timestamp t) {
  return std::any_of(s.disconnect_windows.begin(), s.disconnect_windows.end(),
                     [&](const DisconnectWindow& w) { return t >= w.start && t < w.end; });
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& log_path) {
  validate(scenario);
  const auto& settings = scenario.settings;
  const auto& curve = scenario.curve;
  const Timestamp t0 = scenario.start;
  const Seconds period = scenario.cgm_period;
  const Seconds temp_duration = settings.temp_duration;

  EventLogWriter log(log_path);
  VirtualPump pump(settings.baseline_basal_rate, settings.max_rate(), t0);
  VirtualCgm cgm(scenario.patient.noise_seed, scenario.patient.noise_sd);
  Watchdog watchdog;
  ControllerState controller;
  PatientModel patient = scenario.patient;

  log.append(t0, SettingsRecord{settings, curve});
  log.append(t0, PumpRecord::pair(pump.baseline_rate(), pump.max_rate()));

  RunResult result;
  result.log_path = log_path;
  result.initial_glucose = patient.true_glucose;
  result.peak_glucose = patient.true_glucose;

  const auto ticks = scenario.duration / period;
  std::size_t logged_expiries = 0;
  for (std::int64_t k = 0; k < ticks; ++k) {
    const Timestamp now = t0 + k * period;
    TickTrace tick;
    tick.at = now;
    tick.true_glucose = patient.true_glucose;
    result.peak_glucose = std::max(result.peak_glucose, patient.true_glucose);

    const bool connected = !in_disconnect_window(scenario, now);
    if (connected != pump.connected()) {
      pump.set_connected(connected);
      log.append(now, PumpRecord::link(connected));
    }
    tick.connected = connected;

    const GlucoseReading reading = cgm.sample(now, patient.true_glucose);
    log.append(now, reading);
    result.readings.push_back(reading);
    tick.cgm = reading.value;

    if (scenario.loop_enabled) {
      const auto step_result = closed_loop_tick(controller, reading, pump.delivered(), settings, curve);
      if (step_result) {
        controller = step_result->state;
        const LoopDecision& d = step_result->decision;
        log.append(now, d);
        const CommandStatus status = pump.command_temp_rate(d.commanded_rate, temp_duration, now);
        log.append(now, PumpRecord::temp(status, d.commanded_rate, settings.temp_duration, pump.effective_rate(now)));
        tick.decision = d;
      }
    }

    for (const auto& b : scenario.boluses) {
      if (b.at != now) continue;
      const CommandStatus status = pump.command_bolus(b.units, now);
      log.append(now, PumpRecord::bolus(status, b.units));
    }
    tick.pump_rate = pump.effective_rate(now);

    if (scenario.watchdog_enabled) {
      if (auto alert = watchdog.evaluate(result.readings, pump.delivered(), settings, curve)) {
        log.append(now, *alert);
        tick.alert = alert;
        if (alert->kind == AlertKind::predicted_low && scenario.low_treatment_grams > 0.0) {
          patient.meals.push_back(Meal{now, scenario.low_treatment_grams, scenario.low_treatment_absorption_minutes, 0.0});
        }
      }
    }

    const Timestamp next = now + period;
    pump.advance(next);
    for (; logged_expiries < pump.expiries().size(); ++logged_expiries) {
      log.append(pump.expiries()[logged_expiries], PumpRecord::expiry(pump.baseline_rate()));
    }
    patient = step(patient, pump.delivered(), curve, now, next);
    result.trace.push_back(std::move(tick));
  }

  result.final_glucose = patient.true_glucose;
  result.peak_glucose = std::max(result.peak_glucose, patient.true_glucose);
  result.metrics = compute_metrics(result.readings);
  return result;
}

}  // namespace aid
