#include <doctest.h>

#include <random>
#include <vector>

#include "aid/watchdog.hpp"
#include "oracles.hpp"

using namespace aid;
using namespace std::chrono_literals;

namespace {

const Timestamp t0 = parse_utc("2024-03-01T08:00:00Z");

std::vector<GlucoseReading> series(std::initializer_list<double> values, Minutes spacing = 5min) {
  std::vector<GlucoseReading> out;
  int i = 0;
  for (double v : values) out.push_back(GlucoseReading{t0 + i++ * spacing, v});
  return out;
}

TherapeuticSettings bob() {
  TherapeuticSettings s;
  s.baseline_basal_rate = 1.0;
  s.insulin_sensitivity = 42.0;
  return s;
}

}  // namespace

TEST_CASE("prediction examples") {
  CHECK(*predict_glucose(series({100, 100, 100, 100}), 15min) == doctest::Approx(100.0));
  CHECK(*predict_glucose(series({85, 83, 81, 79, 77, 75}), 15min) == doctest::Approx(69.0).epsilon(1e-12));
  CHECK_FALSE(predict_glucose(series({85, 83}), 15min));
  CHECK_FALSE(predict_glucose({}, 15min));
}

TEST_CASE("only the last 30 minutes feed the regression") {
  // The first two points are outside the window and would flatten the line.
  const auto r = series({200, 200, 120, 118, 116, 114, 112, 110});
  CHECK(*predict_glucose(r, 15min) == doctest::Approx(104.0).epsilon(1e-12));

  // Sparse data: only two readings inside the window.
  const auto sparse = series({100, 98, 96}, 20min);
  CHECK_FALSE(predict_glucose(sparse, 15min));
}

TEST_CASE("least squares agrees with the summary-sum oracle on random data") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> value(40.0, 400.0);
  std::uniform_int_distribution<int> n(3, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x, y;
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
      x.push_back(-5.0 * (count - 1 - i));
      y.push_back(value(rng));
    }
    const LineFit fit = fit_line(x, y);
    const LineFit oracle = oracle::summary_sum_fit(x, y);
    CHECK(fit.slope == doctest::Approx(oracle.slope).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(oracle.intercept).epsilon(1e-9));
  }
}

TEST_CASE("collinear readings reproduce the line at the horizon") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> slope(-3.0, 3.0), base(100.0, 250.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = slope(rng), b = base(rng);
    std::vector<GlucoseReading> r;
    for (int i = 0; i < 6; ++i) r.push_back(GlucoseReading{t0 + i * 5min, b + m * 5.0 * i});
    const double expected = b + m * (25.0 + 15.0);
    CHECK(*predict_glucose(r, 15min) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("alert classification") {
  const auto s = bob();
  CHECK(classify(69.0, 0.0, s) == AlertKind::predicted_low);
  CHECK_FALSE(classify(70.0, 0.0, s));
  CHECK(classify(190.0, 0.0, s) == AlertKind::predicted_high);
  // 190 - 1 U * 42 = 148, no alert.
  CHECK_FALSE(classify(190.0, 1.0, s));
  // A deficit is never credited.
  CHECK(classify(190.0, -1.0, s) == AlertKind::predicted_high);
}

TEST_CASE("more insulin on board never creates a high alert") {
  const auto s = bob();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pred(70.0, 400.0), iob(-3.0, 6.0), extra(0.0, 3.0);
  for (int i = 0; i < 5000; ++i) {
    const double p = pred(rng), a = iob(rng), b = a + extra(rng);
    const bool high_a = classify(p, a, s) == AlertKind::predicted_high;
    const bool high_b = classify(p, b, s) == AlertKind::predicted_high;
    CHECK((high_a || !high_b));
  }
}

TEST_CASE("cooldown suppresses repeats and re-arms when the condition clears") {
  const auto s = bob();
  // Three-point window so each forecast is easy to follow by hand.
  Watchdog dog(WatchdogConfig{15min, 11min, 3, 30min});
  std::vector<GlucoseReading> r;
  std::vector<std::optional<Alert>> out;
  for (double v : {80.0, 78.0, 76.0, 74.0, 72.0, 110.0, 70.0, 66.0}) {
    r.push_back(GlucoseReading{t0 + static_cast<int>(r.size()) * 5min, v});
    out.push_back(dog.evaluate_with_iob(r, 0.0, s));
  }
  // 80, 78, 76 forecasts exactly 70: not low.
  CHECK_FALSE(out[2]);
  // 74 forecasts 68.
  REQUIRE(out[3]);
  CHECK(out[3]->kind == AlertKind::predicted_low);
  CHECK(out[3]->predicted_glucose == doctest::Approx(68.0));
  // Still low, inside the cooldown.
  CHECK_FALSE(out[4]);
  // The jump to 110 clears the condition; 72, 110, 70 is still clear.
  CHECK_FALSE(out[5]);
  CHECK_FALSE(out[6]);
  // Low again 20 minutes after the first alert: fires again.
  REQUIRE(out[7]);
  CHECK(out[7]->at - out[3]->at == 20min);
}

TEST_CASE("alerts repeat after the cooldown while the condition persists") {
  const auto s = bob();
  Watchdog dog;
  std::vector<GlucoseReading> r;
  std::vector<Timestamp> fired;
  for (int i = 0; i < 20; ++i) {
    r.push_back(GlucoseReading{t0 + i * 5min, 250.0 + i});
    if (auto a = dog.evaluate_with_iob(r, 0.0, s)) fired.push_back(a->at);
  }
  REQUIRE(fired.size() == 3);
  CHECK(fired[1] - fired[0] == 30min);
  CHECK(fired[2] - fired[1] == 30min);
}
