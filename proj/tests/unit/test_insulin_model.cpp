#include <doctest.h>

#include <random>
#include <vector>

#include "aid/insulin_model.hpp"
#include "aid/time.hpp"
#include "oracles.hpp"

using namespace aid;
using namespace std::chrono_literals;

namespace {

const Timestamp t0 = parse_utc("2024-01-01T00:00:00Z");

}  // namespace

TEST_CASE("activation curve rejects parameters without a finite positive time constant") {
  CHECK_THROWS_AS(ActivationCurve(180.0, 360.0), ValidationError);
  CHECK_THROWS_AS(ActivationCurve(200.0, 360.0), ValidationError);
  CHECK_THROWS_AS(ActivationCurve(0.0, 360.0), ValidationError);
  CHECK_THROWS_AS(ActivationCurve(-5.0, 360.0), ValidationError);
  CHECK_NOTHROW(ActivationCurve(75.0, 300.0));
}

TEST_CASE("remaining fraction boundary values") {
  const ActivationCurve c;
  CHECK(iob_fraction(c, 0.0) == 1.0);
  CHECK(iob_fraction(c, 360.0) == 0.0);
  CHECK(iob_fraction(c, 1000.0) == 0.0);
  CHECK(activity_density(c, 360.0) == 0.0);
  CHECK(activity_density(c, 0.0) == 0.0);
}

TEST_CASE("remaining fraction at the peak matches the quadrature oracle") {
  // 1 - trapezoid integral of the density over [0, 65] at 0.1-minute steps.
  constexpr double kTrapezoidAt65 = 0.7064968085424268;
  const ActivationCurve c;
  CHECK(std::abs(iob_fraction(c, 65.0) - kTrapezoidAt65) < 1e-6);
}

TEST_CASE("activity density peaks at the configured peak time") {
  for (const auto& [peak, duration] : std::vector<std::pair<double, double>>{{65, 360}, {55, 360}, {75, 300}, {40, 180}}) {
    const ActivationCurve c(peak, duration);
    double best_t = 0.0, best = -1.0;
    for (int i = 0; i <= static_cast<int>(duration * 10); ++i) {
      const double t = i / 10.0;
      if (c.activity(t) > best) {
        best = c.activity(t);
        best_t = t;
      }
    }
    CHECK(std::abs(best_t - peak) <= 0.1 + 1e-9);
  }
}

TEST_CASE("closed form agrees with quadrature on the whole 1-minute grid") {
  for (const auto& [peak, duration] : std::vector<std::pair<double, double>>{{65, 360}, {55, 360}, {75, 480}}) {
    const ActivationCurve c(peak, duration);
    const auto cum = oracle::trapezoid_cumulative(c);
    CHECK(std::abs(cum.back() - 1.0) < 1e-6);
    double previous = 1.0;
    for (int m = 0; m <= static_cast<int>(duration); ++m) {
      const double r = c.remaining(m);
      CHECK(std::abs(r - (1.0 - cum[static_cast<std::size_t>(m) * 10])) < 1e-6);
      CHECK(r <= previous);
      previous = r;
    }
  }
}

TEST_CASE("net IOB accounting") {
  const ActivationCurve c;

  SUBCASE("empty history") { CHECK(net_iob({}, 1.0, c, t0) == 0.0); }

  SUBCASE("a bolus is fully absorbed after the curve duration") {
    const std::vector<InsulinDelivery> h{InsulinDelivery::bolus(t0, 1.0)};
    CHECK(net_iob(h, 1.0, c, t0) == 1.0);
    CHECK(net_iob(h, 1.0, c, t0 + 360min) == 0.0);
    CHECK(net_iob(h, 1.0, c, t0 + 600min) == 0.0);
  }

  SUBCASE("baseline-rate segments carry no net insulin") {
    std::vector<InsulinDelivery> h;
    for (int i = 0; i < 48; ++i) h.push_back(InsulinDelivery::basal_segment(t0 + i * 5min, 1.0, 5min));
    CHECK(net_iob(h, 1.0, c, t0 + 240min) == 0.0);
  }

  SUBCASE("suspension leaves a deficit equal to the micro-dose sum") {
    // 30 one-minute micro-doses of -1/60 U, summed with the trapezoid oracle
    // for the remaining fraction.
    constexpr double kSuspensionDeficit = -0.4836668988746521;
    const std::vector<InsulinDelivery> h{InsulinDelivery::basal_segment(t0, 0.0, 30min)};
    const double iob = net_iob(h, 1.0, c, t0 + 30min);
    CHECK(std::abs(iob - kSuspensionDeficit) < 1e-6);

    double brute = 0.0;
    for (int i = 0; i < 30; ++i) brute += (-1.0 / 60.0) * c.remaining(30.0 - i);
    CHECK(iob == doctest::Approx(brute).epsilon(1e-12));
    CHECK(iob < 0.0);
  }

  SUBCASE("a segment still running at the query time counts only what has been delivered") {
    const std::vector<InsulinDelivery> full{InsulinDelivery::basal_segment(t0, 3.0, 60min)};
    const std::vector<InsulinDelivery> half{InsulinDelivery::basal_segment(t0, 3.0, 30min)};
    CHECK(net_iob(full, 1.0, c, t0 + 30min) == net_iob(half, 1.0, c, t0 + 30min));
  }

  SUBCASE("future deliveries are ignored") {
    const std::vector<InsulinDelivery> h{InsulinDelivery::bolus(t0 + 10min, 2.0)};
    CHECK(net_iob(h, 1.0, c, t0) == 0.0);
  }
}

TEST_CASE("net IOB is additive over histories") {
  const ActivationCurve c;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rate(0.0, 4.0), units(0.05, 5.0);
  std::uniform_int_distribution<int> minute(0, 400), len(1, 45);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<InsulinDelivery> a, b, both;
    for (int i = 0; i < 6; ++i) {
      const auto d = (i % 3 == 0) ? InsulinDelivery::bolus(t0 + Minutes{minute(rng)}, units(rng))
                                  : InsulinDelivery::basal_segment(t0 + Minutes{minute(rng)}, rate(rng), Minutes{len(rng)});
      (i % 2 ? a : b).push_back(d);
    }
    both = a;
    both.insert(both.end(), b.begin(), b.end());
    const Timestamp now = t0 + Minutes{minute(rng) + 30};
    CHECK(net_iob(both, 1.0, c, now) == doctest::Approx(net_iob(a, 1.0, c, now) + net_iob(b, 1.0, c, now)).epsilon(1e-12));
  }
}

TEST_CASE("absorbed insulin over a window equals the drop in IOB plus what was delivered") {
  const ActivationCurve c;
  const std::vector<InsulinDelivery> h{InsulinDelivery::bolus(t0, 1.0),
                                       InsulinDelivery::basal_segment(t0 + 20min, 2.5, 30min)};
  const Timestamp from = t0 + 30min, to = t0 + 90min;
  // Deviation delivered inside (from, to]: 1.5 U/hr over the 20 minutes past `from`.
  const double delivered_inside = 1.5 * 20.0 / 60.0;
  const double expected = net_iob(h, 1.0, c, from) + delivered_inside - net_iob(h, 1.0, c, to);
  CHECK(activated_between(h, 1.0, c, from, to) == doctest::Approx(expected).epsilon(1e-12));

  // One unit eventually activates completely.
  const std::vector<InsulinDelivery> one{InsulinDelivery::bolus(t0, 1.0)};
  CHECK(activated_between(one, 1.0, c, t0, t0 + 360min) == doctest::Approx(1.0).epsilon(1e-12));
}
