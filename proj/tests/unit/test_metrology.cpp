#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oament/errors.hpp"
#include "oament/metrology.hpp"

using namespace oament;
using namespace oament::metrology;

namespace {
constexpr double deg = std::numbers::pi / 180.0;
}

TEST_CASE("shot-noise sensitivity examples") {
  SensingConfig pol{1, true, 0.98, 3300000};
  CHECK(angular_sensitivity(pol) == doctest::Approx(2.79e-4).epsilon(0.005));
  CHECK(angular_sensitivity(pol) / deg == doctest::Approx(0.0160).epsilon(0.01));
  SensingConfig oam{300, false, 1.0, 100};
  CHECK(angular_sensitivity(oam) == doctest::Approx(1.0 / 6000.0));
  CHECK(angular_sensitivity(oam) / deg <= 0.016);
  CHECK(angular_sensitivity({1, false, 1.0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("polarization flag forces l = 1") {
  SensingConfig a{300, true, 0.9, 1000};
  SensingConfig b{1, false, 0.9, 1000};
  CHECK(angular_sensitivity(a) == angular_sensitivity(b));
}

TEST_CASE("power laws hold exactly") {
  for (int l : {1, 7, 100})
    for (double v : {0.5, 0.98}) {
      const SensingConfig base{l, false, v, 400};
      const double d = angular_sensitivity(base);
      CHECK(angular_sensitivity({3 * l, false, v, 400}) == doctest::Approx(d / 3).epsilon(1e-14));
      CHECK(angular_sensitivity({l, false, v / 2, 400}) == doctest::Approx(2 * d).epsilon(1e-14));
      CHECK(angular_sensitivity({l, false, v, 1600}) == doctest::Approx(d / 2).epsilon(1e-14));
    }
  CHECK(angular_sensitivity({300, false, 0.9, 50}) / angular_sensitivity({1, false, 0.9, 50}) ==
        doctest::Approx(1.0 / 300).epsilon(1e-14));
}

TEST_CASE("sensitivity strictly decreases in l, V and N") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> ul(1, 500);
  std::uniform_real_distribution<double> uv(0.01, 0.99);
  std::uniform_int_distribution<std::int64_t> un(1, 1000000);
  for (int i = 0; i < 500; ++i) {
    const SensingConfig c{ul(rng), false, uv(rng), un(rng)};
    const double d = angular_sensitivity(c);
    CHECK(angular_sensitivity({c.l + 1, false, c.visibility, c.pairs}) < d);
    CHECK(angular_sensitivity({c.l, false, c.visibility + 0.01, c.pairs}) < d);
    CHECK(angular_sensitivity({c.l, false, c.visibility, c.pairs + 1}) < d);
  }
}

TEST_CASE("required pairs") {
  const auto n = required_pairs(0.016 * deg, 1, 0.98);
  CHECK(n >= 3100000);
  CHECK(n <= 3600000);
  CHECK(static_cast<double>(n) == doctest::Approx(3.3e6).epsilon(0.05));
  const auto n300 = required_pairs(0.016 * deg, 300, 0.98);
  CHECK(n300 <= 100);
  CHECK(n300 == 38);
  CHECK_THROWS_AS(required_pairs(0.0, 1, 1.0), ValidationError);
  CHECK_THROWS_AS(required_pairs(1e-3, 0, 1.0), ValidationError);
  CHECK_THROWS_AS(required_pairs(1e-3, 1, 0.0), ValidationError);
}

TEST_CASE("required pairs inverts the sensitivity") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ul(1, 400);
  std::uniform_real_distribution<double> uv(0.05, 1.0);
  std::uniform_int_distribution<std::int64_t> un(1, 10000000);
  for (int i = 0; i < 1000; ++i) {
    const SensingConfig c{ul(rng), false, uv(rng), un(rng)};
    const auto back = required_pairs(angular_sensitivity(c), c.l, c.visibility);
    CHECK((back == c.pairs || back == c.pairs + 1));
  }
}

TEST_CASE("enhancement factor") {
  CHECK(enhancement_factor(1) == 1.0);
  CHECK(enhancement_factor(300) == doctest::Approx(300.0));
  CHECK(enhancement_factor(100) == doctest::Approx(100.0));
  CHECK_THROWS_AS(enhancement_factor(0), ValidationError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(angular_sensitivity({0, false, 1.0, 1}), ValidationError);
  CHECK_THROWS_AS(angular_sensitivity({1, false, 1.1, 1}), ValidationError);
  CHECK_THROWS_AS(angular_sensitivity({1, false, 1.0, 0}), ValidationError);
}

TEST_CASE("noiseless counts invert to the true angle") {
  for (int l : {1, 10, 300}) {
    const SensingConfig c{l, false, 0.95, 1000};
    const double band = 22.5 / l;
    for (double g : {-0.9 * band, -0.1 * band, 0.0, 0.37 * band, band}) {
      const double counts = expected_counts(g * deg, c);
      const auto e = estimate_angle(counts, 1000.0, c);
      CHECK(std::abs(e.angle_rad - g * deg) < 1e-9);
    }
    // at the steepest point the propagated error is the shot-noise sensitivity
    CHECK(estimate_angle(1000.0, 1000.0, c).sigma_rad == doctest::Approx(angular_sensitivity(c)).epsilon(1e-12));
  }
}

TEST_CASE("counts outside the fringe band are rejected") {
  const SensingConfig c{10, false, 0.5, 100};
  CHECK_THROWS_AS(estimate_angle(200.0, 100.0, c), OutOfRangeError);
  CHECK_THROWS_AS(estimate_angle(10.0, 100.0, c), OutOfRangeError);
  CHECK_NOTHROW(estimate_angle(150.0, 100.0, c));
  CHECK_THROWS_AS(estimate_angle(50.0, 0.0, c), ValidationError);
}

TEST_CASE("Monte-Carlo estimator is unbiased and matches the shot-noise law") {
  const SensingConfig c{300, false, 0.95, 100};
  const auto trials = simulate_angle_trials(c, 1000, 17);
  const auto s = summarize(trials);
  const double predicted = angular_sensitivity(c) / deg;
  CHECK(s.trials == 1000);
  CHECK(s.out_of_range == 0);
  CHECK(std::abs(s.mean_error_deg) < 0.2 * predicted);
  CHECK(s.std_error_deg == doctest::Approx(predicted).epsilon(0.3));
}

TEST_CASE("Monte-Carlo trials are deterministic and follow the requested angles") {
  const SensingConfig c{10, false, 0.9, 5000};
  const auto a = simulate_angle_trials(c, 50, 3, 1.0);
  const auto b = simulate_angle_trials(c, 50, 3, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].true_angle_deg == b[i].true_angle_deg);
    CHECK(a[i].estimate_deg == b[i].estimate_deg);
    CHECK(std::abs(a[i].true_angle_deg) <= 1.0);
  }
  const auto fixed = simulate_angle_trials(c, 6, 3, 0.0, {0.5, -0.5});
  CHECK(fixed[4].true_angle_deg == 0.5);
  CHECK(fixed[5].true_angle_deg == -0.5);
  CHECK_THROWS_AS(simulate_angle_trials(c, 5, 3, 3.0), ValidationError);
  CHECK_THROWS_AS(simulate_angle_trials(c, 5, 3, 0.0, {2.5}), ValidationError);

  std::ostringstream out;
  write_trials_csv(out, fixed);
  CHECK(out.str().rfind("trial,true_angle_deg,estimate_deg,sigma_deg\n0,0.5,", 0) == 0);
}
