#include <doctest.h>

#include <cmath>

#include "mfgame/errors.hpp"
#include "mfgame/perception.hpp"

using namespace mfgame;

namespace {

struct Moments {
  double mean[4] = {0, 0, 0, 0};
  double sd[4] = {0, 0, 0, 0};
};

Moments moments(const std::vector<AircraftState>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (const auto& s : xs) {
    const double v[4] = {s.px, s.py, s.vx, s.vy};
    for (int k = 0; k < 4; ++k) m.mean[k] += v[k] / n;
  }
  for (const auto& s : xs) {
    const double v[4] = {s.px, s.py, s.vx, s.vy};
    for (int k = 0; k < 4; ++k) m.sd[k] += (v[k] - m.mean[k]) * (v[k] - m.mean[k]) / (n - 1);
  }
  for (double& s : m.sd) s = std::sqrt(s);
  return m;
}

}  // namespace

TEST_SUITE("perception") {
  TEST_CASE("channel sigmas") {
    CHECK(out_the_window_model().position_sigma == 900.0);
    CHECK(out_the_window_model().velocity_sigma == 318.0);
    CHECK(instrument_model().position_sigma == 600.0);
    CHECK(instrument_model().velocity_sigma == 318.0);
  }

  TEST_CASE("vanishing sigma returns the true state") {
    const AircraftState truth{10, -20, 300, 400};
    Rng rng(1);
    CHECK(sample_channel(truth, {1e-300, 1e-300, Channel::OutTheWindow}, rng) == truth);
    PerceptionConfig exact;
    exact.out_the_window = {1e-300, 1e-300, Channel::OutTheWindow};
    const auto beliefs = sample_beliefs(truth, Fidelity::Low, 1, rng, exact);
    REQUIRE(beliefs.size() == 1);
    CHECK(beliefs[0] == truth);
  }

  TEST_CASE("sample_channel moments over 1e5 draws") {
    const AircraftState truth{100, -3000, 0, 450};
    const ObservationModel model = out_the_window_model();
    Rng rng(42);
    std::vector<AircraftState> xs(100000);
    for (auto& x : xs) x = sample_channel(truth, model, rng);
    const Moments m = moments(xs);
    const double t[4] = {truth.px, truth.py, truth.vx, truth.vy};
    const double s[4] = {900, 900, 318, 318};
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(m.mean[k] - t[k]) <= 3 * s[k] / std::sqrt(1e5));
      CHECK(std::abs(m.sd[k] - s[k]) <= 0.02 * s[k]);
    }
  }

  TEST_CASE("fused sigmas") {
    const auto high = fused_model(Fidelity::High);
    CHECK(high.position == doctest::Approx(std::sqrt(1.0 / (1.0 / (900.0 * 900.0) + 1.0 / (600.0 * 600.0)))));
    CHECK(high.position == doctest::Approx(499.2).epsilon(1e-4));
    CHECK(high.velocity == doctest::Approx(318.0 / std::sqrt(2.0)));
    CHECK(high.velocity == doctest::Approx(224.9).epsilon(1e-3));
    const auto low = fused_model(Fidelity::Low);
    CHECK(low.position == 900.0);
    CHECK(low.velocity == 318.0);
    CHECK(high.position <= std::min(900.0, 600.0));
    CHECK(high.velocity <= 318.0);
  }

  TEST_CASE("belief counts and errors") {
    Rng rng(5);
    const AircraftState truth{0, 0, 450, 0};
    for (std::size_t m : {1u, 50u, 1000u}) CHECK(sample_beliefs(truth, Fidelity::High, m, rng).size() == m);
    CHECK_THROWS_AS(sample_beliefs(truth, Fidelity::High, 0, rng), ValidationError);
  }

  TEST_CASE("high fidelity scatter is tighter than low") {
    const AircraftState truth{0, 3000, 0, -450};
    Rng a(9), b(9);
    const Moments hi = moments(sample_beliefs(truth, Fidelity::High, 100000, a));
    const Moments lo = moments(sample_beliefs(truth, Fidelity::Low, 100000, b));
    for (int k = 0; k < 4; ++k) CHECK(hi.sd[k] < lo.sd[k]);
    CHECK(hi.sd[0] == doctest::Approx(499.2).epsilon(0.02));
  }

  TEST_CASE("low fidelity never reads the instrument channel") {
    const AircraftState truth{0, 3000, 0, -450};
    PerceptionConfig none;
    none.instrument.reset();
    Rng a(77), b(77);
    CHECK(sample_beliefs(truth, Fidelity::Low, 20, a, none) == sample_beliefs(truth, Fidelity::Low, 20, b));
    CHECK_THROWS_AS(fused_model(Fidelity::High, none), ValidationError);
  }

  TEST_CASE("determinism") {
    const AircraftState truth{0, 3000, 0, -450};
    Rng a(123), b(123);
    CHECK(sample_beliefs(truth, Fidelity::High, 50, a) == sample_beliefs(truth, Fidelity::High, 50, b));
  }

  TEST_CASE("fidelity names") {
    CHECK(parse_fidelity("high") == Fidelity::High);
    CHECK(parse_fidelity("low") == Fidelity::Low);
    CHECK(to_string(Fidelity::Low) == "low");
    CHECK_THROWS(parse_fidelity("medium"));
  }
}
