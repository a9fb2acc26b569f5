#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mfgame/errors.hpp"
#include "mfgame/scenario.hpp"
#include "oracles.hpp"

using namespace mfgame;

namespace {

double bearing_of(const Encounter& e, double range) {
  return rad_to_deg(std::atan2(-e.s2.px / range, e.s2.py / range));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

GameConfig fast_game() {
  GameConfig g;
  g.pilot.decision.m = 20;
  g.pilot.decision.m_prime = 10;
  return g;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("noise-free head-on encounter collides") {
    const GeometryConfig geo;
    const Encounter e = nominal_encounter(0.0, geo);
    CHECK(e.s1.px == doctest::Approx(0.0));
    CHECK(e.s1.py == doctest::Approx(-3000.0));
    CHECK(e.s2.py == doctest::Approx(3000.0));
    CHECK(heading(e.s1) == doctest::Approx(std::numbers::pi / 2));
    CHECK(heading(e.s2) == doctest::Approx(-std::numbers::pi / 2));
    CHECK(closest_approach(e.s1, e.s2) == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    GeometryConfig quiet = geo;
    quiet.heading_sigma_deg = 0.0;
    Rng rng(1);
    const double zero[] = {0.0};
    CHECK(sample_encounter(zero, quiet, rng) == e);
  }

  TEST_CASE("nominal encounters at every bearing pass under the collision threshold") {
    const GeometryConfig geo;
    for (auto set : {EncounterSet::Train, EncounterSet::Test}) {
      for (double b : bearings(set)) {
        const Encounter e = nominal_encounter(b, geo);
        CHECK(closest_approach(e.s1, e.s2) < geo.collision_threshold);
        CHECK(in_field_of_view(e.s1, e.s2, geo.fov_half_angle_deg));
        CHECK(speed(e.s1) == doctest::Approx(450.0));
        CHECK(speed(e.s2) == doctest::Approx(450.0));
      }
    }
  }

  TEST_CASE("bearing sets") {
    std::set<double> train, test;
    const GeometryConfig geo;
    const auto tr = sample_encounters(300, bearings(EncounterSet::Train), geo, 3);
    const auto te = sample_encounters(300, bearings(EncounterSet::Test), geo, 4);
    for (const auto& e : tr) train.insert(std::round(bearing_of(e, geo.range) * 1e6) / 1e6);
    for (const auto& e : te) test.insert(std::round(bearing_of(e, geo.range) * 1e6) / 1e6);
    CHECK(train == std::set<double>{-45.0, 0.0, 45.0});
    CHECK(test == std::set<double>{-22.5, 22.5});
    for (double b : kTrainBearings)
      for (double t : kTestBearings) CHECK(b != t);
  }

  TEST_CASE("heading perturbation std over 1e5 draws") {
    const GeometryConfig geo;
    const auto es = sample_encounters(100000, kTrainBearings, geo, 12);
    double ss = 0.0;
    for (const auto& e : es) {
      const double n = rad_to_deg(wrap_angle(heading(e.s1) - std::numbers::pi / 2));
      ss += n * n;
    }
    const double sd = std::sqrt(ss / es.size());
    CHECK(std::abs(sd - 5.0) < 0.1);
  }

  TEST_CASE("field-of-view rejection gives up after max_attempts") {
    GeometryConfig geo;
    geo.fov_half_angle_deg = 1e-6;
    geo.heading_sigma_deg = 5.0;
    Rng rng(2);
    const double side[] = {45.0};
    CHECK_THROWS_AS(sample_encounter(side, geo, rng), ValidationError);
    CHECK_THROWS_AS(sample_encounter({}, GeometryConfig{}, rng), ValidationError);
  }

  TEST_CASE("encounter prefixes are stable") {
    const GeometryConfig geo;
    const auto a = sample_encounters(50, kTrainBearings, geo, 9);
    const auto b = sample_encounters(20, kTrainBearings, geo, 9);
    CHECK(std::equal(b.begin(), b.end(), a.begin()));
  }

  TEST_CASE("generate and round-trip a dataset") {
    const auto dir = oracle::scratch_dir("scenario");
    const GameConfig g = fast_game();
    const Dataset d = generate_dataset(100, Fidelity::High, {0.89, 0.9}, kTrainBearings, g, 21);
    REQUIRE(d.records.size() == 100);
    save_dataset(d, dir / "a.csv");
    CHECK(load_dataset(dir / "a.csv") == d);
    const Dataset again = generate_dataset(100, Fidelity::High, {0.89, 0.9}, kTrainBearings, g, 21);
    save_dataset(again, dir / "b.csv");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(prefix(d, 30) == generate_dataset(30, Fidelity::High, {0.89, 0.9}, kTrainBearings, g, 21));
  }

  TEST_CASE("default-size novel set") {
    const Dataset d = generate_dataset(1000, Fidelity::High, {0.9, 0.9}, bearings(EncounterSet::Novel), fast_game(), 5);
    CHECK(d.records.size() == 1000);
  }

  TEST_CASE("low fidelity ignores the instrument channel") {
    GameConfig with = fast_game(), without = fast_game();
    without.pilot.perception.instrument.reset();
    CHECK(generate_dataset(40, Fidelity::Low, {0.85, 0.95}, kTrainBearings, with, 8) ==
          generate_dataset(40, Fidelity::Low, {0.85, 0.95}, kTrainBearings, without, 8));
  }

  TEST_CASE("dataset file errors") {
    const auto dir = oracle::scratch_dir("scenario-errors");
    Dataset empty;
    CHECK_THROWS_AS(save_dataset(empty, dir / "e.csv"), ValidationError);
    CHECK_THROWS_WITH_AS(load_dataset(dir / "missing.csv"), doctest::Contains("missing.csv"), std::runtime_error);

    const Dataset d = generate_dataset(3, Fidelity::Low, {0.89, 0.9}, kTrainBearings, fast_game(), 1);
    save_dataset(d, dir / "ok.csv");
    std::string text = slurp(dir / "ok.csv");
    const auto last_comma = text.rfind(',');
    {
      std::ofstream out(dir / "short.csv", std::ios::binary);
      out << text.substr(0, last_comma) << '\n';
    }
    CHECK_THROWS_WITH_AS(load_dataset(dir / "short.csv"), doctest::Contains("expected 10 fields, got 9"), ParseError);
    {
      std::string bad = text;
      bad.replace(bad.rfind(',') + 1, 3, "x.y");
      std::ofstream out(dir / "bad.csv", std::ios::binary);
      out << bad;
    }
    CHECK_THROWS_WITH_AS(load_dataset(dir / "bad.csv"), doctest::Contains(":5: field a2"), ParseError);
  }
}
