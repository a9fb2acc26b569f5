#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mfgame/errors.hpp"
#include "mfgame/experiment.hpp"
#include "oracles.hpp"
#include "small_config.hpp"

using namespace mfgame;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("defaults") {
    const ExperimentConfig c;
    CHECK(c.hifi_counts == std::vector<std::size_t>{5, 10, 20, 40, 80, 160});
    CHECK(c.replicates == 10);
    CHECK(c.lofi_count == 1000);
    CHECK(weight_grid(c).size() == 100);
    CHECK_NOTHROW(validate(c));
  }

  TEST_CASE("config text parsing") {
    const ExperimentConfig c = small_config();
    CHECK(c.lofi_count == 60);
    CHECK(c.hifi_counts == std::vector<std::size_t>{2, 5});
    CHECK(c.master_seed == 17);
    CHECK(c.game.pilot.decision.m == 24);
    CHECK(c.kde.grid.nodes == 48);

    ExperimentConfig d;
    apply_config_text(d, to_config_text(c), "roundtrip");
    CHECK(to_config_text(d) == to_config_text(c));

    ExperimentConfig e;
    CHECK_THROWS_WITH_AS(apply_config_text(e, "replicates = 3\nbogus = 1\n", "cfg"),
                         doctest::Contains("cfg:2: bogus"), ParseError);
    CHECK_THROWS_WITH_AS(apply_config_text(e, "m = ten\n", "cfg"), doctest::Contains("cfg:1: m"), ParseError);
    CHECK_THROWS_AS(apply_config_text(e, "no equals sign\n", "cfg"), ParseError);
    CHECK_THROWS_AS(apply_config_text(e, "scenario = medium\n", "cfg"), ParseError);
    CHECK_THROWS_AS(apply_config_text(e, "prior_mean = 0.8,0.8\n", "cfg"), ParseError);
    apply_config_text(e, "prior_mean = 0.8,0.81,0.89,0.9\n", "cfg");
    REQUIRE(e.prior_mean);
    CHECK((*e.prior_mean)[1] == 0.81);
    apply_config_text(e, "prior_mean = truth\n", "cfg");
    CHECK(!e.prior_mean);
  }

  TEST_CASE("config validation") {
    ExperimentConfig c;
    c.replicates = 0;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = ExperimentConfig{};
    c.hifi_counts = {5, 0};
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = ExperimentConfig{};
    c.prior_cross_covariance = 0.0017;
    CHECK_THROWS_AS(validate(c), ValidationError);
    CHECK_THROWS_WITH_AS(load_config("/nonexistent/cfg.txt"), doctest::Contains("/nonexistent/cfg.txt"),
                         std::runtime_error);
  }

  TEST_CASE("prior mean follows the scenario unless set") {
    ExperimentConfig c;
    c.scenario = Scenario::LargeDiff;
    CHECK(make_prior(c).mean() == std::array<double, 4>{0.80, 0.81, 0.89, 0.90});
    c.prior_mean = std::array<double, 4>{0.85, 0.85, 0.85, 0.85};
    CHECK(make_prior(c).mean()[0] == 0.85);
  }

  TEST_CASE("seed hierarchy") {
    ExperimentConfig c;
    const SeedPlan a = seed_plan(c, 0), b = seed_plan(c, 0), r1 = seed_plan(c, 1);
    CHECK(a.hifi_train == b.hifi_train);
    CHECK(a.replicate != r1.replicate);
    CHECK(a.novel == r1.novel);
    CHECK(a.family_high == r1.family_high);
    CHECK(a.family_low != a.family_high);
    std::set<std::uint64_t> streams{a.hifi_train, a.lofi_train, a.test, a.lower_bound};
    for (Method m : kAllMethods) streams.insert(a.method(m));
    CHECK(streams.size() == 9);
    ExperimentConfig other = c;
    other.scenario = Scenario::SmallDiff;
    CHECK(seed_plan(other, 0).replicate != a.replicate);
    CHECK(seed_plan(other, 0).family_high == a.family_high);
    other.master_seed = 2;
    CHECK(seed_plan(other, 0).novel != a.novel);
  }

  TEST_CASE("replicate data") {
    const ExperimentConfig c = small_config();
    const ReplicateData d = prepare_replicate(c, 0);
    CHECK(d.hifi_pool.records.size() == 5);
    CHECK(d.lofi_train.records.size() == 60);
    CHECK(d.lofi_train.fidelity == Fidelity::Low);
    CHECK(d.test.records.size() == 15);
    CHECK(d.lower_bound > 0.0);
    CHECK(prepare_replicate(c, 0).hifi_pool == d.hifi_pool);
  }

  TEST_CASE("full run: shape, determinism and caching") {
    const auto dir = oracle::scratch_dir("experiment");
    ExperimentConfig c = small_config();
    c.cache_dir = dir / "cache";
    const Families first = obtain_families(c);
    const Families cached = obtain_families(c);
    CHECK(std::filesystem::exists(c.cache_dir));
    REQUIRE(cached.high.densities.size() == first.high.densities.size());
    for (std::size_t j = 0; j < first.high.densities.size(); ++j) {
      const auto a = first.high.densities[j].values(), b = cached.high.densities[j].values();
      CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }

    const auto r1 = run_experiment(c, first);
    write_results(r1, dir / "run1");
    const auto r2 = run_experiment(c);
    write_results(r2, dir / "run2");
    CHECK(r1.failures.empty());
    CHECK(r1.cells.size() == 5 * 2 * 2);
    for (Method m : kAllMethods) {
      const std::string name = std::string(to_string(m)) + ".csv";
      const std::string body = slurp(dir / "run1" / name);
      CHECK(body.rfind("samples,score,stderr\n2,", 0) == 0);
      CHECK(std::count(body.begin(), body.end(), '\n') == 3);
      CHECK(body == slurp(dir / "run2" / name));
    }
    CHECK(slurp(dir / "run1" / "cells.csv") == slurp(dir / "run2" / "cells.csv"));

    // Every method in a replicate is scored against the same bound.
    for (const auto& cell : r1.cells) {
      for (const auto& other : r1.cells) {
        if (other.replicate == cell.replicate) CHECK(other.lower_bound == cell.lower_bound);
      }
    }
  }

  TEST_CASE("failed cells are reported and left out") {
    const ExperimentConfig c = small_config();
    Families broken = obtain_families(c);
    broken.low.weights.combinations.pop_back();
    broken.low.densities.pop_back();
    const auto r = run_experiment(c, broken);
    CHECK(!r.failures.empty());
    for (const auto& p : r.curves.at(Method::MbMapMulti)) CHECK(!p.score);
    for (const auto& p : r.curves.at(Method::MbMapHifi)) CHECK(p.score);
    const std::string csv = curve_csv(r.curves.at(Method::MbMapMulti));
    CHECK(csv == "samples,score,stderr\n2,NA,NA\n5,NA,NA\n");
  }
}
