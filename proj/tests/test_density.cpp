#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "mfgame/density.hpp"
#include "mfgame/errors.hpp"
#include "mfgame/scenario.hpp"
#include "oracles.hpp"

using namespace mfgame;

namespace {

std::vector<JointAction> truncated_normal(std::size_t n, double sd, double bound, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<JointAction> out;
  while (out.size() < n) {
    const double x = z(rng), y = z(rng);
    if (std::abs(x) <= bound && std::abs(y) <= bound) out.push_back({x, y});
  }
  return out;
}

double l1_to_std_normal(const ActionDensity& d) {
  const ActionGrid& g = d.grid();
  std::vector<double> diff(g.nodes * g.nodes);
  for (std::size_t i = 0; i < g.nodes; ++i)
    for (std::size_t j = 0; j < g.nodes; ++j)
      diff[i * g.nodes + j] =
          std::abs(d.at(i, j) - oracle::truncated_std_normal2(g.coordinate(i), g.coordinate(j), g.bound));
  return ActionDensity(g, diff).integral();
}

PilotModel fast_model() {
  PilotModel m;
  m.decision.m = 40;
  m.decision.m_prime = 20;
  return m;
}

}  // namespace

TEST_SUITE("density") {
  TEST_CASE("grid geometry and validation") {
    const ActionGrid g;
    CHECK(g.coordinate(0) == -1.0);
    CHECK(g.coordinate(127) == doctest::Approx(1.0));
    CHECK_THROWS_AS(validate(ActionGrid{1.0, 1}), ValidationError);
    CHECK_THROWS_AS(validate(ActionGrid{0.0, 16}), ValidationError);
    CHECK_THROWS_AS(ActionDensity(ActionGrid{1.0, 4}, std::vector<double>(15, 0.1)), ValidationError);
    CHECK_THROWS_AS(ActionDensity(ActionGrid{1.0, 2}, {0.1, -0.1, 0.1, 0.1}), ValidationError);
  }

  TEST_CASE("trapezoid integral of a constant") {
    const ActionGrid g{1.0, 33};
    const ActionDensity d(g, std::vector<double>(33 * 33, 0.25));
    CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.mass_in_box(-0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("kde2d input errors") {
    const KdeConfig k;
    CHECK_THROWS_AS(kde2d(std::vector<JointAction>{{0.1, 0.1}}, k), ValidationError);
    CHECK_THROWS_AS(kde2d(std::vector<JointAction>{{0.1, 0.1}, {0.1, 0.3}}, k), ValidationError);
    CHECK_THROWS_AS(kde2d(std::vector<JointAction>{{0.1, 0.2}, {0.3, 0.2}}, k), ValidationError);
    CHECK_THROWS_AS(parse_kde_method("tophat"), ValidationError);
  }

  TEST_CASE("mode of a jittered point mass sits at the nearest node") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 0.005);
    std::vector<JointAction> s(1000);
    for (auto& a : s) a = {0.3 + z(rng), -0.2 + z(rng)};
    for (auto method : {KdeMethod::Silverman, KdeMethod::Diffusion}) {
      KdeConfig k;
      k.method = method;
      const auto d = kde2d(s, k);
      const auto vals = d.values();
      const auto top = std::max_element(vals.begin(), vals.end()) - vals.begin();
      const auto node = d.nearest({0.3, -0.2});
      CHECK(static_cast<std::size_t>(top) == node.i * d.grid().nodes + node.j);
    }
  }

  TEST_CASE("point-symmetric samples give a point-symmetric density") {
    auto s = truncated_normal(500, 0.4, 1.0, 6);
    const std::size_t n = s.size();
    for (std::size_t k = 0; k < n; ++k) s.push_back({-s[k].a1, -s[k].a2});
    for (auto method : {KdeMethod::Silverman, KdeMethod::Diffusion}) {
      KdeConfig k;
      k.method = method;
      const auto d = kde2d(s, k);
      const std::size_t N = d.grid().nodes;
      double worst = 0.0;
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          const double a = d.at(i, j), b = d.at(N - 1 - i, N - 1 - j);
          if (std::max(a, b) > 1e-3) worst = std::max(worst, std::abs(a - b) / std::max(a, b));
        }
      CHECK(worst < 0.05);
    }
  }

  TEST_CASE("normalization and floor on random sample sets") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1, 1), spread(0.02, 0.8);
    std::uniform_int_distribution<int> count(2, 400);
    for (int set = 0; set < 100; ++set) {
      const double cx = u(rng), cy = u(rng), sd = spread(rng);
      std::normal_distribution<double> z(0, sd);
      std::vector<JointAction> s(count(rng));
      for (auto& a : s) a = {std::clamp(cx + z(rng), -1.0, 1.0), std::clamp(cy + z(rng), -1.0, 1.0)};
      KdeConfig k;
      k.method = set % 4 == 0 ? KdeMethod::Diffusion : KdeMethod::Silverman;
      const auto d = kde2d(s, k);
      REQUIRE(std::abs(d.integral() - 1.0) <= 1e-2);
      REQUIRE(*std::min_element(d.values().begin(), d.values().end()) >= 1e-12);
    }
  }

  TEST_CASE("L1 error against a truncated standard normal at n = 1e4") {
    const auto s = truncated_normal(10000, 1.0, 1.0, 77);
    KdeConfig silverman;
    CHECK(l1_to_std_normal(kde2d(s, silverman)) < 0.05);
    KdeConfig diffusion;
    diffusion.method = KdeMethod::Diffusion;
    CHECK(l1_to_std_normal(kde2d(s, diffusion)) < 0.05);
  }

  TEST_CASE("adding samples at a node never lowers the density there") {
    auto s = truncated_normal(300, 0.5, 1.0, 12);
    KdeConfig k;
    k.bandwidth = 0.1;
    const ActionGrid& g = k.grid;
    for (std::size_t node : {10u, 64u, 100u}) {
      const JointAction at{g.coordinate(node), g.coordinate(127 - node)};
      double before = kde2d(s, k).value_at(at);
      auto more = s;
      for (int add = 0; add < 3; ++add) {
        more.push_back(at);
        const double after = kde2d(more, k).value_at(at);
        CHECK(after >= before);
        before = after;
      }
    }
  }

  TEST_CASE("weight grid") {
    const auto w = make_weight_grid(0.80, 0.98, 0.02);
    REQUIRE(w.size() == 100);
    CHECK(w.combinations.front() == UtilityWeights{0.8, 0.8});
    CHECK(w.combinations[1] == UtilityWeights{0.8, 0.82});
    CHECK(w.combinations.back() == UtilityWeights{0.98, 0.98});
    std::set<std::pair<double, double>> unique;
    for (const auto& c : w.combinations) {
      CHECK(c.w1 > 0.0);
      CHECK(c.w1 < 1.0);
      unique.insert({c.w1, c.w2});
    }
    CHECK(unique.size() == 100);
    CHECK(make_weight_grid(0.80, 0.98, 0.01).size() == 361);
    CHECK(make_weight_grid(0.9, 0.9, 0.02).size() == 1);
    CHECK_THROWS_AS(make_weight_grid(0.8, 1.0, 0.02), ValidationError);
    CHECK_THROWS_AS(make_weight_grid(0.8, 0.9, 0.0), ValidationError);
  }

  TEST_CASE("density family") {
    const auto novel = sample_encounters(200, kTrainBearings, GeometryConfig{}, 3);
    const auto grid = make_weight_grid(0.80, 0.98, 0.09);
    const auto fam = build_density_family(grid, novel, Fidelity::High, fast_model(), KdeConfig{}, 9);
    CHECK(fam.densities.size() == grid.size());
    const auto again = build_density_family(grid, novel, Fidelity::High, fast_model(), KdeConfig{}, 9);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CHECK(std::equal(fam.densities[j].values().begin(), fam.densities[j].values().end(),
                       again.densities[j].values().begin()));
    }
    // Low weights keep pilots near straight flight, high weights turn hard.
    CHECK(fam.densities.front().mass_in_box(-0.5, 0.5) >= 0.5);
    CHECK(fam.densities.back().mass_in_box(-0.5, 0.5) < 0.5);
  }

  TEST_CASE("log likelihood") {
    const auto s = truncated_normal(2000, 0.3, 1.0, 2);
    const auto d = kde2d(s, KdeConfig{});
    const auto vals = d.values();
    const auto top = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    const ActionGrid& g = d.grid();
    const JointAction mode{g.coordinate(top / g.nodes), g.coordinate(top % g.nodes)};
    const double best = log_likelihood(d, std::vector<JointAction>{mode}).value;
    for (const auto& a : truncated_normal(200, 0.6, 1.0, 3)) {
      CHECK(log_likelihood(d, std::vector<JointAction>{a}).value <= best);
    }

    const ActionDensity flat(ActionGrid{}, std::vector<double>(128 * 128, 0.25));
    const auto acts = truncated_normal(37, 0.5, 1.0, 4);
    CHECK(log_likelihood(flat, acts).value == doctest::Approx(37 * std::log(0.25)));

    auto twice = acts;
    twice.insert(twice.end(), acts.begin(), acts.end());
    CHECK(log_likelihood(d, twice).value == doctest::Approx(2 * log_likelihood(d, acts).value));
    auto reversed = acts;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(log_likelihood(d, reversed).value == doctest::Approx(log_likelihood(d, acts).value));

    const auto outside = log_likelihood(d, std::vector<JointAction>{{1.5, 0.0}, {0.0, -2.0}, {0.1, 0.1}});
    CHECK(outside.clamped == 2);
    CHECK(std::isfinite(outside.value));
    CHECK(log_likelihood(d, std::vector<JointAction>{{1.5, 0.0}}).value ==
          log_likelihood(d, std::vector<JointAction>{{1.0, 0.0}}).value);
    CHECK_THROWS_AS(log_likelihood(d, std::vector<JointAction>{}), ValidationError);
  }

  TEST_CASE("density and family files round-trip") {
    const auto dir = oracle::scratch_dir("density");
    const auto d = kde2d(truncated_normal(500, 0.3, 1.0, 5), KdeConfig{});
    save_density(d, {Fidelity::Low, {0.82, 0.9}, 44}, dir / "d.txt");
    DensityHeader h;
    const auto back = load_density(dir / "d.txt", &h);
    CHECK(h.fidelity == Fidelity::Low);
    CHECK(h.weights == UtilityWeights{0.82, 0.9});
    CHECK(h.seed == 44);
    CHECK(std::equal(d.values().begin(), d.values().end(), back.values().begin()));

    const auto novel = sample_encounters(50, kTrainBearings, GeometryConfig{}, 3);
    const auto fam = build_density_family(make_weight_grid(0.8, 0.9, 0.1), novel, Fidelity::Low, fast_model(),
                                          KdeConfig{}, 1);
    save_family(fam, dir / "fam");
    const auto loaded = load_family(dir / "fam");
    CHECK(loaded.weights.combinations == fam.weights.combinations);
    CHECK(loaded.fidelity == Fidelity::Low);
    CHECK(loaded.densities.size() == fam.densities.size());

    // A density whose mass is off by 10% is refused.
    std::vector<double> off(d.values().begin(), d.values().end());
    for (auto& v : off) v *= 1.1;
    save_density(ActionDensity(d.grid(), off), {Fidelity::High, {0.8, 0.8}, 1}, dir / "off.txt");
    CHECK_THROWS_AS(load_density(dir / "off.txt"), ParseError);
    CHECK_THROWS_AS(load_density(dir / "none.txt"), std::runtime_error);
  }
}
