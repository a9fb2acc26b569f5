#include "mfgame/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mfgame/errors.hpp"
#include "mfgame/model_free.hpp"
#include "mfgame/parallel.hpp"
#include "mfgame/text.hpp"

namespace mfgame {

void validate(const ExperimentConfig& c) {
  if (c.replicates < 1) throw ValidationError("replicates must be at least 1");
  if (c.lofi_count < 1) throw ValidationError("lofi_count must be at least 1");
  if (c.hifi_counts.empty()) throw ValidationError("hifi_counts must list at least one count");
  for (auto n : c.hifi_counts) {
    if (n < 1) throw ValidationError("hifi sample counts must be at least 1");
  }
  if (c.test_count < 1) throw ValidationError("test_count must be at least 1");
  if (c.novel_count < 2) throw ValidationError("novel_count must be at least 2");
  if (c.n_samples < 1) throw ValidationError("n_samples must be at least 1");
  if (!(c.bayes_cutoff >= 0.0 && c.bayes_cutoff < 1.0)) throw ValidationError("bayes_cutoff must be in [0, 1)");
  if (!(c.kde.floor >= 0.0)) throw ValidationError("kde_floor must be non-negative");
  validate(c.kde.grid);
  validate(c.game.geometry);
  validate(c.game.pilot.decision);
  validate(c.game.pilot.perception.out_the_window);
  if (!c.game.pilot.perception.instrument) throw ValidationError("experiments need an instrument channel");
  validate(*c.game.pilot.perception.instrument);
  make_weight_grid(c.grid_lo, c.grid_hi, c.grid_step);
  make_prior(c);
}

namespace {

std::vector<double> parse_list(std::string_view value, std::string_view key) {
  std::vector<double> out;
  for (auto field : text::split(value, ',')) out.push_back(text::parse_double(text::trim(field), key));
  return out;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + std::to_string(values[i]);
  return s;
}

std::size_t parse_count(std::string_view value, std::string_view key) {
  return static_cast<std::size_t>(text::parse_unsigned(value, key));
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  auto& geo = c.game.geometry;
  auto& dec = c.game.pilot.decision;
  auto& per = c.game.pilot.perception;
  const auto num = [&] { return text::parse_double(value, key); };
  const auto count = [&] { return parse_count(value, key); };
  try {
    if (key == "scenario") c.scenario = parse_scenario(value);
    else if (key == "lofi_count") c.lofi_count = count();
    else if (key == "hifi_counts") {
      c.hifi_counts.clear();
      for (auto field : text::split(value, ',')) c.hifi_counts.push_back(parse_count(text::trim(field), key));
    }
    else if (key == "replicates") c.replicates = count();
    else if (key == "seed") c.master_seed = text::parse_unsigned(value, key);
    else if (key == "test_count") c.test_count = count();
    else if (key == "novel_count") c.novel_count = count();
    else if (key == "n_samples") c.n_samples = count();
    else if (key == "grid_lo") c.grid_lo = num();
    else if (key == "grid_hi") c.grid_hi = num();
    else if (key == "grid_step") c.grid_step = num();
    else if (key == "kde_method") c.kde.method = parse_kde_method(value);
    else if (key == "kde_nodes") c.kde.grid.nodes = count();
    else if (key == "kde_floor") c.kde.floor = num();
    else if (key == "kde_bandwidth") {
      const double h = num();
      c.kde.bandwidth = h > 0.0 ? std::optional<double>(h) : std::nullopt;
    }
    else if (key == "action_bound") c.kde.grid.bound = dec.action_bound = num();
    else if (key == "range") geo.range = num();
    else if (key == "speed") geo.speed = num();
    else if (key == "heading_sigma_deg") geo.heading_sigma_deg = num();
    else if (key == "collision_threshold") geo.collision_threshold = num();
    else if (key == "fov_half_angle_deg") geo.fov_half_angle_deg = num();
    else if (key == "max_attempts") geo.max_attempts = static_cast<int>(count());
    else if (key == "m") dec.m = count();
    else if (key == "m_prime") dec.m_prime = count();
    else if (key == "horizon") dec.horizon = num();
    else if (key == "distance_scale") dec.distance_scale = num();
    else if (key == "separation_factor") dec.separation_factor = num();
    else if (key == "otw_position_sigma") per.out_the_window.position_sigma = num();
    else if (key == "otw_velocity_sigma") per.out_the_window.velocity_sigma = num();
    else if (key == "instrument_position_sigma") per.instrument.value().position_sigma = num();
    else if (key == "instrument_velocity_sigma") per.instrument.value().velocity_sigma = num();
    else if (key == "prior_variance") c.prior_variance = num();
    else if (key == "prior_cross_covariance") c.prior_cross_covariance = num();
    else if (key == "prior_mean") {
      if (value == "truth") {
        c.prior_mean.reset();
      } else {
        const auto v = parse_list(value, key);
        if (v.size() != 4) throw ParseError("prior_mean needs 4 values or 'truth'");
        c.prior_mean = std::array<double, 4>{v[0], v[1], v[2], v[3]};
      }
    }
    else if (key == "bayes_cutoff") c.bayes_cutoff = num();
    else if (key == "cache_dir") c.cache_dir = std::filesystem::path(std::string(value));
    else if (key == "threads") c.threads = count();
    else throw ParseError("unknown key");
  } catch (const ValidationError& ex) {
    throw ParseError(std::string(key) + ": " + ex.what());
  } catch (const ParseError& ex) {
    throw ParseError(std::string(key) + ": " + ex.what());
  }
}

void apply_config_text(ExperimentConfig& config, std::string_view body, std::string_view origin) {
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto end = std::min(body.find('\n', start), body.size());
    ++lineno;
    auto line = text::trim(body.substr(start, end - start));
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = text::trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ParseError(where + "expected key = value");
    try {
      apply_setting(config, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    } catch (const ParseError& ex) {
      throw ParseError(where + ex.what());
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found or unreadable: " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  ExperimentConfig config;
  apply_config_text(config, body.str(), path.string());
  return config;
}

std::string to_config_text(const ExperimentConfig& c) {
  const auto& geo = c.game.geometry;
  const auto& dec = c.game.pilot.decision;
  const auto& per = c.game.pilot.perception;
  const auto f = [](double v) { return text::format_double(v); };
  std::ostringstream out;
  out << "scenario = " << to_string(c.scenario) << '\n'
      << "lofi_count = " << c.lofi_count << '\n'
      << "hifi_counts = " << join(c.hifi_counts) << '\n'
      << "replicates = " << c.replicates << '\n'
      << "seed = " << c.master_seed << '\n'
      << "test_count = " << c.test_count << '\n'
      << "novel_count = " << c.novel_count << '\n'
      << "n_samples = " << c.n_samples << '\n'
      << "grid_lo = " << f(c.grid_lo) << '\n'
      << "grid_hi = " << f(c.grid_hi) << '\n'
      << "grid_step = " << f(c.grid_step) << '\n'
      << "kde_method = " << to_string(c.kde.method) << '\n'
      << "kde_nodes = " << c.kde.grid.nodes << '\n'
      << "kde_floor = " << f(c.kde.floor) << '\n'
      << "kde_bandwidth = " << f(c.kde.bandwidth.value_or(0.0)) << '\n'
      << "action_bound = " << f(dec.action_bound) << '\n'
      << "range = " << f(geo.range) << '\n'
      << "speed = " << f(geo.speed) << '\n'
      << "heading_sigma_deg = " << f(geo.heading_sigma_deg) << '\n'
      << "collision_threshold = " << f(geo.collision_threshold) << '\n'
      << "fov_half_angle_deg = " << f(geo.fov_half_angle_deg) << '\n'
      << "max_attempts = " << geo.max_attempts << '\n'
      << "m = " << dec.m << '\n'
      << "m_prime = " << dec.m_prime << '\n'
      << "horizon = " << f(dec.horizon) << '\n'
      << "distance_scale = " << f(dec.distance_scale) << '\n'
      << "separation_factor = " << f(dec.separation_factor) << '\n'
      << "otw_position_sigma = " << f(per.out_the_window.position_sigma) << '\n'
      << "otw_velocity_sigma = " << f(per.out_the_window.velocity_sigma) << '\n';
  if (per.instrument) {
    out << "instrument_position_sigma = " << f(per.instrument->position_sigma) << '\n'
        << "instrument_velocity_sigma = " << f(per.instrument->velocity_sigma) << '\n';
  }
  out << "prior_variance = " << f(c.prior_variance) << '\n'
      << "prior_cross_covariance = " << f(c.prior_cross_covariance) << '\n'
      << "prior_mean = ";
  if (c.prior_mean) {
    const auto& m = *c.prior_mean;
    out << f(m[0]) << ',' << f(m[1]) << ',' << f(m[2]) << ',' << f(m[3]) << '\n';
  } else {
    out << "truth\n";
  }
  out << "bayes_cutoff = " << f(c.bayes_cutoff) << '\n'
      << "cache_dir = " << c.cache_dir.string() << '\n'
      << "threads = " << c.threads << '\n';
  return out.str();
}

WeightGrid weight_grid(const ExperimentConfig& config) {
  return make_weight_grid(config.grid_lo, config.grid_hi, config.grid_step);
}

CrossFidelityPrior make_prior(const ExperimentConfig& config) {
  if (config.prior_mean) {
    const auto& m = *config.prior_mean;
    return CrossFidelityPrior(m, CrossFidelityPrior::coupled_covariance(config.prior_variance,
                                                                        config.prior_cross_covariance));
  }
  const auto truth = scenario_weights(config.scenario);
  return CrossFidelityPrior::centered_on(truth.lofi, truth.hifi, config.prior_variance,
                                         config.prior_cross_covariance);
}

std::uint64_t SeedPlan::method(Method m) const {
  return derive_seed(replicate, tag("method"), tag(to_string(m)));
}

SeedPlan seed_plan(const ExperimentConfig& config, std::size_t replicate) {
  const std::uint64_t master = config.master_seed;
  SeedPlan s;
  s.novel = derive_seed(master, tag("novel"));
  s.family_low = derive_seed(master, tag("family"), tag("low"));
  s.family_high = derive_seed(master, tag("family"), tag("high"));
  s.replicate = derive_seed(master, tag("scenario"), tag(to_string(config.scenario)), replicate);
  s.hifi_train = derive_seed(s.replicate, tag("hifi-train"));
  s.lofi_train = derive_seed(s.replicate, tag("lofi-train"));
  s.test = derive_seed(s.replicate, tag("test"));
  s.lower_bound = derive_seed(s.replicate, tag("lower-bound"));
  return s;
}

namespace {

// Everything a density family depends on.
std::string family_key(const ExperimentConfig& c, Fidelity fidelity, std::uint64_t seed) {
  ExperimentConfig k;
  k.novel_count = c.novel_count;
  k.grid_lo = c.grid_lo;
  k.grid_hi = c.grid_hi;
  k.grid_step = c.grid_step;
  k.kde = c.kde;
  k.game = c.game;
  k.master_seed = c.master_seed;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(tag(to_config_text(k))));
  return std::string(to_string(fidelity)) + "-" + std::to_string(seed) + "-" + hash;
}

DensityFamily family_for(const ExperimentConfig& c, Fidelity fidelity, std::uint64_t seed,
                         std::span<const Encounter> novel) {
  const auto build = [&] {
    return build_density_family(weight_grid(c), novel, fidelity, c.game.pilot, c.kde, seed);
  };
  if (c.cache_dir.empty()) return build();
  const auto dir = c.cache_dir / family_key(c, fidelity, seed);
  if (std::filesystem::exists(dir / "family.txt")) return load_family(dir);
  auto family = build();
  save_family(family, dir);
  return family;
}

}  // namespace

Families obtain_families(const ExperimentConfig& config) {
  validate(config);
  const SeedPlan s = seed_plan(config, 0);
  std::vector<Encounter> novel;
  const auto lazy_novel = [&]() -> std::span<const Encounter> {
    if (novel.empty()) {
      novel = sample_encounters(config.novel_count, bearings(EncounterSet::Novel), config.game.geometry, s.novel);
    }
    return novel;
  };
  Families f;
  f.low = family_for(config, Fidelity::Low, s.family_low, lazy_novel());
  f.high = family_for(config, Fidelity::High, s.family_high, lazy_novel());
  return f;
}

ReplicateData prepare_replicate(const ExperimentConfig& config, std::size_t replicate) {
  ReplicateData d;
  d.seeds = seed_plan(config, replicate);
  const auto truth = scenario_weights(config.scenario);
  const auto train = bearings(EncounterSet::Train);
  const std::size_t pool = *std::max_element(config.hifi_counts.begin(), config.hifi_counts.end());
  d.hifi_pool = generate_dataset(pool, Fidelity::High, truth.hifi, train, config.game, d.seeds.hifi_train);
  d.lofi_train = generate_dataset(config.lofi_count, Fidelity::Low, truth.lofi, train, config.game,
                                  d.seeds.lofi_train);
  d.test = generate_dataset(config.test_count, Fidelity::High, truth.hifi, bearings(EncounterSet::Test),
                            config.game, d.seeds.test);
  d.lower_bound = lower_bound(encounters_of(d.test), actions_of(d.test), truth.hifi, config.game.pilot,
                              d.seeds.lower_bound, config.n_samples);
  return d;
}

CellOutcome run_cell(const ExperimentConfig& config, const Families& families, const ReplicateData& data,
                     Method method, std::size_t hifi_count) {
  const Dataset hifi = prefix(data.hifi_pool, hifi_count);
  const auto test = encounters_of(data.test);
  const auto& pilot = config.game.pilot;
  const std::uint64_t seed = data.seeds.method(method);
  CellOutcome out;
  switch (method) {
    case Method::MfHifi:
      out.predictions = predict_hifi_only(hifi, test);
      break;
    case Method::MfMulti:
      out.predictions = predict_multifidelity(data.lofi_train, hifi, test);
      break;
    case Method::MbMapHifi: {
      const auto est = map_estimate_hifi(hifi, families.high);
      out.predictions = predict_map(test, est.weights, pilot, config.n_samples, seed);
      break;
    }
    case Method::MbMapMulti: {
      const auto est = map_estimate_multifidelity(data.lofi_train, hifi, families.low, families.high);
      out.predictions = predict_map(test, est.weights, pilot, config.n_samples, seed);
      break;
    }
    case Method::MbBayes: {
      const auto post = bayes_posterior(actions_of(data.lofi_train), actions_of(hifi), families.low,
                                        families.high, make_prior(config));
      auto pred = predict_bayes(test, post, pilot, config.n_samples, seed, config.bayes_cutoff);
      out.predictions = std::move(pred.actions);
      out.bayes_skipped = pred.skipped_components;
      break;
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Families& families) {
  validate(config);
  struct Slot {
    std::vector<EfficiencyResult> cells;
    std::vector<std::string> failures;
  };
  std::vector<Slot> slots(config.replicates);
  parallel_for(config.replicates, config.threads, [&](std::size_t rep) {
    Slot& slot = slots[rep];
    ReplicateData data;
    try {
      data = prepare_replicate(config, rep);
    } catch (const std::exception& ex) {
      slot.failures.push_back("replicate " + std::to_string(rep) + ": " + ex.what());
      return;
    }
    const auto actual = actions_of(data.test);
    for (Method m : kAllMethods) {
      for (std::size_t count : config.hifi_counts) {
        try {
          const auto outcome = run_cell(config, families, data, m, count);
          EfficiencyResult r;
          r.method = m;
          r.hifi_count = count;
          r.lofi_count = config.lofi_count;
          r.scenario = config.scenario;
          r.replicate = rep;
          r.replicate_seed = data.seeds.replicate;
          r.error = test_error(outcome.predictions, actual);
          r.lower_bound = data.lower_bound;
          r.efficiency = predictive_efficiency(r.error, r.lower_bound);
          slot.cells.push_back(r);
        } catch (const std::exception& ex) {
          slot.failures.push_back(std::string(to_string(m)) + " hifi=" + std::to_string(count) +
                                  " replicate " + std::to_string(rep) + ": " + ex.what());
        }
      }
    }
  });

  ExperimentResult result;
  for (auto& slot : slots) {
    result.cells.insert(result.cells.end(), slot.cells.begin(), slot.cells.end());
    result.failures.insert(result.failures.end(), slot.failures.begin(), slot.failures.end());
  }
  for (Method m : kAllMethods) {
    auto& curve = result.curves[m];
    for (std::size_t count : config.hifi_counts) {
      std::vector<double> scores;
      for (const auto& c : result.cells) {
        if (c.method != m || c.hifi_count != count) continue;
        // A perfect prediction has no finite ratio; it counts as a full score.
        scores.push_back(c.efficiency.exact ? 1.0 : c.efficiency.value);
      }
      CurvePoint p;
      p.samples = count;
      if (!scores.empty()) p.score = mean_stderr(scores);
      curve.push_back(p);
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, obtain_families(config));
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "samples,score,stderr\n";
  for (const auto& p : curve) {
    out += std::to_string(p.samples) + ",";
    if (p.score) {
      out += text::format_double(p.score->mean) + "," + text::format_double(p.score->standard_error);
    } else {
      out += "NA,NA";
    }
    out += '\n';
  }
  return out;
}

void write_results(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(out_dir / name, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("write failed for " + (out_dir / name).string());
  };
  for (const auto& [method, curve] : result.curves) write(std::string(to_string(method)) + ".csv", curve_csv(curve));
  std::string cells =
      "method,scenario,hifi_count,lofi_count,replicate,replicate_seed,error,lower_bound,efficiency\n";
  for (const auto& c : result.cells) {
    cells += std::string(to_string(c.method)) + "," + std::string(to_string(c.scenario)) + "," +
             std::to_string(c.hifi_count) + "," + std::to_string(c.lofi_count) + "," +
             std::to_string(c.replicate) + "," + std::to_string(c.replicate_seed) + "," +
             text::format_double(c.error) + "," + text::format_double(c.lower_bound) + "," +
             (c.efficiency.exact ? std::string("exact") : text::format_double(c.efficiency.value)) + '\n';
  }
  write("cells.csv", cells);
}

}  // namespace mfgame
