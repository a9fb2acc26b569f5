#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>

#include <CLI11.hpp>

#include "mfgame/errors.hpp"
#include "mfgame/experiment.hpp"
#include "mfgame/model_free.hpp"
#include "mfgame/text.hpp"

namespace mfgame::cli {

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config_path, "key = value settings file");
  sub->add_option("--set", common.overrides, "override one setting, key=value (repeatable)");
}

ExperimentConfig resolve_config(const Common& common) {
  ExperimentConfig config = common.config_path.empty() ? ExperimentConfig{} : load_config(common.config_path);
  for (const auto& item : common.overrides) apply_config_text(config, item, "--set");
  return config;
}

void write_actions(const std::vector<JointAction>& actions, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "a1,a2\n";
  for (const auto& a : actions) out << text::format_double(a.a1) << ',' << text::format_double(a.a2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

// Density per square degree on a degree grid, so it integrates to one in the
// plotting units.
void write_degree_grid(const ActionDensity& density, const DensityHeader& header, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const double per_deg2 = std::pow(deg_to_rad(1.0), 2);
  const ActionGrid& g = density.grid();
  out << "# fidelity=" << to_string(header.fidelity) << " w1=" << text::format_double(header.weights.w1)
      << " w2=" << text::format_double(header.weights.w2) << " seed=" << header.seed << '\n';
  out << "a1_deg,a2_deg,density\n";
  for (std::size_t i = 0; i < g.nodes; ++i) {
    for (std::size_t j = 0; j < g.nodes; ++j) {
      out << text::format_double(rad_to_deg(g.coordinate(i))) << ','
          << text::format_double(rad_to_deg(g.coordinate(j))) << ','
          << text::format_double(density.at(i, j) * per_deg2) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

bool is_model_free(Method m) { return m == Method::MfHifi || m == Method::MfMulti; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-fidelity pilot decision prediction", "mfgame"};
  app.require_subcommand(1);
  std::function<void()> action;

  // experiment
  Common exp_common;
  std::string exp_out, exp_scenario, exp_cache;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::size_t> exp_lofi;
  auto* exp = app.add_subcommand("experiment", "run every method over the hifi-count sweep");
  add_common(exp, exp_common);
  exp->add_option("--out", exp_out, "output directory")->required();
  exp->add_option("--seed", exp_seed, "master seed");
  exp->add_option("--scenario", exp_scenario, "identical|small|large");
  exp->add_option("--lofi", exp_lofi, "low-fidelity training count");
  exp->add_option("--cache", exp_cache, "density cache directory");
  exp->callback([&] {
    action = [&] {
      ExperimentConfig c = resolve_config(exp_common);
      if (exp_seed) c.master_seed = *exp_seed;
      if (!exp_scenario.empty()) c.scenario = parse_scenario(exp_scenario);
      if (exp_lofi) c.lofi_count = *exp_lofi;
      if (!exp_cache.empty()) c.cache_dir = exp_cache;
      const auto result = run_experiment(c);
      for (const auto& f : result.failures) err << "cell failed: " << f << '\n';
      write_results(result, exp_out);
      out << "wrote " << result.cells.size() << " cells to " << exp_out << '\n';
    };
  });

  // density
  Common den_common;
  double den_w1 = 0.0, den_w2 = 0.0;
  std::string den_fidelity = "high", den_out;
  std::uint64_t den_seed = 1;
  std::size_t den_count = 1000;
  auto* den = app.add_subcommand("density", "write one joint-action density on a degree grid");
  add_common(den, den_common);
  den->add_option("--w1", den_w1)->required();
  den->add_option("--w2", den_w2)->required();
  den->add_option("--fidelity", den_fidelity, "high|low");
  den->add_option("--seed", den_seed);
  den->add_option("--encounters", den_count, "novel encounters to simulate");
  den->add_option("--out", den_out)->required();
  den->callback([&] {
    action = [&] {
      const ExperimentConfig c = resolve_config(den_common);
      const UtilityWeights w{den_w1, den_w2};
      validate(w);
      const Fidelity fid = parse_fidelity(den_fidelity);
      const auto novel = sample_encounters(den_count, bearings(EncounterSet::Novel), c.game.geometry,
                                           derive_seed(den_seed, tag("novel")));
      WeightGrid single;
      single.combinations = {w};
      const auto family = build_density_family(single, novel, fid, c.game.pilot, c.kde,
                                               derive_seed(den_seed, tag("family")));
      write_degree_grid(family.densities.front(), {fid, w, den_seed}, den_out);
    };
  });

  // gen-data
  Common gen_common;
  std::string gen_fidelity = "high", gen_set = "train", gen_out;
  double gen_w1 = 0.0, gen_w2 = 0.0;
  std::size_t gen_count = 0;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-data", "simulate encounters and joint actions");
  add_common(gen, gen_common);
  gen->add_option("--fidelity", gen_fidelity, "high|low");
  gen->add_option("--w1", gen_w1)->required();
  gen->add_option("--w2", gen_w2)->required();
  gen->add_option("--count", gen_count)->required();
  gen->add_option("--encounters", gen_set, "train|test|novel bearings");
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--out", gen_out)->required();
  gen->callback([&] {
    action = [&] {
      const ExperimentConfig c = resolve_config(gen_common);
      const auto data = generate_dataset(gen_count, parse_fidelity(gen_fidelity), {gen_w1, gen_w2},
                                         bearings(parse_encounter_set(gen_set)), c.game, gen_seed);
      save_dataset(data, gen_out);
    };
  });

  // seeds
  Common seed_common;
  std::size_t seed_replicate = 0;
  auto* seeds = app.add_subcommand("seeds", "print the seed plan of one replicate");
  add_common(seeds, seed_common);
  seeds->add_option("--replicate", seed_replicate);
  seeds->callback([&] {
    action = [&] {
      const SeedPlan s = seed_plan(resolve_config(seed_common), seed_replicate);
      out << "novel=" << s.novel << "\nfamily_low=" << s.family_low << "\nfamily_high=" << s.family_high
          << "\nreplicate=" << s.replicate << "\nhifi_train=" << s.hifi_train << "\nlofi_train=" << s.lofi_train
          << "\ntest=" << s.test << "\nlower_bound=" << s.lower_bound << '\n';
      for (Method m : kAllMethods) out << "method." << to_string(m) << '=' << s.method(m) << '\n';
    };
  });

  // fit
  Common fit_common;
  std::string fit_method, fit_hifi, fit_lofi, fit_out;
  std::optional<std::size_t> fit_hifi_count;
  auto* fit = app.add_subcommand("fit", "estimate utility weights; writes a posterior file");
  add_common(fit, fit_common);
  fit->add_option("--method", fit_method, "mb-map-hifi|mb-map-multi|mb-bayes")->required();
  fit->add_option("--hifi", fit_hifi, "high-fidelity training dataset")->required();
  fit->add_option("--lofi", fit_lofi, "low-fidelity training dataset");
  fit->add_option("--hifi-count", fit_hifi_count, "use only the first N high-fidelity records");
  fit->add_option("--out", fit_out)->required();
  fit->callback([&] {
    action = [&] {
      const ExperimentConfig c = resolve_config(fit_common);
      const Method m = parse_method(fit_method);
      if (is_model_free(m)) {
        throw ValidationError("model-free methods have no fit step; pass the training files to predict");
      }
      Dataset hifi = load_dataset(fit_hifi);
      if (fit_hifi_count) hifi = prefix(hifi, *fit_hifi_count);
      std::optional<Dataset> lofi;
      if (!fit_lofi.empty()) lofi = load_dataset(fit_lofi);
      if (m != Method::MbMapHifi && !lofi) throw ValidationError(std::string(to_string(m)) + " needs --lofi");
      const Families fam = obtain_families(c);
      WeightPosterior post;
      if (m == Method::MbMapHifi) {
        post = point_mass(fam.high.weights, map_estimate_hifi(hifi, fam.high).index);
      } else if (m == Method::MbMapMulti) {
        post = point_mass(fam.high.weights, map_estimate_multifidelity(*lofi, hifi, fam.low, fam.high).index);
      } else {
        post = bayes_posterior(actions_of(*lofi), actions_of(hifi), fam.low, fam.high, make_prior(c));
      }
      save_posterior(post, fit_out);
    };
  });

  // predict
  Common pred_common;
  std::string pred_method, pred_test, pred_posterior, pred_hifi, pred_lofi, pred_out;
  std::optional<std::size_t> pred_hifi_count;
  std::uint64_t pred_seed = 1;
  auto* pred = app.add_subcommand("predict", "predict joint actions for test encounters");
  add_common(pred, pred_common);
  pred->add_option("--method", pred_method)->required();
  pred->add_option("--test", pred_test, "dataset whose encounters are predicted")->required();
  pred->add_option("--posterior", pred_posterior, "posterior file from fit (model-based methods)");
  pred->add_option("--hifi", pred_hifi, "high-fidelity training dataset (model-free methods)");
  pred->add_option("--lofi", pred_lofi, "low-fidelity training dataset (mf-multi)");
  pred->add_option("--hifi-count", pred_hifi_count, "use only the first N high-fidelity records");
  pred->add_option("--seed", pred_seed, "simulation seed for model-based prediction");
  pred->add_option("--out", pred_out)->required();
  pred->callback([&] {
    action = [&] {
      const ExperimentConfig c = resolve_config(pred_common);
      const Method m = parse_method(pred_method);
      const auto test = encounters_of(load_dataset(pred_test));
      std::vector<JointAction> predictions;
      if (is_model_free(m)) {
        if (pred_hifi.empty()) throw ValidationError(std::string(to_string(m)) + " needs --hifi");
        Dataset hifi = load_dataset(pred_hifi);
        if (pred_hifi_count) hifi = prefix(hifi, *pred_hifi_count);
        if (m == Method::MfHifi) {
          predictions = predict_hifi_only(hifi, test);
        } else {
          if (pred_lofi.empty()) throw ValidationError("mf-multi needs --lofi");
          predictions = predict_multifidelity(load_dataset(pred_lofi), hifi, test);
        }
      } else {
        if (pred_posterior.empty()) throw ValidationError(std::string(to_string(m)) + " needs --posterior");
        const WeightPosterior post = load_posterior(pred_posterior);
        const auto top = std::find(post.probabilities.begin(), post.probabilities.end(), 1.0);
        if (top != post.probabilities.end()) {
          const auto& w = post.weights.combinations[static_cast<std::size_t>(top - post.probabilities.begin())];
          predictions = predict_map(test, w, c.game.pilot, c.n_samples, pred_seed);
        } else {
          predictions = predict_bayes(test, post, c.game.pilot, c.n_samples, pred_seed, c.bayes_cutoff).actions;
        }
      }
      write_actions(predictions, pred_out);
    };
  });

  // lower-bound
  Common lb_common;
  std::string lb_test;
  double lb_w1 = 0.0, lb_w2 = 0.0;
  std::uint64_t lb_seed = 1;
  auto* lb = app.add_subcommand("lower-bound", "test error of the ground-truth model");
  add_common(lb, lb_common);
  lb->add_option("--test", lb_test)->required();
  lb->add_option("--w1", lb_w1)->required();
  lb->add_option("--w2", lb_w2)->required();
  lb->add_option("--seed", lb_seed);
  lb->callback([&] {
    action = [&] {
      const ExperimentConfig c = resolve_config(lb_common);
      const Dataset test = load_dataset(lb_test);
      out << text::format_double(lower_bound(encounters_of(test), actions_of(test), {lb_w1, lb_w2},
                                             c.game.pilot, lb_seed, c.n_samples))
          << '\n';
    };
  });

  // score
  std::string score_pred, score_test;
  auto* score = app.add_subcommand("score", "summed joint-action error of a prediction file");
  score->add_option("--predictions", score_pred)->required();
  score->add_option("--test", score_test)->required();
  score->callback([&] {
    action = [&] {
      std::ifstream in(score_pred, std::ios::binary);
      if (!in) throw std::runtime_error("file not found or unreadable: " + score_pred);
      std::string line;
      std::getline(in, line);
      std::vector<JointAction> predicted;
      while (std::getline(in, line)) {
        const auto f = text::split(text::trim(line), ',');
        if (f.size() != 2) throw ParseError(score_pred + ": expected 2 fields, got " + std::to_string(f.size()));
        predicted.push_back({text::parse_double(f[0], "a1"), text::parse_double(f[1], "a2")});
      }
      out << text::format_double(test_error(predicted, actions_of(load_dataset(score_test)))) << '\n';
    };
  });

  // print-config
  Common print_common;
  auto* print = app.add_subcommand("print-config", "print every setting with its value");
  add_common(print, print_common);
  print->callback([&] { action = [&] { out << to_config_text(resolve_config(print_common)); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    action();
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mfgame::cli
