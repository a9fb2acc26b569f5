#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfgame/density.hpp"
#include "mfgame/evaluation.hpp"
#include "mfgame/model_based.hpp"
#include "mfgame/scenario.hpp"

namespace mfgame {

struct ExperimentConfig {
  Scenario scenario = Scenario::Identical;
  std::size_t lofi_count = 1000;
  std::vector<std::size_t> hifi_counts{5, 10, 20, 40, 80, 160};
  std::size_t replicates = 10;
  std::uint64_t master_seed = 1;
  std::size_t test_count = 200;
  std::size_t novel_count = 1000;
  std::size_t n_samples = 10;

  double grid_lo = 0.80;
  double grid_hi = 0.98;
  double grid_step = 0.02;
  KdeConfig kde;
  GameConfig game;

  double prior_variance = 0.0017;
  double prior_cross_covariance = 0.0013;
  // (w1_low, w2_low, w1_high, w2_high); unset means the scenario's ground truth.
  std::optional<std::array<double, 4>> prior_mean;
  double bayes_cutoff = 1e-4;

  std::filesystem::path cache_dir;  // empty disables the density cache
  std::size_t threads = 0;          // 0 = hardware concurrency
};

void validate(const ExperimentConfig& config);

// Flat key=value settings. Unknown keys and malformed values throw ParseError.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_config_text(ExperimentConfig& config, std::string_view text, std::string_view origin);
// Every key with its current value, in a form load_config accepts.
std::string to_config_text(const ExperimentConfig& config);

WeightGrid weight_grid(const ExperimentConfig& config);
CrossFidelityPrior make_prior(const ExperimentConfig& config);

// Seed hierarchy. Novel encounters and density families depend on the master seed
// only, so they are shared by every scenario and replicate. Everything else hangs
// off master -> scenario -> replicate -> (dataset | method).
struct SeedPlan {
  std::uint64_t novel = 0;
  std::uint64_t family_low = 0;
  std::uint64_t family_high = 0;
  std::uint64_t replicate = 0;
  std::uint64_t hifi_train = 0;
  std::uint64_t lofi_train = 0;
  std::uint64_t test = 0;
  std::uint64_t lower_bound = 0;

  std::uint64_t method(Method m) const;
};

SeedPlan seed_plan(const ExperimentConfig& config, std::size_t replicate);

struct Families {
  DensityFamily low;
  DensityFamily high;
};

// Builds both families, or loads them from config.cache_dir when a cache entry
// for the same settings exists.
Families obtain_families(const ExperimentConfig& config);

// Datasets one replicate shares across all methods.
struct ReplicateData {
  SeedPlan seeds;
  Dataset hifi_pool;  // max(hifi_counts) records; a cell uses a prefix
  Dataset lofi_train;
  Dataset test;
  double lower_bound = 0.0;
};

ReplicateData prepare_replicate(const ExperimentConfig& config, std::size_t replicate);

struct CellOutcome {
  std::vector<JointAction> predictions;
  std::size_t bayes_skipped = 0;
};

CellOutcome run_cell(const ExperimentConfig& config, const Families& families,
                     const ReplicateData& data, Method method, std::size_t hifi_count);

struct CurvePoint {
  std::size_t samples = 0;
  std::optional<MeanStderr> score;  // empty when every replicate failed
};

struct ExperimentResult {
  std::vector<EfficiencyResult> cells;
  std::map<Method, std::vector<CurvePoint>> curves;
  std::vector<std::string> failures;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const Families& families);
ExperimentResult run_experiment(const ExperimentConfig& config);

// One `<method>.csv` per method with header samples,score,stderr, plus cells.csv.
void write_results(const ExperimentResult& result, const std::filesystem::path& out_dir);

std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace mfgame
