#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfgame/density.hpp"
#include "mfgame/pilot.hpp"
#include "mfgame/scenario.hpp"

namespace mfgame {

// Probability per high-fidelity grid weight.
struct WeightPosterior {
  WeightGrid weights;
  std::vector<double> probabilities;
};

void validate(const WeightPosterior& posterior);

// Gaussian over (w1_low, w2_low, w1_high, w2_high).
class CrossFidelityPrior {
 public:
  // Throws ValidationError unless the covariance is symmetric positive definite.
  CrossFidelityPrior(const std::array<double, 4>& mean, const Eigen::Matrix4d& covariance);

  // Same-fidelity variance on the diagonal, `cross` between a player's low and
  // high weights, zero between players.
  static Eigen::Matrix4d coupled_covariance(double variance = 0.0017, double cross = 0.0013);
  static CrossFidelityPrior centered_on(UtilityWeights lofi, UtilityWeights hifi,
                                        double variance = 0.0017, double cross = 0.0013);

  double log_density(UtilityWeights lofi, UtilityWeights hifi) const;

  const std::array<double, 4>& mean() const { return mean_; }
  const Eigen::Matrix4d& covariance() const { return covariance_; }

 private:
  std::array<double, 4> mean_;
  Eigen::Matrix4d covariance_;
  Eigen::Matrix4d precision_;
  double log_normalizer_ = 0.0;
};

// ln p(A | w) for every weight in the family.
std::vector<double> grid_log_likelihoods(const DensityFamily& family,
                                         std::span<const JointAction> actions);

struct MapEstimate {
  std::size_t index = 0;
  UtilityWeights weights;
  std::vector<double> scores;  // log prior + log likelihood per grid weight
};

// `log_prior` may be empty (uniform) or hold one entry per grid weight.
MapEstimate map_estimate_hifi(std::span<const JointAction> hifi_actions,
                              const DensityFamily& high, std::span<const double> log_prior = {});

// One weight shared by both games: the low- and high-fidelity log likelihoods add.
// Either action list may be empty. The families must share a weight grid.
MapEstimate map_estimate_multifidelity(std::span<const JointAction> lofi_actions,
                                       std::span<const JointAction> hifi_actions,
                                       const DensityFamily& low, const DensityFamily& high,
                                       std::span<const double> log_prior = {});

// Dataset forms; these reject empty training sets.
MapEstimate map_estimate_hifi(const Dataset& hifi_train, const DensityFamily& high,
                              std::span<const double> log_prior = {});
MapEstimate map_estimate_multifidelity(const Dataset& lofi_train, const Dataset& hifi_train,
                                       const DensityFamily& low, const DensityFamily& high,
                                       std::span<const double> log_prior = {});

// p(w_h^j | A_l, A_h) proportional to
//   p(w_h^j | A_h) * sum_k p(w_l^k | A_l) * prior(w_l^k, w_h^j),
// renormalized over j. Empty action lists give uniform factors.
WeightPosterior bayes_posterior(std::span<const JointAction> lofi_actions,
                                std::span<const JointAction> hifi_actions,
                                const DensityFamily& low, const DensityFamily& high,
                                const CrossFidelityPrior& prior);

// Averages n_samples simulated joint decisions per test encounter. Sample l of
// encounter i draws from the stream derived from (seed, i, l), whatever the
// weights, so predictions under different weights share random numbers.
std::vector<JointAction> predict_map(std::span<const Encounter> test, UtilityWeights weights,
                                     const PilotModel& model, std::size_t n_samples,
                                     std::uint64_t seed, Fidelity fidelity = Fidelity::High);

struct BayesPrediction {
  std::vector<JointAction> actions;
  std::size_t skipped_components = 0;
  double skipped_mass = 0.0;
};

// Posterior-weighted mixture of predict_map over the grid. Components below
// `cutoff` are dropped and the remaining mass renormalized.
BayesPrediction predict_bayes(std::span<const Encounter> test, const WeightPosterior& posterior,
                              const PilotModel& model, std::size_t n_samples, std::uint64_t seed,
                              double cutoff = 1e-4);

// Rows of w1,w2,probability with a header, for plotting.
void save_posterior(const WeightPosterior& posterior, const std::filesystem::path& path);
WeightPosterior load_posterior(const std::filesystem::path& path);

WeightPosterior point_mass(const WeightGrid& grid, std::size_t index);

}  // namespace mfgame
