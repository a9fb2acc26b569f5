#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfgame/kinematics.hpp"
#include "mfgame/scenario.hpp"

namespace mfgame {

inline constexpr std::size_t kEncounterFeatures = 8;

// s1 (px, py, vx, vy) followed by s2.
std::vector<double> encounter_features(const Encounter& encounter);

// Locally weighted regression: the prediction is a softmax(-d) average of the
// training actions, d being the Euclidean distance after z-scoring every feature
// with training-set statistics. Immutable after construction.
class LwPredictor {
 public:
  // `features` holds rows.size() * dimension values in row-major order.
  LwPredictor(std::size_t dimension, std::vector<double> features, std::vector<JointAction> actions);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return actions_.size(); }
  std::span<const double> feature_means() const { return means_; }
  std::span<const double> feature_scales() const { return scales_; }

  // Regression weights z_j for one query; nonnegative and summing to one.
  std::vector<double> regression_weights(std::span<const double> query) const;
  JointAction predict(std::span<const double> query) const;

 private:
  std::size_t dimension_;
  std::vector<double> standardized_;
  std::vector<double> means_;
  std::vector<double> scales_;
  std::vector<JointAction> actions_;
};

LwPredictor fit_encounter_predictor(const Dataset& train);

// Baseline that ignores low-fidelity data.
std::vector<JointAction> predict_hifi_only(const Dataset& hifi_train,
                                           std::span<const Encounter> test);

// Appends the low-fidelity predictor's output to the encounter features, both for
// fitting on the high-fidelity data and for querying.
std::vector<JointAction> predict_multifidelity(const Dataset& lofi_train, const Dataset& hifi_train,
                                               std::span<const Encounter> test);

}  // namespace mfgame
