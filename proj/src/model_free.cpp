#include "mfgame/model_free.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfgame/errors.hpp"

namespace mfgame {

std::vector<double> encounter_features(const Encounter& e) {
  return {e.s1.px, e.s1.py, e.s1.vx, e.s1.vy, e.s2.px, e.s2.py, e.s2.vx, e.s2.vy};
}

LwPredictor::LwPredictor(std::size_t dimension, std::vector<double> features,
                         std::vector<JointAction> actions)
    : dimension_(dimension), actions_(std::move(actions)) {
  if (dimension_ == 0) throw ValidationError("feature dimension must be at least 1");
  if (actions_.empty()) throw ValidationError("locally weighted regression needs training rows");
  if (features.size() != actions_.size() * dimension_) {
    throw ValidationError("feature matrix has " + std::to_string(features.size()) +
                          " values, expected " + std::to_string(actions_.size()) + " rows x " +
                          std::to_string(dimension_));
  }
  const std::size_t n = actions_.size();
  means_.assign(dimension_, 0.0);
  scales_.assign(dimension_, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < dimension_; ++k) means_[k] += features[r * dimension_ + k];
  }
  for (double& m : means_) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < dimension_; ++k) {
      const double dev = features[r * dimension_ + k] - means_[k];
      scales_[k] += dev * dev;
    }
  }
  for (std::size_t k = 0; k < dimension_; ++k) {
    const double sd = std::sqrt(scales_[k] / static_cast<double>(n));
    // Constant columns (up to round-off) keep unit scale and so add nothing.
    scales_[k] = sd > 1e-9 * std::max(1.0, std::abs(means_[k])) ? sd : 1.0;
  }
  standardized_ = std::move(features);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < dimension_; ++k) {
      double& x = standardized_[r * dimension_ + k];
      x = (x - means_[k]) / scales_[k];
    }
  }
}

std::vector<double> LwPredictor::regression_weights(std::span<const double> query) const {
  if (query.size() != dimension_) {
    throw ValidationError("query has " + std::to_string(query.size()) + " features, predictor expects " +
                          std::to_string(dimension_));
  }
  std::vector<double> q(dimension_);
  for (std::size_t k = 0; k < dimension_; ++k) q[k] = (query[k] - means_[k]) / scales_[k];

  const std::size_t n = actions_.size();
  std::vector<double> z(n);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < dimension_; ++k) {
      const double diff = standardized_[r * dimension_ + k] - q[k];
      s += diff * diff;
    }
    z[r] = std::sqrt(s);
    dmin = std::min(dmin, z[r]);
  }
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(-(v - dmin));
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

JointAction LwPredictor::predict(std::span<const double> query) const {
  const std::vector<double> z = regression_weights(query);
  JointAction out;
  for (std::size_t r = 0; r < z.size(); ++r) {
    out.a1 += z[r] * actions_[r].a1;
    out.a2 += z[r] * actions_[r].a2;
  }
  return out;
}

LwPredictor fit_encounter_predictor(const Dataset& train) {
  if (train.records.empty()) throw ValidationError("training set is empty");
  std::vector<double> features;
  features.reserve(train.records.size() * kEncounterFeatures);
  for (const Record& r : train.records) {
    const auto f = encounter_features(r.encounter);
    features.insert(features.end(), f.begin(), f.end());
  }
  return LwPredictor(kEncounterFeatures, std::move(features), actions_of(train));
}

std::vector<JointAction> predict_hifi_only(const Dataset& hifi_train,
                                           std::span<const Encounter> test) {
  const LwPredictor predictor = fit_encounter_predictor(hifi_train);
  std::vector<JointAction> out;
  out.reserve(test.size());
  for (const Encounter& e : test) out.push_back(predictor.predict(encounter_features(e)));
  return out;
}

namespace {

std::vector<double> augmented(const Encounter& e, const LwPredictor& lofi) {
  std::vector<double> f = encounter_features(e);
  const JointAction a = lofi.predict(f);
  f.push_back(a.a1);
  f.push_back(a.a2);
  return f;
}

}  // namespace

std::vector<JointAction> predict_multifidelity(const Dataset& lofi_train, const Dataset& hifi_train,
                                               std::span<const Encounter> test) {
  if (lofi_train.records.empty()) throw ValidationError("low-fidelity training set is empty");
  if (hifi_train.records.empty()) throw ValidationError("high-fidelity training set is empty");
  const LwPredictor lofi = fit_encounter_predictor(lofi_train);

  constexpr std::size_t dim = kEncounterFeatures + 2;
  std::vector<double> features;
  features.reserve(hifi_train.records.size() * dim);
  for (const Record& r : hifi_train.records) {
    const auto f = augmented(r.encounter, lofi);
    features.insert(features.end(), f.begin(), f.end());
  }
  const LwPredictor hifi(dim, std::move(features), actions_of(hifi_train));

  std::vector<JointAction> out;
  out.reserve(test.size());
  for (const Encounter& e : test) out.push_back(hifi.predict(augmented(e, lofi)));
  return out;
}

}  // namespace mfgame
