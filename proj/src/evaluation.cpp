#include "mfgame/evaluation.hpp"

#include <cmath>
#include <string>

#include "mfgame/errors.hpp"
#include "mfgame/model_based.hpp"

namespace mfgame {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::MfHifi: return "mf-hifi";
    case Method::MfMulti: return "mf-multi";
    case Method::MbMapHifi: return "mb-map-hifi";
    case Method::MbMapMulti: return "mb-map-multi";
    case Method::MbBayes: return "mb-bayes";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) +
                        "' (expected mf-hifi|mf-multi|mb-map-hifi|mb-map-multi|mb-bayes)");
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Identical: return "identical";
    case Scenario::SmallDiff: return "small";
    case Scenario::LargeDiff: return "large";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "identical") return Scenario::Identical;
  if (name == "small" || name == "small-diff") return Scenario::SmallDiff;
  if (name == "large" || name == "large-diff") return Scenario::LargeDiff;
  throw ValidationError("unknown scenario '" + std::string(name) + "' (expected identical|small|large)");
}

ScenarioWeights scenario_weights(Scenario scenario) {
  const UtilityWeights hifi{0.89, 0.90};
  switch (scenario) {
    case Scenario::SmallDiff: return {{0.88, 0.89}, hifi};
    case Scenario::LargeDiff: return {{0.80, 0.81}, hifi};
    case Scenario::Identical: break;
  }
  return {hifi, hifi};
}

double joint_distance(JointAction a, JointAction b) { return std::hypot(a.a1 - b.a1, a.a2 - b.a2); }

double test_error(std::span<const JointAction> predicted, std::span<const JointAction> actual) {
  if (predicted.size() != actual.size()) {
    throw ValidationError("test error needs equal lengths, got " + std::to_string(predicted.size()) +
                          " predictions and " + std::to_string(actual.size()) + " actions");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += joint_distance(predicted[i], actual[i]);
  return total;
}

double lower_bound(std::span<const Encounter> test, std::span<const JointAction> actual,
                   UtilityWeights ground_truth, const PilotModel& model, std::uint64_t seed,
                   std::size_t n_samples) {
  return test_error(predict_map(test, ground_truth, model, n_samples, seed), actual);
}

Efficiency predictive_efficiency(double error, double lower_bound_error) {
  if (!(error >= 0.0) || !(lower_bound_error >= 0.0)) {
    throw ValidationError("errors must be non-negative");
  }
  if (error < kExactErrorFloor) return {0.0, true};
  return {lower_bound_error / error, false};
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  out.n = values.size();
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double n = static_cast<double>(values.size());
    out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace mfgame
