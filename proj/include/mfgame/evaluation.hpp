#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "mfgame/kinematics.hpp"
#include "mfgame/pilot.hpp"

namespace mfgame {

enum class Method { MfHifi, MfMulti, MbMapHifi, MbMapMulti, MbBayes };
inline constexpr Method kAllMethods[] = {Method::MfHifi, Method::MfMulti, Method::MbMapHifi,
                                         Method::MbMapMulti, Method::MbBayes};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

enum class Scenario { Identical, SmallDiff, LargeDiff };

std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view name);

struct ScenarioWeights {
  UtilityWeights lofi;
  UtilityWeights hifi;
};

// Ground-truth weights: high fidelity (0.89, 0.90) throughout; low fidelity equal,
// (0.88, 0.89) or (0.80, 0.81).
ScenarioWeights scenario_weights(Scenario scenario);

double joint_distance(JointAction a, JointAction b);

// Sum of Euclidean distances in joint-action space (radians).
double test_error(std::span<const JointAction> predicted, std::span<const JointAction> actual);

// Test error of the ground-truth model's averaged prediction.
double lower_bound(std::span<const Encounter> test, std::span<const JointAction> actual,
                   UtilityWeights ground_truth, const PilotModel& model, std::uint64_t seed,
                   std::size_t n_samples = 10);

inline constexpr double kExactErrorFloor = 1e-9;

// D_lb / D. When D is below kExactErrorFloor the result is flagged `exact` and
// carries no ratio. Values above one are legitimate and left alone.
struct Efficiency {
  double value = 0.0;
  bool exact = false;
};

Efficiency predictive_efficiency(double error, double lower_bound_error);

struct EfficiencyResult {
  Method method = Method::MfHifi;
  std::size_t hifi_count = 0;
  std::size_t lofi_count = 0;
  Scenario scenario = Scenario::Identical;
  std::size_t replicate = 0;
  std::uint64_t replicate_seed = 0;
  double error = 0.0;
  double lower_bound = 0.0;
  Efficiency efficiency;
};

struct MeanStderr {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error (n - 1 denominator; zero for n = 1).
MeanStderr mean_stderr(std::span<const double> values);

}  // namespace mfgame
