#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfgame/kinematics.hpp"
#include "mfgame/perception.hpp"
#include "mfgame/random.hpp"

namespace mfgame {

// Trade-off between rewarding separation and penalizing heading change, per player.
struct UtilityWeights {
  double w1 = 0.0;
  double w2 = 0.0;

  friend bool operator==(const UtilityWeights&, const UtilityWeights&) = default;
};

void validate(const UtilityWeights& weights);

struct DecisionConfig {
  std::size_t m = 100;        // candidate actions
  std::size_t m_prime = 50;   // intruder belief samples
  double action_bound = 1.0;  // rad
  double horizon = kDefaultHorizon;
  // Normalizer L for the distance term, in ft. When zero, L is
  // separation_factor times the encounter's initial separation.
  double distance_scale = 0.0;
  double separation_factor = 2.4;
};

void validate(const DecisionConfig& config);

struct PilotModel {
  PerceptionConfig perception;
  DecisionConfig decision;
};

double resolve_distance_scale(const DecisionConfig& config, const AircraftState& own,
                              const AircraftState& intruder);

// m i.i.d. draws on [-action_bound, +action_bound].
std::vector<double> sample_candidates(const DecisionConfig& config, Rng& rng);

// Expected final state of a level-0 intruder whose heading change is uniform on
// [-action_bound, action_bound]: the velocity shrinks by sin(b)/b along its own
// direction and the position advances by horizon times that mean velocity.
AircraftState expected_intruder_final(const AircraftState& belief, double horizon = kDefaultHorizon,
                                      double action_bound = 1.0);

double utility(double w, const AircraftState& own_final, const AircraftState& intruder_final,
               double action, double distance_scale);

// Per-candidate terms of the expected utility, independent of the weight. Lets one
// draw of candidates and beliefs be scored under any number of weights.
struct CandidateTable {
  std::vector<double> actions;
  std::vector<double> mean_distance;  // mean over beliefs of d / L
};

CandidateTable tabulate_candidates(const AircraftState& own, std::span<const double> candidates,
                                   std::span<const AircraftState> beliefs,
                                   const DecisionConfig& config, double distance_scale);

// Index of the candidate maximizing w * mean_distance - (1 - w) * |a|; ties go to
// the lowest index.
std::size_t best_candidate(const CandidateTable& table, double w);
double select_action(const CandidateTable& table, double w);

// Samples candidates then beliefs from `rng` and tabulates them.
CandidateTable evaluate_candidates(const AircraftState& own, const AircraftState& intruder_truth,
                                   Fidelity fidelity, const PilotModel& model, Rng& rng);

double choose_action(const AircraftState& own, const AircraftState& intruder_truth, double w,
                     Fidelity fidelity, const PilotModel& model, Rng& rng);

struct EncounterTables {
  CandidateTable player1;
  CandidateTable player2;
};

// Player 1's draws come first from `rng`, then player 2's.
EncounterTables evaluate_encounter(const Encounter& encounter, Fidelity fidelity,
                                   const PilotModel& model, Rng& rng);

JointAction select_joint(const EncounterTables& tables, UtilityWeights weights);

JointAction joint_decision(const Encounter& encounter, UtilityWeights weights, Fidelity fidelity,
                           const PilotModel& model, Rng& rng);

}  // namespace mfgame
