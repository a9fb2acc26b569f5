#include "mfgame/pilot.hpp"

#include <cmath>
#include <limits>

#include "mfgame/errors.hpp"

namespace mfgame {

void validate(const UtilityWeights& weights) {
  for (double w : {weights.w1, weights.w2}) {
    if (!(w > 0.0 && w < 1.0)) throw ValidationError("utility weights must lie in (0, 1)");
  }
}

void validate(const DecisionConfig& c) {
  if (c.m == 0) throw ValidationError("candidate count m must be at least 1");
  if (c.m_prime == 0) throw ValidationError("belief count m' must be at least 1");
  if (!(c.action_bound > 0.0) || !std::isfinite(c.action_bound)) {
    throw ValidationError("action bound must be positive");
  }
  if (!(c.horizon >= 0.0) || !std::isfinite(c.horizon)) {
    throw ValidationError("decision horizon must be non-negative");
  }
  if (!(c.distance_scale >= 0.0) || !std::isfinite(c.distance_scale)) {
    throw ValidationError("distance scale must be non-negative");
  }
  if (c.distance_scale == 0.0 && !(c.separation_factor > 0.0)) {
    throw ValidationError("separation factor must be positive when distance_scale is 0");
  }
}

double resolve_distance_scale(const DecisionConfig& config, const AircraftState& own,
                              const AircraftState& intruder) {
  if (config.distance_scale > 0.0) return config.distance_scale;
  const double scale = config.separation_factor * distance(own, intruder);
  if (!(scale > 0.0)) throw ValidationError("aircraft start at the same position");
  return scale;
}

std::vector<double> sample_candidates(const DecisionConfig& config, Rng& rng) {
  validate(config);
  std::uniform_real_distribution<double> u(-config.action_bound, config.action_bound);
  std::vector<double> out(config.m);
  for (double& a : out) a = u(rng);
  return out;
}

AircraftState expected_intruder_final(const AircraftState& belief, double horizon,
                                      double action_bound) {
  validate(belief);
  // E[cos t] for t ~ U(-b, b); the E[sin t] term vanishes by symmetry.
  const double shrink = std::sin(action_bound) / action_bound;
  AircraftState out;
  out.vx = shrink * belief.vx;
  out.vy = shrink * belief.vy;
  out.px = belief.px + horizon * out.vx;
  out.py = belief.py + horizon * out.vy;
  return out;
}

double utility(double w, const AircraftState& own_final, const AircraftState& intruder_final,
               double action, double distance_scale) {
  return w * distance(own_final, intruder_final) / distance_scale - (1.0 - w) * std::abs(action);
}

CandidateTable tabulate_candidates(const AircraftState& own, std::span<const double> candidates,
                                   std::span<const AircraftState> beliefs,
                                   const DecisionConfig& config, double distance_scale) {
  if (candidates.empty()) throw ValidationError("no candidate actions");
  if (beliefs.empty()) throw ValidationError("no belief samples");
  if (!(distance_scale > 0.0)) throw ValidationError("distance scale must be positive");

  std::vector<double> fx(beliefs.size()), fy(beliefs.size());
  for (std::size_t j = 0; j < beliefs.size(); ++j) {
    const AircraftState f = expected_intruder_final(beliefs[j], config.horizon, config.action_bound);
    fx[j] = f.px;
    fy[j] = f.py;
  }

  CandidateTable table;
  table.actions.assign(candidates.begin(), candidates.end());
  table.mean_distance.resize(candidates.size());
  const double inv = 1.0 / (distance_scale * static_cast<double>(beliefs.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const AircraftState fin = propagate(own, Action{candidates[i]}, config.horizon);
    double sum = 0.0;
    for (std::size_t j = 0; j < beliefs.size(); ++j) {
      const double dx = fin.px - fx[j];
      const double dy = fin.py - fy[j];
      sum += std::sqrt(dx * dx + dy * dy);
    }
    table.mean_distance[i] = sum * inv;
  }
  return table;
}

std::size_t best_candidate(const CandidateTable& table, double w) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.actions.size(); ++i) {
    const double score = w * table.mean_distance[i] - (1.0 - w) * std::abs(table.actions[i]);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

double select_action(const CandidateTable& table, double w) {
  return table.actions[best_candidate(table, w)];
}

CandidateTable evaluate_candidates(const AircraftState& own, const AircraftState& intruder_truth,
                                   Fidelity fidelity, const PilotModel& model, Rng& rng) {
  validate(own);
  validate(intruder_truth);
  const DecisionConfig& dc = model.decision;
  const double scale = resolve_distance_scale(dc, own, intruder_truth);
  const std::vector<double> candidates = sample_candidates(dc, rng);
  const std::vector<AircraftState> beliefs =
      sample_beliefs(intruder_truth, fidelity, dc.m_prime, rng, model.perception);
  return tabulate_candidates(own, candidates, beliefs, dc, scale);
}

double choose_action(const AircraftState& own, const AircraftState& intruder_truth, double w,
                     Fidelity fidelity, const PilotModel& model, Rng& rng) {
  if (!(w > 0.0 && w < 1.0)) throw ValidationError("utility weight must lie in (0, 1)");
  return select_action(evaluate_candidates(own, intruder_truth, fidelity, model, rng), w);
}

EncounterTables evaluate_encounter(const Encounter& encounter, Fidelity fidelity,
                                   const PilotModel& model, Rng& rng) {
  EncounterTables tables;
  tables.player1 = evaluate_candidates(encounter.s1, encounter.s2, fidelity, model, rng);
  tables.player2 = evaluate_candidates(encounter.s2, encounter.s1, fidelity, model, rng);
  return tables;
}

JointAction select_joint(const EncounterTables& tables, UtilityWeights weights) {
  return {select_action(tables.player1, weights.w1), select_action(tables.player2, weights.w2)};
}

JointAction joint_decision(const Encounter& encounter, UtilityWeights weights, Fidelity fidelity,
                           const PilotModel& model, Rng& rng) {
  validate(weights);
  return select_joint(evaluate_encounter(encounter, fidelity, model, rng), weights);
}

}  // namespace mfgame
