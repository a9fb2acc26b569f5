#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mfgame/kinematics.hpp"
#include "mfgame/perception.hpp"
#include "mfgame/pilot.hpp"
#include "mfgame/random.hpp"

namespace mfgame {

struct GeometryConfig {
  double range = 3000.0;               // ft from the collision point
  double speed = 450.0;                // ft/s
  double heading_sigma_deg = 5.0;
  double collision_threshold = 500.0;  // ft
  double fov_half_angle_deg = 110.0;
  int max_attempts = 20;
};

void validate(const GeometryConfig& config);

struct GameConfig {
  GeometryConfig geometry;
  PilotModel pilot;
};

// Bearings of player 2 relative to player 1's approach axis, degrees, CCW positive.
inline constexpr double kTrainBearings[] = {-45.0, 0.0, 45.0};
inline constexpr double kTestBearings[] = {-22.5, 22.5};

enum class EncounterSet { Train, Test, Novel };

std::span<const double> bearings(EncounterSet set);
EncounterSet parse_encounter_set(std::string_view name);

// Noise-free construction: both aircraft reach the origin simultaneously.
Encounter nominal_encounter(double bearing_deg, const GeometryConfig& config);

// Player 1 starts `range` south of the origin flying north; player 2 starts at
// `range` on a bearing drawn uniformly from `bearings_deg`. Both headings get
// independent Gaussian perturbations. Throws if player 2 keeps falling outside
// player 1's field of view.
Encounter sample_encounter(std::span<const double> bearings_deg, const GeometryConfig& config,
                           Rng& rng);

bool in_field_of_view(const AircraftState& observer, const AircraftState& target,
                      double half_angle_deg);

// Encounter i is drawn from its own stream derived from (seed, i), so the first k
// encounters of a larger set equal a set of size k.
std::vector<Encounter> sample_encounters(std::size_t n, std::span<const double> bearings_deg,
                                         const GeometryConfig& config, std::uint64_t seed);

struct Record {
  Encounter encounter;
  JointAction action;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
  Fidelity fidelity = Fidelity::High;
  UtilityWeights weights;
  std::uint64_t seed = 0;
  std::vector<Record> records;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Plays n encounters at the given fidelity and ground-truth weights. Record i uses
// streams derived from (seed, i) only, which makes prefixes stable.
Dataset generate_dataset(std::size_t n, Fidelity fidelity, UtilityWeights weights,
                         std::span<const double> bearings_deg, const GameConfig& config,
                         std::uint64_t seed);

std::vector<Encounter> encounters_of(const Dataset& dataset);
std::vector<JointAction> actions_of(const Dataset& dataset);
Dataset prefix(const Dataset& dataset, std::size_t n);

// Comma-delimited text: one comment line with fidelity/weights/seed, one header
// row, then s1 px,py,vx,vy, s2 px,py,vx,vy, a1, a2 per record.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace mfgame
