#pragma once

#include <numbers>

namespace mfgame {

// Horizontal point-mass state. Positions in ft, velocities in ft/s, east/north frame.
struct AircraftState {
  double px = 0.0;
  double py = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const AircraftState&, const AircraftState&) = default;
};

// Heading change in radians; positive is counterclockwise.
struct Action {
  double heading_change = 0.0;
};

struct JointAction {
  double a1 = 0.0;
  double a2 = 0.0;

  friend bool operator==(const JointAction&, const JointAction&) = default;
};

struct Encounter {
  AircraftState s1;
  AircraftState s2;

  friend bool operator==(const Encounter&, const Encounter&) = default;
};

inline constexpr double kDefaultHorizon = 5.0;  // s

// Throws ValidationError if any component is non-finite.
void validate(const AircraftState& state);

double speed(const AircraftState& state);

// Rotates the velocity by the heading change, then flies straight for `duration` seconds.
AircraftState propagate(const AircraftState& state, Action action, double duration = kDefaultHorizon);

// Direction of travel in (-pi, pi]. Throws ValidationError for zero velocity.
double heading(const AircraftState& state);

// Euclidean distance between positions.
double distance(const AircraftState& a, const AircraftState& b);

// Minimum separation over t >= 0 when both aircraft hold their velocities.
double closest_approach(const AircraftState& a, const AircraftState& b);

// Maps an angle into (-pi, pi].
double wrap_angle(double radians);

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace mfgame
