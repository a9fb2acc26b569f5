#include "mfgame/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "mfgame/errors.hpp"

namespace mfgame {

void validate(const AircraftState& s) {
  if (!std::isfinite(s.px) || !std::isfinite(s.py) || !std::isfinite(s.vx) ||
      !std::isfinite(s.vy)) {
    throw ValidationError("aircraft state has non-finite components");
  }
}

double speed(const AircraftState& s) { return std::hypot(s.vx, s.vy); }

AircraftState propagate(const AircraftState& state, Action action, double duration) {
  validate(state);
  if (!std::isfinite(action.heading_change)) throw ValidationError("non-finite heading change");
  if (!std::isfinite(duration) || duration < 0.0) {
    throw ValidationError("propagation duration must be finite and non-negative");
  }
  const double c = std::cos(action.heading_change);
  const double s = std::sin(action.heading_change);
  AircraftState out;
  out.vx = c * state.vx - s * state.vy;
  out.vy = s * state.vx + c * state.vy;
  out.px = state.px + duration * out.vx;
  out.py = state.py + duration * out.vy;
  return out;
}

double wrap_angle(double radians) {
  double r = std::remainder(radians, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

double heading(const AircraftState& state) {
  validate(state);
  if (state.vx == 0.0 && state.vy == 0.0) throw ValidationError("heading of a stationary aircraft");
  const double h = std::atan2(state.vy, state.vx);
  return h == -std::numbers::pi ? std::numbers::pi : h;
}

double distance(const AircraftState& a, const AircraftState& b) {
  return std::hypot(a.px - b.px, a.py - b.py);
}

double closest_approach(const AircraftState& a, const AircraftState& b) {
  const double rx = b.px - a.px;
  const double ry = b.py - a.py;
  const double ux = b.vx - a.vx;
  const double uy = b.vy - a.vy;
  const double uu = ux * ux + uy * uy;
  double t = 0.0;
  if (uu > 0.0) t = std::max(0.0, -(rx * ux + ry * uy) / uu);
  return std::hypot(rx + t * ux, ry + t * uy);
}

}  // namespace mfgame
