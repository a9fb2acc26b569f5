#include "mfgame/perception.hpp"

#include <cmath>
#include <string>

#include "mfgame/errors.hpp"

namespace mfgame {

std::string_view to_string(Fidelity fidelity) {
  return fidelity == Fidelity::High ? "high" : "low";
}

Fidelity parse_fidelity(std::string_view name) {
  if (name == "high") return Fidelity::High;
  if (name == "low") return Fidelity::Low;
  throw ValidationError("unknown fidelity '" + std::string(name) + "' (expected high|low)");
}

ObservationModel out_the_window_model() { return {900.0, 318.0, Channel::OutTheWindow}; }
ObservationModel instrument_model() { return {600.0, 318.0, Channel::Instrument}; }

void validate(const ObservationModel& model) {
  if (!(model.position_sigma > 0.0) || !(model.velocity_sigma > 0.0) ||
      !std::isfinite(model.position_sigma) || !std::isfinite(model.velocity_sigma)) {
    throw ValidationError("observation sigmas must be finite and positive");
  }
}

AircraftState sample_channel(const AircraftState& true_state, const ObservationModel& model,
                             Rng& rng) {
  validate(model);
  std::normal_distribution<double> z(0.0, 1.0);
  AircraftState out;
  out.px = true_state.px + model.position_sigma * z(rng);
  out.py = true_state.py + model.position_sigma * z(rng);
  out.vx = true_state.vx + model.velocity_sigma * z(rng);
  out.vy = true_state.vy + model.velocity_sigma * z(rng);
  return out;
}

namespace {

double fuse(double a, double b) { return std::sqrt(1.0 / (1.0 / (a * a) + 1.0 / (b * b))); }

}  // namespace

ChannelSigmas fused_model(Fidelity fidelity, const PerceptionConfig& config) {
  validate(config.out_the_window);
  const ObservationModel& ow = config.out_the_window;
  if (fidelity == Fidelity::Low) return {ow.position_sigma, ow.velocity_sigma};
  if (!config.instrument) throw ValidationError("high-fidelity perception needs an instrument channel");
  const ObservationModel& in = *config.instrument;
  validate(in);
  return {fuse(ow.position_sigma, in.position_sigma), fuse(ow.velocity_sigma, in.velocity_sigma)};
}

std::vector<AircraftState> sample_beliefs(const AircraftState& true_state, Fidelity fidelity,
                                          std::size_t m_prime, Rng& rng,
                                          const PerceptionConfig& config) {
  if (m_prime == 0) throw ValidationError("belief sample count must be at least 1");
  validate(true_state);
  const ChannelSigmas sig = fused_model(fidelity, config);
  const ObservationModel fused{sig.position, sig.velocity, Channel::OutTheWindow};
  std::vector<AircraftState> beliefs;
  beliefs.reserve(m_prime);
  for (std::size_t j = 0; j < m_prime; ++j) beliefs.push_back(sample_channel(true_state, fused, rng));
  return beliefs;
}

}  // namespace mfgame
