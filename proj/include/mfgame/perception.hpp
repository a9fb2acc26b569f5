#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "mfgame/kinematics.hpp"
#include "mfgame/random.hpp"

namespace mfgame {

enum class Fidelity { Low, High };
enum class Channel { OutTheWindow, Instrument };

std::string_view to_string(Fidelity fidelity);
Fidelity parse_fidelity(std::string_view name);

// Axis-independent Gaussian observation noise around the true intruder state.
struct ObservationModel {
  double position_sigma = 0.0;  // ft, per axis
  double velocity_sigma = 0.0;  // ft/s, per axis
  Channel channel = Channel::OutTheWindow;
};

ObservationModel out_the_window_model();  // 900 ft, 318 ft/s
ObservationModel instrument_model();      // 600 ft, 318 ft/s

// The low-fidelity game never reads `instrument`; the high-fidelity game requires it.
struct PerceptionConfig {
  ObservationModel out_the_window = out_the_window_model();
  std::optional<ObservationModel> instrument = instrument_model();
};

struct ChannelSigmas {
  double position = 0.0;
  double velocity = 0.0;
};

void validate(const ObservationModel& model);

AircraftState sample_channel(const AircraftState& true_state, const ObservationModel& model, Rng& rng);

// Effective per-axis sigmas of the belief distribution. High fidelity fuses both
// channels by precision: var = (1/var_ow + 1/var_in)^-1.
ChannelSigmas fused_model(Fidelity fidelity, const PerceptionConfig& config = {});

// m_prime independent draws from the fused observation Gaussian.
std::vector<AircraftState> sample_beliefs(const AircraftState& true_state, Fidelity fidelity,
                                          std::size_t m_prime, Rng& rng,
                                          const PerceptionConfig& config = {});

}  // namespace mfgame
