#pragma once

#include "mfgame/experiment.hpp"

// Reduced settings that keep whole-experiment tests to seconds.
inline const char* kSmallConfigText = R"(# reduced experiment
scenario = identical
lofi_count = 60
hifi_counts = 2,5
replicates = 2
seed = 17
test_count = 15
novel_count = 120
n_samples = 3
grid_lo = 0.80
grid_hi = 0.98
grid_step = 0.06
kde_nodes = 48
m = 24
m_prime = 12
threads = 1
)";

inline mfgame::ExperimentConfig small_config() {
  mfgame::ExperimentConfig c;
  mfgame::apply_config_text(c, kSmallConfigText, "small");
  return c;
}
