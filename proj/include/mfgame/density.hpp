#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfgame/kinematics.hpp"
#include "mfgame/perception.hpp"
#include "mfgame/pilot.hpp"

namespace mfgame {

// Square node grid over joint-action space, [-bound, bound] on both axes.
struct ActionGrid {
  double bound = 1.0;
  std::size_t nodes = 128;

  double spacing() const { return 2.0 * bound / static_cast<double>(nodes - 1); }
  double coordinate(std::size_t i) const { return -bound + spacing() * static_cast<double>(i); }

  friend bool operator==(const ActionGrid&, const ActionGrid&) = default;
};

void validate(const ActionGrid& grid);

// Values are row-major: index i * nodes + j holds the density at (a1_i, a2_j).
class ActionDensity {
 public:
  ActionDensity(ActionGrid grid, std::vector<double> values);

  const ActionGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * grid_.nodes + j]; }

  struct Node {
    std::size_t i = 0;
    std::size_t j = 0;
    bool clamped = false;  // the action lay outside the grid
  };
  Node nearest(JointAction action) const;
  double value_at(JointAction action) const;

  // Trapezoidal integral over the full grid.
  double integral() const;
  // Mass over [lo, hi]^2 using the trapezoid's node cells clipped to the box.
  double mass_in_box(double lo, double hi) const;

 private:
  ActionGrid grid_;
  std::vector<double> values_;
};

enum class KdeMethod { Silverman, Diffusion };

std::string_view to_string(KdeMethod method);
KdeMethod parse_kde_method(std::string_view name);

struct KdeConfig {
  ActionGrid grid;
  KdeMethod method = KdeMethod::Silverman;
  double floor = 1e-12;
  // Silverman only: fixed per-axis bandwidth instead of the plug-in rule.
  std::optional<double> bandwidth;
};

// Two-dimensional density estimate normalized on the grid, floored at `floor`.
// Silverman: Gaussian product kernel, per-axis bandwidth sigma * n^(-1/6) but at
// least one grid spacing, reflected at the grid edges. Diffusion: Botev et al. (2010) plug-in estimator on
// a cosine-series grid.
ActionDensity kde2d(std::span<const JointAction> samples, const KdeConfig& config);

// Diffusion estimator on its own; returns nullopt when the bandwidth fixed point
// has no root. Exposed for testing.
std::optional<ActionDensity> diffusion_kde2d(std::span<const JointAction> samples,
                                             const ActionGrid& grid);

struct WeightGrid {
  std::vector<UtilityWeights> combinations;
  double spacing = 0.0;

  std::size_t size() const { return combinations.size(); }
  friend bool operator==(const WeightGrid&, const WeightGrid&) = default;
};

// Full product {lo, lo + step, ..., hi}^2, player 1 varying slowest.
WeightGrid make_weight_grid(double lo, double hi, double step);

struct DensityFamily {
  Fidelity fidelity = Fidelity::High;
  std::uint64_t seed = 0;
  WeightGrid weights;
  std::vector<ActionDensity> densities;
};

// Simulates every novel encounter once per grid weight, pooling the joint actions
// for each weight into one density. Encounter n uses the stream derived from
// (seed, n) for every weight, so neighbouring weights differ only through the
// weight itself.
DensityFamily build_density_family(const WeightGrid& weights, std::span<const Encounter> novel,
                                   Fidelity fidelity, const PilotModel& model,
                                   const KdeConfig& kde, std::uint64_t seed);

// Joint actions simulated for each grid weight (outer index = weight).
std::vector<std::vector<JointAction>> simulate_weight_sweep(const WeightGrid& weights,
                                                            std::span<const Encounter> novel,
                                                            Fidelity fidelity,
                                                            const PilotModel& model,
                                                            std::uint64_t seed);

struct LogLikelihood {
  double value = 0.0;
  std::size_t clamped = 0;  // actions outside the grid, scored at the boundary node
};

// Sum of ln(density) at the nearest grid node of each action.
LogLikelihood log_likelihood(const ActionDensity& density, std::span<const JointAction> actions);

struct DensityHeader {
  Fidelity fidelity = Fidelity::High;
  UtilityWeights weights;
  std::uint64_t seed = 0;
};

// Cache file: one metadata comment, one grid line, then `nodes` rows of values.
// Loading rejects files whose integral is off by more than 1e-2.
void save_density(const ActionDensity& density, const DensityHeader& header,
                  const std::filesystem::path& path);
ActionDensity load_density(const std::filesystem::path& path, DensityHeader* header = nullptr);

// One density file per weight under `dir`.
void save_family(const DensityFamily& family, const std::filesystem::path& dir);
DensityFamily load_family(const std::filesystem::path& dir);

}  // namespace mfgame
