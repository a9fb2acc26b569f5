#include "mfgame/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "mfgame/errors.hpp"
#include "mfgame/text.hpp"

namespace mfgame {

void validate(const ActionGrid& grid) {
  if (!(grid.bound > 0.0) || !std::isfinite(grid.bound)) throw ValidationError("grid bound must be positive");
  if (grid.nodes < 2) throw ValidationError("grid needs at least 2 nodes per axis");
}

ActionDensity::ActionDensity(ActionGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  validate(grid_);
  if (values_.size() != grid_.nodes * grid_.nodes) {
    throw ValidationError("density has " + std::to_string(values_.size()) + " values, grid needs " +
                          std::to_string(grid_.nodes * grid_.nodes));
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("density values must be finite and >= 0");
  }
}

ActionDensity::Node ActionDensity::nearest(JointAction action) const {
  const double h = grid_.spacing();
  const auto index = [&](double a, bool& clamped) {
    const double pos = std::round((a + grid_.bound) / h);
    const double last = static_cast<double>(grid_.nodes - 1);
    if (!(pos >= 0.0 && pos <= last)) clamped = true;
    return static_cast<std::size_t>(std::clamp(std::isnan(pos) ? 0.0 : pos, 0.0, last));
  };
  Node n;
  n.i = index(action.a1, n.clamped);
  n.j = index(action.a2, n.clamped);
  return n;
}

double ActionDensity::value_at(JointAction action) const {
  const Node n = nearest(action);
  return at(n.i, n.j);
}

namespace {

// Length of node i's trapezoid cell inside [lo, hi].
double cell_length(const ActionGrid& g, std::size_t i, double lo, double hi) {
  const double h = g.spacing();
  const double x = g.coordinate(i);
  const double left = std::max({x - 0.5 * h, -g.bound, lo});
  const double right = std::min({x + 0.5 * h, g.bound, hi});
  return std::max(0.0, right - left);
}

double box_mass(const ActionGrid& g, std::span<const double> values, double lo, double hi) {
  std::vector<double> len(g.nodes);
  for (std::size_t i = 0; i < g.nodes; ++i) len[i] = cell_length(g, i, lo, hi);
  double total = 0.0;
  for (std::size_t i = 0; i < g.nodes; ++i) {
    if (len[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < g.nodes; ++j) row += values[i * g.nodes + j] * len[j];
    total += row * len[i];
  }
  return total;
}

}  // namespace

double ActionDensity::integral() const { return box_mass(grid_, values_, -grid_.bound, grid_.bound); }

double ActionDensity::mass_in_box(double lo, double hi) const { return box_mass(grid_, values_, lo, hi); }

std::string_view to_string(KdeMethod method) {
  return method == KdeMethod::Diffusion ? "diffusion" : "silverman";
}

KdeMethod parse_kde_method(std::string_view name) {
  if (name == "silverman") return KdeMethod::Silverman;
  if (name == "diffusion") return KdeMethod::Diffusion;
  throw ValidationError("unknown KDE method '" + std::string(name) + "' (expected silverman|diffusion)");
}

namespace {

double axis_sd(std::span<const JointAction> samples, bool first) {
  double mean = 0.0;
  for (const auto& s : samples) mean += first ? s.a1 : s.a2;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (const auto& s : samples) {
    const double d = (first ? s.a1 : s.a2) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

// Kernel matrix for one axis: rows are grid nodes, columns samples. Mass leaving
// [-b, b] is folded back by reflecting each sample about both edges.
Eigen::MatrixXd reflected_kernel(const ActionGrid& g, std::span<const JointAction> samples,
                                 bool first, double bandwidth) {
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  const double b = g.bound;
  Eigen::MatrixXd k(g.nodes, samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double a = first ? samples[s].a1 : samples[s].a2;
    for (std::size_t i = 0; i < g.nodes; ++i) {
      const double x = g.coordinate(i);
      double v = 0.0;
      for (double centre : {a, 2.0 * b - a, -2.0 * b - a}) {
        const double u = (x - centre) / bandwidth;
        v += std::exp(-0.5 * u * u);
      }
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = norm * v;
    }
  }
  return k;
}

std::vector<double> silverman_values(std::span<const JointAction> samples, const ActionGrid& g,
                                     double h1, double h2) {
  const Eigen::MatrixXd k1 = reflected_kernel(g, samples, true, h1);
  const Eigen::MatrixXd k2 = reflected_kernel(g, samples, false, h2);
  const Eigen::MatrixXd d = k1 * k2.transpose();
  std::vector<double> values(g.nodes * g.nodes);
  for (std::size_t i = 0; i < g.nodes; ++i) {
    for (std::size_t j = 0; j < g.nodes; ++j) {
      values[i * g.nodes + j] = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return values;
}

ActionDensity finish(const ActionGrid& g, std::vector<double> values, double floor) {
  for (double& v : values) v = std::max(v, 0.0);
  const double total = box_mass(g, values, -g.bound, g.bound);
  if (!(total > 0.0) || !std::isfinite(total)) throw ValidationError("density estimate has no mass on the grid");
  for (double& v : values) v = std::max(v / total, floor);
  return ActionDensity(g, std::move(values));
}

}  // namespace

ActionDensity kde2d(std::span<const JointAction> samples, const KdeConfig& config) {
  validate(config.grid);
  if (!(config.floor >= 0.0)) throw ValidationError("density floor must be non-negative");
  if (samples.size() < 2) throw ValidationError("kernel density estimation needs at least 2 samples");
  const double sd1 = axis_sd(samples, true);
  const double sd2 = axis_sd(samples, false);
  if (!(sd1 > 0.0) || !(sd2 > 0.0)) throw ValidationError("samples have zero spread on an axis");

  if (config.method == KdeMethod::Diffusion) {
    auto d = diffusion_kde2d(samples, config.grid);
    if (!d) throw ValidationError("diffusion bandwidth selection failed");
    return finish(config.grid, std::vector<double>(d->values().begin(), d->values().end()), config.floor);
  }
  double h1 = 0.0, h2 = 0.0;
  if (config.bandwidth) {
    if (!(*config.bandwidth > 0.0)) throw ValidationError("KDE bandwidth must be positive");
    h1 = h2 = *config.bandwidth;
  } else {
    // A kernel narrower than the node spacing would be sampled, not resolved.
    const double shrink = std::pow(static_cast<double>(samples.size()), -1.0 / 6.0);
    h1 = std::max(sd1 * shrink, config.grid.spacing());
    h2 = std::max(sd2 * shrink, config.grid.spacing());
  }
  return finish(config.grid, silverman_values(samples, config.grid, h1, h2), config.floor);
}

WeightGrid make_weight_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("weight grid step must be positive");
  if (!(lo > 0.0 && hi < 1.0 && lo <= hi)) throw ValidationError("weight grid must satisfy 0 < lo <= hi < 1");
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> axis(count);
  for (std::size_t k = 0; k < count; ++k) {
    axis[k] = std::round((lo + step * static_cast<double>(k)) * 1e10) / 1e10;
  }
  if (axis.back() >= 1.0) throw ValidationError("weight grid reaches 1");
  WeightGrid grid;
  grid.spacing = step;
  for (double w1 : axis) {
    for (double w2 : axis) grid.combinations.push_back({w1, w2});
  }
  return grid;
}

std::vector<std::vector<JointAction>> simulate_weight_sweep(const WeightGrid& weights,
                                                            std::span<const Encounter> novel,
                                                            Fidelity fidelity,
                                                            const PilotModel& model,
                                                            std::uint64_t seed) {
  if (novel.empty()) throw ValidationError("no novel encounters");
  if (weights.combinations.empty()) throw ValidationError("weight grid is empty");
  for (const auto& w : weights.combinations) validate(w);
  std::vector<std::vector<JointAction>> actions(weights.size(), std::vector<JointAction>(novel.size()));
  for (std::size_t n = 0; n < novel.size(); ++n) {
    Rng rng = make_rng(derive_seed(seed, n));
    const EncounterTables tables = evaluate_encounter(novel[n], fidelity, model, rng);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      actions[j][n] = select_joint(tables, weights.combinations[j]);
    }
  }
  return actions;
}

DensityFamily build_density_family(const WeightGrid& weights, std::span<const Encounter> novel,
                                   Fidelity fidelity, const PilotModel& model,
                                   const KdeConfig& kde, std::uint64_t seed) {
  const auto sweep = simulate_weight_sweep(weights, novel, fidelity, model, seed);
  DensityFamily family;
  family.fidelity = fidelity;
  family.seed = seed;
  family.weights = weights;
  family.densities.reserve(weights.size());
  for (const auto& actions : sweep) family.densities.push_back(kde2d(actions, kde));
  return family;
}

LogLikelihood log_likelihood(const ActionDensity& density, std::span<const JointAction> actions) {
  if (actions.empty()) throw ValidationError("log likelihood of an empty action list");
  LogLikelihood out;
  for (const JointAction& a : actions) {
    const auto node = density.nearest(a);
    if (node.clamped) ++out.clamped;
    out.value += std::log(density.at(node.i, node.j));
  }
  return out;
}

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::string density_file_name(std::size_t j) {
  std::string digits = std::to_string(j);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "density_" + digits + ".txt";
}

std::string key_value(std::string_view line, std::string_view key) {
  for (auto field : text::split(text::trim(line), ' ')) {
    const auto eq = field.find('=');
    if (eq != std::string_view::npos && field.substr(0, eq) == key) {
      return std::string(field.substr(eq + 1));
    }
  }
  return {};
}

}  // namespace

void save_density(const ActionDensity& density, const DensityHeader& header,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const ActionGrid& g = density.grid();
  out << "# mfgame-density fidelity=" << to_string(header.fidelity)
      << " w1=" << text::format_double(header.weights.w1)
      << " w2=" << text::format_double(header.weights.w2) << " seed=" << header.seed << '\n';
  out << "bound=" << text::format_double(g.bound) << " nodes=" << g.nodes << '\n';
  for (std::size_t i = 0; i < g.nodes; ++i) {
    for (std::size_t j = 0; j < g.nodes; ++j) {
      if (j) out << ',';
      out << text::format_double(density.at(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ActionDensity load_density(const std::filesystem::path& path, DensityHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found or unreadable: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# mfgame-density", 0) != 0) {
    throw ParseError(where(path, 1) + "expected '# mfgame-density ...' metadata line");
  }
  DensityHeader h;
  try {
    h.fidelity = parse_fidelity(key_value(line, "fidelity"));
    h.weights.w1 = text::parse_double(key_value(line, "w1"), "w1");
    h.weights.w2 = text::parse_double(key_value(line, "w2"), "w2");
    h.seed = text::parse_unsigned(key_value(line, "seed"), "seed");
  } catch (const std::exception& ex) {
    throw ParseError(where(path, 1) + ex.what());
  }
  if (!std::getline(in, line)) throw ParseError(where(path, 2) + "missing grid line");
  ActionGrid g;
  try {
    g.bound = text::parse_double(key_value(line, "bound"), "bound");
    g.nodes = text::parse_unsigned(key_value(line, "nodes"), "nodes");
    validate(g);
  } catch (const std::exception& ex) {
    throw ParseError(where(path, 2) + ex.what());
  }
  std::vector<double> values;
  values.reserve(g.nodes * g.nodes);
  for (std::size_t i = 0; i < g.nodes; ++i) {
    if (!std::getline(in, line)) throw ParseError(where(path, i + 3) + "missing density row");
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != g.nodes) {
      throw ParseError(where(path, i + 3) + "expected " + std::to_string(g.nodes) + " values, got " +
                       std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < g.nodes; ++j) {
      values.push_back(text::parse_double(fields[j], "density[" + std::to_string(j) + "]"));
    }
  }
  ActionDensity density(g, std::move(values));
  if (std::abs(density.integral() - 1.0) > 1e-2) {
    throw ParseError(path.string() + ": density integrates to " + text::format_double(density.integral()));
  }
  if (header) *header = h;
  return density;
}

void save_family(const DensityFamily& family, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t j = 0; j < family.densities.size(); ++j) {
    const std::string name = density_file_name(j);
    save_density(family.densities[j], {family.fidelity, family.weights.combinations[j], family.seed},
                 dir / name);
  }
  // Written last: its presence marks a complete family.
  std::ofstream index(dir / "family.txt", std::ios::binary);
  index << "# mfgame-family fidelity=" << to_string(family.fidelity) << " seed=" << family.seed
        << " spacing=" << text::format_double(family.weights.spacing)
        << " count=" << family.densities.size() << '\n';
  if (!index) throw std::runtime_error("write failed for " + (dir / "family.txt").string());
}

DensityFamily load_family(const std::filesystem::path& dir) {
  const auto index_path = dir / "family.txt";
  std::ifstream in(index_path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found or unreadable: " + index_path.string());
  std::string line;
  std::getline(in, line);
  DensityFamily family;
  std::size_t count = 0;
  try {
    family.fidelity = parse_fidelity(key_value(line, "fidelity"));
    family.seed = text::parse_unsigned(key_value(line, "seed"), "seed");
    family.weights.spacing = text::parse_double(key_value(line, "spacing"), "spacing");
    count = text::parse_unsigned(key_value(line, "count"), "count");
  } catch (const std::exception& ex) {
    throw ParseError(where(index_path, 1) + ex.what());
  }
  for (std::size_t j = 0; j < count; ++j) {
    const std::string name = density_file_name(j);
    DensityHeader h;
    family.densities.push_back(load_density(dir / name, &h));
    if (h.fidelity != family.fidelity || h.seed != family.seed) {
      throw ParseError((dir / name).string() + ": metadata disagrees with family index");
    }
    family.weights.combinations.push_back(h.weights);
  }
  return family;
}

}  // namespace mfgame
