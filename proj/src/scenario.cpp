#include "mfgame/scenario.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "mfgame/errors.hpp"
#include "mfgame/text.hpp"

namespace mfgame {

void validate(const GeometryConfig& c) {
  if (!(c.range > 0.0) || !(c.speed > 0.0)) throw ValidationError("range and speed must be positive");
  if (!(c.heading_sigma_deg >= 0.0)) throw ValidationError("heading sigma must be non-negative");
  if (!(c.collision_threshold > 0.0)) throw ValidationError("collision threshold must be positive");
  if (!(c.fov_half_angle_deg > 0.0 && c.fov_half_angle_deg <= 180.0)) {
    throw ValidationError("field-of-view half angle must be in (0, 180] degrees");
  }
  if (c.max_attempts < 1) throw ValidationError("max_attempts must be at least 1");
}

std::span<const double> bearings(EncounterSet set) {
  return set == EncounterSet::Test ? std::span<const double>(kTestBearings)
                                   : std::span<const double>(kTrainBearings);
}

EncounterSet parse_encounter_set(std::string_view name) {
  if (name == "train") return EncounterSet::Train;
  if (name == "test") return EncounterSet::Test;
  if (name == "novel") return EncounterSet::Novel;
  throw ValidationError("unknown encounter set '" + std::string(name) + "' (expected train|test|novel)");
}

namespace {

AircraftState flying(double x, double y, double heading_rad, double speed) {
  return {x, y, speed * std::cos(heading_rad), speed * std::sin(heading_rad)};
}

Encounter build(double bearing_deg, double noise1_rad, double noise2_rad, const GeometryConfig& c) {
  const double b = deg_to_rad(bearing_deg);
  const double x2 = -c.range * std::sin(b);
  const double y2 = c.range * std::cos(b);
  Encounter e;
  e.s1 = flying(0.0, -c.range, std::numbers::pi / 2.0 + noise1_rad, c.speed);
  e.s2 = flying(x2, y2, std::atan2(-y2, -x2) + noise2_rad, c.speed);
  return e;
}

}  // namespace

Encounter nominal_encounter(double bearing_deg, const GeometryConfig& config) {
  validate(config);
  return build(bearing_deg, 0.0, 0.0, config);
}

bool in_field_of_view(const AircraftState& observer, const AircraftState& target,
                      double half_angle_deg) {
  const double los = std::atan2(target.py - observer.py, target.px - observer.px);
  const double off = std::abs(wrap_angle(los - heading(observer)));
  return off <= deg_to_rad(half_angle_deg);
}

Encounter sample_encounter(std::span<const double> bearings_deg, const GeometryConfig& config,
                           Rng& rng) {
  if (bearings_deg.empty()) throw ValidationError("approach bearing set is empty");
  validate(config);
  std::uniform_int_distribution<std::size_t> pick(0, bearings_deg.size() - 1);
  std::normal_distribution<double> z(0.0, 1.0);
  const double sigma = deg_to_rad(config.heading_sigma_deg);
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const double bearing = bearings_deg[pick(rng)];
    const double n1 = sigma * z(rng);
    const double n2 = sigma * z(rng);
    Encounter e = build(bearing, n1, n2, config);
    if (in_field_of_view(e.s1, e.s2, config.fov_half_angle_deg)) return e;
  }
  throw ValidationError("could not place the intruder inside the field of view after " +
                        std::to_string(config.max_attempts) + " attempts");
}

std::vector<Encounter> sample_encounters(std::size_t n, std::span<const double> bearings_deg,
                                         const GeometryConfig& config, std::uint64_t seed) {
  std::vector<Encounter> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(derive_seed(seed, tag("encounter"), i));
    out.push_back(sample_encounter(bearings_deg, config, rng));
  }
  return out;
}

Dataset generate_dataset(std::size_t n, Fidelity fidelity, UtilityWeights weights,
                         std::span<const double> bearings_deg, const GameConfig& config,
                         std::uint64_t seed) {
  if (n == 0) throw ValidationError("dataset size must be at least 1");
  validate(weights);
  Dataset d;
  d.fidelity = fidelity;
  d.weights = weights;
  d.seed = seed;
  d.records.resize(n);
  const std::vector<Encounter> encounters = sample_encounters(n, bearings_deg, config.geometry, seed);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(derive_seed(seed, tag("decision"), i));
    d.records[i].encounter = encounters[i];
    d.records[i].action = joint_decision(encounters[i], weights, fidelity, config.pilot, rng);
  }
  return d;
}

std::vector<Encounter> encounters_of(const Dataset& dataset) {
  std::vector<Encounter> out;
  out.reserve(dataset.records.size());
  for (const Record& r : dataset.records) out.push_back(r.encounter);
  return out;
}

std::vector<JointAction> actions_of(const Dataset& dataset) {
  std::vector<JointAction> out;
  out.reserve(dataset.records.size());
  for (const Record& r : dataset.records) out.push_back(r.action);
  return out;
}

Dataset prefix(const Dataset& dataset, std::size_t n) {
  if (n > dataset.records.size()) {
    throw ValidationError("requested " + std::to_string(n) + " records from a dataset of " +
                          std::to_string(dataset.records.size()));
  }
  Dataset out = dataset;
  out.records.resize(n);
  return out;
}

namespace {

constexpr const char* kColumns[] = {"s1_px", "s1_py", "s1_vx", "s1_vy", "s2_px",
                                    "s2_py", "s2_vx", "s2_vy", "a1",    "a2"};
constexpr std::size_t kColumnCount = 10;

std::string header_row() {
  std::string h;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i) h += ',';
    h += kColumns[i];
  }
  return h;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (dataset.records.empty()) throw ValidationError("refusing to save an empty dataset");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  using text::format_double;
  out << "# mfgame-dataset fidelity=" << to_string(dataset.fidelity)
      << " w1=" << format_double(dataset.weights.w1) << " w2=" << format_double(dataset.weights.w2)
      << " seed=" << dataset.seed << '\n';
  out << header_row() << '\n';
  for (const Record& r : dataset.records) {
    const Encounter& e = r.encounter;
    const double v[kColumnCount] = {e.s1.px, e.s1.py, e.s1.vx, e.s1.vy, e.s2.px,
                                    e.s2.py, e.s2.vx, e.s2.vy, r.action.a1, r.action.a2};
    for (std::size_t i = 0; i < kColumnCount; ++i) {
      if (i) out << ',';
      out << format_double(v[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found or unreadable: " + path.string());
  Dataset d;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(where(path, 1) + "missing metadata line");
  ++lineno;
  {
    const auto fields = text::split(text::trim(line), ' ');
    if (fields.size() < 2 || fields[0] != "#" || fields[1] != "mfgame-dataset") {
      throw ParseError(where(path, lineno) + "expected '# mfgame-dataset ...' metadata line");
    }
    bool have_fid = false, have_w1 = false, have_w2 = false, have_seed = false;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = fields[i].substr(0, eq);
      const auto value = fields[i].substr(eq + 1);
      try {
        if (key == "fidelity") d.fidelity = parse_fidelity(value), have_fid = true;
        else if (key == "w1") d.weights.w1 = text::parse_double(value, "w1"), have_w1 = true;
        else if (key == "w2") d.weights.w2 = text::parse_double(value, "w2"), have_w2 = true;
        else if (key == "seed") d.seed = text::parse_unsigned(value, "seed"), have_seed = true;
      } catch (const std::exception& ex) {
        throw ParseError(where(path, lineno) + "field " + std::string(key) + ": " + ex.what());
      }
    }
    if (!(have_fid && have_w1 && have_w2 && have_seed)) {
      throw ParseError(where(path, lineno) + "metadata needs fidelity, w1, w2 and seed");
    }
  }

  if (!std::getline(in, line)) throw ParseError(where(path, 2) + "missing header row");
  ++lineno;
  if (text::trim(line) != header_row()) {
    throw ParseError(where(path, lineno) + "unexpected header row, expected '" + header_row() + "'");
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != kColumnCount) {
      throw ParseError(where(path, lineno) + "expected " + std::to_string(kColumnCount) +
                       " fields, got " + std::to_string(fields.size()));
    }
    double v[kColumnCount];
    for (std::size_t i = 0; i < kColumnCount; ++i) {
      try {
        v[i] = text::parse_double(fields[i], kColumns[i]);
      } catch (const ParseError& ex) {
        throw ParseError(where(path, lineno) + "field " + kColumns[i] + ": " + ex.what());
      }
    }
    Record r;
    r.encounter.s1 = {v[0], v[1], v[2], v[3]};
    r.encounter.s2 = {v[4], v[5], v[6], v[7]};
    r.action = {v[8], v[9]};
    d.records.push_back(r);
  }
  if (d.records.empty()) throw ParseError(where(path, lineno) + "dataset has no records");
  return d;
}

}  // namespace mfgame
