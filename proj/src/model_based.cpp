#include "mfgame/model_based.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mfgame/errors.hpp"
#include "mfgame/text.hpp"

namespace mfgame {

namespace {

double log_sum_exp(std::span<const double> x) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

std::vector<double> log_normalized(std::vector<double> x) {
  const double z = log_sum_exp(x);
  for (double& v : x) v -= z;
  return x;
}

}  // namespace

void validate(const WeightPosterior& posterior) {
  if (posterior.probabilities.size() != posterior.weights.size()) {
    throw ValidationError("posterior has " + std::to_string(posterior.probabilities.size()) +
                          " probabilities for " + std::to_string(posterior.weights.size()) + " weights");
  }
  if (posterior.probabilities.empty()) throw ValidationError("posterior is empty");
  double total = 0.0;
  for (double p : posterior.probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("posterior probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("posterior sums to " + text::format_double(total) + ", expected 1");
  }
}

CrossFidelityPrior::CrossFidelityPrior(const std::array<double, 4>& mean,
                                       const Eigen::Matrix4d& covariance)
    : mean_(mean), covariance_(covariance) {
  for (double m : mean_) {
    if (!std::isfinite(m)) throw ValidationError("prior mean must be finite");
  }
  if (!covariance_.allFinite() || !covariance_.isApprox(covariance_.transpose(), 1e-12)) {
    throw ValidationError("prior covariance must be finite and symmetric");
  }
  // Cholesky alone lets a rounding-level pivot through for singular matrices.
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(covariance_, Eigen::EigenvaluesOnly);
  const auto ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-10 * ev.cwiseAbs().maxCoeff())) {
    throw ValidationError("prior covariance is not positive definite");
  }
  const Eigen::LLT<Eigen::Matrix4d> llt(covariance_);
  if (llt.info() != Eigen::Success) throw ValidationError("prior covariance is not positive definite");
  const Eigen::Matrix4d lower = llt.matrixL();
  precision_ = llt.solve(Eigen::Matrix4d::Identity());
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  log_normalizer_ = -0.5 * (4.0 * std::log(2.0 * std::numbers::pi) + log_det);
}

Eigen::Matrix4d CrossFidelityPrior::coupled_covariance(double variance, double cross) {
  Eigen::Matrix4d c = Eigen::Matrix4d::Identity() * variance;
  c(0, 2) = c(2, 0) = cross;
  c(1, 3) = c(3, 1) = cross;
  return c;
}

CrossFidelityPrior CrossFidelityPrior::centered_on(UtilityWeights lofi, UtilityWeights hifi,
                                                   double variance, double cross) {
  return CrossFidelityPrior({lofi.w1, lofi.w2, hifi.w1, hifi.w2}, coupled_covariance(variance, cross));
}

double CrossFidelityPrior::log_density(UtilityWeights lofi, UtilityWeights hifi) const {
  const Eigen::Vector4d d(lofi.w1 - mean_[0], lofi.w2 - mean_[1], hifi.w1 - mean_[2], hifi.w2 - mean_[3]);
  return log_normalizer_ - 0.5 * d.dot(precision_ * d);
}

std::vector<double> grid_log_likelihoods(const DensityFamily& family,
                                         std::span<const JointAction> actions) {
  std::vector<double> out(family.densities.size(), 0.0);
  if (actions.empty()) return out;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = log_likelihood(family.densities[j], actions).value;
  return out;
}

namespace {

void check_family(const DensityFamily& family) {
  if (family.densities.empty()) throw ValidationError("density family is empty");
  if (family.densities.size() != family.weights.size()) {
    throw ValidationError("density family has " + std::to_string(family.densities.size()) +
                          " densities for " + std::to_string(family.weights.size()) + " weights");
  }
}

MapEstimate argmax(const WeightGrid& grid, std::vector<double> scores, std::span<const double> log_prior) {
  if (!log_prior.empty()) {
    if (log_prior.size() != scores.size()) {
      throw ValidationError("log prior has " + std::to_string(log_prior.size()) + " entries for " +
                            std::to_string(scores.size()) + " weights");
    }
    for (std::size_t j = 0; j < scores.size(); ++j) scores[j] += log_prior[j];
  }
  MapEstimate est;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[est.index]) est.index = j;
  }
  est.weights = grid.combinations[est.index];
  est.scores = std::move(scores);
  return est;
}

}  // namespace

MapEstimate map_estimate_hifi(std::span<const JointAction> hifi_actions, const DensityFamily& high,
                              std::span<const double> log_prior) {
  check_family(high);
  return argmax(high.weights, grid_log_likelihoods(high, hifi_actions), log_prior);
}

MapEstimate map_estimate_multifidelity(std::span<const JointAction> lofi_actions,
                                       std::span<const JointAction> hifi_actions,
                                       const DensityFamily& low, const DensityFamily& high,
                                       std::span<const double> log_prior) {
  check_family(low);
  check_family(high);
  if (!(low.weights.combinations == high.weights.combinations)) {
    throw ValidationError("low- and high-fidelity families must share a weight grid");
  }
  auto scores = grid_log_likelihoods(high, hifi_actions);
  const auto lofi = grid_log_likelihoods(low, lofi_actions);
  for (std::size_t j = 0; j < scores.size(); ++j) scores[j] += lofi[j];
  return argmax(high.weights, std::move(scores), log_prior);
}

MapEstimate map_estimate_hifi(const Dataset& hifi_train, const DensityFamily& high,
                              std::span<const double> log_prior) {
  if (hifi_train.records.empty()) throw ValidationError("high-fidelity training set is empty");
  return map_estimate_hifi(actions_of(hifi_train), high, log_prior);
}

MapEstimate map_estimate_multifidelity(const Dataset& lofi_train, const Dataset& hifi_train,
                                       const DensityFamily& low, const DensityFamily& high,
                                       std::span<const double> log_prior) {
  if (lofi_train.records.empty()) throw ValidationError("low-fidelity training set is empty");
  if (hifi_train.records.empty()) throw ValidationError("high-fidelity training set is empty");
  return map_estimate_multifidelity(actions_of(lofi_train), actions_of(hifi_train), low, high, log_prior);
}

WeightPosterior bayes_posterior(std::span<const JointAction> lofi_actions,
                                std::span<const JointAction> hifi_actions,
                                const DensityFamily& low, const DensityFamily& high,
                                const CrossFidelityPrior& prior) {
  check_family(low);
  check_family(high);
  const auto log_high = log_normalized(grid_log_likelihoods(high, hifi_actions));
  const auto log_low = log_normalized(grid_log_likelihoods(low, lofi_actions));

  std::vector<double> log_post(high.weights.size());
  std::vector<double> terms(low.weights.size());
  for (std::size_t j = 0; j < log_post.size(); ++j) {
    const UtilityWeights wh = high.weights.combinations[j];
    for (std::size_t k = 0; k < terms.size(); ++k) {
      terms[k] = log_low[k] + prior.log_density(low.weights.combinations[k], wh);
    }
    log_post[j] = log_high[j] + log_sum_exp(terms);
  }
  log_post = log_normalized(std::move(log_post));

  WeightPosterior post;
  post.weights = high.weights;
  post.probabilities.resize(log_post.size());
  for (std::size_t j = 0; j < log_post.size(); ++j) post.probabilities[j] = std::exp(log_post[j]);
  // exp() of normalized logs can drift by a few ulps in the sum.
  double total = 0.0;
  for (double p : post.probabilities) total += p;
  for (double& p : post.probabilities) p /= total;
  return post;
}

namespace {

// Tables for every (encounter, sample) pair, shared by all weights.
std::vector<EncounterTables> sample_tables(std::span<const Encounter> test, const PilotModel& model,
                                           std::size_t n_samples, std::uint64_t seed, Fidelity fidelity) {
  if (n_samples == 0) throw ValidationError("n_samples must be at least 1");
  std::vector<EncounterTables> tables;
  tables.reserve(test.size() * n_samples);
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t l = 0; l < n_samples; ++l) {
      Rng rng = make_rng(derive_seed(seed, i, l));
      tables.push_back(evaluate_encounter(test[i], fidelity, model, rng));
    }
  }
  return tables;
}

JointAction averaged(std::span<const EncounterTables> samples, UtilityWeights w) {
  JointAction sum{0.0, 0.0};
  for (const auto& t : samples) {
    const JointAction a = select_joint(t, w);
    sum.a1 += a.a1;
    sum.a2 += a.a2;
  }
  const double n = static_cast<double>(samples.size());
  return {sum.a1 / n, sum.a2 / n};
}

}  // namespace

std::vector<JointAction> predict_map(std::span<const Encounter> test, UtilityWeights weights,
                                     const PilotModel& model, std::size_t n_samples,
                                     std::uint64_t seed, Fidelity fidelity) {
  validate(weights);
  const auto tables = sample_tables(test, model, n_samples, seed, fidelity);
  std::vector<JointAction> out(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    out[i] = averaged(std::span(tables).subspan(i * n_samples, n_samples), weights);
  }
  return out;
}

BayesPrediction predict_bayes(std::span<const Encounter> test, const WeightPosterior& posterior,
                              const PilotModel& model, std::size_t n_samples, std::uint64_t seed,
                              double cutoff) {
  validate(posterior);
  std::vector<std::size_t> kept;
  BayesPrediction out;
  double kept_mass = 0.0;
  for (std::size_t j = 0; j < posterior.probabilities.size(); ++j) {
    const double p = posterior.probabilities[j];
    if (p < cutoff) {
      ++out.skipped_components;
      out.skipped_mass += p;
    } else {
      kept.push_back(j);
      kept_mass += p;
    }
  }
  // A flat posterior could fall entirely under the cutoff; keep its largest entry.
  if (kept.empty()) {
    const auto top = std::max_element(posterior.probabilities.begin(), posterior.probabilities.end()) -
                     posterior.probabilities.begin();
    kept.push_back(static_cast<std::size_t>(top));
    kept_mass = posterior.probabilities[kept.back()];
    --out.skipped_components;
    out.skipped_mass -= kept_mass;
  }

  const auto tables = sample_tables(test, model, n_samples, seed, Fidelity::High);
  out.actions.resize(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto samples = std::span(tables).subspan(i * n_samples, n_samples);
    JointAction mix{0.0, 0.0};
    for (std::size_t j : kept) {
      const JointAction a = averaged(samples, posterior.weights.combinations[j]);
      const double p = posterior.probabilities[j];
      mix.a1 += p * a.a1;
      mix.a2 += p * a.a2;
    }
    out.actions[i] = {mix.a1 / kept_mass, mix.a2 / kept_mass};
  }
  return out;
}

void save_posterior(const WeightPosterior& posterior, const std::filesystem::path& path) {
  validate(posterior);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "w1,w2,probability\n";
  for (std::size_t j = 0; j < posterior.probabilities.size(); ++j) {
    const auto& w = posterior.weights.combinations[j];
    out << text::format_double(w.w1) << ',' << text::format_double(w.w2) << ','
        << text::format_double(posterior.probabilities[j]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

WeightPosterior load_posterior(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found or unreadable: " + path.string());
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "w1,w2,probability") {
    throw ParseError(path.string() + ":1: expected header 'w1,w2,probability'");
  }
  WeightPosterior post;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (fields.size() != 3) {
      throw ParseError(where + "expected 3 fields, got " + std::to_string(fields.size()));
    }
    try {
      post.weights.combinations.push_back(
          {text::parse_double(fields[0], "w1"), text::parse_double(fields[1], "w2")});
      post.probabilities.push_back(text::parse_double(fields[2], "probability"));
    } catch (const ParseError& ex) {
      throw ParseError(where + ex.what());
    }
  }
  // Recover the spacing from the distinct w1 values.
  std::vector<double> axis;
  for (const auto& w : post.weights.combinations) axis.push_back(w.w1);
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  if (axis.size() > 1) post.weights.spacing = axis[1] - axis[0];
  try {
    validate(post);
  } catch (const ValidationError& ex) {
    throw ParseError(path.string() + ": " + ex.what());
  }
  return post;
}

WeightPosterior point_mass(const WeightGrid& grid, std::size_t index) {
  if (index >= grid.size()) throw ValidationError("point mass index outside the weight grid");
  WeightPosterior post;
  post.weights = grid;
  post.probabilities.assign(grid.size(), 0.0);
  post.probabilities[index] = 1.0;
  return post;
}

}  // namespace mfgame
