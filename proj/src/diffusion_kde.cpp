#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Core>

#include "mfgame/density.hpp"

namespace mfgame {

namespace {

constexpr double kPi = std::numbers::pi;

// Functionals of the density built from squared cosine coefficients. `coeff2`
// holds a_kl^2 for the series on [0, 1]^2 (k along a1, l along a2).
class CurvatureFunctionals {
 public:
  CurvatureFunctionals(Eigen::MatrixXd coeff2, double samples)
      : coeff2_(std::move(coeff2)), samples_(samples) {}

  double psi(int s1, int s2, double t) const {
    const Eigen::Index n = coeff2_.rows();
    Eigen::VectorXd u(n), v(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double k2 = static_cast<double>(k * k);
      const double w = (k == 0 ? 1.0 : 0.5) * std::exp(-k2 * kPi * kPi * t);
      u[k] = w * std::pow(k2, s1);
      v[k] = w * std::pow(k2, s2);
    }
    const int s = s1 + s2;
    return (s % 2 == 0 ? 1.0 : -1.0) * u.dot(coeff2_ * v) * std::pow(kPi, 2 * s);
  }

  // Plug-in estimate: lower orders are evaluated at a time derived from the
  // next order up, bottoming out at `t`.
  double func(int s1, int s2, double t) const {
    if (s1 + s2 > 4) return psi(s1, s2, t);
    const double higher = func(s1 + 1, s2, t) + func(s1, s2 + 1, t);
    const int s = s1 + s2;
    const double c = (1.0 + 1.0 / std::pow(2.0, s + 1)) / 3.0;
    const double time = std::pow(-2.0 * c * kernel_constant(s1) * kernel_constant(s2) / samples_ / higher,
                                 1.0 / (2.0 + s));
    return psi(s1, s2, time);
  }

  // Relative gap between t and the time it implies; zero at the fixed point.
  double gap(double t) const {
    const double sum = func(0, 2, t) + func(2, 0, t) + 2.0 * func(1, 1, t);
    const double time = std::pow(2.0 * kPi * samples_ * sum, -1.0 / 3.0);
    return (t - time) / time;
  }

 private:
  static double kernel_constant(int s) {
    double odd = 1.0;
    for (int j = 1; j <= 2 * s - 1; j += 2) odd *= j;
    return (s % 2 == 0 ? 1.0 : -1.0) * odd / std::sqrt(2.0 * kPi);
  }

  Eigen::MatrixXd coeff2_;
  double samples_;
};

std::optional<double> bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0.0) return std::nullopt;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (!std::isfinite(fm)) return std::nullopt;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

// Root search on a widening interval, as in the reference implementation.
std::optional<double> solve_time(const CurvatureFunctionals& fn, double samples) {
  const double n = std::clamp(samples, 50.0, 1050.0);
  double tol = 1e-12 + 0.01 * (n - 50.0) / 1000.0;
  const auto f = [&](double t) { return fn.gap(t); };
  while (true) {
    if (auto root = bisect(f, 0.0, tol)) return root;
    if (tol >= 0.1) break;
    tol = std::min(2.0 * tol, 0.1);
  }
  const double t = golden_min([&](double x) { return std::abs(f(x)); }, 0.0, 0.1);
  if (!std::isfinite(f(t)) || !(t > 0.0)) return std::nullopt;
  return t;
}

}  // namespace

std::optional<ActionDensity> diffusion_kde2d(std::span<const JointAction> samples,
                                             const ActionGrid& grid) {
  validate(grid);
  if (samples.size() < 2) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(grid.nodes);
  const double count = static_cast<double>(samples.size());
  const double width = 2.0 * grid.bound;

  // Histogram on n equal bins of [0, 1] per axis, as fractions of the sample.
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(n, n);
  const auto bin = [&](double a) {
    const double u = (a + grid.bound) / width;
    return static_cast<Eigen::Index>(std::clamp(std::floor(u * static_cast<double>(n)), 0.0,
                                                static_cast<double>(n - 1)));
  };
  for (const auto& s : samples) hist(bin(s.a1), bin(s.a2)) += 1.0 / count;

  // Cosine-series coefficients: c_k = w_k sum_m h_m cos(k pi (2m + 1) / 2n).
  Eigen::MatrixXd forward(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index m = 0; m < n; ++m) {
      forward(k, m) = (k == 0 ? 1.0 : 2.0) *
                      std::cos(kPi * static_cast<double>(k * (2 * m + 1)) / (2.0 * static_cast<double>(n)));
    }
  }
  const Eigen::MatrixXd coeff = forward * hist * forward.transpose();

  const CurvatureFunctionals fn(coeff.cwiseProduct(coeff), count);
  const auto t_star = solve_time(fn, count);
  if (!t_star) return std::nullopt;

  const double p02 = fn.func(0, 2, *t_star);
  const double p20 = fn.func(2, 0, *t_star);
  const double p11 = fn.func(1, 1, *t_star);
  const double cross = p11 + std::sqrt(p20 * p02);
  const double t1 = std::pow(std::pow(p02, 0.75) / (4.0 * kPi * count * std::pow(p20, 0.75) * cross), 1.0 / 3.0);
  const double t2 = std::pow(std::pow(p20, 0.75) / (4.0 * kPi * count * std::pow(p02, 0.75) * cross), 1.0 / 3.0);
  if (!std::isfinite(t1) || !std::isfinite(t2) || !(t1 > 0.0) || !(t2 > 0.0)) return std::nullopt;

  // Smoothed series evaluated at the grid nodes, u_i = i / (n - 1).
  const auto basis = [&](double t) {
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(n - 1);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        b(i, k) = std::cos(kk * kPi * u) * std::exp(-kk * kk * kPi * kPi * t / 2.0);
      }
    }
    return b;
  };
  const Eigen::MatrixXd dens = basis(t1) * coeff * basis(t2).transpose() / (width * width);

  std::vector<double> values(grid.nodes * grid.nodes);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = dens(i, j);
      if (!std::isfinite(v)) return std::nullopt;
      values[static_cast<std::size_t>(i * n + j)] = std::max(v, 0.0);
    }
  }
  return ActionDensity(grid, std::move(values));
}

}  // namespace mfgame
