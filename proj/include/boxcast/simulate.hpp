#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "boxcast/data.hpp"
#include "boxcast/errors.hpp"
#include "boxcast/transform.hpp"

namespace boxcast {

/// Synthetic surface generator: on the lambda-transformed scale,
///   z_{t,i} = mu_i + sum_k beta_{t,k} phi_{k,i} + eps_{t,i},
/// with random-walk-with-drift scores and i.i.d. Gaussian noise, then mapped
/// back to rates. Perturbation sizes are fractions of the spread of mu across
/// ages, so one setting means the same signal-to-noise for every lambda.
struct SimulationConfig {
  int first_year = 1921;
  int n_years = 60;
  int first_age = 15;
  int n_ages = 35;
  double lambda = 0.5;
  int k = 1;
  /// total drift of the first score over the whole span
  double total_drift = 3.0;
  /// per-year innovation s.d. of the scores
  double score_sd = 0.005;
  /// s.d. of the cell noise
  double noise_sd = 0.01;
  std::uint64_t seed = 1;
};

namespace detail {

/// Fertility-shaped baseline on the rate scale: a peak in the late twenties
/// over a small positive floor.
inline double baseline_rate(double age) {
  const double x = (age - 27.0) / 6.5;
  return 0.03 + 0.17 * std::exp(-0.5 * x * x);
}

/// Smooth age profiles used as components; orthonormalized by the caller.
inline double profile(int k, double age) {
  switch (k % 3) {
    case 0: return std::exp(-0.5 * std::pow((age - 23.0) / 4.5, 2));
    case 1: return std::exp(-0.5 * std::pow((age - 33.0) / 4.5, 2));
    default: return std::exp(-0.5 * std::pow((age - 28.0) / 3.0, 2)) * (age - 28.0) / 3.0;
  }
}

}  // namespace detail

inline AgeRateSurface simulate_surface(const SimulationConfig& config) {
  if (config.n_years < 2 || config.n_ages < 2) throw ValidationError("simulation grid too small");
  if (config.k < 1 || config.k > config.n_ages) throw ValidationError("invalid component count");
  if (config.score_sd < 0.0 || config.noise_sd < 0.0) {
    throw ValidationError("simulation standard deviations must be nonnegative");
  }
  const BoxCoxLambda lambda(config.lambda);
  const int n = config.n_years, p = config.n_ages;

  Eigen::VectorXd mu(p);
  for (int a = 0; a < p; ++a) mu(a) = box_cox(detail::baseline_rate(config.first_age + a), lambda);
  const double spread = mu.maxCoeff() - mu.minCoeff();

  Eigen::MatrixXd phi(p, config.k);
  for (int k = 0; k < config.k; ++k) {
    for (int a = 0; a < p; ++a) phi(a, k) = detail::profile(k, config.first_age + a);
  }
  phi = Eigen::HouseholderQR<Eigen::MatrixXd>(phi).householderQ() * Eigen::MatrixXd::Identity(p, config.k);
  for (int k = 0; k < config.k; ++k) {
    if (phi.col(k).sum() < 0.0) phi.col(k) *= -1.0;
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // scores in units of the mean curve's spread; the first one drifts down
  Eigen::MatrixXd beta(n, config.k);
  for (int k = 0; k < config.k; ++k) {
    const double drift = -config.total_drift * spread / (n - 1) / (k + 1);
    double level = 0.0;
    for (int t = 0; t < n; ++t) {
      if (t > 0) level += drift + config.score_sd * spread * normal(rng);
      beta(t, k) = level;
    }
  }
  // centre the drift so the mean curve stays the baseline mid-span
  beta.rowwise() -= beta.colwise().mean();

  const double lower_edge = lambda.is_log() ? -std::numeric_limits<double>::infinity()
                                            : -1.0 / lambda.value();
  Eigen::MatrixXd rates(n, p);
  for (int t = 0; t < n; ++t) {
    for (int a = 0; a < p; ++a) {
      const double signal = mu(a) + beta.row(t).dot(phi.row(a));
      if (!(signal > lower_edge)) {
        throw ValidationError("simulated signal leaves the Box-Cox domain; reduce the drift");
      }
      double z = signal;
      // noise draws crossing the domain edge are redrawn (truncated normal)
      for (int tries = 0;; ++tries) {
        z = signal + config.noise_sd * spread * normal(rng);
        if (z > lower_edge + 1e-9 * spread || tries > 1000) break;
      }
      if (!(z > lower_edge)) z = signal;
      rates(t, a) = inv_box_cox(z, lambda);
    }
  }
  return AgeRateSurface(config.first_year, config.first_age, std::move(rates));
}

}  // namespace boxcast
