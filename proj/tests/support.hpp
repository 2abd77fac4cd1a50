#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "boxcast/boxcast.hpp"

namespace boxcast::fixtures {

inline std::vector<double> white_noise(std::mt19937_64& rng, int n, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> out(n);
  for (auto& v : out) v = normal(rng);
  return out;
}

inline std::vector<double> random_walk(std::mt19937_64& rng, int n) {
  auto out = white_noise(rng, n);
  for (int t = 1; t < n; ++t) out[t] += out[t - 1];
  return out;
}

/// AR(1) started from its stationary distribution.
inline std::vector<double> ar1(std::mt19937_64& rng, int n, double phi, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> out(n);
  out[0] = normal(rng) / std::sqrt(1.0 - phi * phi);
  for (int t = 1; t < n; ++t) out[t] = phi * out[t - 1] + normal(rng);
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

/// Noise-free K = 1 surface with linear-drift scores.
inline AgeRateSurface noise_free_surface(double lambda, int n_years = 40, int first_year = 1951) {
  SimulationConfig config;
  config.first_year = first_year;
  config.n_years = n_years;
  config.lambda = lambda;
  config.score_sd = 0.0;
  config.noise_sd = 0.0;
  return simulate_surface(config);
}

}  // namespace boxcast::fixtures
