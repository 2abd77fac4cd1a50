#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "boxcast/data.hpp"
#include "boxcast/errors.hpp"

namespace boxcast {

/// One-parameter Box-Cox power, restricted to the unit interval.
class BoxCoxLambda {
 public:
  /// |lambda| below this is evaluated on the logarithm branch.
  static constexpr double kLogThreshold = 1e-10;

  constexpr BoxCoxLambda() = default;
  explicit BoxCoxLambda(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ValidationError("Box-Cox lambda must lie in [0, 1], got " + std::to_string(value));
    }
  }

  [[nodiscard]] constexpr double value() const noexcept { return value_; }
  [[nodiscard]] constexpr bool is_log() const noexcept { return value_ < kLogThreshold; }

  friend constexpr bool operator==(BoxCoxLambda, BoxCoxLambda) = default;

 private:
  double value_ = 0.0;
};

inline double box_cox(double f, BoxCoxLambda lambda) {
  if (!(f > 0.0)) {
    throw DataError("Box-Cox transform needs a positive value, got " + std::to_string(f));
  }
  if (lambda.is_log()) return std::log(f);
  const double l = lambda.value();
  // expm1 keeps precision when l * ln f is small
  return std::expm1(l * std::log(f)) / l;
}

/// Exact inverse of `box_cox`; throws NumericalError outside its domain
/// (lambda * z + 1 <= 0).
inline double inv_box_cox(double z, BoxCoxLambda lambda) {
  if (lambda.is_log()) return std::exp(z);
  const double l = lambda.value();
  const double base = l * z + 1.0;
  if (!(base > 0.0)) {
    throw NumericalError("inverse Box-Cox undefined: lambda*z + 1 = " + std::to_string(base));
  }
  return std::exp(std::log1p(l * z) / l);
}

/// Box-Cox transformed surface; shares the axes of its source.
struct TransformedSurface {
  int first_year;
  int first_age;
  BoxCoxLambda lambda;
  Eigen::MatrixXd values;

  [[nodiscard]] int n_years() const noexcept { return static_cast<int>(values.rows()); }
  [[nodiscard]] int n_ages() const noexcept { return static_cast<int>(values.cols()); }
};

inline TransformedSurface transform_surface(const AgeRateSurface& surface, BoxCoxLambda lambda) {
  TransformedSurface out{surface.first_year(), surface.first_age(), lambda,
                         Eigen::MatrixXd(surface.n_years(), surface.n_ages())};
  const auto& f = surface.rates();
  for (Eigen::Index t = 0; t < f.rows(); ++t) {
    for (Eigen::Index a = 0; a < f.cols(); ++a) out.values(t, a) = box_cox(f(t, a), lambda);
  }
  return out;
}

}  // namespace boxcast
