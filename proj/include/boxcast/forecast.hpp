#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boxcast/arima.hpp"
#include "boxcast/decomposition.hpp"
#include "boxcast/errors.hpp"
#include "boxcast/normal.hpp"
#include "boxcast/transform.hpp"

namespace boxcast {

/// Per-component score forecasts; column k holds horizons 1..H of component k.
struct ScoreForecast {
  Eigen::MatrixXd points;
  Eigen::MatrixXd variances;
  std::vector<arima::ArimaFit> models;

  [[nodiscard]] int horizon() const noexcept { return static_cast<int>(points.rows()); }
};

/// Rate forecast for horizons 1..H (rows) by age (columns), on both scales.
/// `rate_point` is a median forecast on the rate scale.
struct RateForecast {
  int first_age = 0;
  double alpha = 0.2;
  BoxCoxLambda lambda;
  Eigen::MatrixXd z_point, z_variance, z_lower, z_upper;
  Eigen::MatrixXd rate_point, rate_lower, rate_upper;
  /// cells with a value clamped at the rate boundary (lambda*z + 1 <= 0)
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> clamped;

  [[nodiscard]] int horizon() const noexcept { return static_cast<int>(z_point.rows()); }
  [[nodiscard]] int n_ages() const noexcept { return static_cast<int>(z_point.cols()); }
};

/// Floor substituted for rate values beyond the natural boundary 0.
inline constexpr double kRateBoundFloor = 1e-10;

inline ScoreForecast forecast_scores(const PcaDecomposition& decomposition, int horizon) {
  if (horizon < 1) throw ValidationError("forecast horizon must be at least 1");
  ScoreForecast out;
  out.points.resize(horizon, decomposition.k);
  out.variances.resize(horizon, decomposition.k);
  for (int k = 0; k < decomposition.k; ++k) {
    const Eigen::VectorXd series = decomposition.scores.col(k);
    const std::span<const double> view(series.data(), static_cast<std::size_t>(series.size()));
    const auto model = arima::auto_select(view);
    const auto fc = arima::forecast(model, view, horizon);
    out.points.col(k) = fc.point;
    out.variances.col(k) = fc.variance;
    out.models.push_back(model);
  }
  return out;
}

/// mu + sum_k beta_hat_{h,k} phi_k for each horizon h.
inline Eigen::MatrixXd point_forecast(const PcaDecomposition& decomposition,
                                      const ScoreForecast& scores) {
  if (scores.points.cols() != decomposition.k) {
    throw ValidationError("score forecast does not match the number of components");
  }
  Eigen::MatrixXd z = scores.points * decomposition.components.leftCols(decomposition.k).transpose();
  z.rowwise() += decomposition.mean.transpose();
  return z;
}

/// sum_k u_{h,k} phi_{k,i}^2 + v_i for each horizon h and age i.
inline Eigen::MatrixXd total_variance(const PcaDecomposition& decomposition,
                                      const ScoreForecast& scores) {
  if (scores.variances.cols() != decomposition.k) {
    throw ValidationError("score forecast does not match the number of components");
  }
  Eigen::MatrixXd var =
      scores.variances * decomposition.components.leftCols(decomposition.k).array().square().matrix().transpose();
  var.rowwise() += decomposition.residual_variance.transpose();
  return var;
}

struct IntervalBounds {
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
};

/// Central (1 - alpha) normal interval around each point.
inline IntervalBounds prediction_interval(const Eigen::MatrixXd& z_point,
                                          const Eigen::MatrixXd& z_variance, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (z_point.rows() != z_variance.rows() || z_point.cols() != z_variance.cols()) {
    throw ValidationError("point and variance matrices differ in shape");
  }
  if ((z_variance.array() < 0.0).any()) throw ValidationError("negative forecast variance");
  const double multiplier = normal_quantile(1.0 - alpha / 2.0);
  const Eigen::MatrixXd half = multiplier * z_variance.array().sqrt().matrix();
  return {z_point - half, z_point + half};
}

/// Inverse Box-Cox of point and bounds. Values with lambda*z + 1 <= 0 lie
/// beyond the rate boundary 0; they are clamped to `kRateBoundFloor` and the
/// cell is flagged.
inline RateForecast back_transform(const Eigen::MatrixXd& z_point, const Eigen::MatrixXd& z_lower,
                                   const Eigen::MatrixXd& z_upper, BoxCoxLambda lambda) {
  if (z_lower.rows() != z_point.rows() || z_lower.cols() != z_point.cols() ||
      z_upper.rows() != z_point.rows() || z_upper.cols() != z_point.cols()) {
    throw ValidationError("forecast matrices differ in shape");
  }
  RateForecast out;
  out.lambda = lambda;
  out.z_point = z_point;
  out.z_lower = z_lower;
  out.z_upper = z_upper;
  out.rate_point.resize(z_point.rows(), z_point.cols());
  out.rate_lower.resize(z_point.rows(), z_point.cols());
  out.rate_upper.resize(z_point.rows(), z_point.cols());
  out.clamped.setConstant(z_point.rows(), z_point.cols(), false);

  const double l = lambda.value();
  auto invert = [&](double z, Eigen::Index h, Eigen::Index a) {
    if (!lambda.is_log() && !(l * z + 1.0 > 0.0)) {
      out.clamped(h, a) = true;
      return kRateBoundFloor;
    }
    return std::max(inv_box_cox(z, lambda), kRateBoundFloor);
  };
  for (Eigen::Index h = 0; h < z_point.rows(); ++h) {
    for (Eigen::Index a = 0; a < z_point.cols(); ++a) {
      out.rate_point(h, a) = invert(z_point(h, a), h, a);
      out.rate_lower(h, a) = invert(z_lower(h, a), h, a);
      out.rate_upper(h, a) = invert(z_upper(h, a), h, a);
    }
  }
  return out;
}

struct PipelineResult {
  PcaDecomposition decomposition;
  ScoreForecast scores;
  RateForecast forecast;
};

/// Transform, decompose, forecast scores, assemble intervals and
/// back-transform: the whole rate forecasting pipeline on one surface.
inline PipelineResult forecast_rates(const AgeRateSurface& surface, BoxCoxLambda lambda,
                                     int horizon, double alpha) {
  const TransformedSurface z = transform_surface(surface, lambda);
  PipelineResult out;
  out.decomposition = decompose(z);
  out.scores = forecast_scores(out.decomposition, horizon);
  const Eigen::MatrixXd point = point_forecast(out.decomposition, out.scores);
  const Eigen::MatrixXd variance = total_variance(out.decomposition, out.scores);
  const IntervalBounds bounds = prediction_interval(point, variance, alpha);
  out.forecast = back_transform(point, bounds.lower, bounds.upper, lambda);
  out.forecast.z_variance = variance;
  out.forecast.alpha = alpha;
  out.forecast.first_age = surface.first_age();
  return out;
}

}  // namespace boxcast
