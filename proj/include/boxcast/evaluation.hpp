#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boxcast/data.hpp"
#include "boxcast/errors.hpp"
#include "boxcast/forecast.hpp"
#include "boxcast/parallel.hpp"
#include "boxcast/transform.hpp"

namespace boxcast {

/// Interval score of a central (1 - alpha) interval [lower, upper] for the
/// realized value `observed`: width plus 2/alpha times the excursion.
inline double interval_score(double lower, double upper, double observed, double alpha) {
  if (!(lower <= upper)) throw ValidationError("interval lower bound exceeds upper bound");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  double score = upper - lower;
  if (observed < lower) score += (2.0 / alpha) * (lower - observed);
  if (observed > upper) score += (2.0 / alpha) * (observed - upper);
  return score;
}

/// Mean absolute error over every pooled (origin, age) cell.
inline double mafe(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& predicted) {
  if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
    throw ValidationError("actual and predicted matrices differ in shape");
  }
  if (actual.size() == 0) throw ValidationError("no cells to evaluate");
  return (actual - predicted).cwiseAbs().mean();
}

/// Mean interval score over every pooled (origin, age) cell.
inline double averaged_interval_score(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& upper,
                                      const Eigen::MatrixXd& actual, double alpha) {
  if (lower.rows() != actual.rows() || lower.cols() != actual.cols() ||
      upper.rows() != actual.rows() || upper.cols() != actual.cols()) {
    throw ValidationError("interval and actual matrices differ in shape");
  }
  if (actual.size() == 0) throw ValidationError("no cells to evaluate");
  double total = 0.0;
  for (Eigen::Index r = 0; r < actual.rows(); ++r) {
    for (Eigen::Index c = 0; c < actual.cols(); ++c) {
      total += interval_score(lower(r, c), upper(r, c), actual(r, c), alpha);
    }
  }
  return total / static_cast<double>(actual.size());
}

/// Median with the mid-mean convention for even counts.
inline double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty list");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct HorizonErrors {
  int h = 0;
  double mafe = 0.0;
  double interval_score = 0.0;
  /// number of forecast origins pooled at this horizon
  int forecasts = 0;
  /// pooled (origin, age) cells
  int cells = 0;
};

/// Per-horizon point and interval accuracy with mean/median summaries.
struct HorizonErrorTable {
  std::vector<HorizonErrors> rows;

  [[nodiscard]] std::vector<double> mafe_column() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.mafe);
    return out;
  }
  [[nodiscard]] std::vector<double> score_column() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.interval_score);
    return out;
  }
  [[nodiscard]] double mean_mafe() const { return mean_of(mafe_column()); }
  [[nodiscard]] double median_mafe() const { return median(mafe_column()); }
  [[nodiscard]] double mean_score() const { return mean_of(score_column()); }
  [[nodiscard]] double median_score() const { return median(score_column()); }

 private:
  static double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("mean of an empty column");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }
};

/// What one forecast origin fitted; reported through `RollingOptions::log`.
struct OriginLog {
  int origin_year = 0;
  int k = 0;
  std::vector<arima::ArimaSpec> score_models;
};

struct RollingOptions {
  /// worker threads across origins; 0 = hardware concurrency
  unsigned threads = 1;
  /// called once per origin, in origin order, after all origins finish
  std::function<void(const OriginLog&)> log;
};

namespace detail {

struct OriginResult {
  OriginLog log;
  // indexed by horizon - 1
  std::vector<double> abs_error_sum;
  std::vector<double> score_sum;
  std::vector<int> cells;
};

[[noreturn]] inline void rethrow_with_origin(const std::exception_ptr& error, int origin) {
  const std::string prefix = "forecast origin " + std::to_string(origin) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(prefix + e.what());
  }
}

}  // namespace detail

/// Expanding-window evaluation: for each origin o in [fit_end_year,
/// eval_end_year), refit the whole pipeline on years up to o and forecast
/// horizons 1..eval_end_year - o. Errors are pooled per horizon on the rate
/// scale, so horizon h collects M - h + 1 forecasts for an M-year span.
inline HorizonErrorTable rolling_origin(const AgeRateSurface& surface, BoxCoxLambda lambda,
                                        int fit_end_year, int eval_end_year, double alpha,
                                        const RollingOptions& options = {}) {
  if (!(fit_end_year < eval_end_year)) {
    throw ValidationError("fit end year must precede evaluation end year");
  }
  static_cast<void>(surface.row_of(fit_end_year));
  static_cast<void>(surface.row_of(eval_end_year));
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");

  const int span = eval_end_year - fit_end_year;
  std::vector<detail::OriginResult> results(static_cast<std::size_t>(span));
  const auto errors = detail::parallel_for(results.size(), options.threads, [&](std::size_t idx) {
    const int origin = fit_end_year + static_cast<int>(idx);
    const int horizon = eval_end_year - origin;
    const AgeRateSurface history = surface.years(surface.first_year(), origin);
    const PipelineResult run = forecast_rates(history, lambda, horizon, alpha);

    detail::OriginResult& out = results[idx];
    out.log.origin_year = origin;
    out.log.k = run.decomposition.k;
    for (const auto& m : run.scores.models) out.log.score_models.push_back(m.spec);
    out.abs_error_sum.assign(horizon, 0.0);
    out.score_sum.assign(horizon, 0.0);
    out.cells.assign(horizon, 0);
    const auto& fc = run.forecast;
    for (int h = 1; h <= horizon; ++h) {
      const Eigen::Index row = surface.row_of(origin + h);
      for (int a = 0; a < surface.n_ages(); ++a) {
        const double observed = surface.rates()(row, a);
        out.abs_error_sum[h - 1] += std::fabs(observed - fc.rate_point(h - 1, a));
        out.score_sum[h - 1] +=
            interval_score(fc.rate_lower(h - 1, a), fc.rate_upper(h - 1, a), observed, alpha);
        ++out.cells[h - 1];
      }
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) detail::rethrow_with_origin(errors[i], fit_end_year + static_cast<int>(i));
  }

  HorizonErrorTable table;
  table.rows.resize(static_cast<std::size_t>(span));
  std::vector<double> abs_sum(span, 0.0), score_sum(span, 0.0);
  std::vector<int> cells(span, 0);
  for (const auto& r : results) {
    for (std::size_t h = 0; h < r.cells.size(); ++h) {
      abs_sum[h] += r.abs_error_sum[h];
      score_sum[h] += r.score_sum[h];
      cells[h] += r.cells[h];
      ++table.rows[h].forecasts;
    }
    if (options.log) options.log(r.log);
  }
  for (int h = 0; h < span; ++h) {
    auto& row = table.rows[h];
    row.h = h + 1;
    row.cells = cells[h];
    row.mafe = abs_sum[h] / cells[h];
    row.interval_score = score_sum[h] / cells[h];
  }
  return table;
}

}  // namespace boxcast
