#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "boxcast/data.hpp"
#include "boxcast/errors.hpp"
#include "boxcast/evaluation.hpp"
#include "boxcast/optim.hpp"
#include "boxcast/parallel.hpp"
#include "boxcast/transform.hpp"

namespace boxcast {

enum class Criterion { point, interval };
enum class Method { brent, grid };

inline const char* to_string(Criterion c) { return c == Criterion::point ? "point" : "interval"; }
inline const char* to_string(Method m) { return m == Method::brent ? "brent" : "grid"; }

struct LambdaEvaluation {
  double lambda;
  double objective;
};

struct LambdaSelection {
  BoxCoxLambda lambda_star;
  Criterion criterion = Criterion::point;
  Method method = Method::brent;
  double objective_value = std::numeric_limits<double>::infinity();
  /// in evaluation order
  std::vector<LambdaEvaluation> evaluations;
};

struct LambdaSearchOptions {
  Method method = Method::brent;
  /// bracket tolerance in lambda for brent
  double tolerance = 1e-3;
  /// grid spacing; the grid runs 0, step, 2 step, ..., 1
  double grid_step = 0.01;
  /// worker threads for grid points (each runs its rolling origins serially)
  unsigned threads = 1;
};

/// Median across horizons of the chosen error column of a rolling-origin
/// evaluation over the validation span.
inline double objective(const AgeRateSurface& surface, BoxCoxLambda lambda, Criterion criterion,
                        const SampleSplit& split, double alpha,
                        const RollingOptions& rolling = {}) {
  if (split.validation_end_year - split.training_end_year < 2) {
    throw ValidationError("validation span must cover at least 2 years");
  }
  const HorizonErrorTable table = rolling_origin(surface, lambda, split.training_end_year,
                                                 split.validation_end_year, alpha, rolling);
  return criterion == Criterion::point ? table.median_mafe() : table.median_score();
}

/// Minimizes `f` over lambda in [0, 1]. The reported lambda and objective
/// are the best recorded evaluation; grid ties go to the smaller lambda.
template <typename F>
LambdaSelection minimize_over_lambda(F&& f, const LambdaSearchOptions& options) {
  if (!(options.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  LambdaSelection out;
  out.method = options.method;

  if (options.method == Method::grid) {
    if (!(options.grid_step > 0.0 && options.grid_step <= 1.0)) {
      throw ValidationError("grid step must lie in (0, 1]");
    }
    const int intervals = static_cast<int>(std::lround(1.0 / options.grid_step));
    if (std::fabs(intervals * options.grid_step - 1.0) > 1e-9) {
      throw ValidationError("grid step must divide [0, 1] evenly");
    }
    out.evaluations.resize(static_cast<std::size_t>(intervals) + 1);
    const auto errors =
        detail::parallel_for(out.evaluations.size(), options.threads, [&](std::size_t i) {
          const double lambda = static_cast<double>(i) / intervals;
          out.evaluations[i] = {lambda, f(lambda)};
        });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    optim::brent_minimize(
        [&](double lambda) {
          const double value = f(lambda);
          out.evaluations.push_back({lambda, value});
          return value;
        },
        0.0, 1.0, options.tolerance);
  }

  double best_lambda = 0.0;
  for (const auto& e : out.evaluations) {
    const bool better = e.objective < out.objective_value ||
                        (e.objective == out.objective_value && e.lambda < best_lambda);
    if (better) {
      out.objective_value = e.objective;
      best_lambda = e.lambda;
    }
  }
  if (!std::isfinite(out.objective_value)) {
    throw NumericalError("objective was not finite at any probed lambda");
  }
  out.lambda_star = BoxCoxLambda(best_lambda);
  return out;
}

/// Chooses lambda by minimizing the median validation-span error.
inline LambdaSelection optimize_lambda(const AgeRateSurface& surface, Criterion criterion,
                                       const SampleSplit& split, double alpha,
                                       const LambdaSearchOptions& options = {},
                                       const RollingOptions& rolling = {}) {
  auto f = [&](double lambda) {
    try {
      return objective(surface, BoxCoxLambda(lambda), criterion, split, alpha, rolling);
    } catch (const std::exception& e) {
      throw NumericalError("objective failed at lambda " + detail::format_double(lambda) + ": " +
                           e.what());
    }
  };
  LambdaSelection out = minimize_over_lambda(f, options);
  out.criterion = criterion;
  return out;
}

struct LambdaComparison {
  std::vector<double> lambdas;
  std::vector<HorizonErrorTable> tables;
};

/// Rolling-origin accuracy on the test span (validation end to test end)
/// for each lambda.
inline LambdaComparison compare_lambdas(const AgeRateSurface& surface,
                                        const std::vector<double>& lambdas,
                                        const SampleSplit& split, double alpha,
                                        const RollingOptions& rolling = {}) {
  if (lambdas.empty()) throw ValidationError("no lambda values to compare");
  LambdaComparison out;
  for (double l : lambdas) {
    out.lambdas.push_back(l);
    out.tables.push_back(rolling_origin(surface, BoxCoxLambda(l), split.validation_end_year,
                                        split.test_end_year, alpha, rolling));
  }
  return out;
}

}  // namespace boxcast
