#include <cmath>

#include <gtest/gtest.h>

#include "boxcast/lambda_opt.hpp"
#include "support.hpp"

using namespace boxcast;

namespace {

LambdaSearchOptions with(Method method, double tolerance = 1e-3) {
  LambdaSearchOptions o;
  o.method = method;
  o.tolerance = tolerance;
  return o;
}

AgeRateSurface synthetic(double lambda, std::uint64_t seed) {
  SimulationConfig config;
  config.lambda = lambda;
  config.seed = seed;
  return simulate_surface(config);
}

}  // namespace

TEST(MinimizeOverLambda, BrentFindsQuadraticMinimum) {
  const auto sel = minimize_over_lambda([](double l) { return (l - 0.3) * (l - 0.3); }, with(Method::brent, 1e-4));
  EXPECT_NEAR(sel.lambda_star.value(), 0.3, 1e-3);
  EXPECT_EQ(sel.method, Method::brent);
  EXPECT_FALSE(sel.evaluations.empty());
}

TEST(MinimizeOverLambda, GridHitsTheKink) {
  const auto sel = minimize_over_lambda([](double l) { return std::fabs(l - 0.46); }, with(Method::grid));
  EXPECT_EQ(sel.lambda_star.value(), 0.46);
  EXPECT_EQ(sel.evaluations.size(), 101u);
  EXPECT_EQ(sel.evaluations.front().lambda, 0.0);
  EXPECT_EQ(sel.evaluations.back().lambda, 1.0);
}

TEST(MinimizeOverLambda, GridTiesGoToSmallerLambda) {
  const auto sel = minimize_over_lambda([](double l) { return l < 0.2 || l > 0.7 ? 1.0 : 0.0; }, with(Method::grid));
  EXPECT_NEAR(sel.lambda_star.value(), 0.2, 1e-12);
}

TEST(MinimizeOverLambda, ReportsBestRecordedEvaluation) {
  for (auto method : {Method::brent, Method::grid}) {
    const auto sel = minimize_over_lambda([](double l) { return std::cos(9.0 * l) + l; }, with(method));
    double best = INFINITY;
    for (const auto& e : sel.evaluations) best = std::min(best, e.objective);
    EXPECT_EQ(sel.objective_value, best);
    EXPECT_GE(sel.lambda_star.value(), 0.0);
    EXPECT_LE(sel.lambda_star.value(), 1.0);
  }
}

TEST(MinimizeOverLambda, BrentNoWorseThanGridOnQuadratic) {
  auto f = [](double l) { return (l - 0.637) * (l - 0.637); };
  const auto brent = minimize_over_lambda(f, with(Method::brent));
  const auto grid = minimize_over_lambda(f, with(Method::grid));
  EXPECT_LE(brent.objective_value, grid.objective_value);
}

TEST(MinimizeOverLambda, RejectsBadOptions) {
  auto f = [](double l) { return l; };
  EXPECT_THROW(minimize_over_lambda(f, with(Method::brent, 0.0)), ValidationError);
  LambdaSearchOptions bad_step = with(Method::grid);
  bad_step.grid_step = 0.3;
  EXPECT_THROW(minimize_over_lambda(f, bad_step), ValidationError);
  EXPECT_THROW(minimize_over_lambda([](double) { return NAN; }, with(Method::grid)), NumericalError);
}

TEST(Objective, TrueLambdaBeatsTheEnds) {
  const auto surface = synthetic(0.5, 4);
  const auto split = split_by_fraction(surface, 0.2);
  const double mid = objective(surface, BoxCoxLambda(0.5), Criterion::point, split, 0.2);
  EXPECT_LT(mid, objective(surface, BoxCoxLambda(0.0), Criterion::point, split, 0.2));
  EXPECT_LT(mid, objective(surface, BoxCoxLambda(1.0), Criterion::point, split, 0.2));
}

TEST(Objective, IsTheMedianOfTheValidationTable) {
  const auto surface = synthetic(0.3, 2);
  const auto split = split_by_fraction(surface, 0.2);
  const auto table = rolling_origin(surface, BoxCoxLambda(0.3), split.training_end_year, split.validation_end_year, 0.2);
  EXPECT_EQ(objective(surface, BoxCoxLambda(0.3), Criterion::point, split, 0.2), table.median_mafe());
  EXPECT_EQ(objective(surface, BoxCoxLambda(0.3), Criterion::interval, split, 0.2), table.median_score());
}

TEST(OptimizeLambda, GridBeatsEndpointsAndIsDeterministic) {
  const auto surface = synthetic(0.5, 6);
  const auto split = split_by_fraction(surface, 0.2);
  LambdaSearchOptions grid = with(Method::grid);
  grid.grid_step = 0.1;
  const auto a = optimize_lambda(surface, Criterion::interval, split, 0.2, grid);
  const auto b = optimize_lambda(surface, Criterion::interval, split, 0.2, grid);
  EXPECT_EQ(a.criterion, Criterion::interval);
  EXPECT_LE(a.objective_value, a.evaluations.front().objective);
  EXPECT_LE(a.objective_value, a.evaluations.back().objective);
  EXPECT_EQ(a.lambda_star, b.lambda_star);
  ASSERT_EQ(a.evaluations.size(), b.evaluations.size());
  for (std::size_t i = 0; i < a.evaluations.size(); ++i) {
    EXPECT_EQ(a.evaluations[i].objective, b.evaluations[i].objective);
  }
  grid.threads = 2;
  const auto c = optimize_lambda(surface, Criterion::interval, split, 0.2, grid);
  EXPECT_EQ(c.lambda_star, a.lambda_star);
}

TEST(CompareLambdas, RepeatedLambdaGivesIdenticalColumns) {
  const auto surface = synthetic(0.5, 8);
  const auto split = split_by_fraction(surface, 0.2);
  const auto cmp = compare_lambdas(surface, {0.5, 0.5}, split, 0.2);
  ASSERT_EQ(cmp.tables.size(), 2u);
  ASSERT_EQ(cmp.tables[0].rows.size(), static_cast<std::size_t>(split.test_end_year - split.validation_end_year));
  for (std::size_t h = 0; h < cmp.tables[0].rows.size(); ++h) {
    EXPECT_EQ(cmp.tables[0].rows[h].mafe, cmp.tables[1].rows[h].mafe);
    EXPECT_EQ(cmp.tables[0].rows[h].interval_score, cmp.tables[1].rows[h].interval_score);
  }
  EXPECT_THROW(compare_lambdas(surface, {}, split, 0.2), ValidationError);
}

TEST(CompareLambdas, TrueLambdaDominatesLog) {
  SimulationConfig config;
  config.noise_sd = 0.002;
  config.score_sd = 0.002;
  const auto surface = simulate_surface(config);
  const auto split = split_by_fraction(surface, 0.2);
  const auto cmp = compare_lambdas(surface, {0.5, 0.0}, split, 0.2);
  for (std::size_t h = 0; h < cmp.tables[0].rows.size(); ++h) {
    EXPECT_LT(cmp.tables[0].rows[h].mafe, cmp.tables[1].rows[h].mafe) << "h=" << h + 1;
  }
}
