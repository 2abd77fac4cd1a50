#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "boxcast/boxcast.hpp"

namespace boxcast::cli {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string label(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

AgeRateSurface load_input(const RunConfig& config) {
  std::ifstream in(config.input);
  if (!in) throw DataError("cannot open input file '" + config.input + "'");
  FloorOptions floor;
  if (config.floor) {
    floor.enabled = true;
    floor.floor = *config.floor;
  }
  return load_rates(in, floor);
}

int resolve_fit_end(const RunConfig& config, const AgeRateSurface& surface) {
  if (config.fit_end) {
    if (*config.fit_end < surface.first_year() + 1 || *config.fit_end > surface.last_year()) {
      throw ValidationError("--fit-end " + std::to_string(*config.fit_end) +
                            " outside the data span");
    }
    return *config.fit_end;
  }
  return split_by_fraction(surface, config.test_fraction).validation_end_year;
}

int resolve_horizon(const RunConfig& config, const AgeRateSurface& surface, int fit_end) {
  if (config.horizon) return *config.horizon;
  const int remaining = surface.last_year() - fit_end;
  if (remaining < 1) throw ValidationError("no years after the fit end; pass --horizon");
  return remaining;
}

RollingOptions rolling_options(const RunConfig& config, std::ostream& err) {
  RollingOptions options;
  if (config.verbose) {
    options.log = [&err](const OriginLog& log) {
      err << "origin " << log.origin_year << ": K=" << log.k;
      for (const auto& spec : log.score_models) err << ' ' << spec.str();
      err << '\n';
    };
  }
  return options;
}

void log_models(const PcaDecomposition& decomposition, const ScoreForecast& scores,
                std::ostream& err) {
  err << "K=" << decomposition.k;
  for (const auto& m : scores.models) err << ' ' << m.spec.str();
  err << '\n';
}

double require_lambda(const RunConfig& config) {
  if (!config.lambda) throw ValidationError("--lambda is required for " + config.command);
  return *config.lambda;
}

}  // namespace

void validate(const RunConfig& config) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(config.test_fraction > 0.0 && config.test_fraction < 0.5)) {
    throw ValidationError("--test-fraction must lie in (0, 0.5)");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ValidationError("--alpha must lie in (0, 1)");
  if (config.lambda && !unit(*config.lambda)) throw ValidationError("--lambda must lie in [0, 1]");
  for (double l : config.lambdas) {
    if (!unit(l)) throw ValidationError("every --lambdas value must lie in [0, 1]");
  }
  if (config.horizon && *config.horizon < 1) throw ValidationError("--horizon must be at least 1");
  if (config.floor && !(*config.floor > 0.0)) throw ValidationError("--floor must be positive");
  if (!(config.tolerance > 0.0)) throw ValidationError("--tolerance must be positive");
  if (config.command != "simulate" && config.input.empty()) {
    throw ValidationError("--input is required");
  }
  if ((config.command == "forecast" || config.command == "decompose") && !config.lambda) {
    throw ValidationError("--lambda is required for " + config.command);
  }
  if (config.command == "evaluate" && config.lambdas.empty() && !config.lambda) {
    throw ValidationError("evaluate needs at least one value in --lambdas");
  }
}

void cmd_select_lambda(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const AgeRateSurface surface = load_input(config);
  const SampleSplit split = split_by_fraction(surface, config.test_fraction);
  if (config.verbose) {
    err << "training " << surface.first_year() << "-" << split.training_end_year << ", validation "
        << split.training_end_year + 1 << "-" << split.validation_end_year << "\n";
  }
  LambdaSearchOptions search;
  search.method = config.method;
  search.tolerance = config.tolerance;
  search.threads = config.threads;
  const LambdaSelection selection = optimize_lambda(surface, config.criterion, split, config.alpha,
                                                    search, rolling_options(config, err));
  out << "kind,lambda,objective,criterion,method\n";
  const std::string tail = std::string(",") + to_string(selection.criterion) + "," +
                           to_string(selection.method) + "\n";
  out << "selected," << fmt(selection.lambda_star.value()) << ',' << fmt(selection.objective_value)
      << tail;
  for (const auto& e : selection.evaluations) {
    out << "trace," << fmt(e.lambda) << ',' << fmt(e.objective) << tail;
  }
}

void cmd_forecast(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const BoxCoxLambda lambda(require_lambda(config));
  const AgeRateSurface surface = load_input(config);
  const int fit_end = resolve_fit_end(config, surface);
  const int horizon = resolve_horizon(config, surface, fit_end);
  const PipelineResult run =
      forecast_rates(surface.years(surface.first_year(), fit_end), lambda, horizon, config.alpha);
  if (config.verbose) log_models(run.decomposition, run.scores, err);

  const RateForecast& fc = run.forecast;
  out << "horizon,age,point,lower,upper,clamped\n";
  for (int h = 0; h < fc.horizon(); ++h) {
    for (int a = 0; a < fc.n_ages(); ++a) {
      out << h + 1 << ',' << fc.first_age + a << ',' << fmt(fc.rate_point(h, a)) << ','
          << fmt(fc.rate_lower(h, a)) << ',' << fmt(fc.rate_upper(h, a)) << ','
          << (fc.clamped(h, a) ? 1 : 0) << '\n';
    }
  }
}

void cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<double> lambdas = config.lambdas;
  if (lambdas.empty() && config.lambda) lambdas.push_back(*config.lambda);
  if (lambdas.empty()) throw ValidationError("evaluate needs at least one value in --lambdas");
  const AgeRateSurface surface = load_input(config);
  const SampleSplit split = split_by_fraction(surface, config.test_fraction);
  const LambdaComparison cmp =
      compare_lambdas(surface, lambdas, split, config.alpha, rolling_options(config, err));

  const bool single = lambdas.size() == 1;
  out << 'h';
  for (double l : lambdas) out << (single ? ",mafe" : ",mafe_" + label(l));
  for (double l : lambdas) out << (single ? ",interval_score" : ",score_" + label(l));
  out << '\n';
  const std::size_t rows = cmp.tables.front().rows.size();
  for (std::size_t h = 0; h < rows; ++h) {
    out << h + 1;
    for (const auto& t : cmp.tables) out << ',' << fmt(t.rows[h].mafe);
    for (const auto& t : cmp.tables) out << ',' << fmt(t.rows[h].interval_score);
    out << '\n';
  }
  out << "mean";
  for (const auto& t : cmp.tables) out << ',' << fmt(t.mean_mafe());
  for (const auto& t : cmp.tables) out << ',' << fmt(t.mean_score());
  out << "\nmedian";
  for (const auto& t : cmp.tables) out << ',' << fmt(t.median_mafe());
  for (const auto& t : cmp.tables) out << ',' << fmt(t.median_score());
  out << '\n';
}

void cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const BoxCoxLambda lambda(require_lambda(config));
  const AgeRateSurface surface = load_input(config);
  const int fit_end = resolve_fit_end(config, surface);
  const int horizon = resolve_horizon(config, surface, fit_end);
  const AgeRateSurface history = surface.years(surface.first_year(), fit_end);
  const PcaDecomposition dec = decompose(transform_surface(history, lambda));
  const ScoreForecast scores = forecast_scores(dec, horizon);
  if (config.verbose) log_models(dec, scores, err);

  const double z = normal_quantile(1.0 - config.alpha / 2.0);
  out << "series,index,component,value,lower,upper\n";
  for (int a = 0; a < dec.n_ages(); ++a) {
    out << "mean," << history.age_at(a) << ",0," << fmt(dec.mean(a)) << ",,\n";
  }
  for (Eigen::Index k = 0; k < dec.singular_values.size(); ++k) {
    out << "singular_value," << k + 1 << ',' << k + 1 << ',' << fmt(dec.singular_values(k))
        << ",,\n";
  }
  for (int k = 0; k < dec.k; ++k) {
    for (int a = 0; a < dec.n_ages(); ++a) {
      out << "component," << history.age_at(a) << ',' << k + 1 << ','
          << fmt(dec.components(a, k)) << ",,\n";
    }
  }
  for (int k = 0; k < dec.k; ++k) {
    for (int t = 0; t < dec.n_years(); ++t) {
      out << "score," << history.year_at(t) << ',' << k + 1 << ',' << fmt(dec.scores(t, k))
          << ",,\n";
    }
  }
  for (int k = 0; k < dec.k; ++k) {
    for (int h = 0; h < horizon; ++h) {
      const double point = scores.points(h, k);
      const double half = z * std::sqrt(scores.variances(h, k));
      out << "score_forecast," << fit_end + h + 1 << ',' << k + 1 << ',' << fmt(point) << ','
          << fmt(point - half) << ',' << fmt(point + half) << '\n';
    }
  }
}

void cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& /*err*/) {
  SimulationConfig sim = config.simulation;
  if (config.lambda) sim.lambda = *config.lambda;
  sim.seed = config.seed;
  write_rates(out, simulate_surface(sim));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Box-Cox / principal-component forecasting of age-specific rate surfaces"};
  app.require_subcommand(1);

  const std::map<std::string, Method> methods{{"brent", Method::brent}, {"grid", Method::grid}};
  const std::map<std::string, Criterion> criteria{{"point", Criterion::point},
                                                  {"interval", Criterion::interval}};
  double lambda_value = 0.0;
  int horizon_value = 0, fit_end_value = 0;
  double floor_value = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", config.input, "long-format year,age,rate CSV");
    sub->add_option("--output", config.output, "output CSV path (default: stdout)");
    sub->add_option("--lambda", lambda_value, "Box-Cox parameter in [0, 1]");
    sub->add_option("--test-fraction", config.test_fraction, "fraction of years held out for testing")
        ->capture_default_str();
    sub->add_option("--alpha", config.alpha, "interval significance level")->capture_default_str();
    sub->add_option("--horizon", horizon_value, "forecast horizon in years");
    sub->add_option("--floor", floor_value, "raise rates below this value to it");
    sub->add_option("--seed", config.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", config.threads, "worker threads (0 = all cores)")
        ->capture_default_str();
    sub->add_flag("--verbose", config.verbose, "log per-origin model choices to stderr");
  };

  auto* select = app.add_subcommand("select-lambda", "choose lambda on the validation span");
  common(select);
  select->add_option("--method", config.method, "brent or grid")
      ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
  select->add_option("--criterion", config.criterion, "point (MAFE) or interval (interval score)")
      ->transform(CLI::CheckedTransformer(criteria, CLI::ignore_case));
  select->add_option("--tolerance", config.tolerance, "brent tolerance in lambda")
      ->capture_default_str();

  auto* forecast = app.add_subcommand("forecast", "forecast rates from a fitted lambda");
  common(forecast);
  forecast->add_option("--fit-end", fit_end_value, "last year used for fitting");

  auto* evaluate = app.add_subcommand("evaluate", "test-span accuracy for one or more lambdas");
  common(evaluate);
  evaluate->add_option("--lambdas", config.lambdas, "comma-separated lambda values")
      ->delimiter(',');

  auto* decompose_cmd = app.add_subcommand("decompose", "mean, components, scores and score forecasts");
  common(decompose_cmd);
  decompose_cmd->add_option("--fit-end", fit_end_value, "last year used for fitting");

  auto* simulate = app.add_subcommand("simulate", "synthetic surface from a known model");
  simulate->group("");
  common(simulate);
  auto& sim = config.simulation;
  simulate->add_option("--first-year", sim.first_year)->capture_default_str();
  simulate->add_option("--years", sim.n_years)->capture_default_str();
  simulate->add_option("--first-age", sim.first_age)->capture_default_str();
  simulate->add_option("--ages", sim.n_ages)->capture_default_str();
  simulate->add_option("--components", sim.k)->capture_default_str();
  simulate->add_option("--drift", sim.total_drift)->capture_default_str();
  simulate->add_option("--score-sd", sim.score_sd)->capture_default_str();
  simulate->add_option("--noise", sim.noise_sd)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  config.command = chosen->get_name();
  if (chosen->count("--lambda") > 0) config.lambda = lambda_value;
  if (chosen->count("--horizon") > 0) config.horizon = horizon_value;
  if (chosen->count("--floor") > 0) config.floor = floor_value;
  if (chosen->get_option_no_throw("--fit-end") && chosen->count("--fit-end") > 0) {
    config.fit_end = fit_end_value;
  }

  std::string stage = "validating options";
  try {
    validate(config);
    stage = config.command;
    std::ostringstream report;
    if (config.command == "select-lambda") cmd_select_lambda(config, report, err);
    else if (config.command == "forecast") cmd_forecast(config, report, err);
    else if (config.command == "evaluate") cmd_evaluate(config, report, err);
    else if (config.command == "decompose") cmd_decompose(config, report, err);
    else cmd_simulate(config, report, err);

    stage = "writing output";
    if (config.output.empty()) {
      out << report.str();
    } else {
      std::ofstream file(config.output, std::ios::binary);
      if (!(file << report.str())) {
        throw DataError("cannot write output file '" + config.output + "'");
      }
    }
    return kSuccess;
  } catch (const ValidationError& e) {
    err << "error (" << stage << "): " << e.what() << '\n';
    return kValidationError;
  } catch (const DataError& e) {
    err << "data error (" << stage << "): " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "numerical failure (" << stage << "): " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace boxcast::cli
