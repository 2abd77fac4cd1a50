#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "boxcast/lambda_opt.hpp"
#include "boxcast/simulate.hpp"

namespace boxcast::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;  ///< empty = standard output
  std::optional<double> lambda;
  std::vector<double> lambdas;
  double test_fraction = 0.2;
  double alpha = 0.2;
  std::optional<int> horizon;
  std::optional<int> fit_end;
  Method method = Method::brent;
  Criterion criterion = Criterion::point;
  double tolerance = 1e-3;
  std::optional<double> floor;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool verbose = false;
  SimulationConfig simulation;
};

/// Parses argv, runs the chosen subcommand and returns its exit code.
/// Diagnostics go to `err`; reports go to `out` unless --output is given.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Checks option domains; throws ValidationError before any computation.
void validate(const RunConfig& config);

void cmd_select_lambda(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_forecast(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace boxcast::cli
