#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmean {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument to a library operation (bad rate, empty fit data, ...).
struct ParameterError : Error {
  using Error::Error;
};

// Expression or functional-spec text could not be parsed.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}
  std::size_t offset;
};

// Evaluation left the domain of a function (ln/sqrt of a negative, ...).
struct EvalDomainError : Error {
  using Error::Error;
};

// The (space, functional) pair is outside the supported analytic table,
// or the sample kind cannot carry the requested evaluation.
struct UnsupportedQuery : Error {
  using Error::Error;
};

// Exchange evaluation requested on a space whose functionals keep
// nonzero variance (Cauchy, Wiener).
struct NonConcentrating : Error {
  using Error::Error;
};

// Codim-2 sign conditions failed, or a constrained sampler cannot proceed.
struct IllPosedConstraint : Error {
  using Error::Error;
};

// The defining integral of a mean does not converge.
struct DivergentMean : Error {
  using Error::Error;
};

// Quadrature ran out of refinement budget; carries the best estimate.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& msg, double best)
      : Error(msg), best_estimate(best) {}
  double best_estimate;
};

// A grid-sum request exceeded the evaluation budget.
struct BudgetError : Error {
  using Error::Error;
};

// Config schema violation; carries the path to the offending key.
struct ConfigError : Error {
  ConfigError(const std::string& msg, const std::string& where)
      : Error(msg + " [" + where + "]"), path(where) {}
  std::string path;
};

}  // namespace fmean
