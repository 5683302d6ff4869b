// Error taxonomy shared by all modules. The CLI maps the three branches to
// exit codes: UsageError -> 1, DataError -> 2, NumericError -> 3.
#pragma once

#include <stdexcept>
#include <string>

namespace kws {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : Error {
  using Error::Error;
};

// Problems with inputs: files, formats, shapes, insufficient data.
struct DataError : Error {
  using Error::Error;
};

// Problems with values: NaN/Inf, degenerate geometry, non-scalar losses.
struct NumericError : Error {
  using Error::Error;
};

struct IoError : DataError {
  using DataError::DataError;
};
struct ParseError : DataError {
  int line = 0;
  ParseError(const std::string& msg, int line_no)
      : DataError(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};
struct DuplicatePathError : DataError {
  using DataError::DataError;
};
struct UnsupportedFormatError : DataError {
  using DataError::DataError;
};
struct TooShortError : DataError {
  using DataError::DataError;
};
struct ShapeMismatchError : DataError {
  using DataError::DataError;
};
struct EmptyInputError : DataError {
  using DataError::DataError;
};
struct InsufficientPhrasesError : DataError {
  using DataError::DataError;
};
struct InsufficientUtterancesError : DataError {
  using DataError::DataError;
};
struct TooFewUtterancesError : DataError {
  using DataError::DataError;
};
struct EmptyScoresError : DataError {
  using DataError::DataError;
};
struct UnsortedError : DataError {
  using DataError::DataError;
};
struct NonMonotoneError : DataError {
  using DataError::DataError;
};
struct UnreachableError : DataError {
  double best_achievable = 0.0;
  UnreachableError(const std::string& msg, double best)
      : DataError(msg), best_achievable(best) {}
};

struct NonFiniteError : NumericError {
  using NumericError::NumericError;
};
struct NotScalarError : NumericError {
  using NumericError::NumericError;
};
struct DegenerateCentroidError : NumericError {
  using NumericError::NumericError;
};

}  // namespace kws
