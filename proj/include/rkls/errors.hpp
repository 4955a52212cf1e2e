#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (a caller contract violation).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The problem cannot be iterated on: all-zero matrix, inconsistent system, ...
class InvalidProblemError : public Error {
 public:
  using Error::Error;
};

/// A projection was requested onto a row with zero norm.
class InvalidRowError : public Error {
 public:
  InvalidRowError(std::size_t row)
      : Error("row " + std::to_string(row) + " has zero norm"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Singular values too small relative to the largest one.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// A quadratic form that must be non-negative came out negative.
class SpdError : public Error {
 public:
  using Error::Error;
};

/// Jacobi sweeps did not reach the off-diagonal tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(int sweeps, double off_diagonal)
      : Error("SVD did not converge after " + std::to_string(sweeps) +
              " sweeps (max off-diagonal Gram entry " +
              std::to_string(off_diagonal) + ")"),
        sweeps_(sweeps),
        off_diagonal_(off_diagonal) {}
  int sweeps() const noexcept { return sweeps_; }
  double off_diagonal() const noexcept { return off_diagonal_; }

 private:
  int sweeps_;
  double off_diagonal_;
};

/// A NaN or infinity showed up in an iterate.
class NumericError : public Error {
 public:
  using Error::Error;
};

class UnknownFunctionalError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  enum class Kind { MalformedHeader, RaggedRow, NonFinite, BadNumber, RowCount };

  ParseError(Kind kind, std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what),
        kind_(kind),
        line_(line) {}
  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// A configuration field is missing or invalid. Names the field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace rkls
