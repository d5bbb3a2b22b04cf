#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace netsketch {

/// Base for every error the library raises on bad input data or bad configuration.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (out-of-range width, bad detector spec, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-contract input data. Carries the 1-based data row and the
/// physical line number when the error came from a CSV source (0 otherwise).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::size_t line = 0,
            std::string field = {})
      : Error(what), row_(row), line_(line), field_(std::move(field)) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::size_t line_;
  std::string field_;
};

/// A timestamp went backwards in a stream that must be monotone.
class TimestampRegression : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace netsketch
