#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdm {

// Bad input: malformed files, violated preconditions, inconsistent configs.
// The CLI maps this to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}

  ValidationError(const std::string& file, std::size_t row, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(row) + ": " + what), row_(row) {}

  // 1-based record number in the offending file (header = 1), 0 if unknown.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

// Numerical failure that should not happen for valid inputs.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Statistical test cannot be computed for the given sample (e.g. every
// paired difference is zero).
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cdm
