#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vph {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A triangular solve hit a diagonal entry at or below the pivot tolerance.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t index, double pivot)
      : Error("singular triggering matrix: diagonal entry " + std::to_string(index) +
              " = " + std::to_string(pivot) + " is below tolerance"),
        index_(index),
        pivot_(pivot) {}

  std::size_t index() const noexcept { return index_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t index_;
  double pivot_;
};

/// Event times were not strictly increasing.
class NonIncreasingTimesError : public Error {
 public:
  explicit NonIncreasingTimesError(std::size_t index)
      : Error("non-increasing times at index " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Branching simulation produced more events than the configured cap.
class CascadeOverflowError : public Error {
 public:
  explicit CascadeOverflowError(std::size_t cap)
      : Error("runaway cascade: event count exceeded cap of " + std::to_string(cap)),
        cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// The conditional intensity was nonpositive at an event time.
class NonPositiveIntensityError : public Error {
 public:
  NonPositiveIntensityError(std::size_t index, double value)
      : Error("nonpositive intensity " + std::to_string(value) + " at event " +
              std::to_string(index)),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DegenerateSpreadError : public Error {
 public:
  DegenerateSpreadError() : Error("bandwidth selection needs values with nonzero spread") {}
};

class ZeroSumError : public Error {
 public:
  explicit ZeroSumError(double sum)
      : Error("cannot rescale productivities summing to " + std::to_string(sum)) {}
};

/// Malformed input file; `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vph
