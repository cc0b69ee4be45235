#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hybridq {

// Error classes map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  parse = 2,
  precondition = 3,
  numerical = 4,
  calibration = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error(ErrorKind::precondition, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

// One sample of the calibration objective, kept so a failed search can be
// inspected.
struct ResidualSample {
  double delta1;
  double duration;
  double residual1;  // wrapped phi_1 - target, radians
  double residual2;  // phi_2 - target, radians
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, std::vector<ResidualSample> residual_map)
      : Error(ErrorKind::calibration, what), residual_map_(std::move(residual_map)) {}

  const std::vector<ResidualSample>& residual_map() const noexcept { return residual_map_; }

 private:
  std::vector<ResidualSample> residual_map_;
};

}  // namespace hybridq
