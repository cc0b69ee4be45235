#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace hybridq {

// Scalar control function of time on [0, duration()].
//
// Kinds:
//   constant         v
//   linear           start + (end - start) t / duration
//   tanh_ramp        start -> end along tanh(s (2t/duration - 1)) / tanh(s)
//   quadratic_pulse  -delta0 (2t/T - 1)^2 - delta1
//   piecewise        concatenation of finite-duration pieces
class Schedule {
 public:
  enum class Kind { constant, linear, tanh_ramp, quadratic_pulse, piecewise };

  static Schedule constant(double value,
                           double duration = std::numeric_limits<double>::infinity());
  static Schedule linear(double start, double end, double duration);
  static Schedule tanh_ramp(double start, double end, double duration, double steepness = 3.0);
  static Schedule quadratic_pulse(double delta0, double delta1, double T);
  static Schedule piecewise(std::vector<Schedule> pieces);

  Kind kind() const;
  double duration() const { return duration_; }
  bool bounded() const { return duration_ < std::numeric_limits<double>::infinity(); }

  // Throws PreconditionError("out of range") for t outside [0, duration]
  // beyond a relative slack of 1e-9.
  double operator()(double t) const;

  // Interior time points where the schedule or its derivative may jump.
  std::vector<double> breakpoints() const;

  // First and last value.
  double front() const { return (*this)(0.0); }
  double back() const;

  std::string describe() const;

 private:
  struct Constant { double value; };
  struct Linear { double start, end; };
  struct TanhRamp { double start, end, steepness; };
  struct Quadratic { double delta0, delta1; };
  struct Piecewise {
    std::vector<Schedule> pieces;
    std::vector<double> offsets;
  };

  using Data = std::variant<Constant, Linear, TanhRamp, Quadratic, Piecewise>;

  Schedule(Data data, double duration) : data_(std::move(data)), duration_(duration) {}
  double eval(double t) const;

  Data data_;
  double duration_;
};

}  // namespace hybridq
