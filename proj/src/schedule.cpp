#include "hybridq/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridq/error.hpp"

namespace hybridq {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_duration(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw PreconditionError("schedule duration must be positive and finite");
}
}  // namespace

Schedule Schedule::constant(double value, double duration) {
  if (!(duration > 0.0)) throw PreconditionError("schedule duration must be positive");
  return Schedule(Constant{value}, duration);
}

Schedule Schedule::linear(double start, double end, double duration) {
  require_duration(duration);
  return Schedule(Linear{start, end}, duration);
}

Schedule Schedule::tanh_ramp(double start, double end, double duration, double steepness) {
  require_duration(duration);
  if (!(steepness > 0.0)) throw PreconditionError("tanh_ramp steepness must be positive");
  return Schedule(TanhRamp{start, end, steepness}, duration);
}

Schedule Schedule::quadratic_pulse(double delta0, double delta1, double T) {
  require_duration(T);
  return Schedule(Quadratic{delta0, delta1}, T);
}

Schedule Schedule::piecewise(std::vector<Schedule> pieces) {
  if (pieces.empty()) throw PreconditionError("piecewise schedule needs at least one piece");
  Piecewise pw;
  double t = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!pieces[i].bounded() && i + 1 != pieces.size())
      throw PreconditionError("only the last piece of a piecewise schedule may be unbounded");
    pw.offsets.push_back(t);
    t += pieces[i].duration();
  }
  pw.pieces = std::move(pieces);
  return Schedule(std::move(pw), t);
}

Schedule::Kind Schedule::kind() const {
  return static_cast<Kind>(data_.index());
}

double Schedule::operator()(double t) const {
  const double slack = 1e-9 * std::max(1.0, std::isfinite(duration_) ? duration_ : 1.0);
  if (t < -slack || t > duration_ + slack) {
    std::ostringstream os;
    os << "out of range: t=" << t << " outside schedule domain [0, " << duration_ << "]";
    throw PreconditionError(os.str());
  }
  return eval(std::clamp(t, 0.0, duration_));
}

double Schedule::back() const {
  if (!bounded()) return eval(0.0);
  return eval(duration_);
}

double Schedule::eval(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [&](const Linear& l) { return l.start + (l.end - l.start) * (t / duration_); },
          [&](const TanhRamp& r) {
            const double x = std::tanh(r.steepness * (2.0 * t / duration_ - 1.0)) / std::tanh(r.steepness);
            return r.start + 0.5 * (r.end - r.start) * (1.0 + x);
          },
          [&](const Quadratic& q) {
            // (2t - T)/T keeps delta_c(t) == delta_c(T - t) bitwise.
            const double u = (2.0 * t - duration_) / duration_;
            return -q.delta0 * u * u - q.delta1;
          },
          [&](const Piecewise& p) {
            // Offsets summed along different schedules differ in the last
            // bits; a point that close to a join already belongs to the next piece.
            auto it = std::upper_bound(p.offsets.begin(), p.offsets.end(), t + 1e-13 * std::max(1.0, std::abs(t)));
            std::size_t k = std::size_t(std::distance(p.offsets.begin(), it));
            k = k == 0 ? 0 : k - 1;
            const Schedule& piece = p.pieces[k];
            return piece.eval(std::clamp(t - p.offsets[k], 0.0, piece.duration_));
          },
      },
      data_);
}

std::vector<double> Schedule::breakpoints() const {
  const auto* p = std::get_if<Piecewise>(&data_);
  if (!p) return {};
  std::vector<double> out;
  for (std::size_t k = 0; k < p->pieces.size(); ++k) {
    if (k > 0) out.push_back(p->offsets[k]);
    for (double b : p->pieces[k].breakpoints()) out.push_back(p->offsets[k] + b);
  }
  return out;
}

std::string Schedule::describe() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(Overloaded{
                 [&](const Constant& c) { os << "constant(" << c.value << ")"; },
                 [&](const Linear& l) { os << "linear(" << l.start << " -> " << l.end << ", " << duration_ << ")"; },
                 [&](const TanhRamp& r) {
                   os << "tanh_ramp(" << r.start << " -> " << r.end << ", " << duration_ << ", s=" << r.steepness << ")";
                 },
                 [&](const Quadratic& q) {
                   os << "quadratic_pulse(delta0=" << q.delta0 << ", delta1=" << q.delta1 << ", T=" << duration_ << ")";
                 },
                 [&](const Piecewise& p) {
                   os << "piecewise[";
                   for (std::size_t k = 0; k < p.pieces.size(); ++k) os << (k ? ", " : "") << p.pieces[k].describe();
                   os << "]";
                 },
             },
             data_);
  return os.str();
}

}  // namespace hybridq
