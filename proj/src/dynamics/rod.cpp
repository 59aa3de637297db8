#include "magclimb/dynamics/rod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "magclimb/common/errors.hpp"
#include "magclimb/dynamics/rk4.hpp"

namespace magclimb::dynamics {

void validate(const RodModel& rod) {
  if (!(rod.rod_stiffness > 0.0)) throw DomainError("rod_stiffness must be positive");
  if (!(rod.rod_damping >= 0.0)) throw DomainError("rod_damping must be non-negative");
  if (!(rod.tip_mass > 0.0)) throw DomainError("tip_mass must be positive");
}

std::complex<double> rod_transfer(double omega, const RodModel& rod) {
  validate(rod);
  const double k = rod.rod_stiffness;
  const double wc = omega * rod.rod_damping;
  const double real_den = k - rod.tip_mass * omega * omega;
  if (real_den == 0.0 && wc == 0.0) throw DomainError("undamped resonance: H(w) has a pole at w = sqrt(k/M)");
  return std::complex<double>(k, wc) / std::complex<double>(real_den, wc);
}

GainPhase rod_gain_phase(double omega, const RodModel& rod) {
  validate(rod);
  const double k = rod.rod_stiffness;
  const double wc = omega * rod.rod_damping;
  const double real_den = k - rod.tip_mass * omega * omega;
  if (real_den == 0.0 && wc == 0.0) throw DomainError("undamped resonance: H(w) has a pole at w = sqrt(k/M)");
  return {std::hypot(k, wc) / std::hypot(real_den, wc), std::atan2(wc, k) - std::atan2(wc, real_den)};
}

double amplification_cutoff(const RodModel& rod) {
  validate(rod);
  return std::sqrt(2.0 * rod.rod_stiffness / rod.tip_mass);
}

GainPhase rod_steady_state_response(double omega, const RodModel& rod, int steps_per_cycle) {
  validate(rod);
  if (!(omega > 0.0)) throw DomainError("probe frequency must be positive");
  if (rod.rod_damping <= 0.0) throw DomainError("steady state needs positive rod damping");
  if (steps_per_cycle < 16) throw DomainError("steps_per_cycle must be at least 16");

  const double period = 2.0 * std::numbers::pi / omega;
  const double h = period / steps_per_cycle;
  // Transient envelope decays as exp(-c t / 2M); settle for 40 time constants.
  const double decay_time = 2.0 * rod.tip_mass / rod.rod_damping;
  const int settle_cycles = std::max(20, static_cast<int>(std::ceil(40.0 * decay_time / period)));
  constexpr int measure_cycles = 20;

  auto deriv = [&](double t, const State<2>& y) {
    const double x1 = std::sin(omega * t);
    const double v1 = omega * std::cos(omega * t);
    return State<2>{y[1], rod_tip_acceleration(rod, x1, v1, y[0], y[1])};
  };

  State<2> y{0.0, 0.0};
  long step = 0;
  const long settle_steps = static_cast<long>(settle_cycles) * steps_per_cycle;
  for (; step < settle_steps; ++step) y = rk4_step(y, static_cast<double>(step) * h, h, deriv);

  double s = 0.0;
  double c = 0.0;
  const long measure_steps = static_cast<long>(measure_cycles) * steps_per_cycle;
  for (long i = 0; i < measure_steps; ++i, ++step) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / steps_per_cycle;
    s += y[0] * std::sin(phase);
    c += y[0] * std::cos(phase);
    y = rk4_step(y, static_cast<double>(step) * h, h, deriv);
  }
  // Projection onto sin(w t) and cos(w t) over whole cycles.
  const double a = 2.0 * s / static_cast<double>(measure_steps);
  const double b = 2.0 * c / static_cast<double>(measure_steps);
  return {std::hypot(a, b), std::atan2(b, a)};
}

}  // namespace magclimb::dynamics
