#pragma once

#include <array>
#include <cstddef>

namespace magclimb::dynamics {

template <std::size_t N>
using State = std::array<double, N>;

/// One classical fourth-order Runge-Kutta step of y' = f(t, y).
template <std::size_t N, typename Deriv>
State<N> rk4_step(const State<N>& y, double t, double h, Deriv&& f) {
  auto axpy = [](const State<N>& base, double a, const State<N>& d) {
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + a * d[i];
    return out;
  };
  const State<N> k1 = f(t, y);
  const State<N> k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const State<N> k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const State<N> k4 = f(t + h, axpy(y, h, k3));
  State<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Largest |lambda| h for which RK4 stays stable on a lightly damped oscillator.
/// The exact imaginary-axis bound is 2*sqrt(2); we keep a margin below it.
inline constexpr double kRk4StabilityLimit = 2.5;

}  // namespace magclimb::dynamics
