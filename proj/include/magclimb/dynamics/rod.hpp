// Base-excited fiber rod carrying the remote attitude sensor.
#pragma once

#include <complex>

namespace magclimb::dynamics {

struct RodModel {
  double rod_stiffness = 1200.0;  ///< k [N/m]
  double rod_damping = 0.8;       ///< c [N s/m]
  double tip_mass = 0.03;         ///< M [kg]
};

void validate(const RodModel& rod);

/// H(w) = (k + j w c) / (k - M w^2 + j w c): tip response per unit base motion.
/// Throws DomainError at an exact undamped resonance (c = 0, w = sqrt(k/M)).
std::complex<double> rod_transfer(double omega, const RodModel& rod);

struct GainPhase {
  double gain = 1.0;
  double phase = 0.0;  ///< radians, principal branch
};

/// |H(w)| and arg H(w) from the closed forms, with atan2 for the quadrant.
GainPhase rod_gain_phase(double omega, const RodModel& rod);

/// Edge of the amplification band: |H| > 1 exactly on (0, sqrt(2k/M)).
double amplification_cutoff(const RodModel& rod);

/// Tip acceleration for the rod ODE  M x2'' = k (x1 - x2) + c (x1' - x2').
inline double rod_tip_acceleration(const RodModel& rod, double base_pos, double base_vel, double tip_pos,
                                   double tip_vel) {
  return (rod.rod_stiffness * (base_pos - tip_pos) + rod.rod_damping * (base_vel - tip_vel)) / rod.tip_mass;
}

/// Drives the rod ODE with a unit sine base motion using RK4 and measures the steady-state
/// tip amplitude and phase by projection over whole periods. Cross-checks H(w) in time domain.
GainPhase rod_steady_state_response(double omega, const RodModel& rod, int steps_per_cycle = 400);

}  // namespace magclimb::dynamics
