// Synthetic body/rod accelerometer records for a robot held to the wall by N plates.
//
// The robot body is a base-excited single-DOF oscillator along the wall normal,
//   m x'' + c x' + N k_i x = F(t),
// driven by an eccentric-motor tone (amplitude proportional to the excitation level) plus
// band-limited ambient force noise. The rod tip follows the rod ODE with the body as its
// base. Each sensor reports specific force (motion plus the gravity reaction) rotated by a
// random installation orientation, plus white noise.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "magclimb/dynamics/adhesion.hpp"
#include "magclimb/dynamics/rod.hpp"
#include "magclimb/dynamics/signal_frame.hpp"

namespace magclimb::dynamics {

struct ExcitationModel {
  double harmonic_hz = 25.0;
  double harmonic_amplitude = 4.0;  ///< force amplitude per excitation level [N]
  double ambient_force_std = 3.0;   ///< std of the band-limited ambient force [N]
  double noise_cutoff_hz = 45.0;
  int noise_order = 4;

  bool operator==(const ExcitationModel&) const = default;
};

struct SimScenario {
  AdhesionConfig adhesion;
  RodModel rod;
  ClimbState climb;
  int excitation_level = 0;       ///< 0..3
  double sensor_noise_std = 0.02; ///< per accelerometer axis [m/s^2]
  double gravity_mag = 9.81;      ///< [m/s^2]
  double duration_s = 10.0;
  double sample_rate_hz = 100.0;
  std::uint64_t seed = 0;
  ExcitationModel excitation;
  int substeps = 10;                 ///< RK4 steps per output sample
  double initial_displacement = 0.0; ///< body offset from equilibrium at t = 0 [m]
};

inline constexpr std::array<const char*, 3> kBodyAxes{"body_acc_x", "body_acc_y", "body_acc_z"};
inline constexpr std::array<const char*, 3> kRodAxes{"rod_acc_x", "rod_acc_y", "rod_acc_z"};

/// Throws SimulationError (or DomainError for physical parameters) on invalid scenarios,
/// including steps too coarse for RK4 stability.
void validate(const SimScenario& scn);

/// Lowest sample rate at which the scenario's substep count keeps RK4 stable.
double minimum_sample_rate(const SimScenario& scn);

/// Internal state at every output sample, for diagnostics and physics tests.
struct SimTrace {
  std::vector<double> body_pos, body_vel, body_acc;
  std::vector<double> rod_pos, rod_vel, rod_acc;
  std::vector<double> force;
};

SimTrace simulate_trace(const SimScenario& scn);

/// Six accelerometer channels (kBodyAxes, kRodAxes); bit-deterministic per seed.
SignalFrame simulate_response(const SimScenario& scn);

nlohmann::json to_json(const SimScenario& scn);
SimScenario scenario_from_json(const nlohmann::json& j, const SimScenario& defaults = {});

}  // namespace magclimb::dynamics
