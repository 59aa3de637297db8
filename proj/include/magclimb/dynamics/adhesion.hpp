// Adhesion mechanics of a magnetic track plate and the lumped robot-wall oscillator.
#pragma once

#include <array>

namespace magclimb::dynamics {

using Force3 = std::array<double, 3>;

/// Geometry and track forces acting on one magnetic plate entering the adhesion zone.
struct PlateGeometry {
  double magnetic_coefficient = 1.0;  ///< k in k / L_h^2  [N m^2]
  double standoff = 1.0;              ///< L_h, plate-to-wall distance [m]
  double track_restore_force = 0.0;   ///< F_d [N]
  double track_tension_force = 0.0;   ///< F_a [N]
  double bend_angle = 0.0;            ///< theta, track bending angle [rad]
};

struct ClimbState {
  double robot_weight = 68.67;  ///< G_a [N]
  double load_weight = 49.05;   ///< G_b [N]
  double wall_angle = 0.0;      ///< alpha, plate angle from the vertical plane [rad]
};

/// Lumped contact between the robot and the wall: N attached plates in parallel.
struct AdhesionConfig {
  int plate_count = 6;                 ///< N
  double per_plate_stiffness = 1.2e5;  ///< k_i [N/m]
  double mass = 12.0;                  ///< m [kg]
  double damping = 150.0;              ///< c [N s/m]
};

void validate(const PlateGeometry& geom);
void validate(const ClimbState& climb);
void validate(const AdhesionConfig& cfg);

/// [k / L_h^2, F_d cos(theta), F_a cos(theta)]. Throws DomainError for L_h <= 0.
Force3 magnetic_force_vector(const PlateGeometry& geom);

/// (G_a + G_b) sin(theta + alpha).
double gravity_load_force(const ClimbState& climb, double bend_angle);

/// True iff the Euclidean norm of `magnetic` is at least |gravity_load| (inclusive).
bool adhesion_holds(const Force3& magnetic, double gravity_load);

/// k = N k_i. Zero when every plate has detached.
double contact_stiffness(const AdhesionConfig& cfg);

/// sqrt(N k_i / m) in rad/s. Throws DetachedError when N = 0.
double natural_frequency(const AdhesionConfig& cfg);

/// c / (2 sqrt(m N k_i)). Throws DetachedError when N = 0.
double damping_ratio(const AdhesionConfig& cfg);

}  // namespace magclimb::dynamics
