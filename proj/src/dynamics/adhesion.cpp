#include "magclimb/dynamics/adhesion.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "magclimb/common/errors.hpp"

namespace magclimb::dynamics {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

void validate(const PlateGeometry& g) {
  require(std::isfinite(g.magnetic_coefficient), "magnetic_coefficient must be finite");
  require(g.standoff > 0.0, "standoff L_h must be positive");
  require(g.bend_angle >= 0.0 && g.bend_angle <= std::numbers::pi / 2, "bend_angle must lie in [0, pi/2]");
  require(g.track_restore_force >= 0.0, "track_restore_force must be non-negative");
  require(g.track_tension_force >= 0.0, "track_tension_force must be non-negative");
}

void validate(const ClimbState& c) {
  require(c.robot_weight > 0.0, "robot_weight must be positive");
  require(c.load_weight >= 0.0, "load_weight must be non-negative");
  require(c.wall_angle >= 0.0 && c.wall_angle <= std::numbers::pi / 2, "wall_angle must lie in [0, pi/2]");
}

void validate(const AdhesionConfig& c) {
  require(c.plate_count >= 0, "plate_count must be non-negative");
  require(c.per_plate_stiffness > 0.0, "per_plate_stiffness must be positive");
  require(c.mass > 0.0, "mass must be positive");
  require(c.damping >= 0.0, "damping must be non-negative");
}

Force3 magnetic_force_vector(const PlateGeometry& geom) {
  validate(geom);
  const double cos_theta = std::cos(geom.bend_angle);
  return {geom.magnetic_coefficient / (geom.standoff * geom.standoff), geom.track_restore_force * cos_theta,
          geom.track_tension_force * cos_theta};
}

double gravity_load_force(const ClimbState& climb, double bend_angle) {
  validate(climb);
  return (climb.robot_weight + climb.load_weight) * std::sin(bend_angle + climb.wall_angle);
}

bool adhesion_holds(const Force3& magnetic, double gravity_load) {
  const double norm = std::hypot(magnetic[0], magnetic[1], magnetic[2]);
  return norm >= std::abs(gravity_load);
}

double contact_stiffness(const AdhesionConfig& cfg) {
  validate(cfg);
  return static_cast<double>(cfg.plate_count) * cfg.per_plate_stiffness;
}

double natural_frequency(const AdhesionConfig& cfg) {
  const double k = contact_stiffness(cfg);
  if (cfg.plate_count == 0) throw DetachedError("all plates detached: no oscillatory mode");
  return std::sqrt(k / cfg.mass);
}

double damping_ratio(const AdhesionConfig& cfg) {
  const double k = contact_stiffness(cfg);
  if (cfg.plate_count == 0) throw DetachedError("all plates detached: damping ratio undefined");
  return cfg.damping / (2.0 * std::sqrt(cfg.mass * k));
}

}  // namespace magclimb::dynamics
