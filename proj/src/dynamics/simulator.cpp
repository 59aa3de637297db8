#include "magclimb/dynamics/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/common/rng.hpp"
#include "magclimb/dsp/butterworth.hpp"
#include "magclimb/dynamics/rk4.hpp"

namespace magclimb::dynamics {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Independent RNG streams derived from the scenario seed.
enum Stream : std::uint64_t { kOrientation = 1, kPhase = 2, kAmbient = 3, kSensorNoise = 4 };

Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double q[4];
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : q) {
      v = normal(rng);
      norm += v * v;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

std::array<double, 3> rotate(const Mat3& r, const std::array<double, 3>& v) {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) out[i] = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
  return out;
}

// Largest eigenvalue magnitude of s^2 + (c/m) s + k/m.
double stiffest_mode(double k, double c, double m) {
  const double wn = std::sqrt(k / m);
  const double zeta = c / (2.0 * std::sqrt(k * m));
  return zeta <= 1.0 ? wn : wn * (zeta + std::sqrt(zeta * zeta - 1.0));
}

std::size_t sample_count(const SimScenario& scn) {
  return static_cast<std::size_t>(std::llround(scn.duration_s * scn.sample_rate_hz));
}

}  // namespace

double minimum_sample_rate(const SimScenario& scn) {
  const double body = stiffest_mode(contact_stiffness(scn.adhesion), scn.adhesion.damping, scn.adhesion.mass);
  const double rod = stiffest_mode(scn.rod.rod_stiffness, scn.rod.rod_damping, scn.rod.tip_mass);
  return std::max(body, rod) / (kRk4StabilityLimit * static_cast<double>(scn.substeps));
}

void validate(const SimScenario& scn) {
  validate(scn.adhesion);
  validate(scn.rod);
  validate(scn.climb);
  auto fail = [](const std::string& what) { throw SimulationError(what); };
  if (scn.adhesion.plate_count < 4) fail("plate_count must be >= 4 for simulation (got " +
                                         std::to_string(scn.adhesion.plate_count) + ")");
  if (scn.excitation_level < 0 || scn.excitation_level > 3) fail("excitation_level must be in 0..3");
  if (!(scn.duration_s > 0.0)) fail("duration_s must be positive");
  if (!(scn.sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
  if (scn.substeps < 1) fail("substeps must be >= 1");
  if (!(scn.sensor_noise_std >= 0.0)) fail("sensor_noise_std must be non-negative");
  if (!(scn.gravity_mag >= 0.0)) fail("gravity_mag must be non-negative");
  if (!(scn.excitation.harmonic_amplitude >= 0.0)) fail("harmonic_amplitude must be non-negative");
  if (!(scn.excitation.ambient_force_std >= 0.0)) fail("ambient_force_std must be non-negative");
  if (!std::isfinite(scn.initial_displacement)) fail("initial_displacement must be finite");
  if (sample_count(scn) < 1) fail("duration_s * sample_rate_hz must give at least one sample");
  const double fine_rate = scn.sample_rate_hz * scn.substeps;
  if (!(scn.excitation.noise_cutoff_hz > 0.0 && scn.excitation.noise_cutoff_hz < fine_rate / 2.0)) {
    fail("noise_cutoff_hz must lie below the integration Nyquist rate");
  }
  const double need = minimum_sample_rate(scn);
  if (scn.sample_rate_hz < need) {
    std::ostringstream msg;
    msg << "unstable integration step: sample_rate_hz=" << scn.sample_rate_hz << " with substeps=" << scn.substeps
        << " is below the minimum stable sample_rate_hz " << need;
    fail(msg.str());
  }
}

SimTrace simulate_trace(const SimScenario& scn) {
  validate(scn);
  const std::size_t n = sample_count(scn);
  const int sub = scn.substeps;
  const double fine_rate = scn.sample_rate_hz * sub;
  const double h = 1.0 / fine_rate;
  const std::size_t fine_steps = n * static_cast<std::size_t>(sub);

  // Ambient force: white Gaussian at the integration rate, Butterworth low-passed, scaled so
  // its stationary std equals ambient_force_std; held constant across each RK4 step.
  std::vector<double> ambient(fine_steps, 0.0);
  if (scn.excitation.ambient_force_std > 0.0) {
    const auto lp = dsp::design_butterworth({scn.excitation.noise_order, scn.excitation.noise_cutoff_hz, fine_rate});
    std::vector<double> impulse(8192, 0.0);
    impulse[0] = 1.0;
    double energy = 0.0;
    for (double v : dsp::filter_signal(lp, impulse)) energy += v * v;
    Rng rng = make_rng(scn.seed, kAmbient);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : ambient) v = normal(rng);
    ambient = dsp::filter_signal(lp, ambient);
    const double scale = scn.excitation.ambient_force_std / std::sqrt(energy);
    for (auto& v : ambient) v *= scale;
  }

  Rng phase_rng = make_rng(scn.seed, kPhase);
  const double phase = 2.0 * std::numbers::pi * uniform01(phase_rng);
  const double tone_amp = scn.excitation.harmonic_amplitude * scn.excitation_level;
  const double tone_w = 2.0 * std::numbers::pi * scn.excitation.harmonic_hz;

  const double k = contact_stiffness(scn.adhesion);
  const double c = scn.adhesion.damping;
  const double m = scn.adhesion.mass;
  const RodModel& rod = scn.rod;

  double ambient_now = 0.0;
  auto force_at = [&](double t) { return tone_amp * std::sin(tone_w * t + phase) + ambient_now; };
  auto deriv = [&](double t, const State<4>& y) {
    const double f = force_at(t);
    return State<4>{y[1], (f - c * y[1] - k * y[0]) / m, y[3], rod_tip_acceleration(rod, y[0], y[1], y[2], y[3])};
  };

  SimTrace tr;
  for (auto* v : {&tr.body_pos, &tr.body_vel, &tr.body_acc, &tr.rod_pos, &tr.rod_vel, &tr.rod_acc, &tr.force}) {
    v->resize(n);
  }
  State<4> y{scn.initial_displacement, 0.0, scn.initial_displacement, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i * static_cast<std::size_t>(sub);
    const double t = static_cast<double>(j0) * h;
    ambient_now = ambient[j0];
    const auto d = deriv(t, y);
    tr.body_pos[i] = y[0];
    tr.body_vel[i] = y[1];
    tr.body_acc[i] = d[1];
    tr.rod_pos[i] = y[2];
    tr.rod_vel[i] = y[3];
    tr.rod_acc[i] = d[3];
    tr.force[i] = force_at(t);
    for (int s = 0; s < sub; ++s) {
      const std::size_t j = j0 + static_cast<std::size_t>(s);
      ambient_now = ambient[j];
      y = rk4_step(y, static_cast<double>(j) * h, h, deriv);
    }
  }
  return tr;
}

SignalFrame simulate_response(const SimScenario& scn) {
  const SimTrace tr = simulate_trace(scn);
  const std::size_t n = tr.body_acc.size();

  Rng orient = make_rng(scn.seed, kOrientation);
  const Mat3 body_rot = random_rotation(orient);
  const Mat3 rod_rot = random_rotation(orient);

  // Specific force in the robot frame (x up the slope, z out of the wall): the gravity
  // reaction g (cos a, 0, sin a) plus the vibration along the wall normal.
  const double g = scn.gravity_mag;
  const double ca = std::cos(scn.climb.wall_angle);
  const double sa = std::sin(scn.climb.wall_angle);

  Rng noise_rng = make_rng(scn.seed, kSensorNoise);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = scn.sensor_noise_std;

  std::array<std::vector<double>, 6> ch;
  for (auto& v : ch) v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto body = rotate(body_rot, {g * ca, 0.0, g * sa + tr.body_acc[i]});
    const auto tip = rotate(rod_rot, {g * ca, 0.0, g * sa + tr.rod_acc[i]});
    for (int a = 0; a < 3; ++a) {
      ch[static_cast<std::size_t>(a)][i] = body[static_cast<std::size_t>(a)];
      ch[static_cast<std::size_t>(a + 3)][i] = tip[static_cast<std::size_t>(a)];
    }
    if (sigma > 0.0) {
      for (auto& v : ch) v[i] += sigma * noise(noise_rng);
    }
  }

  SignalFrame frame(scn.sample_rate_hz, n);
  for (int a = 0; a < 3; ++a) frame.add_channel(kBodyAxes[static_cast<std::size_t>(a)], std::move(ch[static_cast<std::size_t>(a)]));
  for (int a = 0; a < 3; ++a) frame.add_channel(kRodAxes[static_cast<std::size_t>(a)], std::move(ch[static_cast<std::size_t>(a + 3)]));
  return frame;
}

nlohmann::json to_json(const SimScenario& s) {
  return {
      {"adhesion",
       {{"plate_count", s.adhesion.plate_count},
        {"per_plate_stiffness", s.adhesion.per_plate_stiffness},
        {"mass", s.adhesion.mass},
        {"damping", s.adhesion.damping}}},
      {"rod",
       {{"rod_stiffness", s.rod.rod_stiffness}, {"rod_damping", s.rod.rod_damping}, {"tip_mass", s.rod.tip_mass}}},
      {"climb",
       {{"robot_weight", s.climb.robot_weight},
        {"load_weight", s.climb.load_weight},
        {"wall_angle", s.climb.wall_angle}}},
      {"excitation_level", s.excitation_level},
      {"sensor_noise_std", s.sensor_noise_std},
      {"gravity_mag", s.gravity_mag},
      {"duration_s", s.duration_s},
      {"sample_rate_hz", s.sample_rate_hz},
      {"seed", s.seed},
      {"excitation",
       {{"harmonic_hz", s.excitation.harmonic_hz},
        {"harmonic_amplitude", s.excitation.harmonic_amplitude},
        {"ambient_force_std", s.excitation.ambient_force_std},
        {"noise_cutoff_hz", s.excitation.noise_cutoff_hz},
        {"noise_order", s.excitation.noise_order}}},
      {"substeps", s.substeps},
      {"initial_displacement", s.initial_displacement},
  };
}

SimScenario scenario_from_json(const nlohmann::json& j, const SimScenario& d) {
  using namespace json_fields;
  reject_unknown(j, "",
                 {"adhesion", "rod", "climb", "excitation_level", "sensor_noise_std", "gravity_mag", "duration_s",
                  "sample_rate_hz", "seed", "excitation", "substeps", "initial_displacement"});
  SimScenario s = d;
  if (auto it = j.find("adhesion"); it != j.end()) {
    reject_unknown(*it, "adhesion.", {"plate_count", "per_plate_stiffness", "mass", "damping"});
    s.adhesion.plate_count = get_or<int>(*it, "adhesion.", "plate_count", d.adhesion.plate_count);
    s.adhesion.per_plate_stiffness =
        get_or<double>(*it, "adhesion.", "per_plate_stiffness", d.adhesion.per_plate_stiffness);
    s.adhesion.mass = get_or<double>(*it, "adhesion.", "mass", d.adhesion.mass);
    s.adhesion.damping = get_or<double>(*it, "adhesion.", "damping", d.adhesion.damping);
  }
  if (auto it = j.find("rod"); it != j.end()) {
    reject_unknown(*it, "rod.", {"rod_stiffness", "rod_damping", "tip_mass"});
    s.rod.rod_stiffness = get_or<double>(*it, "rod.", "rod_stiffness", d.rod.rod_stiffness);
    s.rod.rod_damping = get_or<double>(*it, "rod.", "rod_damping", d.rod.rod_damping);
    s.rod.tip_mass = get_or<double>(*it, "rod.", "tip_mass", d.rod.tip_mass);
  }
  if (auto it = j.find("climb"); it != j.end()) {
    reject_unknown(*it, "climb.", {"robot_weight", "load_weight", "wall_angle"});
    s.climb.robot_weight = get_or<double>(*it, "climb.", "robot_weight", d.climb.robot_weight);
    s.climb.load_weight = get_or<double>(*it, "climb.", "load_weight", d.climb.load_weight);
    s.climb.wall_angle = get_or<double>(*it, "climb.", "wall_angle", d.climb.wall_angle);
  }
  if (auto it = j.find("excitation"); it != j.end()) {
    reject_unknown(*it, "excitation.",
                   {"harmonic_hz", "harmonic_amplitude", "ambient_force_std", "noise_cutoff_hz", "noise_order"});
    s.excitation.harmonic_hz = get_or<double>(*it, "excitation.", "harmonic_hz", d.excitation.harmonic_hz);
    s.excitation.harmonic_amplitude =
        get_or<double>(*it, "excitation.", "harmonic_amplitude", d.excitation.harmonic_amplitude);
    s.excitation.ambient_force_std =
        get_or<double>(*it, "excitation.", "ambient_force_std", d.excitation.ambient_force_std);
    s.excitation.noise_cutoff_hz = get_or<double>(*it, "excitation.", "noise_cutoff_hz", d.excitation.noise_cutoff_hz);
    s.excitation.noise_order = get_or<int>(*it, "excitation.", "noise_order", d.excitation.noise_order);
  }
  s.excitation_level = get_or<int>(j, "", "excitation_level", d.excitation_level);
  s.sensor_noise_std = get_or<double>(j, "", "sensor_noise_std", d.sensor_noise_std);
  s.gravity_mag = get_or<double>(j, "", "gravity_mag", d.gravity_mag);
  s.duration_s = get_or<double>(j, "", "duration_s", d.duration_s);
  s.sample_rate_hz = get_or<double>(j, "", "sample_rate_hz", d.sample_rate_hz);
  s.seed = get_or<std::uint64_t>(j, "", "seed", d.seed);
  s.substeps = get_or<int>(j, "", "substeps", d.substeps);
  s.initial_displacement = get_or<double>(j, "", "initial_displacement", d.initial_displacement);
  return s;
}

}  // namespace magclimb::dynamics
