#pragma once

#include "locsched/types.hpp"

#include <limits>

namespace locsched {

enum class PlantKind { Unicycle2ndOrder, LinearDrift };

struct PlantModel {
  PlantKind kind = PlantKind::Unicycle2ndOrder;
  Mat drift;          // LinearDrift only: x' = drift * x + u
  Mat process_noise;  // Q_w, continuous-time intensity
  double dt = 0.05;

  int dim() const { return kind == PlantKind::Unicycle2ndOrder ? 4 : static_cast<int>(drift.rows()); }
  int control_dim() const { return kind == PlantKind::Unicycle2ndOrder ? 2 : dim(); }
};

enum class SensorMode { Odometry, Localization };

struct SensorModel {
  Mat odometry_cov;
  Mat localization_cov;
  double odometry_rate = 20.0;
  double localization_rate = 16.0;

  const Mat& cov(SensorMode m) const { return m == SensorMode::Odometry ? odometry_cov : localization_cov; }
  double rate(SensorMode m) const { return m == SensorMode::Odometry ? odometry_rate : localization_rate; }
};

struct GaussianBelief {
  Vec mean;
  Mat cov;
};

struct Saturation {
  double speed = std::numeric_limits<double>::infinity();
  double turn_rate = std::numeric_limits<double>::infinity();
  double accel = std::numeric_limits<double>::infinity();
  double control_norm = std::numeric_limits<double>::infinity();  // LinearDrift feedback bound
};

struct ControllerParams {
  double k1 = 1.0, k2 = 2.236, k3 = 1.0, k4 = 2.236;
  double k = 1.0;  // LinearDrift feedback gain
  double v_min = 0.05;
  double eps_mean = 0.05;
  double eps_var = 0.01;
  // Off-mode timers end when the noise-free robot first comes this close to
  // the waypoint; On-mode segments keep going until eps_mean.
  double reach_radius = 0.05;
  double t_max = 120.0;
  Saturation saturation;
};

/// Per-waypoint control law data, filled in by compute_nominal_durations.
struct ControlLaw {
  int index = 0;
  Vec target;            // waypoint position
  Vec arrival_state;     // full noise-free state when the On trigger fires
  Mat steady_cov;        // Q at the waypoint
  double nominal_duration = 0.0;  // Off-mode timer
  double on_duration = 0.0;       // noise-free On-mode duration
};

struct SteadyStateBelief {
  Vec waypoint;
  Mat cov;
  int iterations = 0;
};

struct ControlOutput {
  Vec u;
  bool speed_clamped = false;
};

Vec step_dynamics(const Vec& x, const Vec& u, const PlantModel& model, const Vec& noise);

/// Continuous-time drift f(x, u) without noise.
Vec drift_rate(const Vec& x, const Vec& u, const PlantModel& model);

/// Jacobian of the drift with respect to the state.
Mat drift_jacobian(const Vec& x, const PlantModel& model);

Vec measure(const Vec& x, const Vec& noise);

GaussianBelief kalman_predict(const GaussianBelief& b, const Vec& u, const PlantModel& model, double dt);

GaussianBelief kalman_update(const GaussianBelief& b, const Vec& z, const Mat& noise_cov);

/// Fixed point of [predict over one localization period, update].
/// `waypoint` is the full state used for linearization.
SteadyStateBelief steady_state_covariance(const PlantModel& model, const SensorModel& sensors, const Vec& waypoint);

ControlOutput dfl_lqg_control(const GaussianBelief& estimate, const Vec& target, const ControllerParams& params, double dt);

/// u = sat(k (target - estimate)) - drift * target; the feedback term is
/// clipped to saturation.control_norm.
ControlOutput linear_control(const GaussianBelief& estimate, const Vec& target, const PlantModel& model,
                             const ControllerParams& params);

ControlOutput control(const GaussianBelief& estimate, const Vec& target, const PlantModel& model,
                      const ControllerParams& params);

bool trigger_fired_on(const GaussianBelief& b, const ControlLaw& law, const ControllerParams& params);

bool trigger_fired_timed(double elapsed, const ControlLaw& law);

/// Symmetrizes a covariance after checking it is numerically PSD.
Mat checked_symmetrize(const Mat& p);

}  // namespace locsched
