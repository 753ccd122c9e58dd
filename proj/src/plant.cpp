#include "locsched/plant.hpp"

#include <algorithm>
#include <cmath>

namespace locsched {

namespace {

void require_dim(const Vec& v, int n, const char* what) {
  if (v.size() != n) {
    throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(n) + ", got " +
                       std::to_string(v.size()));
  }
}

}  // namespace

Vec drift_rate(const Vec& x, const Vec& u, const PlantModel& model) {
  const int n = model.dim();
  require_dim(x, n, "state");
  require_dim(u, model.control_dim(), "control");
  Vec f(n);
  if (model.kind == PlantKind::Unicycle2ndOrder) {
    f << x(2) * std::cos(x(3)), x(2) * std::sin(x(3)), u(0), u(1);
  } else {
    f = model.drift * x + u;
  }
  return f;
}

Mat drift_jacobian(const Vec& x, const PlantModel& model) {
  const int n = model.dim();
  if (model.kind == PlantKind::LinearDrift) return model.drift;
  Mat j = Mat::Zero(n, n);
  const double c = std::cos(x(3)), s = std::sin(x(3));
  j(0, 2) = c;
  j(0, 3) = -x(2) * s;
  j(1, 2) = s;
  j(1, 3) = x(2) * c;
  return j;
}

Vec step_dynamics(const Vec& x, const Vec& u, const PlantModel& model, const Vec& noise) {
  require_dim(noise, model.dim(), "noise");
  return x + drift_rate(x, u, model) * model.dt + noise;
}

Vec measure(const Vec& x, const Vec& noise) {
  require_dim(noise, static_cast<int>(x.size()), "measurement noise");
  return x + noise;
}

Mat checked_symmetrize(const Mat& p) {
  Mat s = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw NumericalError("covariance lost positive semidefiniteness");
  return s;
}

GaussianBelief kalman_predict(const GaussianBelief& b, const Vec& u, const PlantModel& model, double dt) {
  const int n = model.dim();
  require_dim(b.mean, n, "belief mean");
  Mat f = Mat::Identity(n, n) + drift_jacobian(b.mean, model) * dt;
  GaussianBelief out;
  out.mean = b.mean + drift_rate(b.mean, u, model) * dt;
  out.cov = f * b.cov * f.transpose() + model.process_noise * dt;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

GaussianBelief kalman_update(const GaussianBelief& b, const Vec& z, const Mat& noise_cov) {
  const auto n = b.mean.size();
  require_dim(z, static_cast<int>(n), "measurement");
  Mat s = b.cov + noise_cov;
  if (s.isZero(0.0)) return b;
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("innovation covariance is not invertible");
  // K = P S^-1, S symmetric.
  Mat k = llt.solve(b.cov).transpose();
  Mat ikh = Mat::Identity(n, n) - k;
  GaussianBelief out;
  out.mean = b.mean + k * (z - b.mean);
  out.cov = checked_symmetrize(ikh * b.cov * ikh.transpose() + k * noise_cov * k.transpose());
  return out;
}

SteadyStateBelief steady_state_covariance(const PlantModel& model, const SensorModel& sensors, const Vec& waypoint) {
  const int n = model.dim();
  require_dim(waypoint, n, "waypoint");
  const double period = 1.0 / sensors.localization_rate;
  GaussianBelief b{waypoint, Mat::Zero(n, n)};
  Vec lin = waypoint;
  if (model.kind == PlantKind::Unicycle2ndOrder) lin(2) = 0.0;
  // The period is covered by the same number of predict steps the closed
  // loop takes, so the two agree exactly when dt divides the period.
  const int sub = std::max(1, static_cast<int>(std::ceil(period / model.dt - 1e-9)));
  const double h = period / sub;
  const Mat f = Mat::Identity(n, n) + drift_jacobian(lin, model) * h;
  const Mat q = model.process_noise * h;
  constexpr int kMaxIter = 100000;
  for (int it = 1; it <= kMaxIter; ++it) {
    Mat pred = b.cov;
    for (int k = 0; k < sub; ++k) {
      pred = f * pred * f.transpose() + q;
      pred = 0.5 * (pred + pred.transpose());
    }
    GaussianBelief next = kalman_update(GaussianBelief{lin, pred}, lin, sensors.localization_cov);
    const double diff = (next.cov - b.cov).cwiseAbs().maxCoeff();
    b.cov = next.cov;
    if (diff <= 1e-13 * std::max(1e-3, b.cov.cwiseAbs().maxCoeff()) && it > 1) return SteadyStateBelief{waypoint, b.cov, it};
    if (it == 1 && diff == 0.0) return SteadyStateBelief{waypoint, b.cov, it};
  }
  throw NonStabilizable("steady-state covariance did not converge in 100000 iterations");
}

ControlOutput dfl_lqg_control(const GaussianBelief& estimate, const Vec& target, const ControllerParams& p, double dt) {
  require_dim(estimate.mean, 4, "unicycle estimate");
  const Vec& xh = estimate.mean;
  const double c = std::cos(xh(3)), s = std::sin(xh(3));
  const double ub1 = p.k1 * (target(0) - xh(0)) - p.k2 * xh(2) * c;
  const double ub2 = p.k3 * (target(1) - xh(1)) - p.k4 * xh(2) * s;
  ControlOutput out;
  double v = xh(2);
  if (std::abs(v) < p.v_min) {
    v = v >= 0.0 ? p.v_min : -p.v_min;
    out.speed_clamped = true;
  }
  double u1 = ub1 * c + ub2 * s;
  double u2 = (ub2 * c - ub1 * s) / v;
  const Saturation& sat = p.saturation;
  u1 = std::clamp(u1, -sat.accel, sat.accel);
  if (std::isfinite(sat.speed)) {
    u1 = std::clamp(u1, (-sat.speed - xh(2)) / dt, (sat.speed - xh(2)) / dt);
  }
  u2 = std::clamp(u2, -sat.turn_rate, sat.turn_rate);
  out.u = Vec(2);
  out.u << u1, u2;
  return out;
}

ControlOutput linear_control(const GaussianBelief& estimate, const Vec& target, const PlantModel& model,
                             const ControllerParams& p) {
  ControlOutput out;
  // Feedforward holds the target against the drift; only the feedback part saturates.
  Vec fb = p.k * (target - estimate.mean);
  const double norm = fb.norm();
  if (norm > p.saturation.control_norm) fb *= p.saturation.control_norm / norm;
  out.u = fb - model.drift * target;
  return out;
}

ControlOutput control(const GaussianBelief& estimate, const Vec& target, const PlantModel& model,
                      const ControllerParams& params) {
  if (model.kind == PlantKind::Unicycle2ndOrder) return dfl_lqg_control(estimate, target, params, model.dt);
  return linear_control(estimate, target, model, params);
}

bool trigger_fired_on(const GaussianBelief& b, const ControlLaw& law, const ControllerParams& p) {
  const double dx = b.mean(0) - law.target(0);
  const double dy = b.mean(1) - law.target(1);
  if (dx * dx + dy * dy >= p.eps_mean * p.eps_mean) return false;
  return (b.cov - law.steady_cov).norm() < p.eps_var;
}

bool trigger_fired_timed(double elapsed, const ControlLaw& law) {
  return elapsed >= law.nominal_duration - 1e-9;
}

}  // namespace locsched
