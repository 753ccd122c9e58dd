#include "locsched/plant.hpp"
#include "locsched/scenario.hpp"

#include <doctest.h>

#include <cmath>

using namespace locsched;

namespace {

PlantModel unicycle(double sigma_w, double dt) {
  PlantModel m;
  m.kind = PlantKind::Unicycle2ndOrder;
  m.dt = dt;
  m.process_noise = Mat::Identity(4, 4) * sigma_w * sigma_w;
  return m;
}

SensorModel sensors(double sigma_lo, double rate) {
  SensorModel s;
  s.odometry_cov = Mat::Identity(4, 4) * 0.04;
  s.localization_cov = Mat::Identity(4, 4) * sigma_lo * sigma_lo;
  s.localization_rate = rate;
  return s;
}

// Information-form recursion over whole localization periods.
Mat periodic_cov_oracle(const Mat& jac, const Mat& q, const Mat& r, double period, int sub, int periods) {
  const int n = static_cast<int>(jac.rows());
  const double h = period / sub;
  const Mat f = Mat::Identity(n, n) + jac * h;
  Mat p = Mat::Zero(n, n);
  for (int k = 0; k < periods; ++k) {
    for (int s = 0; s < sub; ++s) p = f * p * f.transpose() + q * h;
    p = (p.inverse() + r.inverse()).inverse();
  }
  return p;
}

}  // namespace

TEST_CASE("scalar Kalman update matches the conjugate Gaussian posterior") {
  for (const double p : {0.01, 0.3, 2.0, 17.0}) {
    for (const double r : {0.001, 0.5, 4.0}) {
      GaussianBelief b{Vec::Constant(1, 1.7), Mat::Constant(1, 1, p)};
      const Vec z = Vec::Constant(1, -0.4);
      const GaussianBelief post = kalman_update(b, z, Mat::Constant(1, 1, r));
      const double var = 1.0 / (1.0 / p + 1.0 / r);
      const double mean = var * (1.7 / p - 0.4 / r);
      CHECK(std::abs(post.cov(0, 0) - var) <= 1e-12);
      CHECK(std::abs(post.mean(0) - mean) <= 1e-12);
    }
  }
}

TEST_CASE("steady-state covariance of the unicycle linearization") {
  const PlantModel m = unicycle(0.01, 0.05);
  const SensorModel s = sensors(0.03, 16.0);
  Vec w(4);
  w << 3.0, 2.0, 0.4, 0.785;
  const SteadyStateBelief ss = steady_state_covariance(m, s, w);
  Vec lin = w;
  lin(2) = 0.0;
  const Mat oracle = periodic_cov_oracle(drift_jacobian(lin, m), m.process_noise, s.localization_cov, 1.0 / 16.0,
                                         2, 10000);
  CHECK((ss.cov - oracle).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(ss.cov.isApprox(ss.cov.transpose()));
}

TEST_CASE("steady-state covariance equals the stepped filter when dt divides the period") {
  const PlantModel m = unicycle(0.05, 0.025);
  const SensorModel s = sensors(0.1, 10.0);
  Vec w(4);
  w << 1.0, 1.0, 0.0, 0.3;
  const SteadyStateBelief ss = steady_state_covariance(m, s, w);
  GaussianBelief b{w, Mat::Zero(4, 4)};
  const Vec u = Vec::Zero(2);
  for (int step = 1; step <= 10000; ++step) {
    b = kalman_predict(b, u, m, m.dt);
    if (step % 4 == 0) b = kalman_update(b, w, s.localization_cov);
  }
  CHECK((ss.cov - b.cov).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("linear drift: feedback saturates, feedforward does not") {
  PlantModel m;
  m.kind = PlantKind::LinearDrift;
  m.drift = Mat::Identity(2, 2) * -0.5;
  m.process_noise = Mat::Zero(2, 2);
  ControllerParams p;
  p.k = 2.0;
  p.saturation.control_norm = 0.1;
  Vec target(2);
  target << 4.0, 0.0;
  GaussianBelief est{Vec::Zero(2), Mat::Zero(2, 2)};
  const Vec u = linear_control(est, target, m, p).u;
  CHECK(u(0) == doctest::Approx(0.1 + 2.0));
  CHECK(u(1) == doctest::Approx(0.0));
  // at the target the drift is cancelled exactly
  est.mean = target;
  const Vec hold = control(est, target, m, p).u;
  CHECK(drift_rate(target, hold, m).norm() == doctest::Approx(0.0));
}

TEST_CASE("DFL controller clamps speed and turn rate") {
  ControllerParams p;
  p.saturation.turn_rate = 0.5;
  p.saturation.speed = 0.3;
  GaussianBelief est{Vec::Zero(4), Mat::Zero(4, 4)};
  Vec target(2);
  target << 0.0, 5.0;
  const ControlOutput out = dfl_lqg_control(est, target, p, 0.05);
  CHECK(out.speed_clamped);
  CHECK(std::abs(out.u(1)) <= 0.5);
  CHECK(out.u(0) * 0.05 <= 0.3 + 1e-12);
}

TEST_CASE("on trigger needs both the mean and the covariance condition") {
  ControllerParams p;
  p.eps_mean = 0.05;
  p.eps_var = 0.01;
  ControlLaw law;
  law.target = Vec::Zero(2);
  law.steady_cov = Mat::Identity(2, 2) * 0.001;
  GaussianBelief b{Vec::Zero(2), law.steady_cov};
  CHECK(trigger_fired_on(b, law, p));
  b.mean(0) = 0.06;
  CHECK_FALSE(trigger_fired_on(b, law, p));
  b.mean(0) = 0.0;
  b.cov = Mat::Identity(2, 2) * 0.02;
  CHECK_FALSE(trigger_fired_on(b, law, p));
  law.nominal_duration = 1.0;
  CHECK(trigger_fired_timed(1.0, law));
  CHECK_FALSE(trigger_fired_timed(0.99, law));
}

TEST_CASE("predict rejects mismatched dimensions") {
  const PlantModel m = unicycle(0.01, 0.05);
  GaussianBelief b{Vec::Zero(3), Mat::Zero(3, 3)};
  CHECK_THROWS_AS(kalman_predict(b, Vec::Zero(2), m, 0.05), InvalidInput);
}
