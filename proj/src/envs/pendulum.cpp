#include "adaptiveh/envs/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace adaptiveh {

Pendulum::Pendulum(PendulumParams params)
    : NsEnv(params.noise, params.max_steps), params_(params) {
  bounds_.lo = Eigen::VectorXd::Constant(1, -params_.max_torque);
  bounds_.hi = Eigen::VectorXd::Constant(1, params_.max_torque);
}

double Pendulum::wrap_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  return std::remainder(theta, 2.0 * kPi);
}

double Pendulum::energy() const {
  const double m = params_.mass;
  const double l = params_.length;
  const double inertia = m * l * l / 3.0;
  return 0.5 * inertia * theta_dot_ * theta_dot_ +
         m * params_.gravity * 0.5 * l * std::cos(theta_);
}

void Pendulum::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
  resume();
}

StateVector Pendulum::observe() {
  const double bound = drift_value();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  StateVector obs(3);
  obs << std::cos(theta_), std::sin(theta_), theta_dot_;
  // Always three draws so the noise stream stays aligned across bounds.
  for (Eigen::Index i = 0; i < 3; ++i) obs[i] += bound * unit(noise_rng());
  return obs;
}

StateVector Pendulum::do_reset(Rng& init_rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  theta_ = angle(init_rng);
  theta_dot_ = speed(init_rng);
  return observe();
}

StepResult Pendulum::do_step(const ActionVector& clamped) {
  const double u = clamped[0];
  const double g = params_.gravity;
  const double m = params_.mass;
  const double l = params_.length;
  const double dt = params_.dt;

  const double th = wrap_angle(theta_);
  const double cost = th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

  double new_theta_dot =
      theta_dot_ + (3.0 * g / (2.0 * l) * std::sin(theta_) + 3.0 / (m * l * l) * u) * dt;
  new_theta_dot = std::clamp(new_theta_dot, -params_.max_speed, params_.max_speed);
  theta_ += new_theta_dot * dt;
  theta_dot_ = new_theta_dot;

  StepResult r;
  r.info = Eigen::VectorXd::Constant(1, drift_value());
  r.next_state = observe();
  r.reward = -cost;
  r.terminal = false;
  return r;
}

}  // namespace adaptiveh
