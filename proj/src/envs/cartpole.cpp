#include "adaptiveh/envs/cartpole.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace adaptiveh {

CartPole::CartPole(CartPoleParams params)
    : NsEnv(params.gravity, params.max_steps), params_(params) {
  bounds_.lo = Eigen::VectorXd::Constant(1, -params_.force_max);
  bounds_.hi = Eigen::VectorXd::Constant(1, params_.force_max);
}

void CartPole::set_state(const StateVector& state) {
  if (state.size() != 4) throw std::invalid_argument("CartPole: state must have 4 entries");
  state_ = state;
  resume();
}

StateVector CartPole::do_reset(Rng& init_rng) {
  std::uniform_real_distribution<double> init(-0.05, 0.05);
  for (Eigen::Index i = 0; i < 4; ++i) state_[i] = init(init_rng);
  return state_;
}

StepResult CartPole::do_step(const ActionVector& clamped) {
  const double gravity = drift_value();
  const double force = clamped[0];
  const double total_mass = params_.cart_mass + params_.pole_mass;
  const double pole_moment = params_.pole_mass * params_.half_length;

  const double x = state_[0];
  const double x_dot = state_[1];
  const double theta = state_[2];
  const double theta_dot = state_[3];

  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pole_moment * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (gravity * sin_t - cos_t * temp) /
      (params_.half_length *
       (4.0 / 3.0 - params_.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_moment * theta_acc * cos_t / total_mass;

  // Semi-implicit Euler: velocities first, then positions with new velocities.
  const double new_x_dot = x_dot + params_.dt * x_acc;
  const double new_theta_dot = theta_dot + params_.dt * theta_acc;
  state_[0] = x + params_.dt * new_x_dot;
  state_[1] = new_x_dot;
  state_[2] = theta + params_.dt * new_theta_dot;
  state_[3] = new_theta_dot;

  const bool failed = std::abs(state_[0]) > params_.x_limit ||
                      std::abs(state_[2]) > params_.angle_limit;
  StepResult r;
  r.next_state = state_;
  r.reward = failed ? 0.0 : 1.0;
  r.terminal = failed;
  r.info = Eigen::VectorXd::Constant(1, gravity);
  return r;
}

}  // namespace adaptiveh
