#pragma once

#include <numbers>

#include "adaptiveh/envs/env.hpp"

namespace adaptiveh {

struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force_max = 10.0;
  double dt = 0.02;
  double angle_limit = 12.0 * std::numbers::pi / 180.0;
  double x_limit = 2.4;
  int max_steps = 200;
  // Gravity schedule (m/s^2).
  ScheduleParams gravity{ScheduleKind::kSinusoidal, 9.8, 3.0, 0.01, 6.8, 12.8,
                         true};
};

/// Continuous-force cart-pole with time-varying gravity. State is
/// (x, x_dot, theta, theta_dot), integrated with semi-implicit Euler. Reward
/// is +1 for every step that does not end in failure.
class CartPole final : public NsEnv {
 public:
  explicit CartPole(CartPoleParams params = {});

  std::string_view name() const override { return "cartpole"; }
  Eigen::Index state_dim() const override { return 4; }
  Eigen::Index action_dim() const override { return 1; }
  const ActionBounds& action_bounds() const override { return bounds_; }

  const StateVector& state() const { return state_; }
  const CartPoleParams& params() const { return params_; }
  /// Overwrites the physical state of a live or finished episode.
  void set_state(const StateVector& state);

 protected:
  StateVector do_reset(Rng& init_rng) override;
  StepResult do_step(const ActionVector& clamped) override;

 private:
  CartPoleParams params_;
  ActionBounds bounds_;
  StateVector state_ = StateVector::Zero(4);
};

}  // namespace adaptiveh
