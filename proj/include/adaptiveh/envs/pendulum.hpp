#pragma once

#include "adaptiveh/envs/env.hpp"

namespace adaptiveh {

struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  int max_steps = 200;
  // Bound b of the uniform observation noise U[-b, b].
  ScheduleParams noise{ScheduleKind::kRandomWalk, 0.05, 0.1, 0.05, 0.0, 0.1,
                       true};
};

/// Torque-limited swing-up pendulum (theta = 0 upright). The latent state
/// (theta, theta_dot) evolves noise-free; the agent observes
/// (cos theta, sin theta, theta_dot) + eta with eta ~ U[-b, b] per coordinate.
/// Reward -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2), theta wrapped to [-pi, pi].
class Pendulum final : public NsEnv {
 public:
  explicit Pendulum(PendulumParams params = {});

  std::string_view name() const override { return "pendulum"; }
  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index action_dim() const override { return 1; }
  const ActionBounds& action_bounds() const override { return bounds_; }

  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  const PendulumParams& params() const { return params_; }

  /// Mechanical energy of the latent state (rod pivoting at one end).
  double energy() const;
  void set_state(double theta, double theta_dot);

  static double wrap_angle(double theta);

 protected:
  StateVector do_reset(Rng& init_rng) override;
  StepResult do_step(const ActionVector& clamped) override;

 private:
  StateVector observe();

  PendulumParams params_;
  ActionBounds bounds_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

}  // namespace adaptiveh
