#pragma once

#include "adaptiveh/envs/env.hpp"

namespace adaptiveh {

struct ReachParams {
  // Workspace is the cube [-half_extent, half_extent]^3.
  double half_extent = 0.5;
  double speed_cap = 0.1;
  double dt = 1.0;
  double success_radius = 0.05;
  double success_bonus = 10.0;
  int max_steps = 50;
  // Target speed (distance per unit time).
  ScheduleParams target_speed{ScheduleKind::kRandomWalk, 0.01, 0.02, 0.05,
                              0.0, 0.02, true};
};

/// Kinematic point effector chasing a target that drifts along a fixed
/// direction at a schedule-driven speed, reflecting off the workspace walls.
/// State is (effector xyz, target xyz); actions are velocity commands clamped
/// per axis to the speed cap. Reward is -distance, plus the success bonus
/// (and termination) once within the success radius.
class ReachTask final : public NsEnv {
 public:
  explicit ReachTask(ReachParams params = {});

  std::string_view name() const override { return "reach"; }
  Eigen::Index state_dim() const override { return 6; }
  Eigen::Index action_dim() const override { return 3; }
  const ActionBounds& action_bounds() const override { return bounds_; }

  const Eigen::Vector3d& effector() const { return effector_; }
  const Eigen::Vector3d& target() const { return target_; }
  const Eigen::Vector3d& direction() const { return direction_; }
  const ReachParams& params() const { return params_; }

  void set_state(const Eigen::Vector3d& effector, const Eigen::Vector3d& target,
                 const Eigen::Vector3d& direction);

 protected:
  StateVector do_reset(Rng& init_rng) override;
  StepResult do_step(const ActionVector& clamped) override;

 private:
  StateVector state() const;

  ReachParams params_;
  ActionBounds bounds_;
  Eigen::Vector3d effector_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d target_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction_ = Eigen::Vector3d::UnitX();
};

}  // namespace adaptiveh
