#include "adaptiveh/envs/reach.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace adaptiveh {

ReachTask::ReachTask(ReachParams params)
    : NsEnv(params.target_speed, params.max_steps), params_(params) {
  if (!(params_.half_extent > 0.0) || !(params_.speed_cap > 0.0) ||
      !(params_.dt > 0.0)) {
    throw std::invalid_argument("ReachTask: extent, speed cap and dt must be > 0");
  }
  bounds_.lo = Eigen::VectorXd::Constant(3, -params_.speed_cap);
  bounds_.hi = Eigen::VectorXd::Constant(3, params_.speed_cap);
}

void ReachTask::set_state(const Eigen::Vector3d& effector,
                          const Eigen::Vector3d& target,
                          const Eigen::Vector3d& direction) {
  effector_ = effector;
  target_ = target;
  direction_ = direction.normalized();
  resume();
}

StateVector ReachTask::state() const {
  StateVector s(6);
  s << effector_, target_;
  return s;
}

StateVector ReachTask::do_reset(Rng& init_rng) {
  const double e = params_.half_extent;
  std::uniform_real_distribution<double> box(-e, e);
  for (int i = 0; i < 3; ++i) effector_[i] = box(init_rng);
  for (int i = 0; i < 3; ++i) target_[i] = box(init_rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  do {
    for (int i = 0; i < 3; ++i) direction_[i] = normal(init_rng);
  } while (direction_.norm() < 1e-9);
  direction_.normalize();
  return state();
}

StepResult ReachTask::do_step(const ActionVector& clamped) {
  const double e = params_.half_extent;
  const double speed = drift_value();

  effector_ += clamped.head<3>() * params_.dt;
  effector_ = effector_.cwiseMax(-e).cwiseMin(e);

  target_ += direction_ * speed * params_.dt;
  for (int i = 0; i < 3; ++i) {
    if (target_[i] > e) {
      target_[i] = 2.0 * e - target_[i];
      direction_[i] = -direction_[i];
    } else if (target_[i] < -e) {
      target_[i] = -2.0 * e - target_[i];
      direction_[i] = -direction_[i];
    }
  }

  const double dist = (effector_ - target_).norm();
  StepResult r;
  r.next_state = state();
  r.terminal = dist < params_.success_radius;
  r.reward = -dist + (r.terminal ? params_.success_bonus : 0.0);
  r.info = Eigen::VectorXd::Constant(1, speed);
  return r;
}

}  // namespace adaptiveh
