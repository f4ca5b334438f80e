#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "adaptiveh/envs/schedule.hpp"
#include "adaptiveh/policy.hpp"
#include "adaptiveh/random.hpp"
#include "adaptiveh/rkhs.hpp"

namespace adaptiveh {

struct StepResult {
  StateVector next_state;
  double reward = 0.0;
  // Set on failure, success, or the time limit.
  bool terminal = false;
  // Set when the episode ended only because of the time limit.
  bool truncated = false;
  // Physics parameters used for this transition.
  Eigen::VectorXd info;
};

struct ActionBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// A non-stationary MDP instance: time-indexed dynamics driven by a drift
/// schedule, an initial-state distribution, and per-coordinate action bounds.
///
/// All randomness is derived from the seed passed to reset(): the initial
/// state, the drift schedule and observation noise each use their own stream.
class NsEnv {
 public:
  NsEnv(ScheduleParams drift, int max_steps);
  virtual ~NsEnv() = default;

  NsEnv(const NsEnv&) = delete;
  NsEnv& operator=(const NsEnv&) = delete;

  virtual std::string_view name() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index action_dim() const = 0;
  virtual const ActionBounds& action_bounds() const = 0;

  StateVector reset(std::uint64_t seed);

  /// Clamps a to the action bounds and advances one epoch. Throws
  /// std::logic_error when the episode is already over.
  StepResult step(const ActionVector& a);

  std::int64_t time() const { return t_; }
  int max_steps() const { return max_steps_; }
  bool done() const { return done_; }
  const Schedule& schedule() const { return schedule_; }

  ActionVector clamp_action(const ActionVector& a) const;

 protected:
  virtual StateVector do_reset(Rng& init_rng) = 0;
  virtual StepResult do_step(const ActionVector& clamped) = 0;

  double drift_value() const { return schedule_.value(); }
  Rng& noise_rng() { return noise_rng_; }
  /// Test hook: marks the episode live again after a set_state().
  void resume() { done_ = false; }

 private:
  Schedule schedule_;
  int max_steps_;
  std::int64_t t_ = 0;
  bool done_ = true;
  Rng drift_rng_;
  Rng noise_rng_;
};

}  // namespace adaptiveh
