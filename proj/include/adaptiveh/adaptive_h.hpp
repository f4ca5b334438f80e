#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "adaptiveh/envs/env.hpp"
#include "adaptiveh/policy.hpp"
#include "adaptiveh/random.hpp"
#include "adaptiveh/rkhs.hpp"
#include "adaptiveh/value.hpp"

namespace adaptiveh {

/// Which action-value estimate scales the score in the gradient estimator.
enum class GradientSignal {
  // Full Q estimate, state value included.
  kQValue,
  // Compatible (advantage) part only; the fitted state value acts as baseline.
  kAdvantage,
};

std::string_view to_string(GradientSignal signal);
GradientSignal parse_gradient_signal(std::string_view name);

struct AdaptiveHConfig {
  // Inner-product floor for continuing to execute the current policy.
  double threshold = 0.0;
  // Gradient ascent step. Absorbs the 1/(1 - discount) factor.
  double step_size = 0.1;
  double discount = 0.95;
  int max_episode_len = 200;
  // Minimum actions in a window before a retreat may fire.
  int min_window = 2;
  // Q is fitted on the most recent replay_window transitions.
  std::size_t replay_window = 2000;
  double ridge = 1e-3;
  GradientSignal signal = GradientSignal::kAdvantage;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// When a policy update fires. Adaptive rules consult the inner-product
/// check; fixed rules update every `window` actions regardless of it.
struct CheckpointRule {
  enum class Kind { kAdaptive, kFixed };
  Kind kind = Kind::kAdaptive;
  int window = 0;

  static CheckpointRule adaptive() { return {Kind::kAdaptive, 0}; }
  static CheckpointRule fixed(int window);
};

struct GradientEstimate {
  RkhsFunctional functional;
  StateVector at_state;
  int step_index = 0;
  std::uint64_t policy_version = 0;
};

/// Single-sample functional gradient q * k(s, .) Sigma^{-1} (a - h(s)).
GradientEstimate estimate_gradient(const GaussianPolicy& policy, double q_value,
                                   const StateVector& s, const ActionVector& a,
                                   int step_index = 0);

/// As above with q taken from the fitted model according to `signal`.
GradientEstimate estimate_gradient(const GaussianPolicy& policy,
                                   const QModel& q, const StateVector& s,
                                   const ActionVector& a, GradientSignal signal,
                                   int step_index = 0);

/// True (keep executing) iff <g_ref, g_now>_H >= threshold.
bool ascent_check(const GradientEstimate& g_ref, const GradientEstimate& g_now,
                  double threshold, const Bandwidth& bw);

/// h <- project(h + step_size * grad) onto the dictionary; covariance kept.
GaussianPolicy policy_update(const GaussianPolicy& policy,
                             const RkhsFunctional& grad, double step_size,
                             const KernelDictionary& dict);

struct EpisodeRecord {
  std::vector<Transition> transitions;
  // Step indices at which the checkpoint rule fired an update.
  std::vector<int> retreat_points;
  // Actions executed between consecutive updates; the trailing window that
  // the episode end closes is included.
  std::vector<int> h_windows;
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
  // Policy updates applied, the episode-end update included.
  int updates = 0;
  std::size_t dictionary_size = 0;
};

/// Called for every checkpoint evaluation with the reference gradient, the
/// current one, and whether the check passed.
using CheckObserver = std::function<void(
    const GradientEstimate& ref, const GradientEstimate& now, bool passed)>;

/// Owns the learning state carried across episodes: policy, Q model, kernel
/// dictionary and replay window.
class AdaptiveHLearner {
 public:
  AdaptiveHLearner(AdaptiveHConfig cfg, CheckpointRule rule,
                   GaussianPolicy initial, KernelDictionary dict);

  /// One episode of sample / step / admit / estimate / check, with an update
  /// and Q refit at every retreat and once more at the episode end.
  EpisodeRecord run_episode(NsEnv& env, std::uint64_t reset_seed,
                            Rng& policy_rng,
                            const CheckObserver& observer = {});

  const GaussianPolicy& policy() const { return policy_; }
  const QModel& q_model() const { return q_; }
  const KernelDictionary& dictionary() const { return dict_; }
  const AdaptiveHConfig& config() const { return cfg_; }
  const CheckpointRule& rule() const { return rule_; }
  std::size_t replay_size() const;

  void set_variance(Eigen::VectorXd variance);

 private:
  void apply_update(const RkhsFunctional& window_sum, int window_len);
  void refit();
  void remember(Transition tr);

  AdaptiveHConfig cfg_;
  CheckpointRule rule_;
  GaussianPolicy policy_;
  QModel q_;
  KernelDictionary dict_;
  std::vector<Transition> replay_;
  KernelRowCache kernel_cache_;
};

/// Running-best regret proxy: best return so far minus the return of
/// episode k. Non-negative by construction.
std::vector<double> regret_series(std::span<const double> returns);

/// regret_series over the discounted returns of consecutive episodes.
std::vector<double> regret_monitor(std::span<const EpisodeRecord> records);

}  // namespace adaptiveh
