#include "adaptiveh/adaptive_h.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace adaptiveh {

std::string_view to_string(GradientSignal signal) {
  switch (signal) {
    case GradientSignal::kQValue:
      return "q";
    case GradientSignal::kAdvantage:
      return "advantage";
  }
  return "?";
}

GradientSignal parse_gradient_signal(std::string_view name) {
  if (name == "q") return GradientSignal::kQValue;
  if (name == "advantage") return GradientSignal::kAdvantage;
  throw std::invalid_argument("unknown gradient signal '" + std::string(name) +
                              "' (expected q or advantage)");
}

void AdaptiveHConfig::validate() const {
  // Infinite thresholds are legal: -inf never retreats, +inf always does.
  if (std::isnan(threshold)) throw std::invalid_argument("threshold must not be nan");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("step_size must be >= 0");
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("discount must lie in [0, 1)");
  }
  if (max_episode_len < 1) {
    throw std::invalid_argument("max_episode_len must be >= 1");
  }
  if (min_window < 1) throw std::invalid_argument("min_window must be >= 1");
  if (replay_window < 1) {
    throw std::invalid_argument("replay_window must be >= 1");
  }
  if (!(ridge > 0.0)) throw std::invalid_argument("ridge must be > 0");
}

CheckpointRule CheckpointRule::fixed(int window) {
  if (window < 1) throw std::invalid_argument("fixed window must be >= 1");
  return {Kind::kFixed, window};
}

GradientEstimate estimate_gradient(const GaussianPolicy& policy, double q_value,
                                   const StateVector& s, const ActionVector& a,
                                   int step_index) {
  CompatibleFeature phi = compatible_feature(policy, s, a);
  GradientEstimate g{
      RkhsFunctional::singleton(s, q_value * phi.u), s, step_index,
      policy.version()};
  return g;
}

GradientEstimate estimate_gradient(const GaussianPolicy& policy,
                                   const QModel& q, const StateVector& s,
                                   const ActionVector& a, GradientSignal signal,
                                   int step_index) {
  double value = 0.0;
  if (q.fitted()) {
    value = signal == GradientSignal::kAdvantage ? q.advantage(policy, s, a)
                                                 : q.evaluate(policy, s, a);
  }
  return estimate_gradient(policy, value, s, a, step_index);
}

bool ascent_check(const GradientEstimate& g_ref, const GradientEstimate& g_now,
                  double threshold, const Bandwidth& bw) {
  return inner(g_ref.functional, g_now.functional, bw) >= threshold;
}

GaussianPolicy policy_update(const GaussianPolicy& policy,
                             const RkhsFunctional& grad, double step_size,
                             const KernelDictionary& dict) {
  RkhsFunctional moved = axpy(policy.mean(), grad, step_size);
  return policy.with_mean(project(moved, dict));
}

AdaptiveHLearner::AdaptiveHLearner(AdaptiveHConfig cfg, CheckpointRule rule,
                                   GaussianPolicy initial,
                                   KernelDictionary dict)
    : cfg_(cfg),
      rule_(rule),
      policy_(std::move(initial)),
      q_(cfg.ridge, cfg.discount, policy_.bandwidth()),
      dict_(std::move(dict)) {
  cfg_.validate();
  if (rule_.kind == CheckpointRule::Kind::kFixed && rule_.window < 1) {
    throw std::invalid_argument("fixed window must be >= 1");
  }
}

std::size_t AdaptiveHLearner::replay_size() const {
  return std::min(replay_.size(), cfg_.replay_window);
}

void AdaptiveHLearner::set_variance(Eigen::VectorXd variance) {
  policy_ = policy_.with_variance(std::move(variance));
}

void AdaptiveHLearner::apply_update(const RkhsFunctional& window_sum,
                                    int window_len) {
  policy_ = policy_update(policy_, window_sum,
                          cfg_.step_size / static_cast<double>(window_len),
                          dict_);
}

void AdaptiveHLearner::refit() {
  const std::size_t n = replay_size();
  if (n == 0 || dict_.empty()) return;
  std::span<const Transition> recent(replay_.data() + replay_.size() - n, n);
  q_ = lstd_fit(q_, recent, policy_, dict_, &kernel_cache_);
}

void AdaptiveHLearner::remember(Transition tr) {
  replay_.push_back(std::move(tr));
  // Trim in chunks so the tail stays contiguous without shifting every step.
  if (replay_.size() >= 2 * cfg_.replay_window) {
    replay_.erase(replay_.begin(),
                  replay_.end() - static_cast<std::ptrdiff_t>(cfg_.replay_window));
  }
}

EpisodeRecord AdaptiveHLearner::run_episode(NsEnv& env,
                                            std::uint64_t reset_seed,
                                            Rng& policy_rng,
                                            const CheckObserver& observer) {
  if (env.action_dim() != policy_.action_dim()) {
    throw std::invalid_argument("policy and environment action dims differ");
  }
  EpisodeRecord rec;
  StateVector s = env.reset(reset_seed);
  ActionVector a = sample_action(policy_, s, policy_rng);

  std::optional<GradientEstimate> ref;
  RkhsFunctional window_sum(policy_.action_dim());
  int window_len = 0;
  double disc = 1.0;
  const bool fixed = rule_.kind == CheckpointRule::Kind::kFixed;

  for (int i = 0; i < cfg_.max_episode_len; ++i) {
    StepResult step = env.step(a);
    if (!std::isfinite(step.reward) || !step.next_state.allFinite()) {
      throw std::runtime_error("environment produced a non-finite transition");
    }
    rec.undiscounted_return += step.reward;
    rec.discounted_return += disc * step.reward;
    disc *= cfg_.discount;

    dict_.admit(s);
    GradientEstimate g = estimate_gradient(policy_, q_, s, a, cfg_.signal, i);
    window_sum = axpy(window_sum, g.functional, 1.0);
    ++window_len;
    if (!ref) ref = g;

    bool passed = true;
    if (fixed) {
      passed = window_len < rule_.window;
    } else {
      passed = ascent_check(*ref, g, cfg_.threshold, policy_.bandwidth());
    }
    if (observer) observer(*ref, g, passed);

    const bool retreat = fixed ? !passed : (!passed && window_len >= cfg_.min_window);
    if (retreat) {
      apply_update(window_sum, window_len);
      rec.retreat_points.push_back(i);
      rec.h_windows.push_back(window_len);
      ++rec.updates;
      window_sum = RkhsFunctional(policy_.action_dim());
      window_len = 0;
      ref.reset();
    }

    const bool stop = step.terminal || i + 1 == cfg_.max_episode_len;
    const bool true_terminal = step.terminal && !step.truncated;
    // The next action comes from the (possibly upgraded) current policy. After
    // a truncation it is only used to bootstrap.
    ActionVector a_next = true_terminal
                              ? ActionVector(ActionVector::Zero(a.size()))
                              : sample_action(policy_, step.next_state, policy_rng);
    Transition tr{s, a, step.reward, step.next_state, a_next, true_terminal};
    rec.transitions.push_back(tr);
    remember(std::move(tr));
    if (retreat) refit();

    if (stop) break;
    s = std::move(step.next_state);
    a = std::move(a_next);
  }

  if (window_len > 0) {
    apply_update(window_sum, window_len);
    rec.h_windows.push_back(window_len);
    ++rec.updates;
  }
  refit();
  rec.dictionary_size = dict_.size();
  return rec;
}

std::vector<double> regret_series(std::span<const double> returns) {
  std::vector<double> out;
  out.reserve(returns.size());
  double best = -std::numeric_limits<double>::infinity();
  for (double r : returns) {
    best = std::max(best, r);
    out.push_back(best - r);
  }
  return out;
}

std::vector<double> regret_monitor(std::span<const EpisodeRecord> records) {
  std::vector<double> returns;
  returns.reserve(records.size());
  for (const auto& r : records) returns.push_back(r.discounted_return);
  return regret_series(returns);
}

}  // namespace adaptiveh
