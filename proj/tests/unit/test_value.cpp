#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "adaptiveh/value.hpp"

namespace {

using adaptiveh::Bandwidth;
using adaptiveh::CompatibleFeature;
using adaptiveh::GaussianPolicy;
using adaptiveh::KernelDictionary;
using adaptiveh::QModel;
using adaptiveh::RkhsFunctional;
using adaptiveh::StateVector;
using adaptiveh::Transition;

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

KernelDictionary dict_of(const std::vector<StateVector>& states, const Bandwidth& bw) {
  KernelDictionary d(bw, {0.0, 2000});
  for (const auto& s : states) d.admit(s);
  return d;
}

// Deterministic chain s0 -> s1 -> s2 -> end with rewards (0, 0, 1), states
// far apart on a line so their kernel embeddings are effectively disjoint.
struct Chain {
  Bandwidth bw{vec({1.0})};
  GaussianPolicy policy = GaussianPolicy::zero(1, vec({1.0}), bw);
  std::vector<StateVector> states{vec({0.0}), vec({10.0}), vec({20.0})};
  std::vector<Eigen::VectorXd> actions{vec({0.3}), vec({-0.2}), vec({0.5})};

  std::vector<Transition> batch() const {
    return {{states[0], actions[0], 0.0, states[1], actions[1], false},
            {states[1], actions[1], 0.0, states[2], actions[2], false},
            {states[2], actions[2], 1.0, states[2], vec({0.0}), true}};
  }
};

TEST(FeatureDot, SelfAtSameCenter) {
  const Bandwidth bw(vec({1.0, 1.0}));
  const CompatibleFeature f{vec({0.1, 0.2}), vec({3.0, 4.0})};
  EXPECT_NEAR(adaptiveh::feature_dot(f, f, bw), 25.0, 1e-12);
}

TEST(FeatureDot, FarCentersVanish) {
  const Bandwidth bw(vec({1.0}));
  const CompatibleFeature f{vec({0.0}), vec({1.0})};
  const CompatibleFeature g{vec({100.0}), vec({1.0})};
  EXPECT_LT(adaptiveh::feature_dot(f, g, bw), 1e-300);
}

TEST(FeatureDot, MatchesRkhsInner) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  const Bandwidth bw(vec({0.5, 2.0}));
  for (int i = 0; i < 50; ++i) {
    const CompatibleFeature f{vec({n(rng), n(rng)}), vec({n(rng), n(rng), n(rng)})};
    const CompatibleFeature g{vec({n(rng), n(rng)}), vec({n(rng), n(rng), n(rng)})};
    const double inner = adaptiveh::inner(RkhsFunctional::singleton(f.center, f.u),
                                          RkhsFunctional::singleton(g.center, g.u), bw);
    EXPECT_NEAR(adaptiveh::feature_dot(f, g, bw), inner, 1e-12);
  }
}

TEST(QModel, RejectsBadParameters) {
  const Bandwidth bw(vec({1.0}));
  EXPECT_THROW(QModel(0.0, 0.5, bw), std::invalid_argument);
  EXPECT_THROW(QModel(1e-3, 1.0, bw), std::invalid_argument);
}

TEST(QModel, UnfittedEvaluatesToZero) {
  const Bandwidth bw(vec({1.0}));
  const QModel q(1e-3, 0.9, bw);
  const auto policy = GaussianPolicy::zero(1, vec({1.0}), bw);
  EXPECT_EQ(q.evaluate(policy, vec({0.3}), vec({1.0})), 0.0);
}

TEST(LstdFit, SelfLoopGeometricSeries) {
  const Bandwidth bw(vec({1.0}));
  const auto policy = GaussianPolicy::zero(1, vec({1.0}), bw);
  const StateVector s = vec({0.0});
  const Eigen::VectorXd a = vec({0.5});
  const std::vector<Transition> batch{{s, a, 1.0, s, a, false}};
  const QModel q = adaptiveh::lstd_fit(QModel(1e-8, 0.5, bw), batch, policy,
                                       dict_of({s}, bw));
  EXPECT_NEAR(q.evaluate(policy, s, a), 2.0, 1e-6);
}

TEST(LstdFit, ChainMatchesDiscountedReturns) {
  const Chain c;
  const QModel q = adaptiveh::lstd_fit(QModel(1e-8, 0.9, c.bw), c.batch(), c.policy,
                                       dict_of(c.states, c.bw));
  const double want[] = {0.81, 0.9, 1.0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(q.evaluate(c.policy, c.states[i], c.actions[i]), want[i], 1e-6) << i;
  }
}

TEST(LstdFit, MatchesDynamicProgrammingOnRandomMdp) {
  // Five well-separated states with a deterministic successor each; the
  // behaviour actions are fixed per state, so Q along the chain solves
  // q = r + gamma q[next].
  const Bandwidth bw(vec({1.0, 1.0}));
  const auto policy = GaussianPolicy::zero(2, vec({0.5, 2.0}), bw);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<StateVector> states;
  std::vector<Eigen::VectorXd> actions;
  for (int i = 0; i < 5; ++i) {
    states.push_back(vec({12.0 * i, -7.0 * i}));
    actions.push_back(vec({u(rng), u(rng)}));
  }
  const int next[] = {1, 2, 0, 4, 3};
  std::vector<double> reward;
  for (int i = 0; i < 5; ++i) reward.push_back(u(rng));
  std::vector<Transition> batch;
  for (int i = 0; i < 5; ++i) {
    batch.push_back({states[i], actions[i], reward[i], states[next[i]],
                     actions[next[i]], false});
  }
  const double gamma = 0.8;
  // Value iteration on the deterministic cycle structure.
  std::vector<double> q(5, 0.0);
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> nq(5);
    for (int i = 0; i < 5; ++i) nq[i] = reward[i] + gamma * q[next[i]];
    q = nq;
  }
  const QModel fit = adaptiveh::lstd_fit(QModel(1e-8, gamma, bw), batch, policy,
                                         dict_of(states, bw));
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(fit.evaluate(policy, states[i], actions[i]), q[i], 1e-6) << i;
  }
}

TEST(LstdFit, ZeroRewardGivesZeroWeights) {
  Chain c;
  auto batch = c.batch();
  for (auto& t : batch) t.reward = 0.0;
  const QModel q = adaptiveh::lstd_fit(QModel(1e-3, 0.9, c.bw), batch, c.policy,
                                       dict_of(c.states, c.bw));
  EXPECT_LT(q.weights().cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(q.value_weights().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LstdFit, AbsorbingTailLeavesValuesUnchanged) {
  Chain c;
  const double ridge = 1e-10;
  const QModel base = adaptiveh::lstd_fit(QModel(ridge, 0.9, c.bw), c.batch(),
                                          c.policy, dict_of(c.states, c.bw));
  // Same chain, but s2 now leads to an absorbing zero-reward state.
  const StateVector sink = vec({30.0});
  const Eigen::VectorXd a_sink = vec({0.1});
  auto batch = c.batch();
  batch[2] = {c.states[2], c.actions[2], 1.0, sink, a_sink, false};
  batch.push_back({sink, a_sink, 0.0, sink, a_sink, false});
  auto states = c.states;
  states.push_back(sink);
  const QModel tail = adaptiveh::lstd_fit(QModel(ridge, 0.9, c.bw), batch, c.policy,
                                          dict_of(states, c.bw));
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(tail.evaluate(c.policy, c.states[i], c.actions[i]),
                base.evaluate(c.policy, c.states[i], c.actions[i]), 1e-8)
        << i;
  }
}

TEST(LstdFit, WeightNormNonIncreasingInRidge) {
  const Bandwidth bw(vec({0.5, 0.5}));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    // A noisy random-walk trajectory under a zero-mean policy.
    const auto policy = GaussianPolicy::zero(1, vec({0.5}), bw);
    std::vector<Transition> batch;
    StateVector s = vec({0.0, 0.0});
    Eigen::VectorXd a = vec({n(rng)});
    for (int t = 0; t < 200; ++t) {
      StateVector s2 = s + 0.3 * vec({a[0], n(rng)});
      Eigen::VectorXd a2 = vec({std::sqrt(0.5) * n(rng)});
      batch.push_back({s, a, -s.squaredNorm(), s2, a2, false});
      s = s2;
      a = a2;
    }
    KernelDictionary dict(bw, {0.3, 2000});
    for (const auto& t : batch) dict.admit(t.s);
    double prev = INFINITY;
    for (double ridge : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      const QModel q = adaptiveh::lstd_fit(QModel(ridge, 0.9, bw), batch, policy, dict);
      Eigen::VectorXd w(q.weights().size() + q.value_weights().size());
      w << q.weights(), q.value_weights();
      EXPECT_LE(w.norm(), prev * (1.0 + 1e-12)) << "trial " << trial << " ridge " << ridge;
      prev = w.norm();
    }
  }
}

TEST(LstdFit, KernelCacheMatchesFreshFit) {
  const Bandwidth bw(vec({0.5, 0.5}));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto policy = GaussianPolicy::zero(1, vec({0.5}), bw);
  std::vector<Transition> traj;
  StateVector s = vec({0.0, 0.0});
  Eigen::VectorXd a = vec({n(rng)});
  for (int t = 0; t < 400; ++t) {
    StateVector s2 = s + 0.3 * vec({a[0], n(rng)});
    Eigen::VectorXd a2 = vec({std::sqrt(0.5) * n(rng)});
    // Episode breaks every 50 steps leave some s_next rows unshared.
    traj.push_back({s, a, -s.squaredNorm(), s2, a2, t % 50 == 49});
    s = t % 50 == 49 ? vec({0.0, 0.0}) : s2;
    a = a2;
  }
  // A small cap forces evictions while the window slides.
  KernelDictionary dict(bw, {0.1, 25});
  adaptiveh::KernelRowCache cache;
  const std::size_t window = 150;
  std::size_t seen = 0;
  for (std::size_t end = 20; end <= traj.size(); end += 7) {
    for (; seen < end; ++seen) dict.admit(traj[seen].s);
    const std::size_t begin = end > window ? end - window : 0;
    const std::span<const Transition> batch(traj.data() + begin, end - begin);
    const QModel fresh = adaptiveh::lstd_fit(QModel(1e-3, 0.9, bw), batch, policy, dict);
    const QModel cached =
        adaptiveh::lstd_fit(QModel(1e-3, 0.9, bw), batch, policy, dict, &cache);
    EXPECT_LT((fresh.weights() - cached.weights()).cwiseAbs().maxCoeff(), 1e-9) << end;
    EXPECT_LT((fresh.value_weights() - cached.value_weights()).cwiseAbs().maxCoeff(), 1e-9)
        << end;
  }
  EXPECT_GT(dict.evictions(), 0u);
  // A batch unrelated to the cached one falls back to a full evaluation.
  const std::span<const Transition> head(traj.data(), 30);
  const QModel fresh = adaptiveh::lstd_fit(QModel(1e-3, 0.9, bw), head, policy, dict);
  const QModel cached =
      adaptiveh::lstd_fit(QModel(1e-3, 0.9, bw), head, policy, dict, &cache);
  EXPECT_LT((fresh.weights() - cached.weights()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LstdFit, EmptyInputsThrow) {
  const Bandwidth bw(vec({1.0}));
  const auto policy = GaussianPolicy::zero(1, vec({1.0}), bw);
  EXPECT_THROW(adaptiveh::lstd_fit(QModel(1e-3, 0.9, bw), {}, policy,
                                   dict_of({vec({0.0})}, bw)),
               std::invalid_argument);
  const std::vector<Transition> batch{{vec({0.0}), vec({0.0}), 1.0, vec({0.0}),
                                       vec({0.0}), false}};
  EXPECT_THROW(adaptiveh::lstd_fit(QModel(1e-3, 0.9, bw), batch, policy,
                                   KernelDictionary(bw)),
               std::invalid_argument);
}

TEST(QEval, ContinuousInAction) {
  const Chain c;
  const QModel q = adaptiveh::lstd_fit(QModel(1e-3, 0.9, c.bw), c.batch(), c.policy,
                                       dict_of(c.states, c.bw));
  const StateVector s = vec({0.5});
  const double base = q.evaluate(c.policy, s, vec({0.2}));
  double prev_gap = INFINITY;
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const double gap = std::abs(q.evaluate(c.policy, s, vec({0.2 + delta})) - base);
    EXPECT_LE(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 1e-5);
}

TEST(QEval, BasisMatchesCompatibleWeights) {
  const Chain c;
  const QModel q = adaptiveh::lstd_fit(QModel(1e-3, 0.9, c.bw), c.batch(), c.policy,
                                       dict_of(c.states, c.bw));
  // advantage = sum_i w_i <phi(s, a), basis_i>.
  const StateVector s = vec({9.0});
  const Eigen::VectorXd a = vec({0.7});
  const auto phi = adaptiveh::compatible_feature(c.policy, s, a);
  const auto basis = q.basis();
  const Eigen::VectorXd w = q.weights();
  ASSERT_EQ(basis.size(), static_cast<std::size_t>(w.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    sum += w[static_cast<Eigen::Index>(i)] * adaptiveh::feature_dot(phi, basis[i], c.bw);
  }
  EXPECT_NEAR(q.advantage(c.policy, s, a), sum, 1e-12);
}

}  // namespace
