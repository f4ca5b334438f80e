#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "adaptiveh/random.hpp"
#include "adaptiveh/rkhs.hpp"

namespace adaptiveh {

using ActionVector = Eigen::VectorXd;

/// pi(a|s) = N(a; h(s), Sigma) with an RKHS mean functional h and a fixed
/// diagonal covariance. Actions are never clamped here; bounds are applied by
/// the environment at execution time.
class GaussianPolicy {
 public:
  GaussianPolicy(RkhsFunctional mean, Eigen::VectorXd variance, Bandwidth bw);

  /// Zero mean functional.
  static GaussianPolicy zero(Eigen::Index action_dim, Eigen::VectorXd variance,
                             Bandwidth bw);

  const RkhsFunctional& mean() const { return mean_; }
  const Eigen::VectorXd& variance() const { return variance_; }
  const Bandwidth& bandwidth() const { return bw_; }
  Eigen::Index action_dim() const { return variance_.size(); }

  /// Incremented on every mean update; gradients are tagged with it.
  std::uint64_t version() const { return version_; }

  ActionVector mean_action(const StateVector& s) const {
    return mean_.evaluate(s, bw_);
  }

  /// New policy with the given mean and version + 1.
  GaussianPolicy with_mean(RkhsFunctional mean) const;
  GaussianPolicy with_variance(Eigen::VectorXd variance) const;

 private:
  RkhsFunctional mean_;
  Eigen::VectorXd variance_;
  Bandwidth bw_;
  std::uint64_t version_ = 0;
};

/// a = h(s) + Sigma^{1/2} z, z ~ N(0, I).
ActionVector sample_action(const GaussianPolicy& policy, const StateVector& s,
                           Rng& rng);

/// Log of the d-dimensional diagonal Gaussian density.
double log_density(const GaussianPolicy& policy, const StateVector& s,
                   const ActionVector& a);

/// The RKHS element k(center, .) u with u = Sigma^{-1}(a - h(s)). This is both
/// the score of log pi with respect to h and a regression basis element.
struct CompatibleFeature {
  StateVector center;
  Eigen::VectorXd u;
};

CompatibleFeature compatible_feature(const GaussianPolicy& policy,
                                     const StateVector& s,
                                     const ActionVector& a);

}  // namespace adaptiveh
