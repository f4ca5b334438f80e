#include "adaptiveh/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace adaptiveh {

GaussianPolicy::GaussianPolicy(RkhsFunctional mean, Eigen::VectorXd variance,
                               Bandwidth bw)
    : mean_(std::move(mean)), variance_(std::move(variance)), bw_(std::move(bw)) {
  if (mean_.output_dim() != variance_.size()) {
    throw std::invalid_argument(
        "GaussianPolicy: mean output dim must match covariance size");
  }
  for (Eigen::Index i = 0; i < variance_.size(); ++i) {
    if (!(variance_[i] > 0.0) || !std::isfinite(variance_[i])) {
      throw std::invalid_argument("GaussianPolicy: covariance must be > 0");
    }
  }
}

GaussianPolicy GaussianPolicy::zero(Eigen::Index action_dim,
                                    Eigen::VectorXd variance, Bandwidth bw) {
  return GaussianPolicy(RkhsFunctional(action_dim), std::move(variance),
                        std::move(bw));
}

GaussianPolicy GaussianPolicy::with_mean(RkhsFunctional mean) const {
  GaussianPolicy next(std::move(mean), variance_, bw_);
  next.version_ = version_ + 1;
  return next;
}

GaussianPolicy GaussianPolicy::with_variance(Eigen::VectorXd variance) const {
  GaussianPolicy next(mean_, std::move(variance), bw_);
  next.version_ = version_;
  return next;
}

ActionVector sample_action(const GaussianPolicy& policy, const StateVector& s,
                           Rng& rng) {
  ActionVector a = policy.mean_action(s);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a[i] += std::sqrt(policy.variance()[i]) * normal(rng);
  }
  return a;
}

double log_density(const GaussianPolicy& policy, const StateVector& s,
                   const ActionVector& a) {
  const Eigen::VectorXd diff = a - policy.mean_action(s);
  const Eigen::VectorXd& var = policy.variance();
  double quad = 0.0;
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    quad += diff[i] * diff[i] / var[i];
    log_det += std::log(var[i]);
  }
  const double d = static_cast<double>(diff.size());
  return -0.5 * (quad + log_det + d * std::log(2.0 * std::numbers::pi));
}

CompatibleFeature compatible_feature(const GaussianPolicy& policy,
                                     const StateVector& s,
                                     const ActionVector& a) {
  Eigen::VectorXd u =
      (a - policy.mean_action(s)).cwiseQuotient(policy.variance());
  return {s, std::move(u)};
}

}  // namespace adaptiveh
