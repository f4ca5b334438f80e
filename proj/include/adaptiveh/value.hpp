#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adaptiveh/policy.hpp"
#include "adaptiveh/rkhs.hpp"

namespace adaptiveh {

struct Transition {
  StateVector s;
  ActionVector a;
  double reward = 0.0;
  StateVector s_next;
  ActionVector a_next;
  // True terminal only; time-limit truncation bootstraps.
  bool terminal = false;
};

/// k(s, centers) from the previous fit over a sliding replay window.
struct KernelRowCache {
  Eigen::MatrixXd states;
  Eigen::MatrixXd centers;
  Eigen::MatrixXd kernels;
};

/// <k(c1,.) u1, k(c2,.) u2>_H = k(c1, c2) (u1 . u2).
double feature_dot(const CompatibleFeature& f1, const CompatibleFeature& f2,
                   const Bandwidth& bw);

/// Kernel action-value model over the compatible features of the current
/// policy.
///
/// The regression basis is {k(c_j, .) e_l} for every dictionary center c_j and
/// action axis l, so that Q(s, a) picks up sum_j k(s, c_j) W_j . u(s, a). A
/// state-value block {k(c_j, .)} over the same centers is fitted jointly: the
/// compatible block alone has zero mean under the policy and cannot carry a
/// bootstrapped return.
class QModel {
 public:
  QModel(double ridge, double discount, Bandwidth bw);

  double ridge() const { return ridge_; }
  double discount() const { return discount_; }
  const Bandwidth& bandwidth() const { return bw_; }

  bool fitted() const { return !centers_.empty(); }
  const std::vector<StateVector>& centers() const { return centers_; }
  /// Rows are centers, columns action axes.
  const Eigen::MatrixXd& compatible_weights() const { return compat_w_; }
  const Eigen::VectorXd& value_weights() const { return value_w_; }

  /// The compatible basis elements (c_j, e_l) in weight order j * d + l.
  std::vector<CompatibleFeature> basis() const;
  /// Compatible weights flattened in basis order.
  Eigen::VectorXd weights() const;

  /// Compatible part: sum_i w_i <phi(s, a), basis_i>.
  double advantage(const GaussianPolicy& policy, const StateVector& s,
                   const ActionVector& a) const;
  double state_value(const StateVector& s) const;
  /// Full estimate advantage + state value.
  double evaluate(const GaussianPolicy& policy, const StateVector& s,
                  const ActionVector& a) const;

 private:
  friend QModel lstd_fit(const QModel&, std::span<const Transition>,
                         const GaussianPolicy&, const KernelDictionary&,
                         KernelRowCache*);

  double ridge_;
  double discount_;
  Bandwidth bw_;
  std::vector<StateVector> centers_;
  Eigen::MatrixXd compat_w_;
  Eigen::VectorXd value_w_;
};

/// LSTD(0) over the batch: solves (A / N + ridge I) w = b / N with
/// A = sum z (z - discount z')^T and b = sum z r, where z stacks the
/// compatible and state-value features of (s, a) and z' those of
/// (s_next, a_next), zeroed on terminal transitions. The compatible features
/// enter in per-axis standard-deviation units, so the ridge weighs both
/// blocks alike. The basis centers are the dictionary's. Throws
/// std::invalid_argument on an empty batch or dictionary and
/// std::runtime_error when the system is numerically singular.
///
/// With a cache, kernel entries shared with the previous call (same states
/// and centers, shifted) are copied instead of re-evaluated.
QModel lstd_fit(const QModel& model, std::span<const Transition> batch,
                const GaussianPolicy& policy, const KernelDictionary& dict,
                KernelRowCache* cache = nullptr);

}  // namespace adaptiveh
