#include "adaptiveh/value.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adaptiveh {
namespace {

constexpr double kMinReciprocalCondition = 1e-15;

// Mean actions h(s) for states stacked by row. `dict_kernels` holds
// k(states, dictionary centers); it is reused when h lives on exactly those
// centers, which is the case after every projected update.
Eigen::MatrixXd batch_mean(const GaussianPolicy& policy,
                           const Eigen::MatrixXd& states,
                           const KernelDictionary& dict,
                           const Eigen::MatrixXd& dict_kernels) {
  const auto& terms = policy.mean().terms();
  const Eigen::Index d = policy.action_dim();
  if (terms.empty()) return Eigen::MatrixXd::Zero(states.rows(), d);
  Eigen::MatrixXd coeff(static_cast<Eigen::Index>(terms.size()), d);
  bool on_dict = terms.size() == dict.size();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    coeff.row(static_cast<Eigen::Index>(j)) = terms[j].coeff.transpose();
    if (on_dict && terms[j].center != dict.centers()[j]) on_dict = false;
  }
  if (on_dict) return dict_kernels * coeff;
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(terms.size()),
                          states.cols());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    centers.row(static_cast<Eigen::Index>(j)) = terms[j].center.transpose();
  }
  return kernel_matrix(states, centers, policy.bandwidth()) * coeff;
}

// Offset o with prev.row(o + i) == next.row(i) over their overlap, or -1.
Eigen::Index shared_offset(const Eigen::MatrixXd& prev, const Eigen::MatrixXd& next) {
  if (prev.rows() == 0 || next.rows() == 0 || prev.cols() != next.cols()) return -1;
  for (Eigen::Index o = 0; o < prev.rows(); ++o) {
    if (prev.row(o) != next.row(0)) continue;
    const Eigen::Index len = std::min(prev.rows() - o, next.rows());
    if (prev.middleRows(o, len) == next.topRows(len)) return o;
  }
  return -1;
}

Eigen::MatrixXd cached_kernels(const Eigen::MatrixXd& states,
                               const Eigen::MatrixXd& centers,
                               const Bandwidth& bw, KernelRowCache* cache) {
  if (cache == nullptr) return kernel_matrix(states, centers, bw);
  const Eigen::Index so = shared_offset(cache->states, states);
  const Eigen::Index co = shared_offset(cache->centers, centers);
  Eigen::MatrixXd out;
  if (so < 0 || co < 0) {
    out = kernel_matrix(states, centers, bw);
  } else {
    const Eigen::Index rows = std::min(cache->states.rows() - so, states.rows());
    const Eigen::Index cols = std::min(cache->centers.rows() - co, centers.rows());
    const Eigen::Index new_cols = centers.rows() - cols;
    out.resize(states.rows(), centers.rows());
    out.topLeftCorner(rows, cols) = cache->kernels.block(so, co, rows, cols);
    if (new_cols > 0) {
      out.topRightCorner(rows, new_cols) = kernel_matrix(
          states.topRows(rows), centers.bottomRows(new_cols), bw);
    }
    if (rows < states.rows()) {
      out.bottomRows(states.rows() - rows) =
          kernel_matrix(states.bottomRows(states.rows() - rows), centers, bw);
    }
  }
  cache->states = states;
  cache->centers = centers;
  cache->kernels = out;
  return out;
}

// k(s_next, centers) per transition. Within an episode s_next of one
// transition is s of the next, so those rows are copied from `k_now`.
Eigen::MatrixXd next_kernels(std::span<const Transition> batch,
                             const Eigen::MatrixXd& next_states,
                             const Eigen::MatrixXd& k_now,
                             const Eigen::MatrixXd& centers, const Bandwidth& bw) {
  const Eigen::Index count = k_now.rows();
  Eigen::MatrixXd out(count, k_now.cols());
  std::vector<Eigen::Index> fresh;
  // Shared rows come in runs; a run is copied as one block.
  Eigen::Index run = 0;
  for (Eigen::Index t = 0; t < count; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (t + 1 < count && batch[i + 1].s == batch[i].s_next) continue;
    if (t > run) out.middleRows(run, t - run) = k_now.middleRows(run + 1, t - run);
    fresh.push_back(t);
    run = t + 1;
  }
  if (fresh.empty()) return out;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(fresh.size()), next_states.cols());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = next_states.row(fresh[i]);
  }
  const Eigen::MatrixXd k = kernel_matrix(rows, centers, bw);
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    out.row(fresh[i]) = k.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

// Rows [k(s) (x) u, k(s)] in the layout of QModel's weight vector.
Eigen::MatrixXd features(const Eigen::MatrixXd& kernels,
                         const Eigen::MatrixXd& scores) {
  const Eigen::Index n = kernels.cols();
  const Eigen::Index d = scores.cols();
  Eigen::MatrixXd z(kernels.rows(), n * d + n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l < d; ++l) {
      z.col(j * d + l) = kernels.col(j).cwiseProduct(scores.col(l));
    }
  }
  z.rightCols(n) = kernels;
  return z;
}

}  // namespace

double feature_dot(const CompatibleFeature& f1, const CompatibleFeature& f2,
                   const Bandwidth& bw) {
  if (f1.u.size() != f2.u.size()) {
    throw std::invalid_argument("feature_dot: action dimension mismatch");
  }
  return scalar_kernel(f1.center, f2.center, bw) * f1.u.dot(f2.u);
}

QModel::QModel(double ridge, double discount, Bandwidth bw)
    : ridge_(ridge), discount_(discount), bw_(std::move(bw)) {
  if (!(ridge > 0.0)) throw std::invalid_argument("QModel: ridge must be > 0");
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("QModel: discount must lie in [0, 1)");
  }
}

std::vector<CompatibleFeature> QModel::basis() const {
  std::vector<CompatibleFeature> out;
  const Eigen::Index d = compat_w_.cols();
  for (const auto& c : centers_) {
    for (Eigen::Index l = 0; l < d; ++l) {
      out.push_back({c, Eigen::VectorXd::Unit(d, l)});
    }
  }
  return out;
}

Eigen::VectorXd QModel::weights() const {
  Eigen::VectorXd w(compat_w_.size());
  const Eigen::Index d = compat_w_.cols();
  for (Eigen::Index j = 0; j < compat_w_.rows(); ++j) {
    w.segment(j * d, d) = compat_w_.row(j).transpose();
  }
  return w;
}

double QModel::advantage(const GaussianPolicy& policy, const StateVector& s,
                         const ActionVector& a) const {
  if (!fitted()) return 0.0;
  const CompatibleFeature phi = compatible_feature(policy, s, a);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(compat_w_.cols());
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    g.noalias() += scalar_kernel(s, centers_[j], bw_) *
                   compat_w_.row(static_cast<Eigen::Index>(j)).transpose();
  }
  return phi.u.dot(g);
}

double QModel::state_value(const StateVector& s) const {
  double v = 0.0;
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    v += scalar_kernel(s, centers_[j], bw_) *
         value_w_[static_cast<Eigen::Index>(j)];
  }
  return v;
}

double QModel::evaluate(const GaussianPolicy& policy, const StateVector& s,
                        const ActionVector& a) const {
  return advantage(policy, s, a) + state_value(s);
}

QModel lstd_fit(const QModel& model, std::span<const Transition> batch,
                const GaussianPolicy& policy, const KernelDictionary& dict,
                KernelRowCache* cache) {
  if (batch.empty()) throw std::invalid_argument("lstd_fit: empty batch");
  if (dict.empty()) throw std::invalid_argument("lstd_fit: empty dictionary");

  const Eigen::Index count = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index m = batch.front().s.size();
  const Eigen::Index d = policy.action_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(dict.size());

  Eigen::MatrixXd states(count, m), next_states(count, m);
  Eigen::MatrixXd actions(count, d), next_actions(count, d);
  Eigen::VectorXd rewards(count), alive(count);
  for (Eigen::Index t = 0; t < count; ++t) {
    const Transition& tr = batch[static_cast<std::size_t>(t)];
    states.row(t) = tr.s.transpose();
    next_states.row(t) = tr.s_next.transpose();
    actions.row(t) = tr.a.transpose();
    next_actions.row(t) = tr.a_next.transpose();
    rewards[t] = tr.reward;
    alive[t] = tr.terminal ? 0.0 : 1.0;
  }

  const Eigen::MatrixXd centers = stack_rows(dict.centers());
  // Scores are fitted in standard-deviation units, (a - h) / sigma, so the
  // compatible block is scaled like the value block whatever the policy
  // variance. The weights are mapped back to Sigma^{-1}(a - h) units below.
  const Eigen::VectorXd sigma = policy.variance().cwiseSqrt();
  const Eigen::RowVectorXd inv_sigma = sigma.cwiseInverse().transpose();

  const Eigen::MatrixXd k_now = cached_kernels(states, centers, model.bw_, cache);
  const Eigen::MatrixXd k_next = next_kernels(batch, next_states, k_now, centers, model.bw_);
  const Eigen::MatrixXd scores =
      ((actions - batch_mean(policy, states, dict, k_now)).array().rowwise() *
       inv_sigma.array()).matrix();
  const Eigen::MatrixXd next_scores =
      ((next_actions - batch_mean(policy, next_states, dict, k_next))
           .array().rowwise() * inv_sigma.array()).matrix();

  const Eigen::MatrixXd z = features(k_now, scores);
  // td = z - discount * z_next, built in place.
  Eigen::MatrixXd td = features(k_next, next_scores);
  td.array().colwise() *= (-model.discount_ * alive).array();
  td += z;

  const double inv_count = 1.0 / static_cast<double>(count);
  Eigen::MatrixXd system = (z.transpose() * td) * inv_count;
  system.diagonal().array() += model.ridge_;
  const Eigen::VectorXd rhs = (z.transpose() * rewards) * inv_count;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(lu.rcond() > kMinReciprocalCondition)) {
    throw std::runtime_error("lstd_fit: singular system (rcond " +
                             std::to_string(lu.rcond()) + ", max |A| " +
                             std::to_string(system.cwiseAbs().maxCoeff()) + ")");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) throw std::runtime_error("lstd_fit: non-finite weights");

  QModel out(model.ridge_, model.discount_, model.bw_);
  out.centers_ = dict.centers();
  out.compat_w_.resize(n, d);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.compat_w_.row(j) = x.segment(j * d, d).cwiseProduct(sigma).transpose();
  }
  out.value_w_ = x.tail(n);
  return out;
}

}  // namespace adaptiveh
