#include "adaptiveh/rkhs.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace adaptiveh {
namespace {

// Below this residual a candidate is numerically a duplicate.
constexpr double kAdmissionFloor = 1e-8;

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
}

std::vector<double> key_of(const StateVector& s) {
  return {s.data(), s.data() + s.size()};
}

}  // namespace

Bandwidth::Bandwidth(Eigen::VectorXd diag) : diag_(std::move(diag)) {
  if (diag_.size() == 0) {
    throw std::invalid_argument("Bandwidth: empty diagonal");
  }
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    if (!(diag_[i] > 0.0) || !std::isfinite(diag_[i])) {
      throw std::invalid_argument("Bandwidth: entries must be finite and > 0");
    }
  }
  inv_diag_ = diag_.cwiseInverse();
}

Bandwidth Bandwidth::isotropic(Eigen::Index dim, double variance) {
  return Bandwidth(Eigen::VectorXd::Constant(dim, variance));
}

double Bandwidth::mahalanobis(const StateVector& a, const StateVector& b) const {
  require_same_dim(a.size(), diag_.size(), "Bandwidth::mahalanobis");
  require_same_dim(b.size(), diag_.size(), "Bandwidth::mahalanobis");
  double q = 0.0;
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    const double d = a[i] - b[i];
    q += d * d * inv_diag_[i];
  }
  return q;
}

double scalar_kernel(const StateVector& s, const StateVector& s2,
                     const Bandwidth& bw) {
  return std::exp(-0.5 * bw.mahalanobis(s, s2));
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& rows,
                              const Eigen::MatrixXd& cols, const Bandwidth& bw) {
  require_same_dim(rows.cols(), bw.dim(), "kernel_matrix");
  require_same_dim(cols.cols(), bw.dim(), "kernel_matrix");
  if (rows.rows() == 0 || cols.rows() == 0) {
    return Eigen::MatrixXd(rows.rows(), cols.rows());
  }
  const Eigen::RowVectorXd scale = bw.diag().cwiseSqrt().cwiseInverse().transpose();
  const Eigen::MatrixXd r = rows.array().rowwise() * scale.array();
  const Eigen::MatrixXd c = cols.array().rowwise() * scale.array();
  Eigen::MatrixXd sq = -2.0 * r * c.transpose();
  sq.colwise() += r.rowwise().squaredNorm();
  sq.rowwise() += c.rowwise().squaredNorm().transpose();
  return (-0.5 * sq.array().max(0.0)).exp().matrix();
}

Eigen::MatrixXd stack_rows(const std::vector<StateVector>& states) {
  if (states.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()),
                    states.front().size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = states[i].transpose();
  }
  return m;
}

// ---------------------------------------------------------------------------
// KernelDictionary

KernelDictionary::KernelDictionary(Bandwidth bw, DictionaryOptions opts)
    : bw_(std::move(bw)), opts_(opts) {
  if (!(opts_.novelty_threshold >= 0.0 && opts_.novelty_threshold <= 1.0)) {
    throw std::invalid_argument(
        "KernelDictionary: novelty threshold must lie in [0, 1]");
  }
  if (opts_.max_centers < 1) {
    throw std::invalid_argument("KernelDictionary: max_centers must be >= 1");
  }
}

Eigen::VectorXd KernelDictionary::kernel_vector(const StateVector& s) const {
  Eigen::VectorXd k(static_cast<Eigen::Index>(centers_.size()));
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    k[static_cast<Eigen::Index>(j)] = scalar_kernel(s, centers_[j], bw_);
  }
  return k;
}

double KernelDictionary::novelty(const StateVector& s) const {
  require_same_dim(s.size(), bw_.dim(), "KernelDictionary::novelty");
  if (centers_.empty()) return 1.0;
  const Eigen::VectorXd k = kernel_vector(s);
  return 1.0 - k.dot(gram_inv_ * k);
}

Eigen::Index KernelDictionary::find(const StateVector& s) const {
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    if (centers_[j] == s) return static_cast<Eigen::Index>(j);
  }
  return -1;
}

bool KernelDictionary::admit(const StateVector& s) {
  require_same_dim(s.size(), bw_.dim(), "KernelDictionary::admit");
  if (!s.allFinite()) {
    throw std::invalid_argument("KernelDictionary::admit: non-finite state");
  }
  if (centers_.empty()) {
    centers_.push_back(s);
    gram_ = Eigen::MatrixXd::Ones(1, 1);
    gram_inv_ = Eigen::MatrixXd::Constant(1, 1, 1.0 / (1.0 + kGramJitter));
    return true;
  }

  Eigen::VectorXd k = kernel_vector(s);
  Eigen::VectorXd p = gram_inv_ * k;
  const double residual = 1.0 - k.dot(p);
  if (!(residual > opts_.novelty_threshold) || residual <= kAdmissionFloor) {
    return false;
  }

  if (centers_.size() >= opts_.max_centers) {
    evict_oldest();
    k = kernel_vector(s);
    p = gram_inv_ * k;
  }

  // Block inverse of [[G + eps I, k], [k^T, 1 + eps]] via the Schur complement.
  const double schur = 1.0 + kGramJitter - k.dot(p);
  if (!(schur > 0.0)) {
    throw std::runtime_error("KernelDictionary::admit: singular Gram update");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(centers_.size());

  Eigen::MatrixXd gram(n + 1, n + 1);
  gram.topLeftCorner(n, n) = gram_;
  gram.topRightCorner(n, 1) = k;
  gram.bottomLeftCorner(1, n) = k.transpose();
  gram(n, n) = 1.0;

  Eigen::MatrixXd inv(n + 1, n + 1);
  inv.topLeftCorner(n, n) = gram_inv_ + (p * p.transpose()) / schur;
  inv.topRightCorner(n, 1) = -p / schur;
  inv.bottomLeftCorner(1, n) = -p.transpose() / schur;
  inv(n, n) = 1.0 / schur;

  gram_ = std::move(gram);
  gram_inv_ = std::move(inv);
  centers_.push_back(s);
  return true;
}

void KernelDictionary::evict_oldest() {
  const Eigen::Index n = static_cast<Eigen::Index>(centers_.size());
  centers_.erase(centers_.begin());
  ++evictions_;
  if (n == 1) {
    gram_.resize(0, 0);
    gram_inv_.resize(0, 0);
    return;
  }
  // Removing row/column 0 from an inverse: P' = P_rr - P_r0 P_0r / P_00.
  const Eigen::MatrixXd inv =
      gram_inv_.bottomRightCorner(n - 1, n - 1) -
      gram_inv_.bottomLeftCorner(n - 1, 1) * gram_inv_.topRightCorner(1, n - 1) /
          gram_inv_(0, 0);
  gram_inv_ = inv;
  const Eigen::MatrixXd gram = gram_.bottomRightCorner(n - 1, n - 1);
  gram_ = gram;
}

// ---------------------------------------------------------------------------
// RkhsFunctional

RkhsFunctional::RkhsFunctional(Eigen::Index output_dim)
    : output_dim_(output_dim) {
  if (output_dim < 1) {
    throw std::invalid_argument("RkhsFunctional: output_dim must be >= 1");
  }
}

RkhsFunctional RkhsFunctional::singleton(StateVector center,
                                         Eigen::VectorXd coeff) {
  RkhsFunctional f(coeff.size());
  f.add_term(std::move(center), std::move(coeff));
  return f;
}

void RkhsFunctional::add_term(StateVector center, Eigen::VectorXd coeff) {
  require_same_dim(coeff.size(), output_dim_, "RkhsFunctional::add_term");
  if (!terms_.empty()) {
    require_same_dim(center.size(), terms_.front().center.size(),
                     "RkhsFunctional::add_term");
  }
  terms_.push_back({std::move(center), std::move(coeff)});
}

Eigen::VectorXd RkhsFunctional::evaluate(const StateVector& s,
                                         const Bandwidth& bw) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(output_dim_);
  for (const auto& t : terms_) {
    out.noalias() += scalar_kernel(s, t.center, bw) * t.coeff;
  }
  return out;
}

bool RkhsFunctional::all_finite() const {
  for (const auto& t : terms_) {
    if (!t.coeff.allFinite() || !t.center.allFinite()) return false;
  }
  return true;
}

RkhsFunctional axpy(const RkhsFunctional& f, const RkhsFunctional& g,
                    double alpha) {
  require_same_dim(f.output_dim(), g.output_dim(), "axpy");
  RkhsFunctional out(f.output_dim());
  std::vector<KernelTerm> terms;
  terms.reserve(f.size() + g.size());
  std::map<std::vector<double>, std::size_t> index;

  auto accumulate = [&](const KernelTerm& t, double scale) {
    auto [it, inserted] = index.try_emplace(key_of(t.center), terms.size());
    if (inserted) {
      terms.push_back({t.center, scale * t.coeff});
    } else {
      terms[it->second].coeff += scale * t.coeff;
    }
  };
  for (const auto& t : f.terms()) accumulate(t, 1.0);
  if (alpha != 0.0) {
    for (const auto& t : g.terms()) accumulate(t, alpha);
  }
  for (auto& t : terms) out.add_term(std::move(t.center), std::move(t.coeff));
  return out;
}

double inner(const RkhsFunctional& f, const RkhsFunctional& g,
             const Bandwidth& bw) {
  require_same_dim(f.output_dim(), g.output_dim(), "inner");
  double acc = 0.0;
  for (const auto& a : f.terms()) {
    for (const auto& b : g.terms()) {
      acc += scalar_kernel(a.center, b.center, bw) * a.coeff.dot(b.coeff);
    }
  }
  return acc;
}

RkhsFunctional project(const RkhsFunctional& f, const KernelDictionary& dict) {
  const Eigen::Index d = f.output_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(dict.size());
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(n, d);

  std::vector<const KernelTerm*> residual;
  for (const auto& t : f.terms()) {
    const Eigen::Index j = dict.find(t.center);
    if (j >= 0) {
      beta.row(j) += t.coeff.transpose();
    } else {
      residual.push_back(&t);
    }
  }
  if (!residual.empty() && n > 0) {
    // Right-hand side K_{dict, R} A_R, then beta += (G + eps I)^{-1} rhs.
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, d);
    for (const KernelTerm* t : residual) {
      rhs.noalias() += dict.kernel_vector(t->center) * t->coeff.transpose();
    }
    beta.noalias() += dict.gram_inverse() * rhs;
  }

  RkhsFunctional out(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.add_term(dict.centers()[static_cast<std::size_t>(j)],
                 beta.row(j).transpose());
  }
  return out;
}

}  // namespace adaptiveh
