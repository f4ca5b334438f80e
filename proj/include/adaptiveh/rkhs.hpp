#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace adaptiveh {

using StateVector = Eigen::VectorXd;

// Jitter added to the Gram diagonal before every solve.
inline constexpr double kGramJitter = 1e-10;

/// Diagonal covariance of the Gaussian kernel. Entries are squared length
/// scales in state units and must be strictly positive.
class Bandwidth {
 public:
  explicit Bandwidth(Eigen::VectorXd diag);

  static Bandwidth isotropic(Eigen::Index dim, double variance);

  const Eigen::VectorXd& diag() const { return diag_; }
  Eigen::Index dim() const { return diag_.size(); }

  /// (a - b)^T diag^{-1} (a - b). Throws on dimension mismatch.
  double mahalanobis(const StateVector& a, const StateVector& b) const;

 private:
  Eigen::VectorXd diag_;
  Eigen::VectorXd inv_diag_;
};

/// Common diagonal entry of the matrix-valued Gaussian kernel,
/// k(s, s') = exp(-(s - s')^T bw^{-1} (s - s') / 2). The full kernel is k * I.
double scalar_kernel(const StateVector& s, const StateVector& s2,
                     const Bandwidth& bw);

/// K[i][j] = k(rows[i], cols[j]) for states stacked one per matrix row.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& rows,
                              const Eigen::MatrixXd& cols, const Bandwidth& bw);

/// Stacks states one per row.
Eigen::MatrixXd stack_rows(const std::vector<StateVector>& states);

struct DictionaryOptions {
  // ALD admission threshold; a state is admitted when its residual exceeds it.
  double novelty_threshold = 0.1;
  // Hard cap; the oldest center is evicted on overflow.
  std::size_t max_centers = 2000;
};

/// Sparsified set of kernel centers with an incrementally maintained Gram
/// matrix and the inverse of its jittered form.
///
/// Admission uses approximate linear dependence: a candidate s is appended
/// when k(s,s) - k^T G^{-1} k exceeds the novelty threshold. The empty
/// dictionary always admits.
class KernelDictionary {
 public:
  explicit KernelDictionary(Bandwidth bw, DictionaryOptions opts = {});

  /// Admits s if it is novel; returns whether it was appended.
  bool admit(const StateVector& s);

  /// ALD residual of s against the current centers (1 for an empty dictionary).
  double novelty(const StateVector& s) const;

  /// [k(s, c_0), ..., k(s, c_{n-1})].
  Eigen::VectorXd kernel_vector(const StateVector& s) const;

  /// Index of a center exactly equal to s, or -1.
  Eigen::Index find(const StateVector& s) const;

  const std::vector<StateVector>& centers() const { return centers_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  /// (G + jitter I)^{-1}.
  const Eigen::MatrixXd& gram_inverse() const { return gram_inv_; }
  const Bandwidth& bandwidth() const { return bw_; }
  const DictionaryOptions& options() const { return opts_; }
  std::size_t size() const { return centers_.size(); }
  bool empty() const { return centers_.empty(); }
  std::uint64_t evictions() const { return evictions_; }

 private:
  void evict_oldest();

  Bandwidth bw_;
  DictionaryOptions opts_;
  std::vector<StateVector> centers_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd gram_inv_;
  std::uint64_t evictions_ = 0;
};

struct KernelTerm {
  StateVector center;
  Eigen::VectorXd coeff;
};

/// Vector-valued RKHS element f(.) = sum_j k(., c_j) a_j. An empty term list
/// is the zero functional.
class RkhsFunctional {
 public:
  explicit RkhsFunctional(Eigen::Index output_dim);

  static RkhsFunctional singleton(StateVector center, Eigen::VectorXd coeff);

  Eigen::Index output_dim() const { return output_dim_; }
  const std::vector<KernelTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Appends a term without coalescing.
  void add_term(StateVector center, Eigen::VectorXd coeff);

  Eigen::VectorXd evaluate(const StateVector& s, const Bandwidth& bw) const;

  bool all_finite() const;

 private:
  Eigen::Index output_dim_;
  std::vector<KernelTerm> terms_;
};

/// f + alpha * g. Terms of f keep their order; terms of g are appended and
/// any exactly equal centers are coalesced by adding coefficients.
RkhsFunctional axpy(const RkhsFunctional& f, const RkhsFunctional& g,
                    double alpha);

/// <f, g>_H = sum_ij k(c_i, c'_j) a_i . b_j.
double inner(const RkhsFunctional& f, const RkhsFunctional& g,
             const Bandwidth& bw);

/// Orthogonal projection of f onto span{k(c_j, .) e_l} over the dictionary
/// centers. Terms whose centers are dictionary members carry over exactly;
/// the remaining terms are projected through the jittered Gram inverse. The
/// result has one term per dictionary center, in dictionary order.
RkhsFunctional project(const RkhsFunctional& f, const KernelDictionary& dict);

}  // namespace adaptiveh
