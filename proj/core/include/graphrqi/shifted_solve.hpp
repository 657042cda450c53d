#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

namespace graphrqi {

/// What an RQI run needs from L_t: products, shifted solves and inertia, all
/// expressed in one orthonormal working basis (so norms, inner products and
/// Rayleigh quotients are the same as in agent coordinates).
class ShiftedSystem {
 public:
  virtual ~ShiftedSystem() = default;

  virtual Eigen::Index dim() const = 0;
  /// L_t x.
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) = 0;
  /// (L_t - mu I)^{-1} x. Throws SingularUpdateError when the shift makes the
  /// solve (or one of its intermediate steps) singular.
  virtual Eigen::VectorXd solve(double mu, const Eigen::VectorXd& x) = 0;
  /// Number of eigenvalues of L_t strictly greater than `sigma`; `sigma`
  /// must not itself be an eigenvalue. Throws SingularUpdateError otherwise.
  virtual Eigen::Index count_above(double sigma) = 0;
  /// Upper bound on the spectral radius of L_t.
  virtual double spectral_bound() const = 0;

  virtual Eigen::VectorXd to_working(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd from_working(const Eigen::VectorXd& y) const = 0;
};

/// Signed rank-1 term `scale * b b^T` with sparse `b`.
struct RankOneTerm {
  std::vector<std::pair<Eigen::Index, double>> entries;
  double scale = 1.0;
};

/// Shifted solves against L_t = L_base (+) bordered slots + a chain of
/// rank-1 terms, for any shift, without refactorizing.
///
/// The base is a full eigendecomposition L_base = U diag(lambda) U^T, so
/// (L_base - mu I)^{-1} = U diag(1 / (lambda - mu)) U^T. Agents appended
/// after the base get a diagonal slot of 1 in the base operator and a -e e^T
/// correction at the end of the chain, which restores the zero the Laplacian
/// actually holds before its incidence updates. Each edge contributes
/// `w (e_i - e_j)(e_i - e_j)^T`. Solves apply Sherman-Morrison once per chain
/// element; the vectors A_{i-1}^{-1} c_i and denominators are cached per
/// shift.
///
/// Working coordinates are y = Q^T x with Q = blockdiag(U, I).
class ShiftedSolveOperator final : public ShiftedSystem {
 public:
  /// Decomposes `base_laplacian` (symmetric).
  explicit ShiftedSolveOperator(const Eigen::MatrixXd& base_laplacian);
  /// Uses a given orthonormal basis and eigenvalues as the base.
  ShiftedSolveOperator(Eigen::MatrixXd basis, Eigen::VectorXd values);

  Eigen::Index dim() const override { return values_.size(); }
  Eigen::Index base_dim() const noexcept { return basis_.rows(); }
  std::size_t chain_length() const noexcept { return edge_terms_.size() + border_terms_.size(); }
  const Eigen::VectorXd& base_values() const noexcept { return values_; }

  /// Appends `count` agents.
  void border(Eigen::Index count = 1);
  /// Adds `weight * (e_i - e_j)(e_i - e_j)^T`.
  void add_edge(Eigen::Index i, Eigen::Index j, double weight = 1.0);
  /// Adds an arbitrary sparse signed rank-1 term.
  void add_term(const RankOneTerm& term);

  Eigen::VectorXd apply(const Eigen::VectorXd& y) override;
  Eigen::VectorXd solve(double mu, const Eigen::VectorXd& y) override;
  Eigen::Index count_above(double sigma) override;
  double spectral_bound() const override;

  Eigen::VectorXd to_working(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd from_working(const Eigen::VectorXd& y) const override;

  /// (L_t - mu I)^{-1} x in agent coordinates.
  Eigen::VectorXd sm_apply(double mu, const Eigen::VectorXd& x);

  /// Dense L_t in agent coordinates (tests only; O(n^2 chain)).
  Eigen::MatrixXd materialize() const;

 private:
  struct Term {
    Eigen::VectorXd c;  // Q^T b
    double scale;
  };

  template <typename Fn>
  void for_each_term(Fn&& fn) const;
  void prepare(double mu);
  Term to_term(const RankOneTerm& term) const;

  Eigen::MatrixXd basis_;
  Eigen::VectorXd values_;
  // Effective chain order: every edge term, then every border correction.
  std::vector<Term> edge_terms_;
  std::vector<Term> border_terms_;

  std::optional<double> cached_mu_;
  std::vector<Eigen::VectorXd> cached_z_;
  std::vector<double> cached_den_;
  Eigen::Index cached_negatives_ = 0;
};

/// Dense reference system: refactorizes (L - mu I) by LU whenever the shift
/// changes and counts inertia with LDL^T.
class DenseShiftedSystem final : public ShiftedSystem {
 public:
  explicit DenseShiftedSystem(Eigen::MatrixXd lap);

  Eigen::Index dim() const override { return lap_.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) override { return lap_ * x; }
  Eigen::VectorXd solve(double mu, const Eigen::VectorXd& x) override;
  Eigen::Index count_above(double sigma) override;
  double spectral_bound() const override { return bound_; }
  Eigen::VectorXd to_working(const Eigen::VectorXd& x) const override { return x; }
  Eigen::VectorXd from_working(const Eigen::VectorXd& y) const override { return y; }

  int factorizations() const noexcept { return factorizations_; }

 private:
  Eigen::MatrixXd lap_;
  double bound_;
  std::optional<double> cached_mu_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  int factorizations_ = 0;
};

/// Gershgorin upper bound max_i (|a_ii| + sum_j |a_ij|).
double gershgorin_bound(const Eigen::MatrixXd& a);

}  // namespace graphrqi
