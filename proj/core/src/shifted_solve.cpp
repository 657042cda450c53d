#include "graphrqi/shifted_solve.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "graphrqi/errors.hpp"

namespace graphrqi {

namespace {

// Sherman-Morrison denominators (and base pivots) below this are singular.
constexpr double kSingularTolerance = 1e-12;

}  // namespace

double gershgorin_bound(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

ShiftedSolveOperator::ShiftedSolveOperator(const Eigen::MatrixXd& base_laplacian) {
  if (base_laplacian.rows() != base_laplacian.cols()) {
    throw ArgumentError("ShiftedSolveOperator: base is not square");
  }
  if (base_laplacian.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(base_laplacian);
  if (es.info() != Eigen::Success) throw Error("ShiftedSolveOperator: base decomposition failed");
  basis_ = es.eigenvectors();
  values_ = es.eigenvalues();
}

ShiftedSolveOperator::ShiftedSolveOperator(Eigen::MatrixXd basis, Eigen::VectorXd values)
    : basis_(std::move(basis)), values_(std::move(values)) {
  if (basis_.rows() != basis_.cols() || basis_.rows() != values_.size()) {
    throw ArgumentError("ShiftedSolveOperator: basis/values shape mismatch");
  }
}

template <typename Fn>
void ShiftedSolveOperator::for_each_term(Fn&& fn) const {
  std::size_t idx = 0;
  for (const auto& t : edge_terms_) fn(idx++, t);
  for (const auto& t : border_terms_) fn(idx++, t);
}

ShiftedSolveOperator::Term ShiftedSolveOperator::to_term(const RankOneTerm& term) const {
  Term t{Eigen::VectorXd::Zero(dim()), term.scale};
  const Eigen::Index nb = base_dim();
  for (const auto& [idx, val] : term.entries) {
    if (idx < 0 || idx >= dim()) throw ArgumentError("rank-1 term index out of range");
    if (idx < nb) {
      t.c.head(nb) += val * basis_.row(idx).transpose();
    } else {
      t.c[idx] += val;
    }
  }
  return t;
}

void ShiftedSolveOperator::border(Eigen::Index count) {
  if (count < 0) throw ArgumentError("border: negative count");
  const Eigen::Index old = dim();
  values_.conservativeResize(old + count);
  values_.tail(count).setOnes();
  auto grow = [&](std::vector<Term>& terms) {
    for (auto& t : terms) {
      t.c.conservativeResize(old + count);
      t.c.tail(count).setZero();
    }
  };
  grow(edge_terms_);
  grow(border_terms_);
  for (Eigen::Index s = old; s < old + count; ++s) {
    Term t{Eigen::VectorXd::Zero(old + count), -1.0};
    t.c[s] = 1.0;
    border_terms_.push_back(std::move(t));
  }
  cached_mu_.reset();
}

void ShiftedSolveOperator::add_edge(Eigen::Index i, Eigen::Index j, double weight) {
  if (i == j) throw ArgumentError("add_edge: self-loop");
  add_term(RankOneTerm{{{i, 1.0}, {j, -1.0}}, weight});
}

void ShiftedSolveOperator::add_term(const RankOneTerm& term) {
  edge_terms_.push_back(to_term(term));
  cached_mu_.reset();
}

Eigen::VectorXd ShiftedSolveOperator::apply(const Eigen::VectorXd& y) {
  if (y.size() != dim()) throw ArgumentError("apply: dimension mismatch");
  Eigen::VectorXd r = values_.cwiseProduct(y);
  for_each_term([&](std::size_t, const Term& t) { r += (t.scale * t.c.dot(y)) * t.c; });
  return r;
}

void ShiftedSolveOperator::prepare(double mu) {
  if (cached_mu_ && *cached_mu_ == mu) return;
  cached_mu_.reset();

  const Eigen::VectorXd diff = values_.array() - mu;
  Eigen::Index negatives = 0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    if (std::abs(diff[i]) < kSingularTolerance) {
      throw SingularUpdateError("shift coincides with a base eigenvalue", static_cast<std::size_t>(-1),
                                diff[i]);
    }
    if (diff[i] < 0.0) ++negatives;
  }
  const Eigen::VectorXd inv = diff.cwiseInverse();

  cached_z_.clear();
  cached_den_.clear();
  cached_z_.reserve(chain_length());
  cached_den_.reserve(chain_length());
  for_each_term([&](std::size_t idx, const Term& t) {
    Eigen::VectorXd z = inv.cwiseProduct(t.c);
    std::size_t j = 0;
    for_each_term([&](std::size_t jdx, const Term& prev) {
      if (jdx >= idx) return;
      z -= (prev.scale * prev.c.dot(z) / cached_den_[j]) * cached_z_[j];
      ++j;
    });
    const double den = 1.0 + t.scale * t.c.dot(z);
    if (!std::isfinite(den) || std::abs(den) < kSingularTolerance) {
      throw SingularUpdateError("Sherman-Morrison denominator vanished", idx, den);
    }
    // det(A_i) = det(A_{i-1}) * den: a negative denominator moves exactly one
    // eigenvalue across zero, in the direction of the term's sign.
    if (den < 0.0) negatives += t.scale > 0.0 ? -1 : 1;
    cached_z_.push_back(std::move(z));
    cached_den_.push_back(den);
  });
  cached_negatives_ = negatives;
  cached_mu_ = mu;
}

Eigen::VectorXd ShiftedSolveOperator::solve(double mu, const Eigen::VectorXd& y) {
  if (y.size() != dim()) throw ArgumentError("solve: dimension mismatch");
  prepare(mu);
  Eigen::VectorXd r = y.cwiseQuotient((values_.array() - mu).matrix());
  for_each_term([&](std::size_t idx, const Term& t) {
    r -= (t.scale * t.c.dot(r) / cached_den_[idx]) * cached_z_[idx];
  });
  return r;
}

Eigen::Index ShiftedSolveOperator::count_above(double sigma) {
  prepare(sigma);
  return dim() - cached_negatives_;
}

double ShiftedSolveOperator::spectral_bound() const {
  double bound = values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0;
  for_each_term([&](std::size_t, const Term& t) { bound += std::abs(t.scale) * t.c.squaredNorm(); });
  return bound;
}

Eigen::VectorXd ShiftedSolveOperator::to_working(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw ArgumentError("to_working: dimension mismatch");
  Eigen::VectorXd y = x;
  const Eigen::Index nb = base_dim();
  if (nb) y.head(nb).noalias() = basis_.transpose() * x.head(nb);
  return y;
}

Eigen::VectorXd ShiftedSolveOperator::from_working(const Eigen::VectorXd& y) const {
  if (y.size() != dim()) throw ArgumentError("from_working: dimension mismatch");
  Eigen::VectorXd x = y;
  const Eigen::Index nb = base_dim();
  if (nb) x.head(nb).noalias() = basis_ * y.head(nb);
  return x;
}

Eigen::VectorXd ShiftedSolveOperator::sm_apply(double mu, const Eigen::VectorXd& x) {
  return from_working(solve(mu, to_working(x)));
}

Eigen::MatrixXd ShiftedSolveOperator::materialize() const {
  Eigen::MatrixXd m = values_.asDiagonal();
  for_each_term([&](std::size_t, const Term& t) { m += t.scale * t.c * t.c.transpose(); });
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(dim(), dim());
  if (base_dim()) q.topLeftCorner(base_dim(), base_dim()) = basis_;
  return q * m * q.transpose();
}

DenseShiftedSystem::DenseShiftedSystem(Eigen::MatrixXd lap)
    : lap_(std::move(lap)), bound_(gershgorin_bound(lap_)) {
  if (lap_.rows() != lap_.cols()) throw ArgumentError("DenseShiftedSystem: matrix is not square");
}

Eigen::VectorXd DenseShiftedSystem::solve(double mu, const Eigen::VectorXd& x) {
  if (!cached_mu_ || *cached_mu_ != mu) {
    cached_mu_.reset();
    lu_.compute(lap_ - mu * Eigen::MatrixXd::Identity(dim(), dim()));
    ++factorizations_;
    const double pivot = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot >= kSingularTolerance * std::max(1.0, bound_) * 1e-4)) {
      throw SingularUpdateError("shifted matrix is singular", 0, pivot);
    }
    cached_mu_ = mu;
  }
  return lu_.solve(x);
}

Eigen::Index DenseShiftedSystem::count_above(double sigma) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lap_ - sigma * Eigen::MatrixXd::Identity(dim(), dim()));
  const Eigen::VectorXd d = ldlt.vectorD();
  Eigen::Index positive = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(d[i]) < kSingularTolerance) {
      throw SingularUpdateError("inertia count hit a zero pivot", static_cast<std::size_t>(i), d[i]);
    }
    if (d[i] > 0.0) ++positive;
  }
  return positive;
}

}  // namespace graphrqi
