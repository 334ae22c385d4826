#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "zeno_schur/errors.hpp"
#include "zeno_schur/sym_matrix.hpp"

namespace zeno_schur {

/// Relative eigenvalue band used by signature() when no tolerance is given.
inline constexpr double kSignatureTol = 1e-10;
/// Relative threshold below which a fast-sector eigenvalue is not "C > 0".
inline constexpr double kPdTol = 1e-10;

/// Block partition of a quadratic tensor
///
///     Q = [ A   B ]
///         [ B^T C ]
///
/// with A on the retained (slow) sector and C on the eliminated (fast)
/// sector. C must be strictly positive definite for elimination to be valid;
/// that is checked by schur_complement(), not here, so that invalid blocks
/// can still be constructed and reported.
struct BlockQuadratic {
  SymMatrix a;
  MatrixXd b;
  SymMatrix c;

  BlockQuadratic(SymMatrix a_in, MatrixXd b_in, SymMatrix c_in)
      : a(std::move(a_in)), b(std::move(b_in)), c(std::move(c_in)) {
    if (b.rows() != a.dim() || b.cols() != c.dim()) {
      throw std::invalid_argument("BlockQuadratic: B must be d_s x d_f");
    }
    if (!b.allFinite()) {
      throw std::invalid_argument("BlockQuadratic: non-finite entry in B");
    }
  }

  Index slow_dim() const { return a.dim(); }
  Index fast_dim() const { return c.dim(); }

  /// The assembled (d_s + d_f) square tensor.
  SymMatrix full() const {
    const Index ds = slow_dim(), df = fast_dim();
    MatrixXd q(ds + df, ds + df);
    q.topLeftCorner(ds, ds) = a.matrix();
    q.topRightCorner(ds, df) = b;
    q.bottomLeftCorner(df, ds) = b.transpose();
    q.bottomRightCorner(df, df) = c.matrix();
    return SymMatrix::symmetrize(q);
  }
};

/// Inertia of a symmetric matrix.
struct Signature {
  Index n_plus = 0;
  Index n_minus = 0;
  Index n_zero = 0;

  Index dim() const { return n_plus + n_minus + n_zero; }
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct IsoTracelessSplit {
  double q = 0.0;
  SymMatrix s;
};

struct SeparationCheck {
  bool holds = false;
  double q = 0.0;
  double s_norm = 0.0;
};

inline double operator_norm(const SymMatrix& m) {
  if (m.dim() == 0) return 0.0;
  const VectorXd ev = m.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Eigenvalues with |lambda| <= tol * max(1, ||m||_op) count as zero.
inline Signature signature_of_eigenvalues(const VectorXd& ev, double tol) {
  double norm = 0.0;
  if (ev.size() > 0) {
    norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  const double band = tol * std::max(1.0, norm);
  Signature sig;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > band) {
      ++sig.n_plus;
    } else if (ev(i) < -band) {
      ++sig.n_minus;
    } else {
      ++sig.n_zero;
    }
  }
  return sig;
}

inline Signature signature(const SymMatrix& m, double tol = kSignatureTol) {
  if (tol < 0.0) throw std::invalid_argument("signature: tol must be >= 0");
  return signature_of_eigenvalues(m.eigenvalues(), tol);
}

/// Q_eff = A - B C^{-1} B^T. C^{-1} is applied through the eigendecomposition
/// of C, which also provides the positive-definiteness check.
inline SymMatrix schur_complement(const BlockQuadratic& q) {
  if (q.fast_dim() == 0) return q.a;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(q.c.matrix());
  const VectorXd& lam = es.eigenvalues();
  const double c_norm =
      std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  const double floor = kPdTol * std::max(1.0, c_norm);
  if (lam(0) <= floor) {
    throw FastSectorNotPD("schur_complement: fast block has eigenvalue " +
                          std::to_string(lam(0)) + " <= " +
                          std::to_string(floor));
  }
  const MatrixXd y = q.b * es.eigenvectors();
  const MatrixXd correction =
      y * lam.cwiseInverse().asDiagonal() * y.transpose();
  return SymMatrix::symmetrize(q.a.matrix() - correction);
}

inline IsoTracelessSplit iso_traceless(const SymMatrix& m) {
  const Index d = m.dim();
  if (d == 0) return {0.0, m};
  const double q = m.trace() / static_cast<double>(d);
  MatrixXd s = m.matrix();
  s.diagonal().array() -= q;
  return {q, SymMatrix::symmetrize(s)};
}

/// Sufficient condition |q| > ||S||_op for a single sign sector. Both scales
/// are returned so callers can log the crossover |q| ~ ||S||_op.
inline SeparationCheck separation_check(const SymMatrix& m) {
  const auto split = iso_traceless(m);
  const double s_norm = operator_norm(split.s);
  return {std::abs(split.q) > s_norm, split.q, s_norm};
}

/// Delta = -lambda_max(q_tan); positive iff q_tan is negative definite.
inline double stability_margin(const SymMatrix& q_tan) {
  if (q_tan.dim() == 0) {
    throw std::invalid_argument("stability_margin: empty matrix");
  }
  const VectorXd ev = q_tan.eigenvalues();
  return -ev(ev.size() - 1);
}

/// Weyl bound: ||a||_op < Delta guarantees that q_tan + a keeps every
/// negative eigenvalue of q_tan negative.
inline bool perturbation_preserves_signature(const SymMatrix& q_tan,
                                             const SymMatrix& a) {
  if (q_tan.dim() != a.dim()) {
    throw std::invalid_argument(
        "perturbation_preserves_signature: dimension mismatch");
  }
  return operator_norm(a) < stability_margin(q_tan);
}

}  // namespace zeno_schur
