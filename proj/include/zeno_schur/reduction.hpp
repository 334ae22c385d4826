#pragma once

#include <Eigen/Dense>
#include <string>

#include "zeno_schur/errors.hpp"
#include "zeno_schur/sym_matrix.hpp"
#include "zeno_schur/tensor_core.hpp"

namespace zeno_schur {

/// Linear moment dynamics d/dt (x_s, x_f) = K (x_s, x_f) in slow/fast
/// block form. Entries carry units of 1/time.
///
/// The same algebra covers the Liouville-space form of the generator, so
/// there is no separate superoperator type.
struct BlockGenerator {
  MatrixXd k_ss;
  MatrixXd k_sf;
  MatrixXd k_fs;
  MatrixXd k_ff;

  BlockGenerator(MatrixXd ss, MatrixXd sf, MatrixXd fs, MatrixXd ff)
      : k_ss(std::move(ss)), k_sf(std::move(sf)), k_fs(std::move(fs)),
        k_ff(std::move(ff)) {
    const Index ds = k_ss.rows(), df = k_ff.rows();
    if (k_ss.cols() != ds || k_ff.cols() != df || k_sf.rows() != ds ||
        k_sf.cols() != df || k_fs.rows() != df || k_fs.cols() != ds) {
      throw std::invalid_argument("BlockGenerator: inconsistent block shapes");
    }
  }

  Index slow_dim() const { return k_ss.rows(); }
  Index fast_dim() const { return k_ff.rows(); }

  MatrixXd full() const {
    const Index ds = slow_dim(), df = fast_dim();
    MatrixXd k(ds + df, ds + df);
    k << k_ss, k_sf, k_fs, k_ff;
    return k;
  }
};

/// Strictly positive definite mobility on the slow sector.
class Mobility {
 public:
  explicit Mobility(SymMatrix mu) : mu_(std::move(mu)) {
    if (mu_.dim() == 0 || mu_.eigenvalues()(0) <= 0.0) {
      throw NotPositiveDefinite("Mobility: mu must be positive definite");
    }
  }

  static Mobility scalar(double value, Index d) {
    return Mobility(value * SymMatrix::identity(d));
  }

  const SymMatrix& matrix() const { return mu_; }
  Index dim() const { return mu_.dim(); }

 private:
  SymMatrix mu_;
};

inline double max_real_eigenvalue(const MatrixXd& m) {
  Eigen::EigenSolver<MatrixXd> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

inline bool check_fast_stable(const MatrixXd& k_ff) {
  if (k_ff.rows() != k_ff.cols()) {
    throw std::invalid_argument("check_fast_stable: matrix is not square");
  }
  if (k_ff.size() == 0) return true;
  return max_real_eigenvalue(k_ff) < 0.0;
}

namespace detail {
inline void require_fast_stable(const BlockGenerator& k, const char* where) {
  if (!check_fast_stable(k.k_ff)) {
    throw FastSectorUnstable(std::string(where) +
                             ": fast block has an eigenvalue with Re >= 0");
  }
}
}  // namespace detail

/// K_eff = K_ss - K_sf K_ff^{-1} K_fs.
inline MatrixXd eliminate_fast(const BlockGenerator& k) {
  detail::require_fast_stable(k, "eliminate_fast");
  if (k.fast_dim() == 0) return k.k_ss;
  return k.k_ss - k.k_sf * k.k_ff.partialPivLu().solve(k.k_fs);
}

/// Quasi-stationary fast state x_f = -K_ff^{-1} K_fs x_s.
inline VectorXd fast_slave(const BlockGenerator& k, const VectorXd& x_s) {
  detail::require_fast_stable(k, "fast_slave");
  if (x_s.size() != k.slow_dim()) {
    throw std::invalid_argument("fast_slave: x_s has wrong length");
  }
  return -k.k_ff.partialPivLu().solve(k.k_fs * x_s);
}

inline MatrixXd drift_from_response(const Mobility& mu, const SymMatrix& q) {
  if (mu.dim() != q.dim()) {
    throw std::invalid_argument("drift_from_response: dimension mismatch");
  }
  return mu.matrix().matrix() * q.matrix();
}

/// Generator convention d/dt x = K x with K = -mu Q.
inline MatrixXd k_from_q(const Mobility& mu, const SymMatrix& q) {
  return -drift_from_response(mu, q);
}

/// Decay-rate convention d/dt p = -M p with M = mu Q_eff.
inline MatrixXd m_from_q(const Mobility& mu, const SymMatrix& q_eff) {
  return drift_from_response(mu, q_eff);
}

}  // namespace zeno_schur
