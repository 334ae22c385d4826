#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "zeno_schur/errors.hpp"

namespace zeno_schur {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Real symmetric d x d matrix. Every quadratic response object in the
/// library (Q, Q_eff, Schur corrections, anisotropies, covariances) is one of
/// these. Storage is kept exactly symmetric: the validating constructor
/// rejects inputs whose asymmetry exceeds 1e-12 * (1 + max|m_ij|) and then
/// stores (m + m^T) / 2.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const MatrixXd& m) {
    check_square_finite(m);
    const double scale = 1.0 + (m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
    const double asym =
        m.size() ? (m - m.transpose()).cwiseAbs().maxCoeff() : 0.0;
    if (asym > 1e-12 * scale) {
      throw NotSymmetric("SymMatrix: asymmetry " + std::to_string(asym) +
                         " exceeds tolerance");
    }
    data_ = 0.5 * (m + m.transpose());
  }

  /// Projects onto the symmetric part without a tolerance check. Used for
  /// results of arithmetic that is symmetric up to rounding.
  static SymMatrix symmetrize(const MatrixXd& m) {
    check_square_finite(m);
    SymMatrix out;
    out.data_ = 0.5 * (m + m.transpose());
    return out;
  }

  static SymMatrix identity(Index d) {
    SymMatrix out;
    out.data_ = MatrixXd::Identity(d, d);
    return out;
  }

  static SymMatrix zero(Index d) {
    SymMatrix out;
    out.data_ = MatrixXd::Zero(d, d);
    return out;
  }

  static SymMatrix diagonal(const VectorXd& diag) {
    SymMatrix out;
    out.data_ = diag.asDiagonal();
    check_square_finite(out.data_);
    return out;
  }

  static SymMatrix diagonal(std::initializer_list<double> diag) {
    return diagonal(VectorXd::Map(std::data(diag), static_cast<Index>(diag.size())));
  }

  Index dim() const { return data_.rows(); }
  const MatrixXd& matrix() const { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }

  double trace() const { return data_.trace(); }
  double frobenius_norm() const { return data_.norm(); }

  /// Ascending eigenvalues.
  VectorXd eigenvalues() const {
    if (dim() == 0) return VectorXd();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(data_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  friend SymMatrix operator+(const SymMatrix& x, const SymMatrix& y) {
    return symmetrize(x.data_ + y.data_);
  }
  friend SymMatrix operator-(const SymMatrix& x, const SymMatrix& y) {
    return symmetrize(x.data_ - y.data_);
  }
  friend SymMatrix operator-(const SymMatrix& x) { return symmetrize(-x.data_); }
  friend SymMatrix operator*(double s, const SymMatrix& x) {
    return symmetrize(s * x.data_);
  }
  friend SymMatrix operator*(const SymMatrix& x, double s) { return s * x; }

  friend bool operator==(const SymMatrix& x, const SymMatrix& y) {
    return x.dim() == y.dim() && x.data_ == y.data_;
  }

 private:
  static void check_square_finite(const MatrixXd& m) {
    if (m.rows() != m.cols()) {
      throw std::invalid_argument("SymMatrix: matrix is not square");
    }
    if (!m.allFinite()) {
      throw std::invalid_argument("SymMatrix: non-finite entry");
    }
  }

  MatrixXd data_;
};

}  // namespace zeno_schur
