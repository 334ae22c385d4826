#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>

#include "zeno_schur/errors.hpp"
#include "zeno_schur/reduction.hpp"
#include "zeno_schur/rng.hpp"
#include "zeno_schur/sym_matrix.hpp"
#include "zeno_schur/tensor_core.hpp"

namespace zeno_schur {

/// Largest dt * ||M||_2 accepted by simulate_sde.
inline constexpr double kStepGuard = 0.1;

/// dp = -M p dt + sqrt(2 D) dW.
struct LinearSDE {
  MatrixXd m;
  SymMatrix d_mat;

  LinearSDE(MatrixXd drift, SymMatrix diffusion)
      : m(std::move(drift)), d_mat(std::move(diffusion)) {
    if (m.rows() != m.cols() || m.rows() != d_mat.dim()) {
      throw std::invalid_argument("LinearSDE: M and D must be d x d");
    }
    if (!m.allFinite()) throw std::invalid_argument("LinearSDE: non-finite M");
    if (d_mat.dim() > 0) {
      const VectorXd ev = d_mat.eigenvalues();
      const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
      if (ev(0) < -1e-12 * scale) {
        throw std::invalid_argument("LinearSDE: D is not positive semidefinite");
      }
    }
  }

  Index dim() const { return m.rows(); }

  /// Every eigenvalue of M has positive real part.
  bool stable() const {
    if (dim() == 0) return true;
    Eigen::EigenSolver<MatrixXd> es(m, false);
    return es.eigenvalues().real().minCoeff() > 0.0;
  }
};

namespace detail {
inline void require_stable_drift(const MatrixXd& m, const char* where) {
  if (m.size() == 0) return;
  Eigen::EigenSolver<MatrixXd> es(m, false);
  const double min_re = es.eigenvalues().real().minCoeff();
  if (!(min_re > 0.0)) {
    throw UnstableDrift(std::string(where) +
                        ": drift has an eigenvalue with Re = " +
                        std::to_string(min_re) + " <= 0; no stationary state");
  }
}
}  // namespace detail

/// Solves M^T Gamma + Gamma M = 2 D.
///
/// Bartels-Stewart on the complex Schur form M = U T U^H: with X = U^H Gamma U
/// the equation becomes T^H X + X T = 2 U^H D U, which is solved entry by
/// entry in row-major order since T^H is lower and T upper triangular.
inline SymMatrix solve_lyapunov(const MatrixXd& m, const SymMatrix& d_mat) {
  if (m.rows() != m.cols() || m.rows() != d_mat.dim()) {
    throw std::invalid_argument("solve_lyapunov: M and D must be d x d");
  }
  detail::require_stable_drift(m, "solve_lyapunov");
  const Index n = m.rows();
  if (n == 0) return d_mat;

  using MatrixXc = Eigen::MatrixXcd;
  Eigen::ComplexSchur<MatrixXd> schur(m);
  const MatrixXc& u = schur.matrixU();
  const MatrixXc& t = schur.matrixT();
  const MatrixXc rhs = 2.0 * u.adjoint() * d_mat.matrix().cast<std::complex<double>>() * u;

  MatrixXc x = MatrixXc::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      std::complex<double> acc = rhs(i, j);
      for (Index k = 0; k < i; ++k) acc -= std::conj(t(k, i)) * x(k, j);
      for (Index k = 0; k < j; ++k) acc -= x(i, k) * t(k, j);
      x(i, j) = acc / (std::conj(t(i, i)) + t(j, j));
    }
  }
  const MatrixXd gamma = (u * x * u.adjoint()).real();
  return SymMatrix::symmetrize(gamma);
}

/// Stationary covariance <p p^T> of the SDE, i.e. M Gamma + Gamma M^T = 2 D.
inline SymMatrix stationary_covariance(const LinearSDE& sde) {
  return solve_lyapunov(sde.m.transpose(), sde.d_mat);
}

/// ||D - mu / beta||_F / ||mu / beta||_F.
inline double einstein_check(const SymMatrix& d_mat, const Mobility& mu,
                             double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("einstein_check: beta must be > 0");
  if (d_mat.dim() != mu.dim()) {
    throw std::invalid_argument("einstein_check: dimension mismatch");
  }
  const MatrixXd ref = mu.matrix().matrix() / beta;
  return (d_mat.matrix() - ref).norm() / ref.norm();
}

struct GaussianState {
  SymMatrix covariance;  // from the Lyapunov equation
  SymMatrix curvature;   // beta * Q_eff
  double closure_residual = 0.0;  // ||Gamma^{-1} - beta Q_eff||_F / ||beta Q_eff||_F
};

/// Relative tolerance of the fluctuation-dissipation closure check.
inline constexpr double kClosureTol = 1e-8;

/// Stationary Gaussian of the gradient dynamics with D = mu / beta. The
/// predicted log-curvature beta Q_eff is cross-checked against the inverse of
/// the Lyapunov covariance.
inline GaussianState stationary_gaussian(const Mobility& mu, const SymMatrix& q_eff,
                                         double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("stationary_gaussian: beta must be > 0");
  }
  if (mu.dim() != q_eff.dim()) {
    throw std::invalid_argument("stationary_gaussian: dimension mismatch");
  }
  const VectorXd ev = q_eff.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
  if (ev(0) <= kPdTol * scale) {
    throw ResponseNotPD("stationary_gaussian: Q_eff has eigenvalue " +
                        std::to_string(ev(0)) +
                        "; the response left the positive cone and no "
                        "stationary Gaussian exists");
  }
  GaussianState out;
  out.curvature = beta * q_eff;
  out.covariance = stationary_covariance(
      LinearSDE(m_from_q(mu, q_eff), (1.0 / beta) * mu.matrix()));
  const MatrixXd inv = out.covariance.matrix().inverse();
  out.closure_residual =
      (inv - out.curvature.matrix()).norm() / out.curvature.matrix().norm();
  if (!(out.closure_residual <= kClosureTol)) {
    throw std::logic_error("stationary_gaussian: closure residual " +
                           std::to_string(out.closure_residual) +
                           " exceeds tolerance");
  }
  return out;
}

struct SdeSampling {
  double dt = 1e-3;
  long n_steps = 100000;  // integration steps after burn-in
  long burn_in = 0;
  long thin = 1;          // keep every thin-th step; n_kept = n_steps / thin
};

/// Euler-Maruyama sampler started at p = 0.
inline MatrixXd simulate_sde(const LinearSDE& sde, const SdeSampling& run,
                             std::uint64_t seed) {
  detail::require_stable_drift(sde.m, "simulate_sde");
  if (!(run.dt > 0.0)) throw std::invalid_argument("simulate_sde: dt must be > 0");
  if (run.n_steps < 0 || run.burn_in < 0 || run.thin < 1) {
    throw std::invalid_argument("simulate_sde: invalid step counts");
  }
  const Index d = sde.dim();
  const double m_norm =
      d ? Eigen::JacobiSVD<MatrixXd>(sde.m).singularValues()(0) : 0.0;
  if (!(run.dt * m_norm < kStepGuard)) {
    throw StepTooLarge("simulate_sde: dt * ||M|| = " +
                       std::to_string(run.dt * m_norm) + " >= " +
                       std::to_string(kStepGuard));
  }

  // Noise factor L with L L^T = D; tiny negative eigenvalues are clipped.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sde.d_mat.matrix());
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const MatrixXd noise = std::sqrt(2.0 * run.dt) * es.eigenvectors() * root.asDiagonal();
  const MatrixXd propagator = MatrixXd::Identity(d, d) - run.dt * sde.m;

  RandomStream rng(seed);
  VectorXd p = VectorXd::Zero(d), next(d), z(d);
  auto advance = [&] {
    for (Index i = 0; i < d; ++i) z(i) = rng.normal();
    next.noalias() = propagator * p;
    next.noalias() += noise * z;
    p.swap(next);
  };

  for (long s = 0; s < run.burn_in; ++s) advance();
  const long kept = run.n_steps / run.thin;
  MatrixXd samples(kept, d);
  for (long r = 0; r < kept; ++r) {
    for (long s = 0; s < run.thin; ++s) advance();
    samples.row(r) = p.transpose();
  }
  return samples;
}

/// Largest accepted condition number of the sample covariance.
inline constexpr double kMaxCovarianceCondition = 1e12;

/// Inverse of the unbiased sample covariance: the log-curvature of a
/// Gaussian stationary state, estimated globally.
inline SymMatrix estimate_log_curvature(const MatrixXd& samples) {
  const Index n = samples.rows(), d = samples.cols();
  if (d == 0 || n <= 10 * d * d) {
    throw std::invalid_argument("estimate_log_curvature: need more than 10 d^2 samples");
  }
  const VectorXd mean = samples.colwise().mean();
  const MatrixXd centered = samples.rowwise() - mean.transpose();
  const MatrixXd cov = centered.transpose() * centered / double(n - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (cov + cov.transpose()));
  const VectorXd& ev = es.eigenvalues();
  if (!(ev(0) > 0.0) || ev(d - 1) / ev(0) > kMaxCovarianceCondition) {
    throw SingularCovariance("estimate_log_curvature: sample covariance is singular "
                             "or ill-conditioned");
  }
  return SymMatrix::symmetrize(es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose());
}

struct ReconstructionRequest {
  SymMatrix mu;
  SymMatrix q_eff;
  double beta = 1.0;
  std::optional<SymMatrix> diffusion;  // mu / beta when unset
  std::optional<double> dt;            // 0.01 / ||M||_2 when unset
  long n_samples = 100000;
  std::optional<long> thin;            // one slowest relaxation time when unset
  std::optional<long> burn_in;         // ten slowest relaxation times when unset
  std::uint64_t seed = 0;
};

struct ReconstructionReport {
  SymMatrix gamma;      // Lyapunov covariance
  SymMatrix g_eff;      // inverse sample covariance
  SymMatrix predicted;  // beta * Q_eff
  double einstein_residual = 0.0;
  double beta = 1.0;
  double relative_error = 0.0;  // ||g_eff - predicted||_F / ||predicted||_F
  double dt = 0.0;
  long thin = 1;
  long burn_in = 0;
  long n_kept = 0;
};

/// Q_eff -> M = mu Q_eff -> Lyapunov covariance and sampled curvature. Raises
/// UnstableDrift when Q_eff is indefinite (mu positive definite makes M
/// inherit the negative direction), so no numbers come out of an unstable
/// response.
inline ReconstructionReport reconstruct(const ReconstructionRequest& req) {
  if (!(req.beta > 0.0)) throw std::invalid_argument("reconstruct: beta must be > 0");
  const Mobility mu(req.mu);
  const MatrixXd m = m_from_q(mu, req.q_eff);
  const SymMatrix diffusion = req.diffusion.value_or((1.0 / req.beta) * req.mu);
  const LinearSDE sde(m, diffusion);

  ReconstructionReport rep;
  rep.beta = req.beta;
  rep.gamma = stationary_covariance(sde);  // throws UnstableDrift
  rep.predicted = req.beta * req.q_eff;
  rep.einstein_residual = einstein_check(diffusion, mu, req.beta);

  const double m_norm = Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
  Eigen::EigenSolver<MatrixXd> es(m, false);
  const double slowest = es.eigenvalues().real().minCoeff();
  rep.dt = req.dt.value_or(0.1 * kStepGuard / m_norm);
  const long relax = std::max(1L, long(std::ceil(1.0 / (slowest * rep.dt))));
  rep.thin = req.thin.value_or(relax);
  rep.burn_in = req.burn_in.value_or(10 * relax);

  const MatrixXd samples = simulate_sde(
      sde, SdeSampling{rep.dt, req.n_samples * rep.thin, rep.burn_in, rep.thin},
      req.seed);
  rep.n_kept = samples.rows();
  rep.g_eff = estimate_log_curvature(samples);
  rep.relative_error = (rep.g_eff.matrix() - rep.predicted.matrix()).norm() /
                       rep.predicted.matrix().norm();
  return rep;
}

}  // namespace zeno_schur
