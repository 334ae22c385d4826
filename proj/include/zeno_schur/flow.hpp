#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zeno_schur/errors.hpp"
#include "zeno_schur/rng.hpp"
#include "zeno_schur/sym_matrix.hpp"
#include "zeno_schur/tensor_core.hpp"

namespace zeno_schur {

enum class NormMode { Frobenius, Trace };
enum class Disorder { Annealed, Quenched };

/// Sigma_k = B C^{-1} B^T with C = R diag(exp(sigma_log z)) R^T (R a Haar
/// rotation) and B Gaussian scaled by 1/sqrt(d_fast). d_fast defaults to d_tan.
struct LognormalGaussian {
  double sigma_log = 1.0;
  std::optional<Index> d_fast;
};

/// Sigma_k = G G^T with G a d_tan x rank Gaussian scaled by 1/sqrt(rank), so
/// E[Sigma_k] = I. rank defaults to d_tan.
struct Wishart {
  std::optional<Index> rank;
};

using SchurModel = std::variant<LognormalGaussian, Wishart>;

/// Below this fraction of ||Q_T||_F the trace is considered zero and trace
/// normalization falls back to Frobenius for that step.
inline constexpr double kTraceFloor = 1e-8;
/// Frobenius norm under which the flow is considered collapsed.
inline constexpr double kZeroTensorNorm = 1e-14;

struct FlowConfig {
  Index d_tan = 3;
  double q_n = 1.0;
  double zeta = 0.0;
  double a0 = 0.0;
  double beta_decay = 0.0;
  int k_max = 100;
  NormMode norm_mode = NormMode::Frobenius;
  SchurModel schur_model = LognormalGaussian{};
  Disorder disorder = Disorder::Annealed;
  Index target_n_minus = 3;
  std::optional<SymMatrix> q_init;  // identity when unset

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto fail = [](const std::string& msg) {
      throw std::invalid_argument("FlowConfig." + msg);
    };
    if (d_tan < 1) fail("d_tan: must be >= 1");
    if (!(q_n > 0.0) || !std::isfinite(q_n)) fail("q_n: must be > 0");
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) fail("zeta: must be >= 0");
    if (!(a0 >= 0.0) || !std::isfinite(a0)) fail("a0: must be >= 0");
    if (!(beta_decay >= 0.0) || !std::isfinite(beta_decay)) {
      fail("beta_decay: must be >= 0");
    }
    if (k_max < 1) fail("k_max: must be >= 1");
    if (target_n_minus < 0 || target_n_minus > d_tan) {
      fail("target_n_minus: must lie in [0, d_tan]");
    }
    if (a0 > 0.0 && d_tan < 2) fail("a0: anisotropy requires d_tan >= 2");
    if (const auto* ln = std::get_if<LognormalGaussian>(&schur_model)) {
      if (!(ln->sigma_log > 0.0)) fail("schur_model.sigma_log: must be > 0");
      if (ln->d_fast && *ln->d_fast < 1) fail("schur_model.d_fast: must be >= 1");
    } else if (const auto* w = std::get_if<Wishart>(&schur_model)) {
      if (w->rank && *w->rank < 1) fail("schur_model.rank: must be >= 1");
    }
    if (q_init && q_init->dim() != d_tan) fail("q_init: must be d_tan x d_tan");
  }

  SymMatrix initial_q_t() const {
    return q_init ? *q_init : SymMatrix::identity(d_tan);
  }
};

struct StepLog {
  int k = 0;
  Signature signature;  // of the full tensor diag(q_n, Q_T)
  double q = 0.0;       // isotropic component of Q_T
  double s_opnorm = 0.0;
  bool separation_holds = false;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<StepLog> steps;  // k = 0 .. last completed step
  std::optional<int> first_passage;
  bool censored = true;
  bool collapsed = false;
  std::optional<int> collapse_step;
  std::string diagnostic;
  Signature final_signature;  // of Q_T at the last completed step
  SymMatrix final_q_t;

  bool valid() const { return !collapsed; }
  Index final_n_minus() const { return final_signature.n_minus; }
};

/// Everything that entered one update, for property checks and debugging.
struct StepTrace {
  int k = 0;
  const SymMatrix* sigma = nullptr;
  const SymMatrix* anisotropy = nullptr;
  double a_k = 0.0;
  const SymMatrix* before = nullptr;  // Q_T entering the step
  const SymMatrix* pre_normalization = nullptr;
  const SymMatrix* after = nullptr;
};

using StepObserver = std::function<void(const StepTrace&)>;

namespace detail {

inline MatrixXd gaussian_matrix(Index rows, Index cols, RandomStream& rng) {
  MatrixXd g(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  }
  return g;
}

/// Haar-distributed orthogonal matrix via QR with sign correction.
inline MatrixXd random_rotation(Index d, RandomStream& rng) {
  const MatrixXd g = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace detail

/// One positive semidefinite Schur contribution Sigma_k.
inline SymMatrix sample_sigma(const SchurModel& model, Index d_tan,
                              RandomStream& rng) {
  if (const auto* ln = std::get_if<LognormalGaussian>(&model)) {
    const Index df = ln->d_fast.value_or(d_tan);
    VectorXd inv_spectrum(df);
    for (Index i = 0; i < df; ++i) {
      inv_spectrum(i) = std::exp(-ln->sigma_log * rng.normal());
    }
    const MatrixXd rot = detail::random_rotation(df, rng);
    const MatrixXd b =
        detail::gaussian_matrix(d_tan, df, rng) / std::sqrt(double(df));
    // B C^{-1} B^T with C^{-1} = R diag(inv_spectrum) R^T.
    const MatrixXd y = b * rot;
    return SymMatrix::symmetrize(y * inv_spectrum.asDiagonal() *
                                 y.transpose());
  }
  const auto& w = std::get<Wishart>(model);
  const Index rank = w.rank.value_or(d_tan);
  const MatrixXd g =
      detail::gaussian_matrix(d_tan, rank, rng) / std::sqrt(double(rank));
  return SymMatrix::symmetrize(g * g.transpose());
}

/// Random traceless symmetric matrix with unit Frobenius norm.
inline SymMatrix sample_anisotropy(Index d_tan, RandomStream& rng) {
  if (d_tan < 2) {
    throw std::invalid_argument("sample_anisotropy: d_tan must be >= 2");
  }
  for (int attempt = 0; attempt < 8; ++attempt) {
    const MatrixXd x = detail::gaussian_matrix(d_tan, d_tan, rng);
    MatrixXd s = 0.5 * (x + x.transpose());
    s.diagonal().array() -= s.trace() / double(d_tan);
    const double norm = s.norm();
    if (norm < 1e-14) continue;
    return SymMatrix::symmetrize(s / norm);
  }
  throw DegenerateDraw("sample_anisotropy: 8 consecutive degenerate draws");
}

/// a_k = a0 exp(-beta_decay k); the flow parameter is the step index.
inline double anisotropy_strength(double a0, double beta_decay, int k) {
  if (k < 0) throw std::invalid_argument("anisotropy_strength: k must be >= 0");
  return a0 * std::exp(-beta_decay * double(k));
}

/// Projective rescaling to the reference scale. Only ever divides by a
/// positive number, so the signature is untouched.
inline SymMatrix normalize(const SymMatrix& q_t, NormMode mode) {
  const double frob = q_t.frobenius_norm();
  if (!(frob >= kZeroTensorNorm)) {
    throw ZeroTensor("normalize: ||Q_T||_F = " + std::to_string(frob) +
                     " below collapse threshold");
  }
  if (mode == NormMode::Trace) {
    const double tr = std::abs(q_t.trace());
    if (tr >= kTraceFloor * frob) {
      return (double(q_t.dim()) / tr) * q_t;
    }
  }
  return (1.0 / frob) * q_t;
}

/// Q_T - zeta Sigma + a_k A, before normalization.
inline SymMatrix flow_increment(const SymMatrix& q_t, const SymMatrix& sigma,
                                const SymMatrix& a, double a_k, double zeta) {
  if (sigma.dim() != q_t.dim() || a.dim() != q_t.dim()) {
    throw std::invalid_argument("flow_step: dimension mismatch");
  }
  return SymMatrix::symmetrize(q_t.matrix() - zeta * sigma.matrix() +
                               a_k * a.matrix());
}

inline SymMatrix flow_step(const SymMatrix& q_t, const SymMatrix& sigma,
                           const SymMatrix& a, double a_k, double zeta,
                           NormMode mode) {
  return normalize(flow_increment(q_t, sigma, a, a_k, zeta), mode);
}

/// Signature of diag(q_n, Q_T): q_n > 0 adds exactly one positive direction.
inline Signature full_signature(const Signature& tangential) {
  Signature s = tangential;
  ++s.n_plus;
  return s;
}

namespace detail {
inline StepLog make_step_log(int k, const SymMatrix& q_t,
                             const Signature& tangential) {
  const auto sep = separation_check(q_t);
  return {k, full_signature(tangential), sep.q, sep.s_norm, sep.holds};
}
}  // namespace detail

/// Evolves Q_T for k = 1..k_max from cfg.q_init. Annealed disorder draws a
/// fresh (Sigma_k, A_k) pair per step; quenched disorder draws A once before
/// the first step and resamples only Sigma_k. A collapsed flow is recorded in
/// the returned record and never thrown.
inline TrajectoryRecord run_trajectory(const FlowConfig& cfg,
                                       std::uint64_t seed,
                                       const StepObserver& observer = {},
                                       bool record_steps = true) {
  cfg.validate();
  TrajectoryRecord rec;
  rec.seed = seed;
  RandomStream rng(seed);
  const Index d = cfg.d_tan;
  const bool with_anisotropy = d >= 2;

  SymMatrix q_t = cfg.initial_q_t();
  Signature sig = signature(q_t);
  if (record_steps) {
    rec.steps.reserve(std::size_t(cfg.k_max) + 1);
    rec.steps.push_back(detail::make_step_log(0, q_t, sig));
  }
  if (sig.n_minus == cfg.target_n_minus) {
    rec.first_passage = 0;
    rec.censored = false;
  }

  SymMatrix quenched_a = SymMatrix::zero(d);
  if (cfg.disorder == Disorder::Quenched && with_anisotropy) {
    quenched_a = sample_anisotropy(d, rng);
  }

  for (int k = 1; k <= cfg.k_max; ++k) {
    const SymMatrix sigma = sample_sigma(cfg.schur_model, d, rng);
    SymMatrix a = quenched_a;
    if (cfg.disorder == Disorder::Annealed && with_anisotropy) {
      a = sample_anisotropy(d, rng);
    }
    // Drift strength applied on step k uses the index of the state it acts on.
    const double a_k = anisotropy_strength(cfg.a0, cfg.beta_decay, k - 1);
    const SymMatrix pre = flow_increment(q_t, sigma, a, a_k, cfg.zeta);
    SymMatrix next;
    try {
      next = normalize(pre, cfg.norm_mode);
    } catch (const ZeroTensor& e) {
      rec.collapsed = true;
      rec.collapse_step = k;
      rec.diagnostic = std::string("FlowCollapsed: ") + e.what();
      break;
    }
    if (observer) {
      observer(StepTrace{k, &sigma, &a, a_k, &q_t, &pre, &next});
    }
    q_t = std::move(next);
    sig = signature(q_t);
    if (record_steps) rec.steps.push_back(detail::make_step_log(k, q_t, sig));
    if (!rec.first_passage && sig.n_minus == cfg.target_n_minus) {
      rec.first_passage = k;
      rec.censored = false;
    }
  }
  rec.final_signature = sig;
  rec.final_q_t = q_t;
  return rec;
}

}  // namespace zeno_schur
