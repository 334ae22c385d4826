#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "zeno_schur/contour.hpp"
#include "zeno_schur/sym_matrix.hpp"
#include "zeno_schur/tensor_core.hpp"

namespace zeno_schur {

/// Coupled-mode realization with a coherence-sensitive slow/fast coupling:
/// A = I (or an override), B = chi * b0, C = g * I. Larger detector coupling g
/// stiffens the fast sector and weakens the Schur subtraction.
struct MinimalModelSpec {
  double chi = 0.0;
  double g = 1.0;
  MatrixXd b0 = MatrixXd::Identity(2, 2);
  std::optional<SymMatrix> a_override;

  Index slow_dim() const { return b0.rows(); }
  Index fast_dim() const { return b0.cols(); }

  void validate() const {
    if (!(chi >= 0.0) || !std::isfinite(chi)) {
      throw std::invalid_argument("MinimalModelSpec.chi: must be >= 0");
    }
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("MinimalModelSpec.g: must be > 0");
    }
    if (b0.size() == 0 || !b0.allFinite() || b0.isZero(0.0)) {
      throw std::invalid_argument("MinimalModelSpec.b0: must be nonzero and finite");
    }
    if (a_override && a_override->dim() != slow_dim()) {
      throw std::invalid_argument("MinimalModelSpec.a_override: must be d_s x d_s");
    }
  }
};

inline BlockQuadratic build_blocks(const MinimalModelSpec& spec) {
  spec.validate();
  return BlockQuadratic(
      spec.a_override.value_or(SymMatrix::identity(spec.slow_dim())),
      spec.chi * spec.b0, spec.g * SymMatrix::identity(spec.fast_dim()));
}

/// Reconstructed curvature: lowest eigenvalue of the Schur-reduced tensor.
/// Negative exactly when some slow direction v has v^T Q_eff v < 0.
inline double b_eff_final(const MinimalModelSpec& spec) {
  return schur_complement(build_blocks(spec)).eigenvalues()(0);
}

/// Zero crossing chi* = sqrt(g / sigma_max(b0)^2) for the default A = I.
inline double critical_chi(const MinimalModelSpec& spec) {
  const double smax = Eigen::JacobiSVD<MatrixXd>(spec.b0).singularValues()(0);
  return std::sqrt(spec.g) / smax;
}

struct MinimalScan {
  ScalarField field;  // x = chi, y = g
  BoundaryCurve zero_contour;
};

inline MinimalScan scan(const std::vector<double>& chi_grid,
                        const std::vector<double>& g_grid,
                        const MinimalModelSpec& spec_template) {
  if (chi_grid.empty() || g_grid.empty()) {
    throw std::invalid_argument("scan: grids must be non-empty");
  }
  MinimalScan out;
  out.field = {chi_grid, g_grid, MatrixXd(Index(g_grid.size()), Index(chi_grid.size()))};
  MinimalModelSpec spec = spec_template;
  for (std::size_t ig = 0; ig < g_grid.size(); ++ig) {
    for (std::size_t ic = 0; ic < chi_grid.size(); ++ic) {
      spec.chi = chi_grid[ic];
      spec.g = g_grid[ig];
      out.field.values(Index(ig), Index(ic)) = b_eff_final(spec);
    }
  }
  out.zero_contour.level = 0.0;
  if (chi_grid.size() >= 2 && g_grid.size() >= 2) {
    out.zero_contour = extract_contour(out.field, 0.0);
  }
  return out;
}

}  // namespace zeno_schur
