#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "zeno_schur/contour.hpp"
#include "zeno_schur/ensemble.hpp"
#include "zeno_schur/flow.hpp"
#include "zeno_schur/fluct_recon.hpp"
#include "zeno_schur/sym_matrix.hpp"
#include "zeno_schur/tensor_core.hpp"

namespace zeno_schur::io {

using nlohmann::json;

/// Decimal with 17 significant digits; "nan" for undefined values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const SymMatrix& m) { return to_json(m.matrix()); }

inline json to_json(const Signature& s) {
  return {{"n_plus", s.n_plus}, {"n_minus", s.n_minus}, {"n_zero", s.n_zero}};
}

inline json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json to_json(const TrajectoryRecord& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"k", s.k},
                     {"signature", to_json(s.signature)},
                     {"q", s.q},
                     {"s_opnorm", s.s_opnorm},
                     {"separation_holds", s.separation_holds}});
  }
  json out = {{"seed", r.seed},
              {"first_passage", r.first_passage ? json(*r.first_passage) : json(nullptr)},
              {"censored", r.censored},
              {"collapsed", r.collapsed},
              {"final_signature", to_json(r.final_signature)},
              {"final_q_t", to_json(r.final_q_t)},
              {"steps", std::move(steps)}};
  if (r.collapsed) {
    out["collapse_step"] = *r.collapse_step;
    out["diagnostic"] = r.diagnostic;
  }
  return out;
}

inline json to_json(const BoundaryCurve& c) {
  json lines = json::array();
  for (const auto& line : c.polylines) {
    json pts = json::array();
    for (const auto& p : line) pts.push_back({p.x, p.y});
    lines.push_back(std::move(pts));
  }
  return {{"level", c.level},
          {"empty", c.empty()},
          {"skipped_cells", c.skipped_cells},
          {"polylines", std::move(lines)}};
}

inline json to_json(const GridResult& g) {
  json cells = json::array();
  for (const auto& c : g.cells) {
    cells.push_back({{"a0", c.a0},
                     {"zeta", c.zeta},
                     {"p_sector", c.p_sector},
                     {"mean_fpt", optional_number(c.mean_fpt)},
                     {"censored_fraction", c.censored_fraction},
                     {"n_valid", c.n_valid},
                     {"n_collapsed", c.n_collapsed}});
  }
  return {{"a0_values", g.a0_values},     {"zeta_values", g.zeta_values},
          {"d_tan", g.d_tan},             {"target_n_minus", g.target_n_minus},
          {"n_traj", g.n_traj},           {"master_seed", g.master_seed},
          {"cells", std::move(cells)}};
}

inline json to_json(const ReconstructionReport& r) {
  return {{"gamma", to_json(r.gamma)},
          {"g_eff", to_json(r.g_eff)},
          {"predicted", to_json(r.predicted)},
          {"einstein_residual", r.einstein_residual},
          {"beta", r.beta},
          {"relative_error", r.relative_error},
          {"dt", r.dt},
          {"thin", r.thin},
          {"burn_in", r.burn_in},
          {"n_kept", r.n_kept}};
}

/// One row per cell, zeta-major:
/// a0,zeta,P0,...,P{d_tan},mean_fpt,censored_fraction
inline void write_grid_csv(std::ostream& os, const GridResult& g) {
  os << "a0,zeta";
  for (Index s = 0; s <= g.d_tan; ++s) os << ",P" << s;
  os << ",mean_fpt,censored_fraction\n";
  for (const auto& c : g.cells) {
    os << format_number(c.a0) << ',' << format_number(c.zeta);
    for (double p : c.p_sector) os << ',' << format_number(p);
    os << ',' << format_number(c.mean_fpt.value_or(std::nan("")))
       << ',' << format_number(c.censored_fraction) << '\n';
  }
}

inline void write_boundary_csv(std::ostream& os, const BoundaryCurve& c,
                               const std::string& x_name,
                               const std::string& y_name) {
  os << "polyline,index," << x_name << ',' << y_name << '\n';
  for (std::size_t l = 0; l < c.polylines.size(); ++l) {
    for (std::size_t i = 0; i < c.polylines[l].size(); ++i) {
      const auto& p = c.polylines[l][i];
      os << l << ',' << i << ',' << format_number(p.x) << ','
         << format_number(p.y) << '\n';
    }
  }
}

inline void write_field_csv(std::ostream& os, const ScalarField& f,
                            const std::string& x_name, const std::string& y_name,
                            const std::string& value_name) {
  os << x_name << ',' << y_name << ',' << value_name << '\n';
  for (std::size_t iy = 0; iy < f.y.size(); ++iy) {
    for (std::size_t ix = 0; ix < f.x.size(); ++ix) {
      os << format_number(f.x[ix]) << ',' << format_number(f.y[iy]) << ','
         << format_number(f.at(ix, iy)) << '\n';
    }
  }
}

inline void write_steps_csv(std::ostream& os, const TrajectoryRecord& r,
                            bool header) {
  if (header) os << "seed,k,n_plus,n_minus,n_zero,q,s_opnorm,separation_holds\n";
  for (const auto& s : r.steps) {
    os << r.seed << ',' << s.k << ',' << s.signature.n_plus << ','
       << s.signature.n_minus << ',' << s.signature.n_zero << ','
       << format_number(s.q) << ',' << format_number(s.s_opnorm) << ','
       << (s.separation_holds ? 1 : 0) << '\n';
  }
}

inline void write_matrix_csv(std::ostream& os, const MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_number(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace zeno_schur::io
