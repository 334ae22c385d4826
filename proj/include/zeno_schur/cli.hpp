#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "zeno_schur/config.hpp"
#include "zeno_schur/io.hpp"
#include "zeno_schur/version.hpp"

namespace zeno_schur::cli {

/// Named output files produced by one run, kept in memory until every module
/// call has succeeded.
using Artifacts = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string sibling(const std::string& out, const std::string& suffix) {
  return out + suffix;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline Artifacts run_schur(const ExperimentConfig& cfg, const SchurPayload& p) {
  json result;
  std::ostringstream csv;
  if (p.blocks) {
    const SymMatrix q_eff = schur_complement(*p.blocks);
    const VectorXd ev = q_eff.eigenvalues();
    result = {{"q_eff", io::to_json(q_eff)},
              {"eigenvalues", std::vector<double>(ev.data(), ev.data() + ev.size())},
              {"signature", io::to_json(signature(q_eff, p.signature_tol))}};
    io::write_matrix_csv(csv, q_eff.matrix());
  } else {
    const MatrixXd k_eff = eliminate_fast(*p.generator);
    result = {{"k_eff", io::to_json(k_eff)}};
    io::write_matrix_csv(csv, k_eff);
  }
  return {{cfg.out, cfg.format == "json" ? dump(result) : csv.str()}};
}

inline Artifacts run_flow(const ExperimentConfig& cfg, const FlowPayload& p) {
  std::ostringstream os;
  for (int t = 0; t < p.n_traj; ++t) {
    const auto rec =
        run_trajectory(p.flow, derive_seed(cfg.seed, 0, std::uint64_t(t)));
    if (cfg.format == "json") {
      os << io::to_json(rec).dump() << '\n';
    } else {
      io::write_steps_csv(os, rec, t == 0);
    }
  }
  return {{cfg.out, os.str()}};
}

inline Artifacts run_grid_cmd(const ExperimentConfig& cfg, const GridPayload& p) {
  const GridResult grid = run_grid(p.spec, cfg.workers);
  BoundaryCurve boundary;
  boundary.level = p.boundary_level;
  if (grid.n_a0() >= 2 && grid.n_zeta() >= 2) {
    boundary = extract_boundary(grid, p.boundary_sector, p.boundary_level);
  }
  if (cfg.format == "json") {
    json j = io::to_json(grid);
    j["boundary"] = io::to_json(boundary);
    j["boundary"]["sector"] = p.boundary_sector;
    return {{cfg.out, dump(j)}};
  }
  std::ostringstream cells, curve;
  io::write_grid_csv(cells, grid);
  io::write_boundary_csv(curve, boundary, "a0", "zeta");
  return {{cfg.out, cells.str()}, {sibling(cfg.out, ".boundary.csv"), curve.str()}};
}

inline Artifacts run_minimal_scan(const ExperimentConfig& cfg,
                                  const MinimalScanPayload& p) {
  const MinimalScan s = scan(p.chi, p.g, p.model);
  if (cfg.format == "json") {
    json j = {{"chi", s.field.x},
              {"g", s.field.y},
              {"b_eff_final", io::to_json(s.field.values)},
              {"zero_contour", io::to_json(s.zero_contour)}};
    return {{cfg.out, dump(j)}};
  }
  std::ostringstream field, curve;
  io::write_field_csv(field, s.field, "chi", "g", "b_eff_final");
  io::write_boundary_csv(curve, s.zero_contour, "chi", "g");
  return {{cfg.out, field.str()}, {sibling(cfg.out, ".contour.csv"), curve.str()}};
}

inline Artifacts run_reconstruct(const ExperimentConfig& cfg,
                                 const ReconstructPayload& p) {
  ReconstructionRequest req = p.request;
  if (p.blocks) req.q_eff = schur_complement(*p.blocks);
  const ReconstructionReport rep = reconstruct(req);
  Artifacts out;
  if (cfg.format == "json") {
    json j = io::to_json(rep);
    j["q_eff"] = io::to_json(req.q_eff);
    out.emplace_back(cfg.out, dump(j));
  } else {
    std::ostringstream os;
    os << "quantity,i,j,value\n";
    auto emit = [&](const char* name, const SymMatrix& m) {
      for (Index i = 0; i < m.dim(); ++i) {
        for (Index k = 0; k < m.dim(); ++k) {
          os << name << ',' << i << ',' << k << ',' << io::format_number(m(i, k)) << '\n';
        }
      }
    };
    emit("q_eff", req.q_eff);
    emit("gamma", rep.gamma);
    emit("g_eff", rep.g_eff);
    emit("predicted", rep.predicted);
    os << "einstein_residual,,," << io::format_number(rep.einstein_residual) << '\n';
    os << "relative_error,,," << io::format_number(rep.relative_error) << '\n';
    out.emplace_back(cfg.out, os.str());
  }
  if (p.samples_out) {
    // Resample with the identical stream so the file matches the report.
    const Mobility mu(req.mu);
    const LinearSDE sde(m_from_q(mu, req.q_eff),
                        req.diffusion.value_or((1.0 / req.beta) * req.mu));
    const MatrixXd samples = simulate_sde(
        sde, SdeSampling{rep.dt, req.n_samples * rep.thin, rep.burn_in, rep.thin},
        req.seed);
    std::ostringstream os;
    io::write_matrix_csv(os, samples);
    out.emplace_back(*p.samples_out, os.str());
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + tmp + " for writing");
    f << content;
    if (!f.flush()) throw IoFailure("write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoFailure("cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace detail

/// Runs the configured subcommand and returns the artifacts without touching
/// the filesystem.
inline Artifacts compute(const ExperimentConfig& cfg) {
  return std::visit(
      [&](const auto& p) -> Artifacts {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SchurPayload>) {
          return detail::run_schur(cfg, p);
        } else if constexpr (std::is_same_v<T, FlowPayload>) {
          return detail::run_flow(cfg, p);
        } else if constexpr (std::is_same_v<T, GridPayload>) {
          return detail::run_grid_cmd(cfg, p);
        } else if constexpr (std::is_same_v<T, MinimalScanPayload>) {
          return detail::run_minimal_scan(cfg, p);
        } else {
          return detail::run_reconstruct(cfg, p);
        }
      },
      cfg.payload);
}

/// Computes, then writes every artifact plus `<out>.manifest.json`. On any
/// error nothing but `<out>.failed` is written. Returns the process exit code.
inline int run(const ExperimentConfig& cfg, std::ostream& err) {
  const std::string marker = cfg.out + ".failed";
  const auto start = std::chrono::steady_clock::now();
  try {
    const Artifacts artifacts = compute(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json files = json::array();
    for (const auto& [path, content] : artifacts) files.push_back(path);
    const json manifest = {{"tool", "zeno-schur"},
                           {"version", kVersion},
                           {"subcommand", cfg.subcommand},
                           {"seed", cfg.seed},
                           {"workers", cfg.workers},
                           {"outputs", files},
                           {"wall_time_s", wall},
                           {"config", cfg.echo()}};
    for (const auto& [path, content] : artifacts) detail::write_file(path, content);
    detail::write_file(cfg.out + ".manifest.json", detail::dump(manifest));
    std::error_code ec;
    std::filesystem::remove(marker, ec);
    return 0;
  } catch (const std::exception& e) {
    const auto* known = dynamic_cast<const Error*>(&e);
    const std::string kind = known ? known->kind() : "InternalError";
    err << "error: " << kind << ": " << e.what() << '\n';
    std::ofstream f(marker, std::ios::trunc);
    f << detail::dump({{"subcommand", cfg.subcommand},
                       {"seed", cfg.seed},
                       {"kind", kind},
                       {"error", e.what()}});
    return 1;
  }
}

}  // namespace zeno_schur::cli
