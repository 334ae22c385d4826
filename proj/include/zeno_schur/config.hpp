#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "zeno_schur/ensemble.hpp"
#include "zeno_schur/errors.hpp"
#include "zeno_schur/flow.hpp"
#include "zeno_schur/fluct_recon.hpp"
#include "zeno_schur/minimal_model.hpp"
#include "zeno_schur/reduction.hpp"
#include "zeno_schur/tensor_core.hpp"

namespace zeno_schur::cli {

using nlohmann::json;

struct SchurPayload {
  std::optional<BlockQuadratic> blocks;
  std::optional<BlockGenerator> generator;
  double signature_tol = kSignatureTol;
};

struct FlowPayload {
  FlowConfig flow;
  int n_traj = 1;
};

struct GridPayload {
  GridSpec spec;
  Index boundary_sector = 3;
  double boundary_level = 0.5;
};

struct MinimalScanPayload {
  std::vector<double> chi;
  std::vector<double> g;
  MinimalModelSpec model;
};

struct ReconstructPayload {
  ReconstructionRequest request;
  std::optional<BlockQuadratic> blocks;  // Q_eff from a Schur reduction
  std::optional<std::string> samples_out;
};

using Payload = std::variant<SchurPayload, FlowPayload, GridPayload,
                             MinimalScanPayload, ReconstructPayload>;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"schur", "flow", "grid",
                                              "minimal-scan", "reconstruct"};
  return names;
}

struct ExperimentConfig {
  std::string subcommand;
  Payload payload;
  json payload_json;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out;
  std::string format = "csv";

  /// Full config with every effective top-level value spelled out.
  json echo() const {
    return {{"seed", seed},
            {"workers", workers},
            {"out", out},
            {"format", format},
            {subcommand, payload_json}};
  }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& path, const std::string& msg) {
  throw ConfigInvalid(path + ": " + msg);
}

/// Typed access to one JSON object that remembers which keys were consumed,
/// so unknown keys can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }
  std::string path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      invalid(path(key), "required number is missing");
    }
    if (!v->is_number()) invalid(path(key), "expected a number");
    return v->get<double>();
  }

  long integer(const std::string& key, std::optional<long> fallback = {}) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      invalid(path(key), "required integer is missing");
    }
    if (!v->is_number_integer()) invalid(path(key), "expected an integer");
    return v->get<long>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = {}) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      invalid(path(key), "required string is missing");
    }
    if (!v->is_string()) invalid(path(key), "expected a string");
    return v->get<std::string>();
  }

  MatrixXd matrix(const std::string& key) {
    const json* v = raw(key);
    if (!v) invalid(path(key), "required matrix is missing");
    return parse_matrix(*v, path(key));
  }

  std::optional<MatrixXd> optional_matrix(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    return parse_matrix(*v, path(key));
  }

  SymMatrix sym(const std::string& key) { return to_sym(matrix(key), path(key)); }

  std::optional<SymMatrix> optional_sym(const std::string& key) {
    auto m = optional_matrix(key);
    if (!m) return std::nullopt;
    return to_sym(*m, path(key));
  }

  /// Either an explicit ascending list or {"min", "max", "count"}.
  std::vector<double> axis(const std::string& key) {
    const json* v = raw(key);
    if (!v) invalid(path(key), "required axis is missing");
    std::vector<double> out;
    if (v->is_array()) {
      for (const auto& x : *v) {
        if (!x.is_number()) invalid(path(key), "axis entries must be numbers");
        out.push_back(x.get<double>());
      }
    } else {
      ObjectReader r(*v, path(key));
      const double lo = r.number("min"), hi = r.number("max");
      const long n = r.integer("count");
      r.finish();
      if (n < 1) invalid(path(key) + ".count", "must be >= 1");
      if (n > 1 && !(hi > lo)) invalid(path(key), "max must exceed min");
      for (long i = 0; i < n; ++i) {
        out.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
      }
    }
    if (out.empty()) invalid(path(key), "axis must be non-empty");
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (!(out[i] > out[i - 1])) invalid(path(key), "axis must be strictly ascending");
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) invalid(path(it.key()), "unknown field");
    }
  }

  static MatrixXd parse_matrix(const json& v, const std::string& where) {
    if (v.is_number()) {
      MatrixXd m(1, 1);
      m(0, 0) = v.get<double>();
      return m;
    }
    if (!v.is_array()) invalid(where, "expected a row-major array of rows");
    const Index rows = Index(v.size());
    Index cols = -1;
    MatrixXd m;
    for (Index i = 0; i < rows; ++i) {
      const json& row = v.at(std::size_t(i));
      if (!row.is_array()) invalid(where, "expected a row-major array of rows");
      if (cols < 0) {
        cols = Index(row.size());
        m.resize(rows, cols);
      }
      if (Index(row.size()) != cols) invalid(where, "rows have different lengths");
      for (Index j = 0; j < cols; ++j) {
        const json& x = row.at(std::size_t(j));
        if (!x.is_number()) invalid(where, "entries must be numbers");
        m(i, j) = x.get<double>();
      }
    }
    if (rows == 0) m.resize(0, 0);
    return m;
  }

  static SymMatrix to_sym(const MatrixXd& m, const std::string& where) {
    try {
      return SymMatrix(m);
    } catch (const std::exception& e) {
      invalid(where, e.what());
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline FlowConfig parse_flow_config(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  FlowConfig cfg;
  cfg.d_tan = r.integer("d_tan", cfg.d_tan);
  cfg.q_n = r.number("q_n", cfg.q_n);
  cfg.zeta = r.number("zeta", cfg.zeta);
  cfg.a0 = r.number("a0", cfg.a0);
  cfg.beta_decay = r.number("beta_decay", cfg.beta_decay);
  cfg.k_max = int(r.integer("k_max", cfg.k_max));
  cfg.target_n_minus = r.integer("target_n_minus", cfg.target_n_minus);

  const std::string norm = r.string("norm", "frobenius");
  if (norm == "frobenius") {
    cfg.norm_mode = NormMode::Frobenius;
  } else if (norm == "trace") {
    cfg.norm_mode = NormMode::Trace;
  } else {
    invalid(r.path("norm"), "expected \"frobenius\" or \"trace\"");
  }
  const std::string disorder = r.string("disorder", "annealed");
  if (disorder == "annealed") {
    cfg.disorder = Disorder::Annealed;
  } else if (disorder == "quenched") {
    cfg.disorder = Disorder::Quenched;
  } else {
    invalid(r.path("disorder"), "expected \"annealed\" or \"quenched\"");
  }

  if (const json* m = r.raw("schur_model")) {
    ObjectReader mr(*m, r.path("schur_model"));
    const std::string type = mr.string("type");
    if (type == "lognormal") {
      LognormalGaussian ln;
      ln.sigma_log = mr.number("sigma_log", ln.sigma_log);
      if (mr.has("d_fast")) ln.d_fast = mr.integer("d_fast");
      cfg.schur_model = ln;
    } else if (type == "wishart") {
      Wishart w;
      if (mr.has("rank")) w.rank = mr.integer("rank");
      cfg.schur_model = w;
    } else {
      invalid(mr.path("type"), "expected \"lognormal\" or \"wishart\"");
    }
    mr.finish();
  }
  cfg.q_init = r.optional_sym("q_init");
  r.finish();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    invalid(path, e.what());
  }
  return cfg;
}

inline BlockQuadratic parse_blocks(ObjectReader& r, const std::string& where) {
  SymMatrix a = r.sym("a");
  MatrixXd b = r.matrix("b");
  SymMatrix c = r.sym("c");
  try {
    return BlockQuadratic(std::move(a), std::move(b), std::move(c));
  } catch (const std::invalid_argument& e) {
    invalid(where, e.what());
  }
}

inline SchurPayload parse_schur(const json& j) {
  ObjectReader r(j, "schur");
  SchurPayload p;
  p.signature_tol = r.number("signature_tol", kSignatureTol);
  if (p.signature_tol < 0.0) invalid("schur.signature_tol", "must be >= 0");
  if (r.has("a") || r.has("b") || r.has("c")) {
    p.blocks = parse_blocks(r, "schur");
  } else if (r.has("k_ss")) {
    MatrixXd ss = r.matrix("k_ss"), sf = r.matrix("k_sf"), fs = r.matrix("k_fs"),
             ff = r.matrix("k_ff");
    try {
      p.generator.emplace(ss, sf, fs, ff);
    } catch (const std::invalid_argument& e) {
      invalid("schur", e.what());
    }
  } else {
    invalid("schur", "expected blocks {a, b, c} or a generator {k_ss, k_sf, k_fs, k_ff}");
  }
  r.finish();
  return p;
}

inline FlowPayload parse_flow(const json& j) {
  FlowPayload p;
  json flow = j;
  if (j.is_object() && j.contains("n_traj")) {
    if (!j.at("n_traj").is_number_integer() || j.at("n_traj").get<long>() < 1) {
      invalid("flow.n_traj", "must be an integer >= 1");
    }
    p.n_traj = j.at("n_traj").get<int>();
    flow.erase("n_traj");
  }
  p.flow = parse_flow_config(flow, "flow");
  return p;
}

inline GridPayload parse_grid(const json& j, std::uint64_t seed) {
  ObjectReader r(j, "grid");
  GridPayload p;
  p.spec.a0_values = r.axis("a0");
  p.spec.zeta_values = r.axis("zeta");
  p.spec.n_traj = int(r.integer("n_traj", 100));
  if (p.spec.n_traj < 1) invalid("grid.n_traj", "must be >= 1");
  if (const json* f = r.raw("flow")) {
    p.spec.base_config = parse_flow_config(*f, "grid.flow");
  }
  p.spec.master_seed = seed;
  p.boundary_sector = p.spec.base_config.target_n_minus;
  if (const json* b = r.raw("boundary")) {
    ObjectReader br(*b, "grid.boundary");
    p.boundary_sector = br.integer("sector", p.boundary_sector);
    p.boundary_level = br.number("level", p.boundary_level);
    br.finish();
    if (!(p.boundary_level > 0.0 && p.boundary_level < 1.0)) {
      invalid("grid.boundary.level", "must lie in (0, 1)");
    }
  }
  r.finish();
  try {
    p.spec.validate();
  } catch (const std::invalid_argument& e) {
    invalid("grid", e.what());
  }
  return p;
}

inline MinimalScanPayload parse_minimal_scan(const json& j) {
  ObjectReader r(j, "minimal-scan");
  MinimalScanPayload p;
  p.chi = r.axis("chi");
  p.g = r.axis("g");
  if (auto b0 = r.optional_matrix("b0")) p.model.b0 = *b0;
  p.model.a_override = r.optional_sym("a");
  r.finish();
  try {
    p.model.chi = p.chi.front();
    p.model.g = p.g.front();
    p.model.validate();
  } catch (const std::invalid_argument& e) {
    invalid("minimal-scan", e.what());
  }
  return p;
}

inline ReconstructPayload parse_reconstruct(const json& j, std::uint64_t seed) {
  ObjectReader r(j, "reconstruct");
  ReconstructPayload p;
  auto& q = p.request;
  q.beta = r.number("beta", 1.0);
  if (!(q.beta > 0.0)) invalid("reconstruct.beta", "must be > 0");
  if (r.has("blocks")) {
    ObjectReader br(*r.raw("blocks"), "reconstruct.blocks");
    p.blocks = parse_blocks(br, "reconstruct.blocks");
    br.finish();
  } else {
    q.q_eff = r.sym("q_eff");
  }
  q.mu = r.sym("mu");
  q.diffusion = r.optional_sym("diffusion");
  if (r.has("dt")) q.dt = r.number("dt");
  q.n_samples = r.integer("n_samples", q.n_samples);
  if (q.n_samples < 1) invalid("reconstruct.n_samples", "must be >= 1");
  if (r.has("thin")) q.thin = r.integer("thin");
  if (r.has("burn_in")) q.burn_in = r.integer("burn_in");
  if (r.has("samples_out")) p.samples_out = r.string("samples_out");
  r.finish();
  q.seed = seed;
  return p;
}

inline std::uint64_t parse_seed(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return std::uint64_t(v.get<long long>());
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
      try {
        return std::stoull(s);
      } catch (const std::out_of_range&) {
      }
    }
  }
  invalid("seed", "expected an unsigned 64-bit decimal integer");
}

}  // namespace detail

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

/// Parses a config document. A persisted manifest (an object with a "config"
/// member) is accepted too and replays its config.
inline ExperimentConfig parse_config(const json& doc, const Overrides& ov = {}) {
  const json& j = doc.is_object() && doc.contains("config") ? doc.at("config") : doc;
  if (!j.is_object()) detail::invalid("config", "expected a JSON object");

  ExperimentConfig cfg;
  std::vector<std::string> found;
  for (const auto& name : subcommands()) {
    if (j.contains(name)) found.push_back(name);
  }
  if (found.size() != 1) {
    detail::invalid("config", "exactly one of schur, flow, grid, minimal-scan, "
                              "reconstruct must be present");
  }
  cfg.subcommand = found.front();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != cfg.subcommand && k != "seed" && k != "workers" && k != "out" &&
        k != "format") {
      detail::invalid(k, "unknown field");
    }
  }

  if (j.contains("seed")) cfg.seed = detail::parse_seed(j.at("seed"));
  if (ov.seed) cfg.seed = *ov.seed;
  if (j.contains("workers")) {
    const json& w = j.at("workers");
    if (!w.is_number_integer() || w.get<long>() < 1) {
      detail::invalid("workers", "must be an integer >= 1");
    }
    cfg.workers = w.get<unsigned>();
  }
  if (ov.workers) cfg.workers = *ov.workers;
  if (j.contains("out")) {
    if (!j.at("out").is_string()) detail::invalid("out", "expected a string");
    cfg.out = j.at("out").get<std::string>();
  }
  if (ov.out) cfg.out = *ov.out;
  if (j.contains("format")) {
    if (!j.at("format").is_string()) detail::invalid("format", "expected a string");
    cfg.format = j.at("format").get<std::string>();
  }
  if (ov.format) cfg.format = *ov.format;
  if (cfg.format != "csv" && cfg.format != "json") {
    detail::invalid("format", "expected \"csv\" or \"json\"");
  }
  if (cfg.out.empty()) detail::invalid("out", "output path is required");

  cfg.payload_json = j.at(cfg.subcommand);
  const json& p = cfg.payload_json;
  if (cfg.subcommand == "schur") {
    cfg.payload = detail::parse_schur(p);
  } else if (cfg.subcommand == "flow") {
    cfg.payload = detail::parse_flow(p);
  } else if (cfg.subcommand == "grid") {
    cfg.payload = detail::parse_grid(p, cfg.seed);
  } else if (cfg.subcommand == "minimal-scan") {
    cfg.payload = detail::parse_minimal_scan(p);
  } else {
    cfg.payload = detail::parse_reconstruct(p, cfg.seed);
  }
  return cfg;
}

}  // namespace zeno_schur::cli
