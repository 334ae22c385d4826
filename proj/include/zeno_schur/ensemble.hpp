#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zeno_schur/contour.hpp"
#include "zeno_schur/errors.hpp"
#include "zeno_schur/flow.hpp"
#include "zeno_schur/rng.hpp"

namespace zeno_schur {

struct GridSpec {
  std::vector<double> a0_values;
  std::vector<double> zeta_values;
  int n_traj = 100;
  FlowConfig base_config;
  std::uint64_t master_seed = 0;

  void validate() const {
    auto ascending = [](const std::vector<double>& v, const char* name) {
      if (v.empty()) {
        throw std::invalid_argument(std::string("GridSpec.") + name +
                                    ": must be non-empty");
      }
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) {
          throw std::invalid_argument(std::string("GridSpec.") + name +
                                      ": must be strictly ascending");
        }
      }
    };
    ascending(a0_values, "a0_values");
    ascending(zeta_values, "zeta_values");
    if (n_traj < 1) throw std::invalid_argument("GridSpec.n_traj: must be >= 1");
    FlowConfig probe = base_config;
    probe.a0 = a0_values.back();
    probe.zeta = zeta_values.back();
    probe.validate();
    probe.a0 = a0_values.front();
    probe.zeta = zeta_values.front();
    probe.validate();
  }
};

struct FirstPassageStats {
  std::optional<double> mean;
  double censored_fraction = 0.0;
};

struct CellStats {
  double a0 = 0.0;
  double zeta = 0.0;
  std::vector<double> p_sector;  // index = n_minus of the final Q_T
  std::optional<double> mean_fpt;
  double censored_fraction = 0.0;
  int n_valid = 0;
  int n_collapsed = 0;
};

/// Cells are stored zeta-major: cell(ia, iz) = cells[iz * n_a0 + ia].
struct GridResult {
  std::vector<double> a0_values;
  std::vector<double> zeta_values;
  Index d_tan = 0;
  Index target_n_minus = 0;
  int n_traj = 0;
  std::uint64_t master_seed = 0;
  std::vector<CellStats> cells;

  std::size_t n_a0() const { return a0_values.size(); }
  std::size_t n_zeta() const { return zeta_values.size(); }
  const CellStats& cell(std::size_t ia, std::size_t iz) const {
    return cells[iz * n_a0() + ia];
  }

  /// P(n_minus = sector) with x = a0 and y = zeta.
  ScalarField probability_field(Index sector) const {
    ScalarField f{a0_values, zeta_values, MatrixXd(n_zeta(), n_a0())};
    for (std::size_t iz = 0; iz < n_zeta(); ++iz) {
      for (std::size_t ia = 0; ia < n_a0(); ++ia) {
        const auto& c = cell(ia, iz);
        f.values(Index(iz), Index(ia)) =
            sector >= 0 && std::size_t(sector) < c.p_sector.size()
                ? c.p_sector[std::size_t(sector)]
                : 0.0;
      }
    }
    return f;
  }

  /// Mean first-passage time, NaN where every trajectory was censored.
  ScalarField fpt_field() const {
    ScalarField f{a0_values, zeta_values, MatrixXd(n_zeta(), n_a0())};
    for (std::size_t iz = 0; iz < n_zeta(); ++iz) {
      for (std::size_t ia = 0; ia < n_a0(); ++ia) {
        const auto& c = cell(ia, iz);
        f.values(Index(iz), Index(ia)) =
            c.mean_fpt.value_or(std::numeric_limits<double>::quiet_NaN());
      }
    }
    return f;
  }
};

/// Fraction of valid records whose final Q_T has `n_minus` negative
/// eigenvalues.
inline double sector_probability(const std::vector<TrajectoryRecord>& records,
                                 Index n_minus) {
  std::size_t valid = 0, hits = 0;
  for (const auto& r : records) {
    if (!r.valid()) continue;
    ++valid;
    if (r.final_n_minus() == n_minus) ++hits;
  }
  if (valid == 0) throw NoValidRecords("sector_probability: no valid records");
  return double(hits) / double(valid);
}

/// Mean tau over uncensored valid records. Censored records are counted in
/// censored_fraction only.
inline FirstPassageStats mean_first_passage(
    const std::vector<TrajectoryRecord>& records) {
  std::size_t valid = 0, censored = 0;
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.valid()) continue;
    ++valid;
    if (r.first_passage) {
      sum += double(*r.first_passage);
    } else {
      ++censored;
    }
  }
  FirstPassageStats out;
  if (valid == 0) return out;
  out.censored_fraction = double(censored) / double(valid);
  if (censored < valid) out.mean = sum / double(valid - censored);
  return out;
}

inline CellStats summarize_cell(const std::vector<TrajectoryRecord>& records,
                                Index d_tan) {
  CellStats c;
  c.p_sector.assign(std::size_t(d_tan) + 1, 0.0);
  for (const auto& r : records) {
    if (r.valid()) {
      ++c.n_valid;
    } else {
      ++c.n_collapsed;
    }
  }
  if (c.n_valid == 0) return c;
  for (Index s = 0; s <= d_tan; ++s) {
    c.p_sector[std::size_t(s)] = sector_probability(records, s);
  }
  const auto fpt = mean_first_passage(records);
  c.mean_fpt = fpt.mean;
  c.censored_fraction = fpt.censored_fraction;
  return c;
}

/// Runs n_traj trajectories in every (a0, zeta) cell. Trajectory t of cell c
/// uses the stream derive_seed(master_seed, c, t), and each cell is reduced by
/// the worker that ran it, so the result does not depend on `workers`.
inline GridResult run_grid(const GridSpec& spec, unsigned workers = 1) {
  spec.validate();
  GridResult out;
  out.a0_values = spec.a0_values;
  out.zeta_values = spec.zeta_values;
  out.d_tan = spec.base_config.d_tan;
  out.target_n_minus = spec.base_config.target_n_minus;
  out.n_traj = spec.n_traj;
  out.master_seed = spec.master_seed;
  const std::size_t na = spec.a0_values.size(), nz = spec.zeta_values.size();
  out.cells.resize(na * nz);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    std::vector<TrajectoryRecord> records;
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= out.cells.size()) return;
      try {
        FlowConfig cfg = spec.base_config;
        cfg.a0 = spec.a0_values[idx % na];
        cfg.zeta = spec.zeta_values[idx / na];
        records.clear();
        for (int t = 0; t < spec.n_traj; ++t) {
          records.push_back(run_trajectory(
              cfg, derive_seed(spec.master_seed, idx, std::uint64_t(t)), {},
              false));
        }
        CellStats c = summarize_cell(records, cfg.d_tan);
        c.a0 = cfg.a0;
        c.zeta = cfg.zeta;
        if (c.n_valid == 0) {
          throw NoValidRecords("run_grid: every trajectory collapsed in cell (a0=" +
                               std::to_string(cfg.a0) + ", zeta=" +
                               std::to_string(cfg.zeta) + ")");
        }
        out.cells[idx] = std::move(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(out.cells.size());
        return;
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Contour of P(n_minus = sector) at `level`, in (a0, zeta) coordinates.
inline BoundaryCurve extract_boundary(const GridResult& grid, Index sector,
                                      double level = 0.5) {
  if (grid.n_a0() < 2 || grid.n_zeta() < 2) {
    throw std::invalid_argument("extract_boundary: grid must be at least 2x2");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("extract_boundary: level must lie in (0, 1)");
  }
  return extract_contour(grid.probability_field(sector), level);
}

}  // namespace zeno_schur
