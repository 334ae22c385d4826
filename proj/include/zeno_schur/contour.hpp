#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "zeno_schur/sym_matrix.hpp"

namespace zeno_schur {

/// Values sampled on a rectilinear grid: values(iy, ix) sits at (x[ix], y[iy]).
/// NaN marks an undefined sample.
struct ScalarField {
  std::vector<double> x;
  std::vector<double> y;
  MatrixXd values;

  double at(std::size_t ix, std::size_t iy) const {
    return values(Index(iy), Index(ix));
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct BoundaryCurve {
  double level = 0.0;
  std::vector<std::vector<Point2>> polylines;
  std::size_t skipped_cells = 0;  // squares with an undefined corner

  bool empty() const { return polylines.empty(); }

  /// All points, polyline after polyline.
  std::vector<Point2> points() const {
    std::vector<Point2> out;
    for (const auto& line : polylines) out.insert(out.end(), line.begin(), line.end());
    return out;
  }
};

namespace detail {

// Edge identifiers: horizontal edges join (iy, ix)-(iy, ix+1), vertical edges
// join (iy, ix)-(iy+1, ix).
inline std::uint64_t h_edge(std::size_t iy, std::size_t ix) {
  return (std::uint64_t(iy) << 33) | (std::uint64_t(ix) << 1);
}
inline std::uint64_t v_edge(std::size_t iy, std::size_t ix) {
  return (std::uint64_t(iy) << 33) | (std::uint64_t(ix) << 1) | 1u;
}

struct Segment {
  std::uint64_t e0, e1;
};

}  // namespace detail

/// Marching squares with linear interpolation along grid edges. Samples equal
/// to the level count as above it. Saddle squares are disambiguated by the
/// mean of the four corners. Segments are chained into polylines through the
/// shared edge crossings, so the output is deterministic.
inline BoundaryCurve extract_contour(const ScalarField& f, double level) {
  const std::size_t nx = f.x.size(), ny = f.y.size();
  if (f.values.rows() != Index(ny) || f.values.cols() != Index(nx)) {
    throw std::invalid_argument("extract_contour: field shape mismatch");
  }
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("extract_contour: grid must be at least 2x2");
  }
  BoundaryCurve curve;
  curve.level = level;

  std::map<std::uint64_t, Point2> crossing;
  auto crossing_point = [&](std::uint64_t id) -> Point2 {
    const std::size_t iy = id >> 33, ix = (id >> 1) & 0xFFFFFFFFu;
    const bool vertical = id & 1u;
    const std::size_t jy = vertical ? iy + 1 : iy, jx = vertical ? ix : ix + 1;
    const double va = f.at(ix, iy), vb = f.at(jx, jy);
    const double t = (level - va) / (vb - va);
    return {f.x[ix] + t * (f.x[jx] - f.x[ix]), f.y[iy] + t * (f.y[jy] - f.y[iy])};
  };

  std::vector<detail::Segment> segments;
  for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      const double v00 = f.at(ix, iy), v01 = f.at(ix + 1, iy);
      const double v10 = f.at(ix, iy + 1), v11 = f.at(ix + 1, iy + 1);
      if (std::isnan(v00) || std::isnan(v01) || std::isnan(v10) ||
          std::isnan(v11)) {
        ++curve.skipped_cells;
        continue;
      }
      const bool b00 = v00 >= level, b01 = v01 >= level;
      const bool b10 = v10 >= level, b11 = v11 >= level;
      const auto bottom = detail::h_edge(iy, ix), top = detail::h_edge(iy + 1, ix);
      const auto left = detail::v_edge(iy, ix), right = detail::v_edge(iy, ix + 1);

      std::vector<std::uint64_t> cut;
      if (b00 != b01) cut.push_back(bottom);
      if (b01 != b11) cut.push_back(right);
      if (b11 != b10) cut.push_back(top);
      if (b10 != b00) cut.push_back(left);
      for (auto e : cut) {
        if (!crossing.count(e)) crossing[e] = crossing_point(e);
      }
      if (cut.size() == 2) {
        segments.push_back({cut[0], cut[1]});
      } else if (cut.size() == 4) {
        const bool center = 0.25 * (v00 + v01 + v10 + v11) >= level;
        // Isolate the corners whose class differs from the center.
        if (b00 != center) {
          segments.push_back({bottom, left});
          segments.push_back({right, top});
        } else {
          segments.push_back({bottom, right});
          segments.push_back({left, top});
        }
      }
    }
  }

  std::map<std::uint64_t, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].e0].push_back(s);
    incident[segments[s].e1].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);

  auto walk = [&](std::size_t start_seg, std::uint64_t start_edge) {
    std::vector<Point2> line{crossing[start_edge]};
    std::size_t seg = start_seg;
    std::uint64_t edge = start_edge;
    while (true) {
      used[seg] = true;
      const std::uint64_t next =
          segments[seg].e0 == edge ? segments[seg].e1 : segments[seg].e0;
      line.push_back(crossing[next]);
      edge = next;
      std::size_t following = segments.size();
      for (auto s : incident[edge]) {
        if (!used[s]) {
          following = s;
          break;
        }
      }
      if (following == segments.size()) break;
      seg = following;
    }
    curve.polylines.push_back(std::move(line));
  };

  // Open polylines start at a crossing used by a single segment.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    if (incident[segments[s].e0].size() == 1) {
      walk(s, segments[s].e0);
    } else if (incident[segments[s].e1].size() == 1) {
      walk(s, segments[s].e1);
    }
  }
  // Whatever remains forms closed loops.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) walk(s, segments[s].e0);
  }
  return curve;
}

}  // namespace zeno_schur
