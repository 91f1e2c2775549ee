#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "melnikov3d/melnikov.hpp"

namespace melnikov3d {

struct ContourVertex {
  double p = 0.0;
  double alpha = 0.0;  ///< in [0, 1)
  bool transverse = false;
  /// Grid nodes (i, j) at the ends of the cell edge carrying this vertex.
  /// Both are the same node for a crossing junction.
  std::pair<std::size_t, std::size_t> node_a{}, node_b{};
};

struct Contour {
  std::size_t id = 0;
  std::vector<ContourVertex> vertices;
  bool closed = false;
};

/// Zero contours of a MelnikovField by marching squares, periodic in α.
struct ContourSet {
  std::vector<Contour> contours;
  double grad_threshold = 0.0;
  /// |M| at or below this counts as zero (and as the + side for crossings).
  double snap = 0.0;

  std::size_t vertex_count() const;
};

/// Values treated as zero by zero_contours and lobe_regions.
double zero_snap(const MelnikovField& field);

/// Linear interpolation along cell edges. Ambiguous saddle cells are split
/// by the sign of the cell-centre average. A vertex is transverse when
/// |∂M/∂p| + |∂M/∂α|, interpolated along its edge, exceeds grad_threshold
/// and its cell does not hold a crossing of zero curves: a saddle cell, or a
/// corner whose eight neighbours change sign four or more times.
/// Edge points around a crossing collapse into one non-transverse junction
/// vertex, and polylines continue through it along the straightest pairing,
/// so two crossing zero curves come out as two polylines.
ContourSet zero_contours(const MelnikovField& field, double grad_threshold);

/// Moves each vertex to a root of M along its cell edge by Illinois
/// iterations on fresh evaluations, keeping the edge bracket. Vertices on
/// snapped-zero nodes stay where they are. Junctions move to the nearby
/// stationary point of M by Newton steps, or stay if that leaves their cell.
void refine_contours(ContourSet& contours, const MelnikovField& field,
                     const std::function<double(double p, double alpha)>& M, double tol = 1e-13, int max_iter = 60);

struct LobeReport {
  std::size_t id = 0;
  int sign = 0;
  /// Grid nodes (i, j) of the region.
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  /// Region nodes with a 4-neighbour outside the region.
  std::vector<std::pair<std::size_t, std::size_t>> boundary_cells;
  std::vector<std::size_t> boundary_contours;
  double volume_leading = 0.0;
  double volume_error_estimate = 0.0;
  /// ∬_R |M| dp dα, filled by lobe_volume.
  double abs_integral = 0.0;
  double t = 0.0;
  double eps = 0.0;
  /// Touches the first or last p row, so the lobe may extend past the grid.
  bool unbounded = false;
};

/// Connected sign-definite node sets (4-neighbour, α-periodic). Nodes with
/// |M| ≤ zero_snap are left out and separate regions.
std::vector<LobeReport> lobe_regions(const MelnikovField& field, const ContourSet& contours);

/// ε ∬_R |M| dp dα with each cell split into two triangles and clipped by the
/// zero line of the linear interpolant. The error estimate is a third of the
/// change against the grid coarsened by two in each direction. Throws
/// DomainError for unbounded regions.
LobeReport lobe_volume(const MelnikovField& field, const LobeReport& region, double eps);

/// ∬ of the positive part of sign·M over the whole grid, clipped the same way.
double signed_part_integral(const MelnikovField& field, int sign);

}  // namespace melnikov3d
