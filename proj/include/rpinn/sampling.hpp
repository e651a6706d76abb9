#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rpinn/mesh.hpp"
#include "rpinn/recovery.hpp"
#include "rpinn/rng.hpp"

namespace rpinn {

// Collocation points for one training round. `background` is drawn once;
// `adaptive` is wholly replaced at every adaptive iteration; `boundary`
// entries carry the id of the constraint that applies at the point.
struct CollocationSet {
  std::vector<Vec2> background;
  std::vector<Vec2> adaptive;
  std::vector<std::pair<Vec2, int>> boundary;
};

// 2-D Sobol points in [0,1)^2, standard direction numbers, Gray-code order.
// `skip` drops the first entries of the sequence (default 1 drops the origin).
std::vector<Vec2> sobol_2d(int n, int skip = 1);

std::vector<Vec2> uniform_random_2d(const RectDomain& domain, int n, Rng& rng);

// n*m points at the nodes of an inclusive uniform grid over the domain
std::vector<Vec2> grid_2d(const RectDomain& domain, int nx, int ny);

// ---------------------------------------------------------------------------
// Indicator-driven allocation of adaptive points.

struct RecadConfig {
  int n_adaptive = 100;   // points to distribute per adaptive round
  double epsilon = 0.02;  // shrink factor for the nested top-error subsets
};

struct RecadResult {
  std::vector<int> counts;  // per-element allocation, sums to n_adaptive
  std::vector<Vec2> points;
};

// Repeatedly narrow to the top floor(epsilon * m) elements by indicator value
// and hand each a floor-proportional share of the remaining budget; once the
// subset would shrink below 1/epsilon elements, the leftover budget goes to
// the single worst element. Points are then drawn uniformly inside each
// element. Requires epsilon in (1/n_elements, 1) and a nonzero indicator sum.
RecadResult recad(const ErrorIndicator& etas, const TriMesh& mesh,
                  const RecadConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Baseline resampler: probability proportional to |value| per probe cell.

struct ProbeGrid {
  RectDomain domain;
  int nx = 0, ny = 0;          // cells per axis; values live at cell centers
  std::vector<double> values;  // row-major, index j*nx + i

  Vec2 cell_center(int i, int j) const;
};

std::vector<Vec2> residual_pdf_sample(const ProbeGrid& probe, int n, Rng& rng);

// ---------------------------------------------------------------------------
// Boundary/initial-condition points.

struct BoundarySegment {
  Vec2 a, b;                       // straight segment endpoints
  std::vector<int> constraint_ids; // every constraint enforced on the segment
};

// n geometric points split across segments proportionally to length (largest
// remainder; ties to the earlier segment), equispaced at midpoint offsets
// within each segment. A point on a segment with k constraint ids yields k
// (point, id) pairs.
std::vector<std::pair<Vec2, int>> boundary_points(
    std::span<const BoundarySegment> segments, int n);

void dump_points_csv(const std::string& path, const CollocationSet& points,
                     int iteration, bool append);

}  // namespace rpinn
