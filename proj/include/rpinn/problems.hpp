#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rpinn/dual.hpp"
#include "rpinn/jet.hpp"
#include "rpinn/mesh.hpp"
#include "rpinn/sampling.hpp"

namespace rpinn {

using Jet2 = Jet<double, 2>;
using DualJet2 = Jet<Dual, 2>;

// One boundary or initial condition. `op` evaluates the constraint defect
// (zero when the condition holds) from the solution jet at a point on an
// attached segment. The dual form additionally exposes the defect's
// sensitivities to the six jet components (lanes 0..5) and to trainable PDE
// parameters (lanes 6..).
struct ConstraintOp {
  std::string name;
  std::function<double(const Jet2&, const Vec2&)> op;
  std::function<Dual(const DualJet2&, const Vec2&)> op_dual;
};

// A PDE posed on an axis-aligned rectangle: a strong-form residual over a
// second-order jet of the candidate solution, the boundary/initial
// conditions with the segments they act on, and the exact (or reference)
// solution used for error metrics.
struct PdeProblem {
  std::string name;
  RectDomain domain;

  // initial values of trainable PDE parameters; empty for forward problems
  std::vector<double> lambda_init;

  // Strong-form residual on a jet of the candidate solution. Throws
  // std::domain_error when x lies outside `domain`. The dual form carries
  // sensitivities to (u, u_x, u_y, u_xx, u_xy, u_yy) in lanes 0..5 and to
  // the trainable parameters in lanes 6.. of its derivative block.
  std::function<double(const Jet2&, const Vec2&, std::span<const double>)> residual;
  std::function<Dual(const DualJet2&, const Vec2&, std::span<const Dual>)>
      residual_dual;

  std::vector<BoundarySegment> segments;  // edges that carry conditions
  std::vector<ConstraintOp> constraints;  // indexed by constraint id

  // Reference solution for metrics: a closed form where one exists, else an
  // interpolant of a precomputed dense table. exact_jet (value, gradient,
  // Hessian of the closed form) is null for table-backed problems.
  std::function<double(const Vec2&)> exact;
  std::function<Jet2(const Vec2&)> exact_jet;

  int n_lambda() const { return static_cast<int>(lambda_init.size()); }
};

// Seed a plain jet into the dual-lane convention used by residual_dual and
// op_dual: lanes 0..5 = (u, u_x, u_y, u_xx, u_xy, u_yy).
inline DualJet2 seeded_dual_jet(const Jet2& j) {
  DualJet2 d;
  d.v = Dual::seeded(j.v, 0);
  d.g[0] = Dual::seeded(j.g[0], 1);
  d.g[1] = Dual::seeded(j.g[1], 2);
  d.h[0] = Dual::seeded(j.h[0], 3);
  d.h[1] = Dual::seeded(j.h[1], 4);
  d.h[2] = Dual::seeded(j.h[2], 5);
  return d;
}

// Seed trainable PDE parameters into lanes 6.. of the dual block.
inline std::vector<Dual> seeded_dual_params(std::span<const double> lam) {
  if (static_cast<int>(lam.size()) > Dual::kLanes - 6)
    throw std::invalid_argument("too many trainable PDE parameters");
  std::vector<Dual> out(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i)
    out[i] = Dual::seeded(lam[i], 6 + static_cast<int>(i));
  return out;
}

// Poisson equation -Δu = f on [0,1]^2 whose solution is a single sharp
// Gaussian peak at the domain center; Dirichlet data from the exact solution.
PdeProblem poisson_peak();

// Viscous Burgers equation u_t + u u_x = (0.001/π) u_xx on (x,t) in
// [-1,1]x[0,1] with u(x,0) = -sin(πx) and u(±1,t) = 0; metrics against a
// dense precomputed reference table loaded from `reference_csv`.
PdeProblem burgers(const std::string& reference_csv = "data/burgers_reference.csv");

// Convection-diffusion-type equation -∇·[u∇(x²+y²)] + Δu = f on [-1,1]^2
// whose solution is a pair of sharp Gaussian peaks at (±0.5, ±0.5).
PdeProblem two_peaks();

// Wave equation u_tt - 3 u_xx = 0 on (t,x) in [0,6]x[-5,5] with sech-pulse
// initial data, zero initial velocity, and homogeneous Dirichlet walls; the
// exact solution is the corresponding d'Alembert traveling-wave form.
PdeProblem wave();

// Diffusion-coefficient identification variant of the Poisson problem:
// residual -λ Δu - f with one trainable parameter λ (true value 2), used to
// exercise inverse-problem training end to end.
PdeProblem toy_inverse_poisson();

std::vector<std::string> problem_names();

// Factory by name; `data_dir` locates reference tables for table-backed
// problems. Throws std::invalid_argument for unknown names.
PdeProblem make_problem(const std::string& name,
                        const std::string& data_dir = "data");

// Dense space-time table for the viscous Burgers benchmark, bilinearly
// interpolated (clamped at the edges) for metric evaluation.
struct BurgersReference {
  int nx = 0, nt = 0;
  double xmin = 0, xmax = 0, tmin = 0, tmax = 0;
  std::vector<double> u;  // row-major: u[j*nx + i] = u(x_i, t_j)

  double sample(double x, double t) const;
};

BurgersReference load_burgers_reference(const std::string& csv_path);

}  // namespace rpinn
