#pragma once

#include <string>
#include <vector>

#include "rpinn/mesh.hpp"

namespace rpinn {

enum class RecoveryMethod {
  WeightedAveraging,  // default: area-weighted patch average of gradients
  LocalL2Projection,  // continuous L2-best linear fit over the patch
  LeastSquaresFit,    // discrete fit through patch barycenter values
};

RecoveryMethod recovery_method_from_string(const std::string& s);
std::string to_string(RecoveryMethod m);

// Per-triangle nonnegative error indicator.
struct ErrorIndicator {
  std::vector<double> eta;

  double total_squared() const {
    double s = 0.0;
    for (double e : eta) s += e * e;
    return s;
  }
};

// Recovered nodal gradient field. Vertices whose local fit system is singular
// (small boundary patches) silently use the weighted average instead; the
// count of such vertices is reported through fallback_count when non-null.
NodalVectorField recover_gradient(const TriMesh& mesh, const NodalScalarField& u,
                                  RecoveryMethod method,
                                  int* fallback_count = nullptr);

// Element-wise L2 distance between the interpolant's piecewise-constant
// gradient and the linearly interpolated recovered gradient. The integrand is
// quadratic per triangle, so the 3-point edge-midpoint rule used here is exact.
ErrorIndicator estimate(const TriMesh& mesh, const NodalScalarField& u,
                        RecoveryMethod method, int* fallback_count = nullptr);

void dump_indicator_csv(const std::string& path, const ErrorIndicator& ind);

}  // namespace rpinn
