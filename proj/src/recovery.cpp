#include "rpinn/recovery.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rpinn {
namespace {

// 3x3 symmetric solve, partial pivoting; false when numerically singular
bool solve3(double m[3][3], double rhs[3][2]) {
  double scale = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(m[r][c]));
  if (scale == 0.0) return false;
  int perm[3] = {0, 1, 2};
  for (int k = 0; k < 3; ++k) {
    int piv = k;
    for (int r = k + 1; r < 3; ++r)
      if (std::abs(m[perm[r]][k]) > std::abs(m[perm[piv]][k])) piv = r;
    std::swap(perm[k], perm[piv]);
    const double p = m[perm[k]][k];
    if (std::abs(p) < 1e-12 * scale) return false;
    for (int r = k + 1; r < 3; ++r) {
      const double f = m[perm[r]][k] / p;
      for (int c = k; c < 3; ++c) m[perm[r]][c] -= f * m[perm[k]][c];
      rhs[perm[r]][0] -= f * rhs[perm[k]][0];
      rhs[perm[r]][1] -= f * rhs[perm[k]][1];
    }
  }
  double sol[3][2];
  for (int k = 2; k >= 0; --k) {
    for (int c = 0; c < 2; ++c) {
      double s = rhs[perm[k]][c];
      for (int j = k + 1; j < 3; ++j) s -= m[perm[k]][j] * sol[j][c];
      sol[k][c] = s / m[perm[k]][k];
    }
  }
  for (int k = 0; k < 3; ++k) {
    rhs[k][0] = sol[k][0];
    rhs[k][1] = sol[k][1];
  }
  return true;
}

Vec2 weighted_average(const TriMesh& mesh, const ElementConstVectorField& g,
                      int v) {
  double ax = 0.0, ay = 0.0, total = 0.0;
  for (int t : mesh.patch(v)) {
    const double a = mesh.area(t);
    ax += a * g.values[t][0];
    ay += a * g.values[t][1];
    total += a;
  }
  return {ax / total, ay / total};
}

// continuous L2-best linear fit of the piecewise-constant g over the patch,
// in coordinates centered at the vertex; returns the fit value at the vertex
bool l2_projection(const TriMesh& mesh, const ElementConstVectorField& g, int v,
                   Vec2& out) {
  const Vec2& z = mesh.vertex(v);
  double m[3][3] = {};
  double rhs[3][2] = {};
  for (int t : mesh.patch(v)) {
    const auto& tri = mesh.triangle(t);
    const double a = mesh.area(t);
    // edge midpoints (exact for the quadratic products of linear basis fns)
    Vec2 mid[3];
    for (int e = 0; e < 3; ++e) {
      const Vec2 &p = mesh.vertex(tri[e]), &q = mesh.vertex(tri[(e + 1) % 3]);
      mid[e] = {0.5 * (p[0] + q[0]) - z[0], 0.5 * (p[1] + q[1]) - z[1]};
    }
    const double w = a / 3.0;
    for (const Vec2& mp : mid) {
      const double phi[3] = {1.0, mp[0], mp[1]};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] += w * phi[r] * phi[c];
    }
    // right-hand side: centroid rule, exact for linear basis times constant g
    const Vec2& bc = mesh.barycenter(t);
    const double phi_c[3] = {1.0, bc[0] - z[0], bc[1] - z[1]};
    for (int r = 0; r < 3; ++r) {
      rhs[r][0] += a * phi_c[r] * g.values[t][0];
      rhs[r][1] += a * phi_c[r] * g.values[t][1];
    }
  }
  if (!solve3(m, rhs)) return false;
  out = {rhs[0][0], rhs[0][1]};
  return true;
}

// discrete least-squares linear fit through the patch barycenter values
bool least_squares(const TriMesh& mesh, const ElementConstVectorField& g, int v,
                   Vec2& out) {
  const Vec2& z = mesh.vertex(v);
  double m[3][3] = {};
  double rhs[3][2] = {};
  for (int t : mesh.patch(v)) {
    const Vec2& bc = mesh.barycenter(t);
    const double phi[3] = {1.0, bc[0] - z[0], bc[1] - z[1]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += phi[r] * phi[c];
      rhs[r][0] += phi[r] * g.values[t][0];
      rhs[r][1] += phi[r] * g.values[t][1];
    }
  }
  if (!solve3(m, rhs)) return false;
  out = {rhs[0][0], rhs[0][1]};
  return true;
}

}  // namespace

RecoveryMethod recovery_method_from_string(const std::string& s) {
  if (s == "weighted-averaging") return RecoveryMethod::WeightedAveraging;
  if (s == "l2-projection") return RecoveryMethod::LocalL2Projection;
  if (s == "least-squares") return RecoveryMethod::LeastSquaresFit;
  throw std::invalid_argument("unknown recovery method: " + s);
}

std::string to_string(RecoveryMethod m) {
  switch (m) {
    case RecoveryMethod::WeightedAveraging: return "weighted-averaging";
    case RecoveryMethod::LocalL2Projection: return "l2-projection";
    case RecoveryMethod::LeastSquaresFit: return "least-squares";
  }
  throw std::logic_error("invalid recovery method");
}

NodalVectorField recover_gradient(const TriMesh& mesh, const NodalScalarField& u,
                                  RecoveryMethod method, int* fallback_count) {
  const ElementConstVectorField g = element_gradients(mesh, u);
  NodalVectorField out;
  out.values.resize(mesh.n_vertices());
  int fallbacks = 0;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    bool ok = false;
    Vec2 rec{0.0, 0.0};
    switch (method) {
      case RecoveryMethod::WeightedAveraging: break;
      case RecoveryMethod::LocalL2Projection: ok = l2_projection(mesh, g, v, rec); break;
      case RecoveryMethod::LeastSquaresFit: ok = least_squares(mesh, g, v, rec); break;
    }
    if (!ok) {
      rec = weighted_average(mesh, g, v);
      if (method != RecoveryMethod::WeightedAveraging) ++fallbacks;
    }
    out.values[v] = rec;
  }
  if (fallback_count) *fallback_count = fallbacks;
  return out;
}

ErrorIndicator estimate(const TriMesh& mesh, const NodalScalarField& u,
                        RecoveryMethod method, int* fallback_count) {
  const ElementConstVectorField g = element_gradients(mesh, u);
  const NodalVectorField rec = recover_gradient(mesh, u, method, fallback_count);
  ErrorIndicator ind;
  ind.eta.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    double acc = 0.0;
    for (int e = 0; e < 3; ++e) {
      const Vec2 &ga = rec.values[tri[e]], &gb = rec.values[tri[(e + 1) % 3]];
      const double dx = g.values[t][0] - 0.5 * (ga[0] + gb[0]);
      const double dy = g.values[t][1] - 0.5 * (ga[1] + gb[1]);
      acc += dx * dx + dy * dy;
    }
    ind.eta[t] = std::sqrt(mesh.area(t) / 3.0 * acc);
  }
  return ind;
}

void dump_indicator_csv(const std::string& path, const ErrorIndicator& ind) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "triangle_id,eta\n";
  char buf[64];
  for (std::size_t t = 0; t < ind.eta.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", t, ind.eta[t]);
    out << buf;
  }
}

}  // namespace rpinn
