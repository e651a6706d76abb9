#include "rpinn/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rpinn {

TriMesh::TriMesh(const RectDomain& domain, int nx, int ny)
    : domain_(domain), nx_(nx), ny_(ny) {
  domain.validate();
  if (nx < 1 || ny < 1) throw std::invalid_argument("cell counts must be >= 1");

  vertices_.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices_.push_back({domain.lo[0] + domain.width() * i / nx,
                           domain.lo[1] + domain.height() * j / ny});

  triangles_.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = vertex_index(i, j), b = vertex_index(i + 1, j);
      const int c = vertex_index(i + 1, j + 1), d = vertex_index(i, j + 1);
      triangles_.push_back({a, b, c});  // below the a-c diagonal
      triangles_.push_back({a, c, d});  // above it
    }

  areas_.reserve(triangles_.size());
  barycenters_.reserve(triangles_.size());
  for (const auto& t : triangles_) {
    const Vec2 &p0 = vertices_[t[0]], &p1 = vertices_[t[1]], &p2 = vertices_[t[2]];
    const double cross = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                         (p2[0] - p0[0]) * (p1[1] - p0[1]);
    areas_.push_back(0.5 * cross);
    barycenters_.push_back(
        {(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0});
  }

  // per-vertex incident triangles, CSR, ascending triangle index
  std::vector<int> counts(vertices_.size(), 0);
  for (const auto& t : triangles_)
    for (int v : t) ++counts[v];
  patch_off_.assign(vertices_.size() + 1, 0);
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    patch_off_[v + 1] = patch_off_[v] + counts[v];
  patch_data_.resize(patch_off_.back());
  std::vector<int> cursor(patch_off_.begin(), patch_off_.end() - 1);
  for (int ti = 0; ti < n_triangles(); ++ti)
    for (int v : triangles_[ti]) patch_data_[cursor[v]++] = ti;
}

int TriMesh::locate(const Vec2& x) const {
  if (!domain_.contains(x))
    throw std::out_of_range("point outside mesh domain");
  const double hx = domain_.width() / nx_, hy = domain_.height() / ny_;
  int i = static_cast<int>(std::floor((x[0] - domain_.lo[0]) / hx));
  int j = static_cast<int>(std::floor((x[1] - domain_.lo[1]) / hy));
  i = std::min(std::max(i, 0), nx_ - 1);
  j = std::min(std::max(j, 0), ny_ - 1);
  // points exactly on an interior grid line belong to the lower-index cell
  if (i > 0 && x[0] == domain_.lo[0] + domain_.width() * i / nx_) --i;
  if (j > 0 && x[1] == domain_.lo[1] + domain_.height() * j / ny_) --j;
  const double s = (x[0] - (domain_.lo[0] + domain_.width() * i / nx_)) / hx;
  const double t = (x[1] - (domain_.lo[1] + domain_.height() * j / ny_)) / hy;
  const int cell = 2 * (j * nx_ + i);
  return (t <= s) ? cell : cell + 1;  // diagonal ties go to the lower index
}

std::array<double, 3> TriMesh::barycentric(int t, const Vec2& x) const {
  const auto& tri = triangles_[t];
  const Vec2 &p0 = vertices_[tri[0]], &p1 = vertices_[tri[1]],
             &p2 = vertices_[tri[2]];
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                     (p2[0] - p0[0]) * (p1[1] - p0[1]);
  const double l1 = ((x[0] - p0[0]) * (p2[1] - p0[1]) -
                     (p2[0] - p0[0]) * (x[1] - p0[1])) /
                    det;
  const double l2 = ((p1[0] - p0[0]) * (x[1] - p0[1]) -
                     (x[0] - p0[0]) * (p1[1] - p0[1])) /
                    det;
  return {1.0 - l1 - l2, l1, l2};
}

Vec2 TriMesh::sample_in_triangle(int t, Rng& rng) const {
  double u = rng.uniform01();
  double v = rng.uniform01();
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  const auto& tri = triangles_[t];
  const Vec2 &p0 = vertices_[tri[0]], &p1 = vertices_[tri[1]],
             &p2 = vertices_[tri[2]];
  return {p0[0] + u * (p1[0] - p0[0]) + v * (p2[0] - p0[0]),
          p0[1] + u * (p1[1] - p0[1]) + v * (p2[1] - p0[1])};
}

void TriMesh::dump_csv(const std::string& vertex_path,
                       const std::string& triangle_path) const {
  std::ofstream vf(vertex_path);
  if (!vf) throw std::runtime_error("cannot write " + vertex_path);
  vf << "id,x,y\n";
  char buf[80];
  for (int v = 0; v < n_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", v, vertices_[v][0],
                  vertices_[v][1]);
    vf << buf;
  }
  std::ofstream tf(triangle_path);
  if (!tf) throw std::runtime_error("cannot write " + triangle_path);
  tf << "id,v0,v1,v2\n";
  for (int t = 0; t < n_triangles(); ++t)
    tf << t << ',' << triangles_[t][0] << ',' << triangles_[t][1] << ','
       << triangles_[t][2] << '\n';
}

NodalScalarField interpolate_nodal(const TriMesh& mesh,
                                   const std::function<double(Vec2)>& f) {
  NodalScalarField out;
  out.values.resize(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const double val = f(mesh.vertex(v));
    if (!std::isfinite(val))
      throw std::runtime_error("non-finite field value at vertex " +
                               std::to_string(v));
    out.values[v] = val;
  }
  return out;
}

ElementConstVectorField element_gradients(const TriMesh& mesh,
                                          const NodalScalarField& u) {
  if (static_cast<int>(u.values.size()) != mesh.n_vertices())
    throw std::invalid_argument("field size does not match mesh");
  ElementConstVectorField out;
  out.values.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Vec2 &p0 = mesh.vertex(tri[0]), &p1 = mesh.vertex(tri[1]),
               &p2 = mesh.vertex(tri[2]);
    const double du1 = u.values[tri[1]] - u.values[tri[0]];
    const double du2 = u.values[tri[2]] - u.values[tri[0]];
    const double e1x = p1[0] - p0[0], e1y = p1[1] - p0[1];
    const double e2x = p2[0] - p0[0], e2y = p2[1] - p0[1];
    const double inv_det = 1.0 / (2.0 * mesh.area(t));
    out.values[t] = {(du1 * e2y - du2 * e1y) * inv_det,
                     (du2 * e1x - du1 * e2x) * inv_det};
  }
  return out;
}

double interpolate_linear(const TriMesh& mesh, const NodalScalarField& f,
                          const Vec2& x) {
  const int t = mesh.locate(x);
  const auto l = mesh.barycentric(t, x);
  const auto& tri = mesh.triangle(t);
  return l[0] * f.values[tri[0]] + l[1] * f.values[tri[1]] +
         l[2] * f.values[tri[2]];
}

Vec2 interpolate_linear(const TriMesh& mesh, const NodalVectorField& f,
                        const Vec2& x) {
  const int t = mesh.locate(x);
  const auto l = mesh.barycentric(t, x);
  const auto& tri = mesh.triangle(t);
  Vec2 out{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    out[0] += l[k] * f.values[tri[k]][0];
    out[1] += l[k] * f.values[tri[k]][1];
  }
  return out;
}

}  // namespace rpinn
