#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpinn/rng.hpp"

namespace rpinn {

using Vec2 = std::array<double, 2>;

struct RectDomain {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};

  void validate() const {
    if (!(lo[0] < hi[0] && lo[1] < hi[1]))
      throw std::invalid_argument("domain lo must be strictly below hi");
  }
  double width() const { return hi[0] - lo[0]; }
  double height() const { return hi[1] - lo[1]; }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p) const {
    return p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
  }
  Vec2 map_unit(const Vec2& u) const {
    return {lo[0] + u[0] * width(), lo[1] + u[1] * height()};
  }
};

// Structured triangulation of a rectangle: nx-by-ny cells, each split along
// the lower-left to upper-right diagonal into a lower and an upper triangle.
// Vertices are row-major bottom-to-top; cell (i,j) produces triangle
// 2*(j*nx+i) (lower) and 2*(j*nx+i)+1 (upper).
class TriMesh {
 public:
  TriMesh(const RectDomain& domain, int nx, int ny);

  const RectDomain& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  double area(int t) const { return areas_[t]; }
  const Vec2& barycenter(int t) const { return barycenters_[t]; }
  std::span<const int> patch(int v) const {
    return {patch_data_.data() + patch_off_[v],
            patch_data_.data() + patch_off_[v + 1]};
  }

  int vertex_index(int i, int j) const { return j * (nx_ + 1) + i; }

  // triangle containing x (lower-index triangle on shared edges/vertices)
  int locate(const Vec2& x) const;

  // barycentric coordinates of x in triangle t (may be slightly outside [0,1]
  // when x sits on an edge of a neighboring triangle)
  std::array<double, 3> barycentric(int t, const Vec2& x) const;

  Vec2 sample_in_triangle(int t, Rng& rng) const;

  void dump_csv(const std::string& vertex_path,
                const std::string& triangle_path) const;

 private:
  RectDomain domain_;
  int nx_, ny_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<double> areas_;
  std::vector<Vec2> barycenters_;
  std::vector<int> patch_off_, patch_data_;
};

struct NodalScalarField {
  std::vector<double> values;
};
struct NodalVectorField {
  std::vector<Vec2> values;
};
struct ElementConstVectorField {
  std::vector<Vec2> values;
};

NodalScalarField interpolate_nodal(const TriMesh& mesh,
                                   const std::function<double(Vec2)>& f);

// exact gradient of the piecewise-linear interpolant, one constant per triangle
ElementConstVectorField element_gradients(const TriMesh& mesh,
                                          const NodalScalarField& u);

double interpolate_linear(const TriMesh& mesh, const NodalScalarField& f,
                          const Vec2& x);
Vec2 interpolate_linear(const TriMesh& mesh, const NodalVectorField& f,
                        const Vec2& x);

}  // namespace rpinn
