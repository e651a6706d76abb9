#include "rpinn/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rpinn {

std::vector<Vec2> sobol_2d(int n, int skip) {
  if (n < 0 || skip < 0) throw std::invalid_argument("sobol: negative count");
  constexpr int kBits = 52;  // dyadic rationals exactly representable
  // direction integers: dimension 0 is the van der Corput sequence;
  // dimension 1 uses the degree-1 primitive polynomial with seed m_1 = 1,
  // recurrence m_k = 2*m_{k-1} xor m_{k-1}
  std::uint64_t v0[kBits], v1[kBits];
  std::uint64_t m = 1;
  for (int k = 0; k < kBits; ++k) {
    v0[k] = 1ull << (kBits - 1 - k);
    v1[k] = m << (kBits - 1 - k);
    m = (2 * m) ^ m;
  }
  std::vector<Vec2> out;
  out.reserve(n);
  std::uint64_t x0 = 0, x1 = 0;
  constexpr double scale = 1.0 / 4503599627370496.0;  // 2^-52
  for (long long idx = 0; idx < static_cast<long long>(n) + skip; ++idx) {
    if (idx >= skip) out.push_back({x0 * scale, x1 * scale});
    const int c = std::countr_one(static_cast<std::uint64_t>(idx));
    x0 ^= v0[c];
    x1 ^= v1[c];
  }
  return out;
}

std::vector<Vec2> uniform_random_2d(const RectDomain& domain, int n, Rng& rng) {
  std::vector<Vec2> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    const double v = rng.uniform01();
    out.push_back(domain.map_unit({u, v}));
  }
  return out;
}

std::vector<Vec2> grid_2d(const RectDomain& domain, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs >= 2 nodes per axis");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      out.push_back({domain.lo[0] + domain.width() * i / (nx - 1),
                     domain.lo[1] + domain.height() * j / (ny - 1)});
  return out;
}

RecadResult recad(const ErrorIndicator& etas, const TriMesh& mesh,
                  const RecadConfig& cfg, Rng& rng) {
  const int ne = mesh.n_triangles();
  if (static_cast<int>(etas.eta.size()) != ne)
    throw std::invalid_argument("indicator size does not match mesh");
  if (!(cfg.epsilon > 1.0 / ne && cfg.epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (1/n_elements, 1)");
  if (cfg.n_adaptive < 0) throw std::invalid_argument("negative point budget");
  double total = 0.0;
  for (double e : etas.eta) {
    if (!(e >= 0.0) || !std::isfinite(e))
      throw std::invalid_argument("indicator entries must be finite and >= 0");
    total += e;
  }
  if (total == 0.0) throw std::runtime_error("no error signal");

  RecadResult res;
  res.counts.assign(ne, 0);
  if (cfg.n_adaptive > 0) {
    std::vector<int> order(ne);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return etas.eta[a] > etas.eta[b];
    });

    int remaining = cfg.n_adaptive;
    int m_prev = ne;
    while (remaining > 0) {
      const int mk = static_cast<int>(std::floor(cfg.epsilon * m_prev));
      if (mk < 1.0 / cfg.epsilon) {
        res.counts[order[0]] += remaining;  // dump on the worst element
        remaining = 0;
        break;
      }
      double subset_sum = 0.0;
      for (int i = 0; i < mk; ++i) subset_sum += etas.eta[order[i]];
      const int budget = remaining;
      for (int i = 0; i < mk; ++i) {
        const int share = static_cast<int>(
            std::floor(budget * etas.eta[order[i]] / subset_sum));
        res.counts[order[i]] += share;
        remaining -= share;
      }
      m_prev = mk;
    }
  }

  res.points.reserve(cfg.n_adaptive);
  for (int t = 0; t < ne; ++t)
    for (int k = 0; k < res.counts[t]; ++k)
      res.points.push_back(mesh.sample_in_triangle(t, rng));
  return res;
}

Vec2 ProbeGrid::cell_center(int i, int j) const {
  return {domain.lo[0] + domain.width() * (i + 0.5) / nx,
          domain.lo[1] + domain.height() * (j + 0.5) / ny};
}

std::vector<Vec2> residual_pdf_sample(const ProbeGrid& probe, int n, Rng& rng) {
  if (probe.nx < 1 || probe.ny < 1 ||
      probe.values.size() != static_cast<std::size_t>(probe.nx) * probe.ny)
    throw std::invalid_argument("malformed probe grid");
  std::vector<double> cdf(probe.values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probe.values.size(); ++i) {
    acc += std::abs(probe.values[i]);
    cdf[i] = acc;
  }
  std::vector<Vec2> out;
  out.reserve(n);
  const double cw = probe.domain.width() / probe.nx;
  const double ch = probe.domain.height() / probe.ny;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    const double ux = rng.uniform01();
    const double uy = rng.uniform01();
    if (acc == 0.0) {  // flat signal: plain uniform sampling
      out.push_back(probe.domain.map_unit({ux, uy}));
      continue;
    }
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * acc);
    const int cell = static_cast<int>(std::min(
        static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
    const int i = cell % probe.nx, j = cell / probe.nx;
    out.push_back({probe.domain.lo[0] + (i + ux) * cw,
                   probe.domain.lo[1] + (j + uy) * ch});
  }
  return out;
}

std::vector<std::pair<Vec2, int>> boundary_points(
    std::span<const BoundarySegment> segments, int n) {
  if (n < 1) throw std::invalid_argument("need at least one boundary point");
  if (segments.empty()) return {};
  const std::size_t ns = segments.size();
  std::vector<double> len(ns);
  double total = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    len[s] = std::hypot(segments[s].b[0] - segments[s].a[0],
                        segments[s].b[1] - segments[s].a[1]);
    total += len[s];
  }
  // largest-remainder apportionment, ties to the earlier segment
  std::vector<int> alloc(ns);
  std::vector<std::pair<double, std::size_t>> rem(ns);
  int assigned = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    const double share = n * len[s] / total;
    alloc[s] = static_cast<int>(std::floor(share));
    assigned += alloc[s];
    rem[s] = {share - alloc[s], s};
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) ++alloc[rem[k].second];

  std::vector<std::pair<Vec2, int>> out;
  for (std::size_t s = 0; s < ns; ++s) {
    for (int k = 0; k < alloc[s]; ++k) {
      const double t = (k + 0.5) / alloc[s];
      const Vec2 p = {segments[s].a[0] + t * (segments[s].b[0] - segments[s].a[0]),
                      segments[s].a[1] + t * (segments[s].b[1] - segments[s].a[1])};
      for (int id : segments[s].constraint_ids) out.emplace_back(p, id);
    }
  }
  return out;
}

void dump_points_csv(const std::string& path, const CollocationSet& points,
                     int iteration, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!append) out << "iteration,role,x,y\n";
  char buf[96];
  auto write = [&](const char* role, const Vec2& p) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g\n", iteration, role, p[0],
                  p[1]);
    out << buf;
  };
  for (const auto& p : points.background) write("background", p);
  for (const auto& p : points.adaptive) write("adaptive", p);
  for (const auto& [p, id] : points.boundary) write("boundary", p);
}

}  // namespace rpinn
