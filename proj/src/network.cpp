#include "rpinn/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rpinn/rng.hpp"

namespace rpinn {
namespace {

// Dot product with four independent accumulators: breaks the FMA dependency
// chain (and lets the compiler vectorize) while keeping a fixed, deterministic
// summation order.
inline double dot(int n, const double* __restrict a, const double* __restrict b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(int n, double alpha, const double* __restrict v,
                 double* __restrict out) {
  for (int i = 0; i < n; ++i) out[i] += alpha * v[i];
}

}  // namespace

ParamVector init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector p(spec.param_count(), 0.0);
  Rng rng(seed);
  for (int l = 0; l < spec.n_linear(); ++l) {
    const int fan_in = spec.layer_in(l), fan_out = spec.layer_out(l);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c)
        p[spec.weight_index(l, r, c)] = rng.uniform(-bound, bound);
  }
  return p;
}

double forward(const MlpSpec& spec, std::span<const double> params,
               std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.input_dim)
    throw std::invalid_argument("input dimension mismatch");
  std::array<std::vector<double>, 2> buf;
  buf[0].assign(x.begin(), x.end());
  const double* P = params.data();
  int cur = 0;
  for (int l = 0; l < spec.n_linear(); ++l) {
    const int n = spec.layer_in(l), m = spec.layer_out(l);
    const double* W = P + spec.layer_offset(l);
    const double* b = W + m * n;
    auto& out = buf[1 - cur];
    out.resize(m);
    for (int p = 0; p < m; ++p) {
      const double z = b[p] + dot(n, W + p * n, buf[cur].data());
      out[p] = (l == spec.hidden_layers) ? z : std::tanh(z);
    }
    cur = 1 - cur;
  }
  return buf[cur][0];
}

void JetWorkspace::prepare(const MlpSpec& spec) {
  if (spec == spec_cache && !layers.empty()) return;
  spec.validate();
  layers.assign(spec.hidden_layers, Layer{});
  for (int l = 0; l < spec.hidden_layers; ++l) {
    auto& ly = layers[l];
    const int m = spec.hidden_width;
    for (auto* v : {&ly.t, &ly.s, &ly.zj0, &ly.zj1, &ly.zh0, &ly.zh1, &ly.zh2,
                    &ly.aj0, &ly.aj1, &ly.ah0, &ly.ah1, &ly.ah2})
      v->assign(m, 0.0);
    for (auto& v : ly.bar) v.assign(m, 0.0);
    for (auto& v : ly.abar) v.assign(m, 0.0);
  }
  spec_cache = spec;
}

Jet2 forward_jet(const MlpSpec& spec, std::span<const double> params,
                 const std::array<double, 2>& x, JetWorkspace& ws) {
  ws.prepare(spec);
  ws.x = x;
  const double* P = params.data();
  const int L = spec.hidden_layers;
  const int width = spec.hidden_width;

  {  // first hidden layer: input jets are (x0; e0; 0) and (x1; e1; 0)
    auto& ly = ws.layers[0];
    const int n = spec.input_dim;  // == 2 for the fast path
    const double* W = P + spec.layer_offset(0);
    const double* b = W + width * n;
    for (int p = 0; p < width; ++p) {
      const double w0 = W[p * n + 0], w1 = W[p * n + 1];
      const double z = b[p] + w0 * x[0] + w1 * x[1];
      const double t = std::tanh(z), s = 1.0 - t * t;
      const double m2 = -2.0 * t * s;
      ly.t[p] = t;
      ly.s[p] = s;
      ly.zj0[p] = w0;
      ly.zj1[p] = w1;
      ly.zh0[p] = ly.zh1[p] = ly.zh2[p] = 0.0;
      ly.aj0[p] = s * w0;
      ly.aj1[p] = s * w1;
      ly.ah0[p] = m2 * w0 * w0;
      ly.ah1[p] = m2 * w0 * w1;
      ly.ah2[p] = m2 * w1 * w1;
    }
  }

  for (int l = 1; l < L; ++l) {
    const auto& pv = ws.layers[l - 1];
    auto& ly = ws.layers[l];
    const int n = width;
    const double* W = P + spec.layer_offset(l);
    const double* b = W + width * n;
    for (int p = 0; p < width; ++p) {
      const double* w = W + p * n;
      const double z = b[p] + dot(n, w, pv.t.data());
      const double zj0 = dot(n, w, pv.aj0.data());
      const double zj1 = dot(n, w, pv.aj1.data());
      const double zh0 = dot(n, w, pv.ah0.data());
      const double zh1 = dot(n, w, pv.ah1.data());
      const double zh2 = dot(n, w, pv.ah2.data());
      const double t = std::tanh(z), s = 1.0 - t * t;
      const double m2 = -2.0 * t * s;
      ly.t[p] = t;
      ly.s[p] = s;
      ly.zj0[p] = zj0;
      ly.zj1[p] = zj1;
      ly.zh0[p] = zh0;
      ly.zh1[p] = zh1;
      ly.zh2[p] = zh2;
      ly.aj0[p] = s * zj0;
      ly.aj1[p] = s * zj1;
      ly.ah0[p] = s * zh0 + m2 * zj0 * zj0;
      ly.ah1[p] = s * zh1 + m2 * zj0 * zj1;
      ly.ah2[p] = s * zh2 + m2 * zj1 * zj1;
    }
  }

  const auto& pv = ws.layers[L - 1];
  const double* W = P + spec.layer_offset(L);
  const double b = W[width];
  Jet2 out;
  out.v = b + dot(width, W, pv.t.data());
  out.g[0] = dot(width, W, pv.aj0.data());
  out.g[1] = dot(width, W, pv.aj1.data());
  out.h[0] = dot(width, W, pv.ah0.data());
  out.h[1] = dot(width, W, pv.ah1.data());
  out.h[2] = dot(width, W, pv.ah2.data());
  return out;
}

Jet2 forward_jet(const MlpSpec& spec, std::span<const double> params,
                 const std::array<double, 2>& x) {
  JetWorkspace ws;
  Jet2 j = forward_jet(spec, params, x, ws);
  if (!j.finite()) throw std::runtime_error("non-finite network jet");
  return j;
}

void backward_jet(const MlpSpec& spec, std::span<const double> params,
                  JetWorkspace& ws, const Jet2& seed, std::span<double> grad) {
  const double* P = params.data();
  double* G = grad.data();
  const int L = spec.hidden_layers;
  const int width = spec.hidden_width;

  {  // output layer: seed is the z-level adjoint of the single output neuron
    const auto& pv = ws.layers[L - 1];
    const double* W = P + spec.layer_offset(L);
    double* g = G + spec.layer_offset(L);
    const double c0 = seed.v, c1 = seed.g[0], c2 = seed.g[1];
    const double c3 = seed.h[0], c4 = seed.h[1], c5 = seed.h[2];
    for (int q = 0; q < width; ++q)
      g[q] += c0 * pv.t[q] + c1 * pv.aj0[q] + c2 * pv.aj1[q] + c3 * pv.ah0[q] +
              c4 * pv.ah1[q] + c5 * pv.ah2[q];
    g[width] += c0;  // bias
    auto& ab = ws.layers[L - 1].abar;
    for (int q = 0; q < width; ++q) {
      const double w = W[q];
      ab[0][q] = w * c0;
      ab[1][q] = w * c1;
      ab[2][q] = w * c2;
      ab[3][q] = w * c3;
      ab[4][q] = w * c4;
      ab[5][q] = w * c5;
    }
  }

  for (int l = L - 1; l >= 0; --l) {
    auto& ly = ws.layers[l];
    // activation backward: post-activation adjoints -> pre-activation adjoints
    for (int p = 0; p < width; ++p) {
      const double t = ly.t[p], s = ly.s[p];
      const double zj0 = ly.zj0[p], zj1 = ly.zj1[p];
      const double m2 = -2.0 * t * s;
      const double q3 = -2.0 * s * (1.0 - 3.0 * t * t);
      const double a0 = ly.abar[0][p], a1 = ly.abar[1][p], a2 = ly.abar[2][p];
      const double a3 = ly.abar[3][p], a4 = ly.abar[4][p], a5 = ly.abar[5][p];
      ly.bar[0][p] = s * a0 + m2 * (zj0 * a1 + zj1 * a2) +
                     (m2 * ly.zh0[p] + q3 * zj0 * zj0) * a3 +
                     (m2 * ly.zh1[p] + q3 * zj0 * zj1) * a4 +
                     (m2 * ly.zh2[p] + q3 * zj1 * zj1) * a5;
      ly.bar[1][p] = s * a1 + m2 * (2.0 * a3 * zj0 + a4 * zj1);
      ly.bar[2][p] = s * a2 + m2 * (a4 * zj0 + 2.0 * a5 * zj1);
      ly.bar[3][p] = s * a3;
      ly.bar[4][p] = s * a4;
      ly.bar[5][p] = s * a5;
    }

    const int n = spec.layer_in(l);
    const double* W = P + spec.layer_offset(l);
    double* g = G + spec.layer_offset(l);
    double* gb = g + width * n;
    if (l == 0) {
      // input jets: values x, unit first derivatives, zero second derivatives
      for (int p = 0; p < width; ++p) {
        g[p * n + 0] += ly.bar[0][p] * ws.x[0] + ly.bar[1][p];
        g[p * n + 1] += ly.bar[0][p] * ws.x[1] + ly.bar[2][p];
        gb[p] += ly.bar[0][p];
      }
    } else {
      const auto& pv = ws.layers[l - 1];
      const double* st[6] = {pv.t.data(),   pv.aj0.data(), pv.aj1.data(),
                             pv.ah0.data(), pv.ah1.data(), pv.ah2.data()};
      auto& ab = ws.layers[l - 1].abar;
      for (auto& v : ab) std::fill(v.begin(), v.end(), 0.0);
      for (int p = 0; p < width; ++p) {
        const double* w = W + p * n;
        double* gr = g + p * n;
        const double c0 = ly.bar[0][p], c1 = ly.bar[1][p], c2 = ly.bar[2][p];
        const double c3 = ly.bar[3][p], c4 = ly.bar[4][p], c5 = ly.bar[5][p];
        for (int q = 0; q < n; ++q)
          gr[q] += c0 * st[0][q] + c1 * st[1][q] + c2 * st[2][q] +
                   c3 * st[3][q] + c4 * st[4][q] + c5 * st[5][q];
        gb[p] += c0;
        axpy(n, c0, w, ab[0].data());
        axpy(n, c1, w, ab[1].data());
        axpy(n, c2, w, ab[2].data());
        axpy(n, c3, w, ab[3].data());
        axpy(n, c4, w, ab[4].data());
        axpy(n, c5, w, ab[5].data());
      }
    }
  }
}

void save_checkpoint(const std::string& path, const MlpSpec& spec,
                     std::span<const double> params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << "rpinn-checkpoint v1\n"
      << spec.input_dim << ' ' << spec.hidden_layers << ' ' << spec.hidden_width
      << ' ' << spec.n_lambda << '\n'
      << params.size() << '\n';
  char buf[40];
  for (double p : params) {
    std::snprintf(buf, sizeof buf, "%.17g\n", p);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<MlpSpec, ParamVector> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "rpinn-checkpoint" || version != "v1")
    throw std::runtime_error("unrecognized checkpoint header in " + path);
  MlpSpec spec;
  std::size_t count = 0;
  in >> spec.input_dim >> spec.hidden_layers >> spec.hidden_width >>
      spec.n_lambda >> count;
  spec.validate();
  if (count != static_cast<std::size_t>(spec.param_count()))
    throw std::runtime_error("checkpoint parameter count mismatch in " + path);
  ParamVector params(count);
  for (auto& p : params)
    if (!(in >> p)) throw std::runtime_error("truncated checkpoint: " + path);
  return {spec, params};
}

}  // namespace rpinn
