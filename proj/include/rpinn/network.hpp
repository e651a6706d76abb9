#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpinn/autodiff.hpp"
#include "rpinn/jet.hpp"

namespace rpinn {

// Fully-connected scalar-output tanh network. Linear maps are indexed
// 0..hidden_layers; map l sends layer_in(l) values to layer_out(l) values,
// with tanh after every map except the last (affine output).
struct MlpSpec {
  int input_dim = 2;
  int hidden_layers = 7;
  int hidden_width = 20;
  int n_lambda = 0;  // trainable PDE parameters appended after the net params

  int n_linear() const { return hidden_layers + 1; }
  int layer_in(int l) const { return l == 0 ? input_dim : hidden_width; }
  int layer_out(int l) const { return l == hidden_layers ? 1 : hidden_width; }

  // flat layout: per linear map, row-major weights then biases; lambda at tail
  int layer_offset(int l) const {
    int off = 0;
    for (int k = 0; k < l; ++k)
      off += layer_out(k) * (layer_in(k) + 1);
    return off;
  }
  int weight_index(int l, int row, int col) const {
    return layer_offset(l) + row * layer_in(l) + col;
  }
  int bias_index(int l, int row) const {
    return layer_offset(l) + layer_out(l) * layer_in(l) + row;
  }
  int net_param_count() const { return layer_offset(n_linear()); }
  int lambda_index(int i) const { return net_param_count() + i; }
  int param_count() const { return net_param_count() + n_lambda; }

  void validate() const {
    if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1 || n_lambda < 0)
      throw std::invalid_argument("invalid network spec");
  }

  bool operator==(const MlpSpec&) const = default;
};

using ParamVector = std::vector<double>;

// Glorot-uniform weights, zero biases; lambda entries start at zero
// (callers overwrite them with problem-specific initial guesses).
ParamVector init_params(const MlpSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Generic forward pass, usable with any scalar that supports tanh. The
// parameter scalar P and activation scalar S may differ (e.g. plain
// parameters with jet activations); parameters are promoted via S(p).
template <class S, class P>
S forward_t(const MlpSpec& spec, std::span<const P> params, std::span<const S> x) {
  if (static_cast<int>(x.size()) != spec.input_dim)
    throw std::invalid_argument("input dimension mismatch");
  using std::tanh;  // scalar case; jet/reverse overloads win by ADL
  std::vector<S> cur(x.begin(), x.end()), next;
  for (int l = 0; l < spec.n_linear(); ++l) {
    const int n = spec.layer_in(l), m = spec.layer_out(l);
    next.assign(m, S{});
    for (int p = 0; p < m; ++p) {
      S z = S(params[spec.bias_index(l, p)]);
      for (int q = 0; q < n; ++q)
        z += S(params[spec.weight_index(l, p, q)]) * cur[q];
      next[p] = (l == spec.hidden_layers) ? z : tanh(z);
    }
    cur.swap(next);
  }
  return cur[0];
}

double forward(const MlpSpec& spec, std::span<const double> params,
               std::span<const double> x);

// ---------------------------------------------------------------------------
// Fast 2-D jet propagation with hand-written reverse pass. The forward pass
// carries, per neuron, the value and its first/second derivatives in the two
// input coordinates; the reverse pass accumulates d(seed . jet)/d(params).

class JetWorkspace {
 public:
  void prepare(const MlpSpec& spec);

  struct Layer {
    // pre-activation derivative state and post-activation state, all length
    // layer_out; component order: value, d0, d1, d00, d01, d11
    std::vector<double> t, s;
    std::vector<double> zj0, zj1, zh0, zh1, zh2;
    std::vector<double> aj0, aj1, ah0, ah1, ah2;
    std::vector<double> bar[6];   // adjoint scratch (z-level)
    std::vector<double> abar[6];  // adjoint scratch (a-level)
  };
  std::vector<Layer> layers;
  std::array<double, 2> x{};
  MlpSpec spec_cache;
};

// value + input-gradient + input-Hessian of the network at x (input_dim == 2)
Jet2 forward_jet(const MlpSpec& spec, std::span<const double> params,
                 const std::array<double, 2>& x, JetWorkspace& ws);

// convenience overload (owns a local workspace; checks finiteness like
// eval_jet does)
Jet2 forward_jet(const MlpSpec& spec, std::span<const double> params,
                 const std::array<double, 2>& x);

// Accumulate into grad (length >= net_param_count()) the gradient of
// seed.v*u + seed.g.uJ + seed.h.uH with respect to the network parameters,
// where (u, uJ, uH) is the jet produced by the immediately preceding
// forward_jet on this workspace.
void backward_jet(const MlpSpec& spec, std::span<const double> params,
                  JetWorkspace& ws, const Jet2& seed, std::span<double> grad);

// checkpoint: text header (spec) + one parameter per line, layout order
void save_checkpoint(const std::string& path, const MlpSpec& spec,
                     std::span<const double> params);
std::pair<MlpSpec, ParamVector> load_checkpoint(const std::string& path);

}  // namespace rpinn
