#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpinn/jet.hpp"
#include "rpinn/tape.hpp"

namespace rpinn {

// Evaluate f (a callable on jets over scalar S) at x, seeding unit first
// derivatives per coordinate. Returns value, gradient and Hessian of f
// with respect to x.
template <int N, class S, class F>
Jet<S, N> eval_jet_t(F&& f, std::span<const S> x) {
  std::array<Jet<S, N>, N> seeds;
  for (int i = 0; i < N; ++i) seeds[i] = Jet<S, N>::seed(x[i], i);
  return f(std::span<const Jet<S, N>>(seeds));
}

template <int N, class F>
Jet<double, N> eval_jet(F&& f, const std::array<double, N>& x) {
  Jet<double, N> r =
      eval_jet_t<N, double>(f, std::span<const double>(x.data(), N));
  auto check = [](double v, const char* what) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("non-finite ") + what +
                               " in jet evaluation");
  };
  check(r.v, "value");
  for (int i = 0; i < N; ++i) check(r.g[i], "first derivative");
  for (int i = 0; i < Jet<double, N>::kHess; ++i) check(r.h[i], "second derivative");
  return r;
}

// Exact gradient of a scalar loss with respect to a flat parameter vector.
// The loss callable must be generic over the scalar type; evaluating it with
// reverse-mode variables records every primitive, including jet arithmetic
// performed inside, so derivative paths through input-Hessians are covered.
template <class F>
std::vector<double> grad_params(F&& loss, std::span<const double> params) {
  Tape tape;
  std::vector<Rev> vars;
  vars.reserve(params.size());
  for (double p : params) vars.push_back(Rev::leaf(tape, p));
  Rev out = loss(std::span<const Rev>(vars));
  if (!std::isfinite(out.value()))
    throw std::runtime_error("non-finite loss in grad_params");

  std::vector<double> grad(params.size(), 0.0);
  if (!out.is_const()) {
    const std::vector<double> adj = tape.backward(out.index());
    for (std::size_t i = 0; i < params.size(); ++i) grad[i] = adj[vars[i].index()];
  }
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw std::runtime_error("non-finite gradient entry at index " +
                               std::to_string(i));
  return grad;
}

using Jet2 = Jet<double, 2>;

}  // namespace rpinn
