#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rpinn {

struct LbfgsSettings {
  int history = 50;            // curvature pairs kept for the two-loop update
  double c1 = 1e-4;            // sufficient-decrease (Armijo) constant
  double c2 = 0.9;             // strong-Wolfe curvature constant
  double learning_rate = 0.1;  // trial step length when no history exists
  int max_line_search = 40;    // loss evaluations allowed per line search
  double grad_tolerance = 0.0; // stop when the gradient inf-norm reaches this

  void validate() const;
};

struct LbfgsResult {
  std::vector<double> params;       // best-seen parameters
  double final_loss = 0.0;          // loss at the returned parameters
  std::vector<double> trace;        // best-seen loss after each iteration
  int iterations = 0;               // iterations actually performed
  bool line_search_failed = false;  // stopped after repeated search failure
};

// Objective callback: returns the loss at `params` and writes the gradient
// into `grad` (same length). May throw std::runtime_error for numerically
// invalid parameter values; during a line search such trials are treated as
// infinitely bad and the step is shrunk, never accepted.
using LossAndGrad =
    std::function<double(std::span<const double>, std::span<double>)>;

// Limited-memory BFGS with a strong-Wolfe line search. The first trial step
// of a search is `learning_rate` while no curvature history exists (initial
// iteration and after a restart) and 1 otherwise. One "epoch" is one
// quasi-Newton iteration on the full objective. On a line-search failure the
// direction is restarted to steepest descent once; a second consecutive
// failure terminates early with `line_search_failed` set. The returned
// parameters and trace always track the best loss seen, so the trace is
// monotone non-increasing. epochs=0 returns the input parameters unchanged.
LbfgsResult lbfgs_minimize(const LossAndGrad& f, std::vector<double> params,
                           int epochs, const LbfgsSettings& settings = {});

}  // namespace rpinn
