#include "rpinn/lbfgs.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>
#include <utility>

namespace rpinn {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double two_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct CurvaturePair {
  std::vector<double> s, y;
  double rho = 0.0;  // 1 / (y.s)
};

// d = -H g with H from the stored pairs (two-loop recursion); identity
// scaling gamma = s.y / y.y from the most recent pair.
void search_direction(std::span<const double> g,
                      const std::deque<CurvaturePair>& pairs,
                      std::vector<double>& d, std::vector<double>& alpha) {
  const std::size_t n = g.size();
  d.assign(g.begin(), g.end());
  alpha.resize(pairs.size());
  for (std::size_t k = pairs.size(); k-- > 0;) {
    const CurvaturePair& p = pairs[k];
    alpha[k] = p.rho * dot(p.s, d);
    for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * p.y[i];
  }
  if (!pairs.empty()) {
    const CurvaturePair& last = pairs.back();
    const double gamma = 1.0 / (last.rho * dot(last.y, last.y));
    for (double& x : d) x *= gamma;
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const CurvaturePair& p = pairs[k];
    const double beta = p.rho * dot(p.y, d);
    for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * p.s[i];
  }
  for (double& x : d) x = -x;
}

struct LineSearchOutcome {
  bool ok = false;     // some acceptable step was found
  bool wolfe = false;  // the accepted step satisfies strong Wolfe
  double step = 0.0;
  double fval = 0.0;
};

// Strong-Wolfe line search (bracket then bisection zoom). Trials whose loss
// is non-finite, or whose evaluation throws std::runtime_error, are treated
// as infinitely bad: the step shrinks toward the last valid point and the
// trial is never accepted. If the evaluation budget runs out, the best trial
// satisfying sufficient decrease is accepted without the curvature
// guarantee; with no such trial the search reports failure.
class LineSearch {
 public:
  LineSearch(const LossAndGrad& f, std::span<const double> x,
             std::span<const double> d, double phi0, double dphi0,
             const LbfgsSettings& st)
      : f_(f), x_(x), d_(d), phi0_(phi0), dphi0_(dphi0), st_(st),
        xt_(x.size()), gt_(x.size()) {}

  LineSearchOutcome run(double trial) {
    double a_prev = 0.0, f_prev = phi0_;
    double a = trial;
    constexpr double kMaxStep = 1e8;
    bool first = true;
    while (evals_ < st_.max_line_search) {
      if (!eval(a)) {
        // too far out: pull back toward the last valid step
        const double shrunk = a_prev + 0.5 * (a - a_prev);
        if (!(shrunk > a_prev) || !(shrunk < a)) break;
        a = shrunk;
        continue;
      }
      if (fa_ > phi0_ + st_.c1 * a * dphi0_ || (!first && fa_ >= f_prev))
        return zoom(a_prev, f_prev, a);
      if (std::abs(dfa_) <= -st_.c2 * dphi0_) return accept(true);
      if (dfa_ >= 0.0) return zoom(a, fa_, a_prev);
      a_prev = a;
      f_prev = fa_;
      first = false;
      if (a >= kMaxStep) break;
      a = std::min(2.0 * a, kMaxStep);
    }
    return accept(false);
  }

  // Accepted point and its gradient; valid when run() returned ok.
  std::span<const double> accepted_x() const { return best_x_; }
  std::span<const double> accepted_g() const { return best_g_; }

 private:
  bool eval(double a) {
    ++evals_;
    for (std::size_t i = 0; i < x_.size(); ++i) xt_[i] = x_[i] + a * d_[i];
    double v;
    try {
      v = f_(xt_, gt_);
    } catch (const std::runtime_error&) {
      return false;
    }
    if (!std::isfinite(v)) return false;
    fa_ = v;
    dfa_ = dot(gt_, d_);
    if (fa_ <= phi0_ + st_.c1 * a * dphi0_ &&
        (!have_armijo_ || fa_ < best_f_)) {
      have_armijo_ = true;
      best_f_ = fa_;
      best_a_ = a;
      best_x_ = xt_;
      best_g_ = gt_;
    }
    return true;
  }

  // The strong-Wolfe accept always refers to the trial that eval() just
  // cached (it satisfies Armijo and strictly improved on any earlier cache).
  LineSearchOutcome accept(bool wolfe) {
    LineSearchOutcome out;
    if (!have_armijo_) return out;
    out.ok = true;
    out.wolfe = wolfe;
    out.step = best_a_;
    out.fval = best_f_;
    return out;
  }

  LineSearchOutcome zoom(double a_lo, double f_lo, double a_hi) {
    while (evals_ < st_.max_line_search) {
      const double width = std::abs(a_hi - a_lo);
      if (width <= 1e-16 * std::max(1.0, std::abs(a_lo))) break;
      const double a = 0.5 * (a_lo + a_hi);
      if (!eval(a)) {
        a_hi = a;  // invalid ⇒ treat as beyond the admissible region
        continue;
      }
      if (fa_ > phi0_ + st_.c1 * a * dphi0_ || fa_ >= f_lo) {
        a_hi = a;
      } else {
        if (std::abs(dfa_) <= -st_.c2 * dphi0_) return accept(true);
        if (dfa_ * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
        a_lo = a;
        f_lo = fa_;
      }
    }
    return accept(false);
  }

  const LossAndGrad& f_;
  std::span<const double> x_, d_;
  double phi0_, dphi0_;
  const LbfgsSettings& st_;
  std::vector<double> xt_, gt_;
  double fa_ = 0.0, dfa_ = 0.0;
  int evals_ = 0;
  bool have_armijo_ = false;
  double best_f_ = 0.0, best_a_ = 0.0;
  std::vector<double> best_x_, best_g_;
};

}  // namespace

void LbfgsSettings::validate() const {
  if (history < 1)
    throw std::invalid_argument("optimizer history must be >= 1");
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0))
    throw std::invalid_argument(
        "line-search constants must satisfy 0 < c1 < c2 < 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be positive");
  if (max_line_search < 3)
    throw std::invalid_argument("line-search budget must be >= 3");
  if (!(grad_tolerance >= 0.0))
    throw std::invalid_argument("gradient tolerance must be >= 0");
}

LbfgsResult lbfgs_minimize(const LossAndGrad& f, std::vector<double> params,
                           int epochs, const LbfgsSettings& settings) {
  settings.validate();
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  const std::size_t n = params.size();

  std::vector<double> g(n);
  double fx = f(params, g);
  if (!std::isfinite(fx))
    throw std::invalid_argument("initial loss is not finite");

  LbfgsResult res;
  res.params = params;
  res.final_loss = fx;
  if (epochs == 0) return res;

  std::vector<double> x = std::move(params);
  std::vector<double> best_x = x;
  double best_f = fx;
  std::deque<CurvaturePair> pairs;
  std::vector<double> d(n), alpha;

  // Move to the accepted trial, store the curvature pair when it is safe,
  // and extend the best-seen trace. Returns false when the step made no
  // numerical progress.
  auto take_step = [&](const LineSearch& search, const LineSearchOutcome& out) {
    std::span<const double> xa = search.accepted_x();
    std::span<const double> ga = search.accepted_g();
    bool moved = false;
    CurvaturePair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = xa[i] - x[i];
      pair.y[i] = ga[i] - g[i];
      moved |= pair.s[i] != 0.0;
    }
    const double sy = dot(pair.s, pair.y);
    // Only Wolfe-certified steps carry a usable curvature guarantee; the
    // scale guard rejects pairs that would make the update ill-conditioned.
    if (out.wolfe && sy > 1e-10 * two_norm(pair.s) * two_norm(pair.y)) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (static_cast<int>(pairs.size()) > settings.history)
        pairs.pop_front();
    }
    x.assign(xa.begin(), xa.end());
    g.assign(ga.begin(), ga.end());
    fx = out.fval;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
    res.trace.push_back(best_f);
    ++res.iterations;
    return moved;
  };

  for (int it = 0; it < epochs; ++it) {
    if (inf_norm(g) <= settings.grad_tolerance) break;

    search_direction(g, pairs, d, alpha);
    double dphi0 = dot(d, g);
    if (!(dphi0 < 0.0)) {
      // numerically non-descending quasi-Newton direction: fall back
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      dphi0 = -dot(g, g);
      if (!(dphi0 < 0.0)) break;  // zero gradient
    }

    const double trial = pairs.empty() ? settings.learning_rate : 1.0;
    LineSearch search(f, x, d, fx, dphi0, settings);
    LineSearchOutcome out = search.run(trial);
    if (out.ok) {
      if (!take_step(search, out)) break;
      continue;
    }
    // Restart: retry this iteration along steepest descent with a fresh
    // history; a second consecutive failure terminates the run.
    pairs.clear();
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    dphi0 = -dot(g, g);
    if (!(dphi0 < 0.0)) break;
    LineSearch retry(f, x, d, fx, dphi0, settings);
    out = retry.run(settings.learning_rate);
    if (!out.ok) {
      res.line_search_failed = true;
      break;
    }
    if (!take_step(retry, out)) break;
  }

  res.params = std::move(best_x);
  res.final_loss = best_f;
  return res;
}

}  // namespace rpinn
