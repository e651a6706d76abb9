#include "rpinn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>
#include <utility>

namespace rpinn {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt3 = 1.7320508075688772935;

[[noreturn]] void outside_error(const std::string& problem, const Vec2& p) {
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "%s: point (%.17g, %.17g) lies outside the problem domain",
                problem.c_str(), p[0], p[1]);
  throw std::domain_error(buf);
}

// Inclusive containment with a relative slack so that points constructed on
// the boundary by floating-point arithmetic are not rejected.
void require_inside(const RectDomain& d, const Vec2& p,
                    const std::string& problem) {
  const double sx = 1e-9 * std::max(1.0, d.width());
  const double sy = 1e-9 * std::max(1.0, d.height());
  if (p[0] < d.lo[0] - sx || p[0] > d.hi[0] + sx || p[1] < d.lo[1] - sy ||
      p[1] > d.hi[1] + sy)
    outside_error(problem, p);
}

// Instantiate one generic operator body as both the plain-double and the
// dual-number form, each guarded by the domain check.
template <class F>
void install_residual(PdeProblem& p, F f) {
  const RectDomain dom = p.domain;
  const std::string name = p.name;
  p.residual = [f, dom, name](const Jet2& u, const Vec2& x,
                              std::span<const double> lam) -> double {
    require_inside(dom, x, name);
    return f(u, x, lam);
  };
  p.residual_dual = [f, dom, name](const DualJet2& u, const Vec2& x,
                                   std::span<const Dual> lam) -> Dual {
    require_inside(dom, x, name);
    return f(u, x, lam);
  };
}

template <class F>
void add_constraint(PdeProblem& p, std::string cname, F f) {
  ConstraintOp c;
  c.name = std::move(cname);
  c.op = [f](const Jet2& u, const Vec2& x) -> double { return f(u, x); };
  c.op_dual = [f](const DualJet2& u, const Vec2& x) -> Dual { return f(u, x); };
  p.constraints.push_back(std::move(c));
}

// Install a closed-form solution given as a scalar-generic function of the
// two coordinates; the jet form evaluates it on seeded coordinate jets.
template <class G>
void install_exact(PdeProblem& p, G g) {
  const RectDomain dom = p.domain;
  const std::string name = p.name;
  p.exact = [g, dom, name](const Vec2& x) -> double {
    require_inside(dom, x, name);
    return g(x[0], x[1]);
  };
  p.exact_jet = [g, dom, name](const Vec2& x) -> Jet2 {
    require_inside(dom, x, name);
    return g(Jet2::seed(x[0], 0), Jet2::seed(x[1], 1));
  };
}

// Construction-time sanity check: the hand-derived source term must agree
// with what the differentiated exact solution implies, at a few probe points
// where the solution is not negligibly small.
void verify_manufactured(const PdeProblem& p, std::initializer_list<Vec2> pts) {
  for (const Vec2& x : pts) {
    const Jet2 j = p.exact_jet(x);
    const double r = p.residual(j, x, p.lambda_init);
    if (!(std::abs(r) <= 1e-7)) {
      char buf[192];
      std::snprintf(buf, sizeof buf,
                    "%s: source term inconsistent with the exact solution "
                    "(residual %.3g at (%.3g, %.3g))",
                    p.name.c_str(), r, x[0], x[1]);
      throw std::logic_error(buf);
    }
  }
}

template <class S>
S sech(const S& z) {
  using std::cosh;
  return 1.0 / cosh(z);
}

template <class S>
S gauss_peak(const S& x, const S& y, double cx, double cy) {
  using std::exp;
  const S dx = x - cx;
  const S dy = y - cy;
  return exp(-1000.0 * (dx * dx + dy * dy));
}

// -Δ of the centered Gaussian peak, in closed form.
double poisson_source(double x, double y) {
  const double dx = x - 0.5, dy = y - 0.5;
  const double r2 = dx * dx + dy * dy;
  return (4000.0 - 4.0e6 * r2) * std::exp(-1000.0 * r2);
}

// Result of applying -∇·[u∇(x²+y²)] + Δu to the two-Gaussian solution,
// in closed form (one term per peak center c on the diagonal).
double two_peaks_source(double x, double y) {
  auto term = [x, y](double c) {
    const double dx = x - c, dy = y - c;
    const double r2 = dx * dx + dy * dy;
    return (4000.0 * (x * dx + y * dy) - 4004.0 + 4.0e6 * r2) *
           std::exp(-1000.0 * r2);
  };
  return term(0.5) + term(-0.5);
}

template <class S>
S two_peaks_profile(const S& x, const S& y) {
  return gauss_peak(x, y, 0.5, 0.5) + gauss_peak(x, y, -0.5, -0.5);
}

// d'Alembert form: two pulse pairs traveling at speed sqrt(3), arranged so
// the initial velocity cancels; first argument is time.
template <class S>
S wave_profile(const S& t, const S& x) {
  return 0.5 * sech(2.0 * (x - kSqrt3 * t)) -
         0.5 * sech(2.0 * (x - 10.0 + kSqrt3 * t)) +
         0.5 * sech(2.0 * (x + kSqrt3 * t)) -
         0.5 * sech(2.0 * (x + 10.0 - kSqrt3 * t));
}

// Initial displacement as stated for the wave problem; identical to
// wave_profile at t=0 after collecting the paired terms.
double wave_initial_value(double x) {
  return sech(2.0 * x) - 0.5 * sech(2.0 * (x - 10.0)) -
         0.5 * sech(2.0 * (x + 10.0));
}

}  // namespace

PdeProblem poisson_peak() {
  PdeProblem p;
  p.name = "poisson_peak";
  p.domain = {{0.0, 0.0}, {1.0, 1.0}};
  install_residual(p, [](const auto& u, const Vec2& x, auto /*lam*/) {
    return -(u.h[0] + u.h[2]) - poisson_source(x[0], x[1]);
  });
  p.segments = {
      {{0.0, 0.0}, {1.0, 0.0}, {0}},
      {{1.0, 0.0}, {1.0, 1.0}, {0}},
      {{1.0, 1.0}, {0.0, 1.0}, {0}},
      {{0.0, 1.0}, {0.0, 0.0}, {0}},
  };
  add_constraint(p, "dirichlet", [](const auto& u, const Vec2& x) {
    return u.v - gauss_peak(x[0], x[1], 0.5, 0.5);
  });
  install_exact(p, [](const auto& x, const auto& y) {
    return gauss_peak(x, y, 0.5, 0.5);
  });
  verify_manufactured(p, {Vec2{0.5, 0.52}, Vec2{0.48, 0.47}, Vec2{0.6, 0.45},
                          Vec2{0.2, 0.8}});
  return p;
}

PdeProblem burgers(const std::string& reference_csv) {
  PdeProblem p;
  p.name = "burgers";
  p.domain = {{-1.0, 0.0}, {1.0, 1.0}};  // coordinates are (x, t)
  const double nu = 0.001 / kPi;
  install_residual(p, [nu](const auto& u, const Vec2& x, auto /*lam*/) {
    (void)x;
    return u.g[1] + u.v * u.g[0] - nu * u.h[0];
  });
  p.segments = {
      {{-1.0, 0.0}, {1.0, 0.0}, {0}},   // t = 0: initial data
      {{-1.0, 0.0}, {-1.0, 1.0}, {1}},  // x = -1: wall
      {{1.0, 0.0}, {1.0, 1.0}, {1}},    // x = +1: wall
  };
  add_constraint(p, "initial_value", [](const auto& u, const Vec2& x) {
    return u.v + std::sin(kPi * x[0]);
  });
  add_constraint(p, "wall_value",
                 [](const auto& u, const Vec2& /*x*/) { return u.v; });
  auto ref = std::make_shared<BurgersReference>(
      load_burgers_reference(reference_csv));
  const RectDomain dom = p.domain;
  const std::string name = p.name;
  p.exact = [ref, dom, name](const Vec2& x) -> double {
    require_inside(dom, x, name);
    return ref->sample(x[0], x[1]);
  };
  return p;
}

PdeProblem two_peaks() {
  PdeProblem p;
  p.name = "two_peaks";
  p.domain = {{-1.0, -1.0}, {1.0, 1.0}};
  install_residual(p, [](const auto& u, const Vec2& x, auto /*lam*/) {
    return -(2.0 * x[0] * u.g[0] + 2.0 * x[1] * u.g[1] + 4.0 * u.v) +
           (u.h[0] + u.h[2]) - two_peaks_source(x[0], x[1]);
  });
  p.segments = {
      {{-1.0, -1.0}, {1.0, -1.0}, {0}},
      {{1.0, -1.0}, {1.0, 1.0}, {0}},
      {{1.0, 1.0}, {-1.0, 1.0}, {0}},
      {{-1.0, 1.0}, {-1.0, -1.0}, {0}},
  };
  add_constraint(p, "dirichlet", [](const auto& u, const Vec2& x) {
    return u.v - two_peaks_profile(x[0], x[1]);
  });
  install_exact(p, [](const auto& x, const auto& y) {
    return two_peaks_profile(x, y);
  });
  verify_manufactured(p, {Vec2{0.5, 0.52}, Vec2{-0.5, -0.48}, Vec2{0.1, -0.2},
                          Vec2{0.52, 0.49}});
  return p;
}

PdeProblem wave() {
  PdeProblem p;
  p.name = "wave";
  p.domain = {{0.0, -5.0}, {6.0, 5.0}};  // coordinates are (t, x)
  install_residual(p, [](const auto& u, const Vec2& x, auto /*lam*/) {
    (void)x;
    return u.h[0] - 3.0 * u.h[2];
  });
  p.segments = {
      {{0.0, -5.0}, {0.0, 5.0}, {0, 1}},  // t = 0: value and velocity
      {{0.0, -5.0}, {6.0, -5.0}, {2}},    // x = -5: wall
      {{0.0, 5.0}, {6.0, 5.0}, {2}},      // x = +5: wall
  };
  add_constraint(p, "initial_value", [](const auto& u, const Vec2& x) {
    return u.v - wave_initial_value(x[1]);
  });
  add_constraint(p, "initial_velocity",
                 [](const auto& u, const Vec2& /*x*/) { return u.g[0]; });
  add_constraint(p, "wall_value",
                 [](const auto& u, const Vec2& /*x*/) { return u.v; });
  install_exact(p, [](const auto& t, const auto& x) {
    return wave_profile(t, x);
  });
  verify_manufactured(p, {Vec2{0.5, 1.0}, Vec2{2.0, -3.0}, Vec2{5.5, 4.0},
                          Vec2{1.2345, 0.321}});
  return p;
}

PdeProblem toy_inverse_poisson() {
  PdeProblem p;
  p.name = "toy_inverse_poisson";
  p.domain = {{0.0, 0.0}, {1.0, 1.0}};
  p.lambda_init = {1.0};
  // Source manufactured from u = sin(πx) sin(πy) with true diffusivity 2.
  install_residual(p, [](const auto& u, const Vec2& x, auto lam) {
    const double f =
        4.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    return -(lam[0] * (u.h[0] + u.h[2])) - f;
  });
  p.segments = {
      {{0.0, 0.0}, {1.0, 0.0}, {0}},
      {{1.0, 0.0}, {1.0, 1.0}, {0}},
      {{1.0, 1.0}, {0.0, 1.0}, {0}},
      {{0.0, 1.0}, {0.0, 0.0}, {0}},
  };
  add_constraint(p, "dirichlet",
                 [](const auto& u, const Vec2& /*x*/) { return u.v; });
  install_exact(p, [](const auto& x, const auto& y) {
    using std::sin;
    return sin(kPi * x) * sin(kPi * y);
  });
  {
    // With λ at its true value the manufactured residual must vanish.
    PdeProblem check = p;
    check.lambda_init = {2.0};
    verify_manufactured(check, {Vec2{0.5, 0.5}, Vec2{0.25, 0.75},
                                Vec2{0.1, 0.3}});
  }
  return p;
}

std::vector<std::string> problem_names() {
  return {"poisson_peak", "burgers", "two_peaks", "wave",
          "toy_inverse_poisson"};
}

PdeProblem make_problem(const std::string& name, const std::string& data_dir) {
  if (name == "poisson_peak") return poisson_peak();
  if (name == "burgers") return burgers(data_dir + "/burgers_reference.csv");
  if (name == "two_peaks") return two_peaks();
  if (name == "wave") return wave();
  if (name == "toy_inverse_poisson") return toy_inverse_poisson();
  std::string msg = "unknown problem '" + name + "'; valid names:";
  for (const std::string& n : problem_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

double BurgersReference::sample(double x, double t) const {
  const double fx =
      std::clamp((x - xmin) / (xmax - xmin), 0.0, 1.0) * (nx - 1);
  const double ft =
      std::clamp((t - tmin) / (tmax - tmin), 0.0, 1.0) * (nt - 1);
  const int i = std::min(static_cast<int>(fx), nx - 2);
  const int j = std::min(static_cast<int>(ft), nt - 2);
  const double ax = fx - i, at = ft - j;
  const double* row0 = &u[static_cast<std::size_t>(j) * nx];
  const double* row1 = row0 + nx;
  return (1.0 - at) * ((1.0 - ax) * row0[i] + ax * row0[i + 1]) +
         at * ((1.0 - ax) * row1[i] + ax * row1[i + 1]);
}

BurgersReference load_burgers_reference(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open Burgers reference file: " + csv_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const std::size_t header_end = text.find('\n');
  if (header_end == std::string::npos)
    throw std::runtime_error("malformed Burgers reference file (no header): " +
                             csv_path);
  const char* s = text.c_str() + header_end + 1;
  auto next = [&s, &csv_path]() {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s)
      throw std::runtime_error(
          "malformed Burgers reference file (bad number): " + csv_path);
    s = end;
    while (*s == ',' || *s == '\n' || *s == '\r' || *s == ' ') ++s;
    return v;
  };
  BurgersReference ref;
  ref.nx = static_cast<int>(next());
  ref.nt = static_cast<int>(next());
  ref.xmin = next();
  ref.xmax = next();
  ref.tmin = next();
  ref.tmax = next();
  if (ref.nx < 2 || ref.nt < 2 || !(ref.xmax > ref.xmin) ||
      !(ref.tmax > ref.tmin))
    throw std::runtime_error(
        "malformed Burgers reference file (bad dimensions): " + csv_path);
  const std::size_t count =
      static_cast<std::size_t>(ref.nx) * static_cast<std::size_t>(ref.nt);
  ref.u.resize(count);
  for (std::size_t k = 0; k < count; ++k) ref.u[k] = next();
  return ref;
}

}  // namespace rpinn
