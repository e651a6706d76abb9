#include "rpinn/problems.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rpinn/rng.hpp"

namespace rpinn {
namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 random_interior(const RectDomain& d, Rng& rng) {
  return d.map_unit({rng.uniform01(), rng.uniform01()});
}

double residual_at_exact(const PdeProblem& p, const Vec2& x) {
  return p.residual(p.exact_jet(x), x, p.lambda_init);
}

void check_self_consistency(const PdeProblem& p, unsigned seed,
                            const std::vector<Vec2>& extra) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 x = random_interior(p.domain, rng);
    worst = std::max(worst, std::abs(residual_at_exact(p, x)));
  }
  for (const Vec2& x : extra)
    worst = std::max(worst, std::abs(residual_at_exact(p, x)));
  CHECK(worst <= 1e-6);
}

TEST_CASE("manufactured solutions satisfy their equations") {
  // Sharp features make uniform sampling nearly miss the peaks, so probe
  // them explicitly as well.
  check_self_consistency(poisson_peak(), 11,
                         {{0.5, 0.5},
                          {0.51, 0.5},
                          {0.47, 0.53},
                          {0.5, 0.56},
                          {0.44, 0.44}});
  check_self_consistency(two_peaks(), 12,
                         {{0.5, 0.5},
                          {-0.5, -0.5},
                          {0.53, 0.47},
                          {-0.46, -0.52},
                          {0.5, 0.44}});
  check_self_consistency(wave(), 13,
                         {{0.0001, 0.0},
                          {1.0, 1.7320508075688772},
                          {3.0, -0.2},
                          {5.9, 4.2}});
}

TEST_CASE("peak problem pointwise values") {
  const PdeProblem p = poisson_peak();
  CHECK(p.exact({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.exact({0.3, 0.7}) ==
        doctest::Approx(1.8048513878454152e-35).epsilon(1e-13));
  CHECK(std::abs(residual_at_exact(p, {0.3, 0.7})) <= 1e-8);

  // The source terms sits in the residual with a minus sign, so the zero
  // function's residual at the center pins f(0.5, 0.5) = +4000.
  const Jet2 zero;
  CHECK(p.residual(zero, {0.5, 0.5}, {}) ==
        doctest::Approx(-4000.0).epsilon(1e-12));

  // Dirichlet data on the walls equals the exact trace.
  const Jet2 j = p.exact_jet({0.25, 0.0});
  CHECK(std::abs(p.constraints[0].op(j, {0.25, 0.0})) <= 1e-15);
}

TEST_CASE("two peaks pointwise values") {
  const PdeProblem p = two_peaks();
  // 1 + e^-2000 rounds to exactly 1 in double precision.
  CHECK(p.exact({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.exact({-0.5, -0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.exact({0.0, 0.0}) ==
        doctest::Approx(1.4249152813482571e-217).epsilon(1e-12));
}

TEST_CASE("wave problem pointwise values and initial data") {
  const PdeProblem p = wave();
  CHECK(p.exact({0.0, 0.0}) ==
        doctest::Approx(0.99999999587769276).epsilon(1e-14));
  CHECK(p.exact({0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-8));

  // Exact solution at t=0 reproduces the stated initial displacement; the
  // two co-centered pulse pairs merge algebraically.
  for (double x = -5.0; x <= 5.0; x += 0.37) {
    const Jet2 j = p.exact_jet({0.0, x});
    CHECK(std::abs(p.constraints[0].op(j, {0.0, x})) <= 1e-9);
  }

  // Initial velocity of the exact solution is only exponentially small (the
  // mirror pulses are centered outside the domain), not exactly zero.
  CHECK(std::abs(p.exact_jet({0.0, 1.3}).g[0]) <= 2e-7);
  CHECK(p.exact_jet({0.0, 1.3}).g[0] ==
        doctest::Approx(-9.6662020150650016e-8).epsilon(1e-9));

  // Wall traces stay small for all times even as pulses pass through.
  for (double t = 0.0; t <= 6.0; t += 0.25) {
    CHECK(std::abs(p.exact({t, 5.0})) <= 2e-4);
    CHECK(std::abs(p.exact({t, -5.0})) <= 2e-4);
  }
}

TEST_CASE("viscous equation residual and constraints") {
  const std::string path = std::string(RPINN_DATA_DIR) + "/burgers_reference.csv";
  const PdeProblem p = burgers(path);

  // No source term: the zero function is residual-free everywhere.
  Rng rng(21);
  const Jet2 zero;
  for (int k = 0; k < 50; ++k)
    CHECK(p.residual(zero, random_interior(p.domain, rng), {}) == 0.0);

  // Hand-evaluated residual on a synthetic jet: u_t + u u_x - nu u_xx with
  // coordinates ordered (x, t).
  Jet2 j;
  j.v = 0.7;
  j.g[0] = -1.3;  // u_x
  j.g[1] = 0.4;   // u_t
  j.h[0] = 2.5;   // u_xx
  const double nu = 0.001 / kPi;
  CHECK(p.residual(j, {0.2, 0.3}, {}) ==
        doctest::Approx(0.4 + 0.7 * -1.3 - nu * 2.5).epsilon(1e-15));

  // Initial constraint compares against -sin(pi x).
  CHECK(p.constraints[0].op(zero, {0.5, 0.0}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  Jet2 hat;
  hat.v = 0.25;
  CHECK(p.constraints[0].op(hat, {-0.5, 0.0}) ==
        doctest::Approx(0.25 - 1.0).epsilon(1e-12));
  CHECK(p.constraints[1].op(hat, {1.0, 0.5}) == 0.25);
}

TEST_CASE("reference table matches initial data and symmetry") {
  const std::string path = std::string(RPINN_DATA_DIR) + "/burgers_reference.csv";
  const BurgersReference ref = load_burgers_reference(path);
  REQUIRE(ref.nx == 1024);
  REQUIRE(ref.nt == 1024);

  // Row t=0 stores -sin(pi x) on the grid.
  for (int i = 0; i < ref.nx; i += 37) {
    const double x = ref.xmin + (ref.xmax - ref.xmin) * i / (ref.nx - 1);
    CHECK(ref.u[i] == doctest::Approx(-std::sin(kPi * x)).epsilon(1e-9));
  }

  // Sampling at a grid node returns the stored value.
  for (int j = 1; j < ref.nt; j += 211) {
    for (int i = 1; i < ref.nx; i += 211) {
      const double x = ref.xmin + (ref.xmax - ref.xmin) * i / (ref.nx - 1);
      const double t = ref.tmin + (ref.tmax - ref.tmin) * j / (ref.nt - 1);
      CHECK(ref.sample(x, t) ==
            doctest::Approx(ref.u[static_cast<std::size_t>(j) * ref.nx + i])
                .epsilon(1e-9));
    }
  }

  // Odd symmetry keeps the solution pinned near zero on x=0 for all times.
  const PdeProblem p = burgers(path);
  CHECK(std::abs(p.exact({0.0, 1.0})) <= 1e-8);
  CHECK(std::abs(p.exact({0.0, 0.5})) <= 1e-8);

  CHECK_THROWS_AS(load_burgers_reference("/nonexistent/ref.csv"),
                  std::runtime_error);
}

TEST_CASE("dual residual carries exact sensitivities") {
  Rng rng(31);
  auto random_jet = [&rng]() {
    Jet2 j;
    j.v = rng.uniform(-2, 2);
    for (int i = 0; i < 2; ++i) j.g[i] = rng.uniform(-3, 3);
    for (int i = 0; i < 3; ++i) j.h[i] = rng.uniform(-5, 5);
    return j;
  };

  SUBCASE("peak problem") {
    const PdeProblem p = poisson_peak();
    for (int k = 0; k < 20; ++k) {
      const Jet2 j = random_jet();
      const Vec2 x = random_interior(p.domain, rng);
      const Dual r = p.residual_dual(seeded_dual_jet(j), x, {});
      CHECK(r.v == doctest::Approx(p.residual(j, x, {})).epsilon(1e-14));
      CHECK(r.d[0] == 0.0);
      CHECK(r.d[1] == 0.0);
      CHECK(r.d[2] == 0.0);
      CHECK(r.d[3] == -1.0);
      CHECK(r.d[4] == 0.0);
      CHECK(r.d[5] == -1.0);
    }
  }
  SUBCASE("two peaks") {
    const PdeProblem p = two_peaks();
    for (int k = 0; k < 20; ++k) {
      const Jet2 j = random_jet();
      const Vec2 x = random_interior(p.domain, rng);
      const Dual r = p.residual_dual(seeded_dual_jet(j), x, {});
      CHECK(r.v == doctest::Approx(p.residual(j, x, {})).epsilon(1e-14));
      CHECK(r.d[0] == -4.0);
      CHECK(r.d[1] == -2.0 * x[0]);
      CHECK(r.d[2] == -2.0 * x[1]);
      CHECK(r.d[3] == 1.0);
      CHECK(r.d[4] == 0.0);
      CHECK(r.d[5] == 1.0);
    }
  }
  SUBCASE("viscous equation") {
    const std::string path =
        std::string(RPINN_DATA_DIR) + "/burgers_reference.csv";
    const PdeProblem p = burgers(path);
    const double nu = 0.001 / kPi;
    for (int k = 0; k < 20; ++k) {
      const Jet2 j = random_jet();
      const Vec2 x = random_interior(p.domain, rng);
      const Dual r = p.residual_dual(seeded_dual_jet(j), x, {});
      CHECK(r.v == doctest::Approx(p.residual(j, x, {})).epsilon(1e-14));
      CHECK(r.d[0] == j.g[0]);  // d/du of u*u_x
      CHECK(r.d[1] == j.v);     // d/du_x
      CHECK(r.d[2] == 1.0);     // d/du_t
      CHECK(r.d[3] == -nu);
      CHECK(r.d[4] == 0.0);
      CHECK(r.d[5] == 0.0);
    }
  }
  SUBCASE("wave") {
    const PdeProblem p = wave();
    const Jet2 j = random_jet();
    const Dual r = p.residual_dual(seeded_dual_jet(j), {1.0, 0.5}, {});
    CHECK(r.v == doctest::Approx(p.residual(j, {1.0, 0.5}, {})).epsilon(1e-14));
    CHECK(r.d[3] == 1.0);
    CHECK(r.d[5] == -3.0);
    CHECK(r.d[0] == 0.0);
  }
  SUBCASE("trainable diffusivity") {
    const PdeProblem p = toy_inverse_poisson();
    const Jet2 j = random_jet();
    const Vec2 x{0.3, 0.6};
    const std::vector<double> lam{1.7};
    const auto lam_d = seeded_dual_params(lam);
    const Dual r = p.residual_dual(seeded_dual_jet(j), x, lam_d);
    CHECK(r.v == doctest::Approx(p.residual(j, x, lam)).epsilon(1e-15));
    CHECK(r.d[3] == -1.7);
    CHECK(r.d[5] == -1.7);
    CHECK(r.d[6] == -(j.h[0] + j.h[2]));
  }
}

TEST_CASE("trainable parameter recovers the manufactured diffusivity") {
  const PdeProblem p = toy_inverse_poisson();
  REQUIRE(p.n_lambda() == 1);
  CHECK(p.lambda_init[0] == 1.0);

  const Vec2 center{0.5, 0.5};
  const Jet2 j = p.exact_jet(center);
  const std::vector<double> truth{2.0};
  CHECK(std::abs(p.residual(j, center, truth)) <= 1e-7);
  // With the default (wrong) parameter the defect equals the missing half of
  // the diffusion term: -2 pi^2 at the center.
  CHECK(p.residual(j, center, p.lambda_init) ==
        doctest::Approx(-19.739208802178717).epsilon(1e-12));
}

TEST_CASE("evaluation outside the domain is rejected") {
  const std::string path = std::string(RPINN_DATA_DIR) + "/burgers_reference.csv";
  const Jet2 j;
  for (const PdeProblem& p :
       {poisson_peak(), burgers(path), two_peaks(), wave()}) {
    const Vec2 outside{p.domain.hi[0] + 0.5, p.domain.lo[1]};
    CHECK_THROWS_AS(p.residual(j, outside, p.lambda_init), std::domain_error);
    CHECK_THROWS_AS(p.exact(outside), std::domain_error);
    // Points exactly on the boundary are legal.
    CHECK_NOTHROW(p.exact(p.domain.lo));
    CHECK_NOTHROW(p.exact(p.domain.hi));
  }
}

TEST_CASE("problem catalog and segment wiring") {
  const auto names = problem_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "poisson_peak");
  CHECK(names[3] == "wave");

  CHECK_THROWS_AS(make_problem("does_not_exist"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      make_problem("does_not_exist"),
      doctest::Contains("valid names: poisson_peak burgers two_peaks wave"),
      std::invalid_argument);

  for (const std::string& name :
       {std::string("poisson_peak"), std::string("two_peaks"),
        std::string("wave"), std::string("toy_inverse_poisson")}) {
    const PdeProblem p = make_problem(name);
    CHECK(p.name == name);
    REQUIRE(!p.segments.empty());
    REQUIRE(!p.constraints.empty());
    for (const BoundarySegment& s : p.segments) {
      REQUIRE(!s.constraint_ids.empty());
      for (int id : s.constraint_ids) {
        CHECK(id >= 0);
        CHECK(id < static_cast<int>(p.constraints.size()));
      }
      // Both endpoints sit on the domain boundary.
      for (const Vec2& e : {s.a, s.b}) {
        const bool on_edge = e[0] == p.domain.lo[0] || e[0] == p.domain.hi[0] ||
                             e[1] == p.domain.lo[1] || e[1] == p.domain.hi[1];
        CHECK(on_edge);
        CHECK(p.domain.contains(e));
      }
    }
  }

  const PdeProblem w = wave();
  REQUIRE(w.segments.size() == 3);
  CHECK(w.segments[0].constraint_ids == std::vector<int>{0, 1});
  CHECK(w.constraints.size() == 3);
  CHECK(w.constraints[1].name == "initial_velocity");

  const PdeProblem b = burgers(std::string(RPINN_DATA_DIR) +
                               "/burgers_reference.csv");
  CHECK(b.segments.size() == 3);
  CHECK(b.constraints.size() == 2);
  CHECK(!b.exact_jet);
  CHECK(b.lambda_init.empty());
}

TEST_CASE("dual seeding helpers") {
  Jet2 j;
  j.v = 1.5;
  j.g = {2.5, -3.5};
  j.h = {4.5, -5.5, 6.5};
  const DualJet2 d = seeded_dual_jet(j);
  CHECK(d.v.v == 1.5);
  CHECK(d.v.d[0] == 1.0);
  CHECK(d.g[1].v == -3.5);
  CHECK(d.g[1].d[2] == 1.0);
  CHECK(d.h[2].v == 6.5);
  CHECK(d.h[2].d[5] == 1.0);
  CHECK(d.h[2].d[0] == 0.0);

  const std::vector<double> lam{0.5, -0.25};
  const auto lam_d = seeded_dual_params(lam);
  CHECK(lam_d[0].d[6] == 1.0);
  CHECK(lam_d[1].d[7] == 1.0);
  const std::vector<double> too_many{1, 2, 3};
  CHECK_THROWS_AS(seeded_dual_params(too_many), std::invalid_argument);
}

}  // namespace
}  // namespace rpinn
