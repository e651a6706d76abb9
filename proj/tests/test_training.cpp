#include "rpinn/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "rpinn/lbfgs.hpp"
#include "rpinn/problems.hpp"

using namespace rpinn;

namespace {

// A rectangle-only problem shell; tests fill in the operators they need.
PdeProblem stub_problem() {
  PdeProblem p;
  p.name = "stub";
  p.domain = RectDomain{};
  p.exact = [](const Vec2&) { return 0.0; };
  return p;
}

// Residual that ignores the candidate solution entirely: r(x) = 1 + 2 x0.
void install_affine_residual(PdeProblem& p) {
  p.residual = [](const Jet2&, const Vec2& x, std::span<const double>) {
    return 1.0 + 2.0 * x[0];
  };
  p.residual_dual = [](const DualJet2&, const Vec2& x, std::span<const Dual>) {
    return Dual(1.0 + 2.0 * x[0]);
  };
}

// Residual identically one (still "depends" on u so duals flow through).
void install_unit_residual(PdeProblem& p) {
  p.residual = [](const Jet2& u, const Vec2&, std::span<const double>) {
    return 0.0 * u.v + 1.0;
  };
  p.residual_dual = [](const DualJet2& u, const Vec2&,
                       std::span<const Dual>) { return 0.0 * u.v + 1.0; };
}

void install_unit_constraint(PdeProblem& p) {
  ConstraintOp c;
  c.name = "unit";
  c.op = [](const Jet2& u, const Vec2&) { return 0.0 * u.v + 1.0; };
  c.op_dual = [](const DualJet2& u, const Vec2&) { return 0.0 * u.v + 1.0; };
  p.constraints.push_back(std::move(c));
}

ParamVector zero_params(const MlpSpec& spec) {
  return ParamVector(spec.param_count(), 0.0);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "missing file: " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mean squared residual over interior points") {
  const MlpSpec net{2, 1, 4, 0};
  const ParamVector params = zero_params(net);

  SUBCASE("solution-independent residual averages exactly") {
    PdeProblem p = stub_problem();
    install_affine_residual(p);
    // r = 1 at x0=0 and r = 3 at x0=1: mean of squares (1 + 9)/2 = 5
    const std::vector<Vec2> pts{{0.0, 0.5}, {1.0, 0.5}};
    CHECK(loss_pde(p, net, params, pts) == 5.0);
  }

  SUBCASE("residual u on the zero network is zero") {
    PdeProblem p = stub_problem();
    p.residual = [](const Jet2& u, const Vec2&, std::span<const double>) {
      return u.v;
    };
    p.residual_dual = [](const DualJet2& u, const Vec2&,
                         std::span<const Dual>) { return u.v; };
    const std::vector<Vec2> pts{{0.25, 0.25}, {0.75, 0.75}};
    CHECK(loss_pde(p, net, params, pts) == 0.0);
  }

  SUBCASE("single point gives the squared residual") {
    PdeProblem p = stub_problem();
    p.residual = [](const Jet2& u, const Vec2&, std::span<const double>) {
      return u.h[0] + 7.0;
    };
    p.residual_dual = [](const DualJet2& u, const Vec2&,
                         std::span<const Dual>) { return u.h[0] + 7.0; };
    const std::vector<Vec2> pts{{0.5, 0.5}};
    CHECK(loss_pde(p, net, params, pts) == 49.0);
  }

  SUBCASE("no points means zero loss") {
    PdeProblem p = stub_problem();
    CHECK(loss_pde(p, net, params, {}) == 0.0);
  }
}

TEST_CASE("mean squared constraint defect over boundary points") {
  const MlpSpec net{2, 1, 4, 0};
  const ParamVector params = zero_params(net);
  PdeProblem p = stub_problem();

  ConstraintOp c0;  // defect u - 1 (zero net: -1)
  c0.name = "value";
  c0.op = [](const Jet2& u, const Vec2&) { return u.v - 1.0; };
  c0.op_dual = [](const DualJet2& u, const Vec2&) { return u.v - 1.0; };
  ConstraintOp c1;  // defect u + 3 (zero net: 3)
  c1.name = "other";
  c1.op = [](const Jet2& u, const Vec2&) { return u.v + 3.0; };
  c1.op_dual = [](const DualJet2& u, const Vec2&) { return u.v + 3.0; };
  p.constraints = {c0, c1};

  SUBCASE("empty set") { CHECK(loss_boundary(p, net, params, {}) == 0.0); }

  SUBCASE("single pair") {
    const std::vector<std::pair<Vec2, int>> pts{{{0.0, 0.5}, 0}};
    CHECK(loss_boundary(p, net, params, pts) == 1.0);
  }

  SUBCASE("two pairs with different constraints average") {
    const std::vector<std::pair<Vec2, int>> pts{{{0.0, 0.5}, 0},
                                                {{1.0, 0.5}, 1}};
    CHECK(loss_boundary(p, net, params, pts) == 5.0);
  }

  SUBCASE("unknown constraint id is rejected") {
    const std::vector<std::pair<Vec2, int>> pts{{{0.0, 0.5}, 2}};
    CHECK_THROWS_AS(loss_boundary(p, net, params, pts),
                    std::invalid_argument);
  }
}

TEST_CASE("mean squared observation misfit") {
  const MlpSpec net{2, 1, 4, 0};
  const ParamVector params = zero_params(net);

  CHECK(loss_data(net, params, {}) == 0.0);

  const std::vector<Observation> one{{{0.5, 0.5}, 2.0}};
  CHECK(loss_data(net, params, one) == 4.0);

  const std::vector<Observation> two{{{0.2, 0.3}, 1.0}, {{0.8, 0.9}, 3.0}};
  CHECK(loss_data(net, params, two) == 5.0);
}

TEST_CASE("total loss combines the three terms with their weights") {
  const MlpSpec net{2, 1, 4, 0};
  const ParamVector params = zero_params(net);

  PdeProblem p = stub_problem();
  install_unit_residual(p);
  install_unit_constraint(p);

  CollocationSet colloc;
  colloc.background = {{0.25, 0.25}, {0.5, 0.5}};
  colloc.adaptive = {{0.75, 0.75}};
  colloc.boundary = {{{0.0, 0.5}, 0}, {{1.0, 0.5}, 0}};

  SUBCASE("unit residual and unit defect scale by the weights") {
    TrainConfig cfg;
    cfg.w_f = 2.0;
    cfg.w_b = 3.0;
    cfg.w_i = 0.0;
    CHECK(total_loss(p, net, params, colloc, cfg) == 5.0);
  }

  SUBCASE("zero interior weight skips the residual term entirely") {
    PdeProblem no_res = stub_problem();  // residual left unset on purpose
    install_unit_constraint(no_res);
    TrainConfig cfg;
    cfg.w_f = 0.0;
    cfg.w_b = 3.0;
    cfg.w_i = 0.0;
    CHECK(total_loss(no_res, net, params, colloc, cfg) == 3.0);
  }

  SUBCASE("all weights zero gives zero") {
    TrainConfig cfg;
    cfg.w_f = cfg.w_b = cfg.w_i = 0.0;
    CHECK(total_loss(p, net, params, colloc, cfg) == 0.0);
  }

  SUBCASE("observation term joins with its weight") {
    TrainConfig cfg;
    cfg.w_f = 0.0;
    cfg.w_b = 0.0;
    cfg.w_i = 4.0;
    const std::vector<Observation> obs{{{0.5, 0.5}, 2.0}};
    CHECK(total_loss(p, net, params, colloc, cfg, obs) == 16.0);
  }
}

TEST_CASE("full-batch evaluator") {
  PdeProblem prob = toy_inverse_poisson();
  const MlpSpec net{2, 2, 6, 1};

  CollocationSet colloc;
  for (const Vec2& u : sobol_2d(6)) colloc.background.push_back(u);
  colloc.adaptive = {{0.31, 0.62}, {0.71, 0.18}, {0.45, 0.92}};
  colloc.boundary = boundary_points(prob.segments, 8);

  std::vector<Observation> obs;
  for (const Vec2& u : sobol_2d(5, 11))
    obs.push_back({u, prob.exact(u) + 0.1});

  LossEvaluator eval(prob, net, colloc, 0.7, 1.9, 2.5, obs);

  ParamVector params = init_params(net, 7);
  params[net.lambda_index(0)] = 1.3;

  SUBCASE("gradient matches central finite differences") {
    std::vector<double> grad(params.size(), 0.0);
    eval(params, grad);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      ParamVector p = params;
      p[i] = params[i] + h;
      const double fp = eval.value(p);
      p[i] = params[i] - h;
      const double fm = eval.value(p);
      const double fd = (fp - fm) / (2.0 * h);
      const double rel =
          std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i]));
      worst = std::max(worst, rel);
    }
    CAPTURE(worst);
    CHECK(worst <= 1e-5);
  }

  SUBCASE("gradient path and plain path agree on the loss value") {
    std::vector<double> grad(params.size(), 0.0);
    const double with_grad = eval(params, grad);
    const double plain = eval.value(params);
    CHECK(with_grad == doctest::Approx(plain).epsilon(1e-12));
    CHECK(std::isfinite(with_grad));
    CHECK(with_grad > 0.0);
  }

  SUBCASE("gradient buffer is fully overwritten, not accumulated") {
    std::vector<double> grad(params.size(), 123.0);
    eval(params, grad);
    std::vector<double> grad2(params.size(), -7.0);
    eval(params, grad2);
    for (std::size_t i = 0; i < grad.size(); ++i) CHECK(grad[i] == grad2[i]);
  }

  SUBCASE("non-finite parameters are reported as a runtime error") {
    std::vector<double> grad(params.size(), 0.0);
    params[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(eval(params, grad), std::runtime_error);
  }

  SUBCASE("size mismatches are rejected") {
    std::vector<double> grad(params.size() - 1, 0.0);
    CHECK_THROWS_AS(eval(params, grad), std::invalid_argument);
  }

  SUBCASE("network and problem must agree on trainable parameter count") {
    const MlpSpec plain{2, 2, 6, 0};
    CHECK_THROWS_AS(LossEvaluator(prob, plain, colloc, 1, 1, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("error norms against the reference solution") {
  const MlpSpec net{2, 1, 6, 0};

  SUBCASE("network equal to the reference scores zero") {
    const ParamVector params = init_params(net, 3);
    PdeProblem p = stub_problem();
    p.exact = [net, params](const Vec2& x) { return forward(net, params, x); };
    const Metrics m = metrics(p, net, params, 16, 16);
    CHECK(m.rel_l2 == 0.0);
    CHECK(m.l_inf == 0.0);
  }

  SUBCASE("zero network against a nonzero reference has unit relative error") {
    const ParamVector params = zero_params(net);
    PdeProblem p = stub_problem();
    p.exact = [](const Vec2& x) { return x[0] + 1.0; };
    const Metrics m = metrics(p, net, params, 8, 8);
    CHECK(m.rel_l2 == 1.0);
    CHECK(m.l_inf == 2.0);
  }

  SUBCASE("zero reference falls back to the absolute norm") {
    PdeProblem p = stub_problem();  // exact is identically zero
    const ParamVector zero = zero_params(net);
    CHECK(metrics(p, net, zero, 8, 8).rel_l2 == 0.0);
    CHECK(metrics(p, net, zero, 8, 8).l_inf == 0.0);
    const ParamVector params = init_params(net, 3);
    CHECK(metrics(p, net, params, 8, 8).rel_l2 > 0.0);
  }
}

TEST_CASE("per-benchmark training defaults") {
  const TrainConfig base;

  const TrainConfig p = default_config("poisson_peak");
  CHECK(p.n1 == 4000);
  CHECK(p.n2 == 120);
  CHECK(p.adaptive_iterations == 4);
  CHECK(p.pretrain_epochs == 15000);
  CHECK(p.adaptive_epochs == 10000);
  CHECK(p.net == base.net);
  CHECK(p.w_b == 25.0);

  const TrainConfig b = default_config("burgers");
  CHECK(b.n1 == 50000);
  CHECK(b.n2 == 500);
  CHECK(b.pretrain_epochs == 15000);
  CHECK(b.adaptive_epochs == base.adaptive_epochs);

  const TrainConfig t = default_config("two_peaks");
  CHECK(t.n1 == base.n1);
  CHECK(t.n2 == 150);
  CHECK(t.pretrain_epochs == 10000);
  CHECK(t.net.hidden_layers == 5);
  CHECK(t.net.hidden_width == 64);
  CHECK(t.w_b == 25.0);

  const TrainConfig w = default_config("wave");
  CHECK(w.n1 == 2000);
  CHECK(w.n2 == 100);
  CHECK(w.pretrain_epochs == 5000);
  CHECK(w.adaptive_epochs == 5000);
  CHECK(w.w_b == base.w_b);
  CHECK(w.mesh_nx == 20);  // coarse enough for ~2.5 background points/element
  CHECK(w.mesh_ny == 20);

  // problems without tuned budgets inherit the base configuration
  const TrainConfig d = default_config("toy_inverse_poisson");
  CHECK(d.n1 == base.n1);
  CHECK(d.n2 == base.n2);
  CHECK(d.pretrain_epochs == base.pretrain_epochs);
}

TEST_CASE("training configuration validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  auto rejects = [](auto&& tweak) {
    TrainConfig c;
    tweak(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  rejects([](TrainConfig& c) { c.n1 = 0; });
  rejects([](TrainConfig& c) { c.n2 = 0; });
  rejects([](TrainConfig& c) { c.boundary_count = 0; });
  rejects([](TrainConfig& c) { c.adaptive_iterations = -1; });
  rejects([](TrainConfig& c) { c.pretrain_epochs = -1; });
  rejects([](TrainConfig& c) { c.w_f = -1.0; });
  rejects([](TrainConfig& c) { c.mesh_nx = 0; });
  rejects([](TrainConfig& c) { c.epsilon = 0.0; });
  rejects([](TrainConfig& c) { c.epsilon = 1.0; });
  rejects([](TrainConfig& c) { c.eval_nx = 1; });
  rejects([](TrainConfig& c) { c.net.hidden_layers = 0; });
  rejects([](TrainConfig& c) { c.optimizer.learning_rate = 0.0; });
}

TEST_CASE("adaptive training loop") {
  PdeProblem prob = poisson_peak();

  TrainConfig cfg;
  cfg.net = MlpSpec{2, 2, 10, 0};
  cfg.n1 = 40;
  cfg.n2 = 10;
  cfg.boundary_count = 16;
  cfg.mesh_nx = cfg.mesh_ny = 8;
  cfg.eval_nx = cfg.eval_ny = 32;
  cfg.seed = 3;

  SUBCASE("no adaptive iterations yields exactly the pre-training report") {
    cfg.adaptive_iterations = 0;
    cfg.pretrain_epochs = 5;
    const auto reports = run_rpinn(prob, cfg);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].iteration == 0);
    CHECK(std::isfinite(reports[0].loss));
    CHECK(std::isfinite(reports[0].rel_l2));
    CHECK(reports[0].rel_l2 > 0.0);
    CHECK(reports[0].points_path.empty());
    CHECK(reports[0].seconds >= 0.0);
    CHECK_FALSE(reports[0].uniform_fallback);
  }

  SUBCASE("repeated runs are bit-for-bit identical") {
    cfg.adaptive_iterations = 1;
    cfg.pretrain_epochs = 10;
    cfg.adaptive_epochs = 10;

    const std::string dir_a = std::string(RPINN_BIN_DIR) + "/train_repro_a";
    const std::string dir_b = std::string(RPINN_BIN_DIR) + "/train_repro_b";
    cfg.out_dir = dir_a;
    const auto ra = run_rpinn(prob, cfg);
    cfg.out_dir = dir_b;
    const auto rb = run_rpinn(prob, cfg);

    REQUIRE(ra.size() == 2);
    REQUIRE(rb.size() == 2);
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(ra[i].iteration == rb[i].iteration);
      CHECK(ra[i].rel_l2 == rb[i].rel_l2);
      CHECK(ra[i].l_inf == rb[i].l_inf);
      CHECK(ra[i].loss == rb[i].loss);
      CHECK(ra[i].uniform_fallback == rb[i].uniform_fallback);
    }
    CHECK(ra[1].points_path == dir_a + "/points_iter1.csv");
    CHECK(read_file(dir_a + "/points_iter0.csv") ==
          read_file(dir_b + "/points_iter0.csv"));
    CHECK(read_file(dir_a + "/points_iter1.csv") ==
          read_file(dir_b + "/points_iter1.csv"));
    CHECK(read_file(dir_a + "/params.ckpt") ==
          read_file(dir_b + "/params.ckpt"));
    CHECK(read_file(dir_a + "/loss_trace.csv") ==
          read_file(dir_b + "/loss_trace.csv"));

    // error should not blow up across the adaptive round
    CHECK(std::isfinite(ra[1].rel_l2));

    SUBCASE("emitted csv files parse and are internally consistent") {
      std::istringstream reports_csv(read_file(dir_a + "/reports.csv"));
      std::string line;
      REQUIRE(static_cast<bool>(std::getline(reports_csv, line)));
      CHECK(line == "iteration,rel_l2,l_inf,loss,seconds,points_csv");
      int rows = 0;
      while (std::getline(reports_csv, line)) {
        int iter = -1;
        double rel = 0, linf = 0, loss = 0, secs = 0;
        char path[256] = {0};
        REQUIRE(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%255s", &iter,
                            &rel, &linf, &loss, &secs, path) == 6);
        CHECK(iter == rows);
        CHECK(std::isfinite(rel));
        CHECK(std::isfinite(loss));
        CHECK(secs >= 0.0);
        ++rows;
      }
      CHECK(rows == 2);

      std::istringstream trace_csv(read_file(dir_a + "/loss_trace.csv"));
      REQUIRE(static_cast<bool>(std::getline(trace_csv, line)));
      CHECK(line == "epoch,loss");
      int prev_epoch = 0;
      while (std::getline(trace_csv, line)) {
        int epoch = 0;
        double loss = 0;
        REQUIRE(std::sscanf(line.c_str(), "%d,%lf", &epoch, &loss) == 2);
        CHECK(epoch == prev_epoch + 1);
        CHECK(std::isfinite(loss));
        prev_epoch = epoch;
      }
      CHECK(prev_epoch >= 1);
      CHECK(prev_epoch <= 20);

      const auto ckpt = load_checkpoint(dir_a + "/params.ckpt");
      CHECK(ckpt.first == cfg.net);
      CHECK(static_cast<int>(ckpt.second.size()) == cfg.net.param_count());
    }
  }
}

TEST_CASE("trainable PDE parameter is identified from data") {
  PdeProblem prob = toy_inverse_poisson();
  const MlpSpec net{2, 2, 16, 1};

  CollocationSet colloc;
  for (const Vec2& u : sobol_2d(200)) colloc.background.push_back(u);
  colloc.boundary = boundary_points(prob.segments, 40);

  std::vector<Observation> obs;
  for (const Vec2& x : grid_2d(prob.domain, 10, 10))
    obs.push_back({x, prob.exact(x)});

  LossEvaluator eval(prob, net, colloc, 1.0, 1.0, 1.0, obs);

  ParamVector params = init_params(net, 11);
  params[net.lambda_index(0)] = prob.lambda_init[0];

  const LbfgsResult fit =
      lbfgs_minimize(eval.loss_fn(), std::move(params), 1000);
  const double lambda = fit.params[net.lambda_index(0)];
  CAPTURE(lambda);
  CAPTURE(fit.final_loss);
  CHECK(std::abs(lambda - 2.0) <= 0.05);
  CHECK(fit.final_loss < 5e-3);
}
