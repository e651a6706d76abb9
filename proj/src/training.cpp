#include "rpinn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace rpinn {
namespace {

[[noreturn]] void non_finite_error(const char* what, const Vec2& x) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "non-finite %s at point (%.17g, %.17g)", what,
                x[0], x[1]);
  throw std::runtime_error(buf);
}

Jet2 checked_jet(const MlpSpec& net, std::span<const double> params,
                 const Vec2& x, JetWorkspace& ws) {
  const Jet2 j = forward_jet(net, params, x, ws);
  if (!j.finite()) non_finite_error("network output", x);
  return j;
}

void append_csv_row(std::string& out, std::initializer_list<double> vals) {
  char buf[32];
  bool first = true;
  for (double v : vals) {
    if (!first) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
    first = false;
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << contents;
}

}  // namespace

void TrainConfig::validate() const {
  net.validate();
  if (n1 < 1 || n2 < 1 || boundary_count < 1)
    throw std::invalid_argument("collocation counts must be positive");
  if (adaptive_iterations < 0)
    throw std::invalid_argument("adaptive iteration count must be >= 0");
  if (pretrain_epochs < 0 || adaptive_epochs < 0)
    throw std::invalid_argument("epoch counts must be >= 0");
  if (!(w_f >= 0.0 && w_b >= 0.0 && w_i >= 0.0))
    throw std::invalid_argument("loss weights must be >= 0");
  if (mesh_nx < 1 || mesh_ny < 1)
    throw std::invalid_argument("estimator mesh needs at least one cell per axis");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (eval_nx < 2 || eval_ny < 2)
    throw std::invalid_argument("evaluation grid needs at least 2 nodes per axis");
  optimizer.validate();
}

TrainConfig default_config(const std::string& problem_name) {
  TrainConfig cfg;
  if (problem_name == "poisson_peak") {
    cfg.n1 = 4000;
    cfg.n2 = 120;
    cfg.pretrain_epochs = 15000;
    cfg.adaptive_epochs = 10000;
    // The exact solution is near zero outside a tiny peak, so the relative L2
    // error amplifies any constant drift ~25x. A drift has zero Laplacian and
    // is restrained only by the boundary term; weight it accordingly. Heavier
    // weighting (100x) destabilises some random inits at short epoch budgets.
    cfg.w_b = 25.0;
  } else if (problem_name == "burgers") {
    cfg.n1 = 50000;
    cfg.n2 = 500;
    cfg.pretrain_epochs = 15000;
  } else if (problem_name == "two_peaks") {
    cfg.n2 = 150;
    cfg.pretrain_epochs = 10000;
    cfg.net.hidden_layers = 5;
    cfg.net.hidden_width = 64;
    cfg.w_b = 25.0;  // same near-zero-norm metric sensitivity as poisson_peak
  } else if (problem_name == "wave") {
    cfg.n1 = 2000;
    cfg.n2 = 100;
    cfg.pretrain_epochs = 5000;
    cfg.adaptive_epochs = 5000;
    // The estimator mesh must stay coarse relative to the background set:
    // elements without background points make single-element indicator spikes
    // dominate the allocation. 20x20 keeps ~2.5 background points per element
    // at this n1 over the 6x10 space-time rectangle.
    cfg.mesh_nx = 20;
    cfg.mesh_ny = 20;
  }
  return cfg;
}

double loss_pde(const PdeProblem& problem, const MlpSpec& net,
                std::span<const double> params, std::span<const Vec2> points) {
  if (points.empty()) return 0.0;
  const std::span<const double> lam = params.subspan(net.net_param_count());
  double sum = 0.0;
  JetWorkspace ws;
  ws.prepare(net);
  for (const Vec2& x : points) {
    const Jet2 j = checked_jet(net, params, x, ws);
    const double r = problem.residual(j, x, lam);
    if (!std::isfinite(r)) non_finite_error("residual", x);
    sum += r * r;
  }
  return sum / static_cast<double>(points.size());
}

double loss_boundary(const PdeProblem& problem, const MlpSpec& net,
                     std::span<const double> params,
                     std::span<const std::pair<Vec2, int>> points) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  JetWorkspace ws;
  ws.prepare(net);
  for (const auto& [x, cid] : points) {
    if (cid < 0 || cid >= static_cast<int>(problem.constraints.size()))
      throw std::invalid_argument("boundary point with unknown constraint id");
    const Jet2 j = checked_jet(net, params, x, ws);
    const double b = problem.constraints[cid].op(j, x);
    if (!std::isfinite(b)) non_finite_error("constraint value", x);
    sum += b * b;
  }
  return sum / static_cast<double>(points.size());
}

double loss_data(const MlpSpec& net, std::span<const double> params,
                 std::span<const Observation> observations) {
  if (observations.empty()) return 0.0;
  double sum = 0.0;
  for (const Observation& o : observations) {
    const double e = forward(net, params, o.x) - o.value;
    if (!std::isfinite(e)) non_finite_error("observation misfit", o.x);
    sum += e * e;
  }
  return sum / static_cast<double>(observations.size());
}

double total_loss(const PdeProblem& problem, const MlpSpec& net,
                  std::span<const double> params, const CollocationSet& colloc,
                  const TrainConfig& cfg,
                  std::span<const Observation> observations) {
  double total = 0.0;
  if (cfg.w_f != 0.0) {
    std::vector<Vec2> interior(colloc.background);
    interior.insert(interior.end(), colloc.adaptive.begin(),
                    colloc.adaptive.end());
    total += cfg.w_f * loss_pde(problem, net, params, interior);
  }
  if (cfg.w_b != 0.0)
    total += cfg.w_b * loss_boundary(problem, net, params, colloc.boundary);
  if (cfg.w_i != 0.0)
    total += cfg.w_i * loss_data(net, params, observations);
  return total;
}

LossEvaluator::LossEvaluator(const PdeProblem& problem, const MlpSpec& net,
                             CollocationSet points, double w_f, double w_b,
                             double w_i, std::vector<Observation> observations)
    : problem_(&problem),
      net_(net),
      points_(std::move(points)),
      w_f_(w_f),
      w_b_(w_b),
      w_i_(w_i),
      observations_(std::move(observations)) {
  net_.validate();
  if (net_.n_lambda != problem.n_lambda())
    throw std::invalid_argument(
        "network parameter layout disagrees with the problem's trainable "
        "parameter count");
  for (const auto& [x, cid] : points_.boundary)
    if (cid < 0 || cid >= static_cast<int>(problem.constraints.size()))
      throw std::invalid_argument("boundary point with unknown constraint id");
  interior_ = points_.background;
  interior_.insert(interior_.end(), points_.adaptive.begin(),
                   points_.adaptive.end());
  ws_.prepare(net_);
}

double LossEvaluator::operator()(std::span<const double> params,
                                 std::span<double> grad) {
  if (static_cast<int>(params.size()) != net_.param_count() ||
      grad.size() != params.size())
    throw std::invalid_argument("parameter/gradient size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::span<const double> lam = params.subspan(net_.net_param_count());
  double total = 0.0;

  if (w_f_ != 0.0 && !interior_.empty()) {
    const std::vector<Dual> lam_d = seeded_dual_params(lam);
    const double n_f = static_cast<double>(interior_.size());
    double sum = 0.0;
    for (const Vec2& x : interior_) {
      const Jet2 j = checked_jet(net_, params, x, ws_);
      const Dual r = problem_->residual_dual(seeded_dual_jet(j), x, lam_d);
      if (!std::isfinite(r.v)) non_finite_error("residual", x);
      sum += r.v * r.v;
      const double scale = 2.0 * w_f_ * r.v / n_f;
      Jet2 seed;
      seed.v = scale * r.d[0];
      seed.g = {scale * r.d[1], scale * r.d[2]};
      seed.h = {scale * r.d[3], scale * r.d[4], scale * r.d[5]};
      backward_jet(net_, params, ws_, seed, grad);
      for (int i = 0; i < net_.n_lambda; ++i)
        grad[net_.lambda_index(i)] += scale * r.d[6 + i];
    }
    total += w_f_ * sum / n_f;
  }

  if (w_b_ != 0.0 && !points_.boundary.empty()) {
    const double n_b = static_cast<double>(points_.boundary.size());
    double sum = 0.0;
    for (const auto& [x, cid] : points_.boundary) {
      const Jet2 j = checked_jet(net_, params, x, ws_);
      const Dual b =
          problem_->constraints[cid].op_dual(seeded_dual_jet(j), x);
      if (!std::isfinite(b.v)) non_finite_error("constraint value", x);
      sum += b.v * b.v;
      const double scale = 2.0 * w_b_ * b.v / n_b;
      Jet2 seed;
      seed.v = scale * b.d[0];
      seed.g = {scale * b.d[1], scale * b.d[2]};
      seed.h = {scale * b.d[3], scale * b.d[4], scale * b.d[5]};
      backward_jet(net_, params, ws_, seed, grad);
    }
    total += w_b_ * sum / n_b;
  }

  if (w_i_ != 0.0 && !observations_.empty()) {
    const double n_i = static_cast<double>(observations_.size());
    double sum = 0.0;
    for (const Observation& o : observations_) {
      const Jet2 j = checked_jet(net_, params, o.x, ws_);
      const double e = j.v - o.value;
      sum += e * e;
      Jet2 seed;
      seed.v = 2.0 * w_i_ * e / n_i;
      backward_jet(net_, params, ws_, seed, grad);
    }
    total += w_i_ * sum / n_i;
  }

  return total;
}

double LossEvaluator::value(std::span<const double> params) const {
  TrainConfig weights;
  weights.w_f = w_f_;
  weights.w_b = w_b_;
  weights.w_i = w_i_;
  return total_loss(*problem_, net_, params, points_, weights, observations_);
}

LossAndGrad LossEvaluator::loss_fn() {
  return [this](std::span<const double> p, std::span<double> g) {
    return (*this)(p, g);
  };
}

Metrics metrics(const PdeProblem& problem, const MlpSpec& net,
                std::span<const double> params, int eval_nx, int eval_ny) {
  const std::vector<Vec2> grid = grid_2d(problem.domain, eval_nx, eval_ny);
  double num = 0.0, den = 0.0, worst = 0.0;
  for (const Vec2& x : grid) {
    const double u_hat = forward(net, params, x);
    const double u_ref = problem.exact(x);
    const double e = u_hat - u_ref;
    num += e * e;
    den += u_ref * u_ref;
    worst = std::max(worst, std::abs(e));
  }
  Metrics m;
  m.rel_l2 = den > 0.0 ? std::sqrt(num) / std::sqrt(den) : std::sqrt(num);
  m.l_inf = worst;
  return m;
}

std::vector<IterationReport> run_rpinn(const PdeProblem& problem,
                                       const TrainConfig& cfg_in) {
  TrainConfig cfg = cfg_in;
  cfg.net.n_lambda = problem.n_lambda();
  cfg.validate();

  const MlpSpec net = cfg.net;
  const bool writing = !cfg.out_dir.empty();
  if (writing) std::filesystem::create_directories(cfg.out_dir);

  CollocationSet colloc;
  colloc.background.reserve(cfg.n1);
  for (const Vec2& u : sobol_2d(cfg.n1))
    colloc.background.push_back(problem.domain.map_unit(u));
  colloc.boundary = boundary_points(problem.segments, cfg.boundary_count);

  ParamVector params = init_params(net, cfg.seed);
  for (int i = 0; i < net.n_lambda; ++i)
    params[net.lambda_index(i)] = problem.lambda_init[i];

  std::vector<IterationReport> reports;
  std::string trace_csv = "epoch,loss\n";
  int epoch_base = 0;

  auto run_phase = [&](int iteration, int epochs, bool fallback) {
    const auto t0 = std::chrono::steady_clock::now();
    LossEvaluator eval(problem, net, colloc, cfg.w_f, cfg.w_b, cfg.w_i);
    LbfgsResult opt =
        lbfgs_minimize(eval.loss_fn(), std::move(params), epochs, cfg.optimizer);
    params = std::move(opt.params);
    for (std::size_t i = 0; i < opt.trace.size(); ++i) {
      char row[48];
      std::snprintf(row, sizeof row, "%d,%.17g\n",
                    epoch_base + static_cast<int>(i) + 1, opt.trace[i]);
      trace_csv += row;
    }
    epoch_base += opt.iterations;

    IterationReport rep;
    rep.iteration = iteration;
    const Metrics m = metrics(problem, net, params, cfg.eval_nx, cfg.eval_ny);
    rep.rel_l2 = m.rel_l2;
    rep.l_inf = m.l_inf;
    rep.loss = opt.final_loss;
    rep.uniform_fallback = fallback;
    if (writing) {
      rep.points_path =
          cfg.out_dir + "/points_iter" + std::to_string(iteration) + ".csv";
      dump_points_csv(rep.points_path, colloc, iteration, false);
    }
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    reports.push_back(std::move(rep));
  };

  run_phase(0, cfg.pretrain_epochs, false);

  const TriMesh mesh(problem.domain, cfg.mesh_nx, cfg.mesh_ny);
  for (int k = 1; k <= cfg.adaptive_iterations; ++k) {
    const NodalScalarField u_h = interpolate_nodal(
        mesh, [&](Vec2 p) { return forward(net, params, p); });
    const ErrorIndicator eta = estimate(mesh, u_h, cfg.recovery_method);

    Rng rng(cfg.seed * 1000003ull + static_cast<std::uint64_t>(k));
    bool fallback = false;
    try {
      RecadResult drawn = recad(eta, mesh, {cfg.n2, cfg.epsilon}, rng);
      colloc.adaptive = std::move(drawn.points);
    } catch (const std::runtime_error& e) {
      if (std::strstr(e.what(), "no error signal") == nullptr) throw;
      fallback = true;
      std::fprintf(stderr,
                   "iteration %d: %s; using uniform adaptive points\n", k,
                   e.what());
      colloc.adaptive = uniform_random_2d(problem.domain, cfg.n2, rng);
    }
    run_phase(k, cfg.adaptive_epochs, fallback);
  }

  if (writing) {
    std::string reports_csv =
        "iteration,rel_l2,l_inf,loss,seconds,points_csv\n";
    for (const IterationReport& r : reports) {
      char head[16];
      std::snprintf(head, sizeof head, "%d,", r.iteration);
      reports_csv += head;
      append_csv_row(reports_csv, {r.rel_l2, r.l_inf, r.loss, r.seconds});
      reports_csv += ',';
      reports_csv += r.points_path;
      reports_csv += '\n';
    }
    write_file(cfg.out_dir + "/reports.csv", reports_csv);
    write_file(cfg.out_dir + "/loss_trace.csv", trace_csv);
    save_checkpoint(cfg.out_dir + "/params.ckpt", net, params);
  }
  return reports;
}

}  // namespace rpinn
