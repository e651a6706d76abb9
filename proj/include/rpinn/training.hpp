#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rpinn/lbfgs.hpp"
#include "rpinn/network.hpp"
#include "rpinn/problems.hpp"
#include "rpinn/recovery.hpp"
#include "rpinn/sampling.hpp"

namespace rpinn {

struct TrainConfig {
  MlpSpec net;                  // architecture; n_lambda is set per problem
  int n1 = 2000;                // background collocation points
  int n2 = 100;                 // adaptive points drawn per iteration
  int adaptive_iterations = 4;  // M
  int pretrain_epochs = 5000;
  int adaptive_epochs = 5000;   // per adaptive iteration
  int boundary_count = 200;     // split across all constraint segments
  double w_f = 1.0;             // interior-residual weight
  double w_b = 1.0;             // boundary/initial-condition weight
  double w_i = 1.0;             // observation-misfit weight
  int mesh_nx = 50, mesh_ny = 50;  // background estimator mesh
  double epsilon = 0.02;           // indicator subset shrink factor
  RecoveryMethod recovery_method = RecoveryMethod::WeightedAveraging;
  LbfgsSettings optimizer;
  std::uint64_t seed = 1;
  int eval_nx = 256, eval_ny = 256;  // metric evaluation grid
  std::string out_dir;  // when nonempty, write csv/checkpoint outputs here

  void validate() const;
};

// Budgets used for the published benchmark runs of each problem; any other
// name gets the plain defaults.
TrainConfig default_config(const std::string& problem_name);

struct Observation {
  Vec2 x;
  double value = 0.0;
};

struct IterationReport {
  int iteration = 0;  // 0 = pre-training phase
  double rel_l2 = 0.0;
  double l_inf = 0.0;
  double loss = 0.0;        // final training loss of the phase
  std::string points_path;  // collocation dump ("" when not writing files)
  double seconds = 0.0;     // wall clock spent in the phase
  bool uniform_fallback = false;  // adaptive draw lacked an error signal
};

// Mean squared PDE residual over the points (via second-order jets).
// Throws std::runtime_error naming the point on a non-finite residual.
double loss_pde(const PdeProblem& problem, const MlpSpec& net,
                std::span<const double> params, std::span<const Vec2> points);

// Mean squared constraint defect over all (point, constraint-id) pairs.
double loss_boundary(const PdeProblem& problem, const MlpSpec& net,
                     std::span<const double> params,
                     std::span<const std::pair<Vec2, int>> points);

// Mean squared misfit between the network and observed values.
double loss_data(const MlpSpec& net, std::span<const double> params,
                 std::span<const Observation> observations);

// w_f * (residual term over background ∪ adaptive jointly) + w_b * boundary
// term + w_i * observation term; empty point sets contribute zero.
double total_loss(const PdeProblem& problem, const MlpSpec& net,
                  std::span<const double> params, const CollocationSet& colloc,
                  const TrainConfig& cfg,
                  std::span<const Observation> observations = {});

// Full-batch loss with its parameter gradient, sharing one jet workspace
// across points; the objective fed to the optimizer. Parameter vectors carry
// the network weights followed by any trainable PDE parameters.
class LossEvaluator {
 public:
  LossEvaluator(const PdeProblem& problem, const MlpSpec& net,
                CollocationSet points, double w_f, double w_b, double w_i,
                std::vector<Observation> observations = {});

  // loss at params; writes d loss / d params into grad (fully overwritten)
  double operator()(std::span<const double> params, std::span<double> grad);

  // loss only, via the plain evaluation path
  double value(std::span<const double> params) const;

  // adapter bound to this evaluator (which must outlive the optimizer call)
  LossAndGrad loss_fn();

  const CollocationSet& points() const { return points_; }

 private:
  const PdeProblem* problem_;
  MlpSpec net_;
  CollocationSet points_;
  double w_f_, w_b_, w_i_;
  std::vector<Observation> observations_;
  std::vector<Vec2> interior_;  // background ∪ adaptive, in that order
  JetWorkspace ws_;
};

struct Metrics {
  double rel_l2 = 0.0;
  double l_inf = 0.0;
};

// Both error norms of the network against the problem's reference solution,
// approximated on an inclusive uniform eval_nx x eval_ny grid.
Metrics metrics(const PdeProblem& problem, const MlpSpec& net,
                std::span<const double> params, int eval_nx = 256,
                int eval_ny = 256);

// The full adaptive training loop: Sobol background + boundary points,
// pre-training, then `adaptive_iterations` rounds of estimate → redistribute
// → retrain (optimizer state starts fresh each phase; the adaptive set is
// replaced each round). Returns one report per phase, pre-training first.
// When the indicator carries no signal the round falls back to uniform
// adaptive points and says so in the report. With out_dir set, writes
// reports.csv, loss_trace.csv, points_iterK.csv and params.ckpt.
std::vector<IterationReport> run_rpinn(const PdeProblem& problem,
                                       const TrainConfig& cfg);

}  // namespace rpinn
