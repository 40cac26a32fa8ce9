#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hjdc/field_net.hpp"
#include "hjdc/trajectory.hpp"

namespace hjdc {

struct TrainPlan {
  double lr = 1e-4;
  int n_iter = 1000;  // per subinterval
  int batch = 1200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  int M_T = 1;
  LossKind loss_kind = LossKind::Quadratic;
  std::uint64_t seed = 0;

  /// Checks the plan against a bundle with N particles and M steps.
  void validate(int N, int M) const;
};

struct AdamState {
  Vec m, v;
  long step = 0;

  explicit AdamState(Eigen::Index n = 0) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}
};

/// Bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, Vec& params, const Vec& grad, const TrainPlan& plan);

struct TrainResult {
  PiecewiseField field;
  std::vector<double> loss_history;  // intervals back to back
};

using TrainProgress = std::function<void(int interval, int iter, double loss)>;

/// Time node i (1..M) of the bundle belongs to subinterval min(i M_T / M, M_T - 1).
int node_interval(int i, int M, int M_T);

/// Fits one freshly He-initialized network per subinterval. Network k uses
/// seed derive_seed(net_seed, k); batches come from derive_seed(plan.seed, k).
/// Each iteration draws `batch` particles without replacement and uses them at
/// every training node of the subinterval; node 0 never enters the loss.
TrainResult train(const TrajectoryBundle& bundle, const NetShape& shape, std::uint64_t net_seed,
                  const TrainPlan& plan, const HamiltonianModel* model = nullptr,
                  int threads = 1, const TrainProgress& progress = {});

/// Mean training loss over nodes first..last (inclusive) and a fixed particle
/// set, with its gradient. Reduction order is fixed, so the result does not
/// depend on `threads`.
LossAndGrad batch_loss(const FieldNetwork& net, const TrajectoryBundle& bundle, int first_node,
                       int last_node, const std::vector<int>& particles, LossKind kind,
                       const HamiltonianModel* model, int threads);

}  // namespace hjdc
