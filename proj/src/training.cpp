#include "hjdc/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "hjdc/parallel.hpp"
#include "hjdc/rng.hpp"

namespace hjdc {

void TrainPlan::validate(int N, int M) const {
  if (!(lr > 0)) throw ConfigError("train.lr must be positive");
  if (n_iter < 0) throw ConfigError("train.n_iter must be non-negative");
  if (batch < 1) throw ConfigError("train.batch must be at least 1");
  if (batch > N)
    throw ConfigError("train.batch (" + std::to_string(batch) + ") exceeds particle count N (" +
                      std::to_string(N) + ")");
  if (M_T < 1) throw ConfigError("train.M_T must be at least 1");
  if (M % M_T != 0)
    throw ConfigError("train.M_T (" + std::to_string(M_T) + ") must divide M (" +
                      std::to_string(M) + ")");
  if (M_T > 1 && M / M_T < 2)
    throw ConfigError("train.M_T leaves the first subinterval without a training node");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && eps_adam > 0))
    throw ConfigError("train: Adam constants out of range");
}

void adam_step(AdamState& s, Vec& params, const Vec& grad, const TrainPlan& plan) {
  if (s.m.size() != params.size()) s = AdamState(params.size());
  ++s.step;
  s.m = plan.beta1 * s.m + (1.0 - plan.beta1) * grad;
  s.v = plan.beta2 * s.v + (1.0 - plan.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(plan.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(plan.beta2, static_cast<double>(s.step));
  params.array() -= plan.lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + plan.eps_adam);
}

int node_interval(int i, int M, int M_T) {
  return std::min(static_cast<int>(static_cast<long long>(i) * M_T / M), M_T - 1);
}

namespace {

constexpr int kChunk = 256;

// Per-chunk scratch matrices exceed glibc's default mmap threshold; without
// this every loss evaluation maps and unmaps fresh pages.
void keep_scratch_in_heap() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    return true;
  }();
  (void)once;
#endif
}

}  // namespace

LossAndGrad batch_loss(const FieldNetwork& net, const TrajectoryBundle& bundle, int first_node,
                       int last_node, const std::vector<int>& particles, LossKind kind,
                       const HamiltonianModel* model, int threads) {
  const int d = bundle.d;
  const int B = static_cast<int>(particles.size());
  const int n_nodes = last_node - first_node + 1;
  const long total = static_cast<long>(B) * n_nodes;
  if (total == 0) throw ConfigError("loss: empty batch");
  const double normalizer = static_cast<double>(total);
  const int n_chunks = static_cast<int>((total + kChunk - 1) / kChunk);
  std::vector<LossAndGrad> parts(n_chunks);
  parallel_tasks(n_chunks, threads, [&](int c) {
    const long lo = static_cast<long>(c) * kChunk;
    const long hi = std::min(total, lo + kChunk);
    RegressionBatch rb{Mat(d, hi - lo), Vec(hi - lo), Mat(d, hi - lo)};
    for (long s = lo; s < hi; ++s) {
      const int i = first_node + static_cast<int>(s / B);
      const int k = particles[s % B];
      const auto col = bundle.node(i).col(k);
      rb.x.col(s - lo) = col.head(d);
      rb.p.col(s - lo) = col.tail(d);
      rb.t[s - lo] = bundle.time(i);
    }
    parts[c] = net.loss_and_grad(rb, normalizer, kind, model);
  });
  LossAndGrad out = std::move(parts[0]);
  for (int c = 1; c < n_chunks; ++c) {
    out.loss += parts[c].loss;
    out.grad += parts[c].grad;
  }
  return out;
}

TrainResult train(const TrajectoryBundle& bundle, const NetShape& shape, std::uint64_t net_seed,
                  const TrainPlan& plan, const HamiltonianModel* model, int threads,
                  const TrainProgress& progress) {
  if (bundle.N < 1 || bundle.M < 1) throw ConfigError("train: empty trajectory bundle");
  keep_scratch_in_heap();
  if (shape.d != bundle.d)
    throw ConfigError("train: network dimension " + std::to_string(shape.d) +
                      " does not match trajectory dimension " + std::to_string(bundle.d));
  plan.validate(bundle.N, bundle.M);
  if (plan.loss_kind == LossKind::Bregman && model == nullptr)
    throw ConfigError("train: bregman loss needs the Hamiltonian model");

  const int M = bundle.M, M_T = plan.M_T, l = M / M_T;
  std::vector<double> edges(M_T + 1);
  for (int k = 0; k < M_T; ++k) edges[k] = bundle.time(k * l);
  edges[M_T] = bundle.time(M);

  std::vector<FieldNetwork> nets;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(plan.n_iter) * M_T);
  std::vector<int> perm(bundle.N);

  for (int k = 0; k < M_T; ++k) {
    FieldNetwork net = FieldNetwork::he_init(shape, derive_seed(net_seed, k));
    const int first = std::max(1, k * l);
    const int last = k == M_T - 1 ? M : (k + 1) * l - 1;
    Rng rng(derive_seed(plan.seed, k));
    AdamState adam(net.params().size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> picked(plan.batch);
    for (int it = 0; it < plan.n_iter; ++it) {
      // Partial Fisher-Yates: the first `batch` slots are a uniform draw
      // without replacement.
      for (int j = 0; j < plan.batch; ++j) {
        const int r = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(bundle.N - j)));
        std::swap(perm[j], perm[r]);
        picked[j] = perm[j];
      }
      auto lg = batch_loss(net, bundle, first, last, picked, plan.loss_kind, model, threads);
      if (!std::isfinite(lg.loss) || !lg.grad.allFinite())
        throw NumericError("non-finite loss at iteration " + std::to_string(it) +
                           " of subinterval " + std::to_string(k));
      history.push_back(lg.loss);
      if (progress) progress(k, it, lg.loss);
      adam_step(adam, net.params(), lg.grad, plan);
    }
    nets.push_back(std::move(net));
  }
  return {PiecewiseField(std::move(edges), std::move(nets)), std::move(history)};
}

}  // namespace hjdc
