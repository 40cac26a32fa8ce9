#include "hjdc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "hjdc/parallel.hpp"

namespace hjdc {

namespace {

constexpr int kChunk = 64;

Vec residual_chunk(const ScalarField& field, const HamiltonianModel& model, const Mat& X,
                   const Vec& t) {
  const int d = field.dim();
  const Mat g = field.grad_x_batch(X, t);
  const auto sd = field.second_derivatives_batch(X, t);
  Vec out(X.cols());
  for (Eigen::Index b = 0; b < X.cols(); ++b) {
    const Vec x = X.col(b), q = g.col(b);
    const Vec r = sd.dt_grad.col(b) + sd.hessians.middleCols(b * d, d) * model.grad_p(x, q) +
                  model.grad_x(x, q);
    out[b] = r.norm();
  }
  return out;
}

}  // namespace

double residual(const ScalarField& field, const HamiltonianModel& model, const Vec& x, double t) {
  return residual_chunk(field, model, x, Vec::Constant(1, t))[0];
}

Vec residual_batch(const ScalarField& field, const HamiltonianModel& model, const Mat& X,
                   const Vec& t, int threads) {
  if (X.rows() != field.dim() || X.rows() != model.dim())
    throw ConfigError("residual: point dimension does not match field and model");
  const auto n = X.cols();
  Vec out(n);
  const int n_chunks = static_cast<int>((n + kChunk - 1) / kChunk);
  parallel_tasks(n_chunks, threads, [&](int c) {
    const Eigen::Index lo = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index m = std::min<Eigen::Index>(kChunk, n - lo);
    out.segment(lo, m) = residual_chunk(field, model, X.middleCols(lo, m), t.segment(lo, m));
  });
  return out;
}

double error_field(const ScalarField& field, const GradOracle& oracle, const Vec& x, double t) {
  return (field.grad_x(x, t) - oracle(x, t)).norm();
}

NodeCurves loss_curves(const ScalarField& field, const TrajectoryBundle& b, int threads) {
  if (field.dim() != b.d) throw ConfigError("loss_curves: field and bundle dimensions differ");
  const int d = b.d;
  std::vector<Mat> err(b.M + 1);
  parallel_tasks(b.M + 1, threads, [&](int i) {
    const auto node = b.node(i);
    err[i] = field.grad_x_batch(node.topRows(d), Vec::Constant(b.N, b.time(i))) - node.bottomRows(d);
  });
  NodeCurves c;
  for (int i = 0; i <= b.M; ++i) {
    c.t.push_back(b.time(i));
    c.eps.push_back(err[i].colwise().norm().mean());
    c.mse.push_back(err[i].colwise().squaredNorm().mean());
  }
  for (int i = 0; i < b.M; ++i) c.delta.push_back((err[i + 1] - err[i]).colwise().norm().mean() / b.h);
  c.delta.push_back(c.delta.back());
  return c;
}

double weighted_L1_residual(const ScalarField& field, const HamiltonianModel& model,
                            const TrajectoryBundle& b, int i, int threads) {
  if (i < 0 || i > b.M) throw ConfigError("weighted_L1_residual: node index out of range");
  const auto node = b.node(i);
  return residual_batch(field, model, node.topRows(b.d), Vec::Constant(b.N, b.time(i)), threads).mean();
}

std::vector<double> energy_curve(const HamiltonianModel& model, const TrajectoryBundle& b) {
  std::vector<double> e;
  for (int i = 0; i <= b.M; ++i) {
    double s = 0.0;
    for (int k = 0; k < b.N; ++k) s += model.eval(b.x(i, k), b.p(i, k));
    e.push_back(s / b.N);
  }
  return e;
}

std::vector<double> energy_curve(const ScalarField& field, const HamiltonianModel& model,
                                 const TrajectoryBundle& b, int threads) {
  std::vector<double> e(b.M + 1);
  parallel_tasks(b.M + 1, threads, [&](int i) {
    const auto node = b.node(i);
    const Mat g = field.grad_x_batch(node.topRows(b.d), Vec::Constant(b.N, b.time(i)));
    double s = 0.0;
    for (int k = 0; k < b.N; ++k) s += model.eval(node.col(k).head(b.d), g.col(k));
    e[i] = s / b.N;
  });
  return e;
}

double max_drift(const std::vector<double>& energy) {
  double m = 0.0;
  for (double v : energy) m = std::max(m, std::abs(v - energy.front()));
  return m;
}

Mat plane_grid(const Vec& anchor, int i, int j, double lo_i, double hi_i, double lo_j, double hi_j,
               int n) {
  if (n < 2) throw ConfigError("grid: need at least 2 points per side");
  if (i < 0 || j < 0 || i >= anchor.size() || j >= anchor.size() || i == j)
    throw ConfigError("grid: plane coordinates out of range");
  Mat X(anchor.size(), static_cast<Eigen::Index>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      auto col = X.col(static_cast<Eigen::Index>(r) * n + c);
      col = anchor;
      col[i] = lo_i + (hi_i - lo_i) * c / (n - 1);
      col[j] = lo_j + (hi_j - lo_j) * r / (n - 1);
    }
  return X;
}

Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) throw ConfigError("quartiles: empty sample");
  std::sort(v.begin(), v.end());
  auto q = [&](double f) {
    const double pos = f * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

}  // namespace hjdc
