#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hjdc/diagnostics.hpp"
#include "hjdc/integrators.hpp"
#include "hjdc/reference_solutions.hpp"
#include "hjdc/rng.hpp"

using namespace hjdc;

namespace {

// psi = c . x, so grad psi = c everywhere.
class LinearField final : public ScalarField {
 public:
  explicit LinearField(Vec c) : c_(std::move(c)) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  double eval(const Vec& x, double) const override { return c_.dot(x); }
  Mat grad_xt_batch(const Mat& X, const Vec&) const override {
    Mat out = Mat::Zero(X.rows() + 1, X.cols());
    out.topRows(X.rows()).colwise() = c_;
    return out;
  }

 private:
  Vec c_;
};

ModelBundle harmonic(int d) {
  ModelParams p;
  p.dim = d;
  return make_builtin_model("harmonic", p);
}

}  // namespace

TEST_CASE("residual of the exact harmonic solution vanishes") {
  const auto m = harmonic(2);
  const HarmonicSolutionField f(2);
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const Vec x = (Vec(2) << rng.uniform(-6, 6), rng.uniform(-6, 6)).finished();
    const double t = rng.uniform(0, 2.2);
    CHECK(residual(f, *m.model, x, t) <= 1e-6);
  }
  // FD second derivatives of the same field agree with the exact ones.
  const Mat X = Mat::Random(2, 5) * 3;
  const Vec T = Vec::Constant(5, 0.6);
  const auto exact = f.second_derivatives_batch(X, T);
  const auto fd = fd_second_derivatives(f, X, T);
  CHECK((exact.hessians - fd.hessians).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((exact.dt_grad - fd.dt_grad).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("zero field residual and error") {
  const auto m = harmonic(2);
  const LinearField zero(Vec::Zero(2));
  const Vec x = (Vec(2) << 3, -4).finished();
  CHECK(residual(zero, *m.model, x, 0.7) == doctest::Approx(5.0));
  const GradOracle oracle = [](const Vec& y, double t) { return harmonic_exact_grad(y, t); };
  CHECK(error_field(zero, oracle, x, 0.0) == doctest::Approx(5.0));
  const HarmonicSolutionField exact(2);
  CHECK(error_field(exact, oracle, x, 1.1) <= 1e-14);
}

TEST_CASE("loss curves for perfect and shifted fields") {
  TrajectoryBundle b(2, 20, 4, 0.25);
  Rng rng(2);
  const Vec c = (Vec(2) << 0.3, -0.4).finished();
  for (int i = 0; i <= 4; ++i)
    for (int k = 0; k < 20; ++k) {
      b.node(i)(0, k) = rng.normal();
      b.node(i)(1, k) = rng.normal();
      b.node(i).col(k).tail(2) = c;
    }
  const auto perfect = loss_curves(LinearField(c), b);
  for (int i = 0; i <= 4; ++i) {
    CHECK(perfect.eps[i] == 0.0);
    CHECK(perfect.delta[i] == 0.0);
    CHECK(perfect.mse[i] == 0.0);
  }
  const auto off = loss_curves(LinearField(c + Vec::Constant(2, 0.5)), b);
  for (int i = 0; i <= 4; ++i) {
    CHECK(off.eps[i] == doctest::Approx(0.5 * std::sqrt(2.0)));
    CHECK(off.delta[i] == 0.0);
    CHECK(off.eps[i] <= std::sqrt(off.mse[i]) + 1e-15);
    CHECK(off.t[i] == b.time(i));
  }
}

TEST_CASE("weighted L1 residual is the particle mean of the residual") {
  const auto m = harmonic(2);
  const auto b = generate_trajectories(m, GaussianSpec{Vec::Zero(2), Vec::Ones(2)}, {}, 64, 3, 0.3, 4);
  const LinearField zero(Vec::Zero(2));
  const auto node = b.node(2);
  double mean_norm = 0;
  for (int k = 0; k < b.N; ++k) mean_norm += node.col(k).head(2).norm();
  CHECK(weighted_L1_residual(zero, *m.model, b, 2) == doctest::Approx(mean_norm / b.N).epsilon(1e-14));
  const HarmonicSolutionField f(2);
  CHECK(weighted_L1_residual(f, *m.model, b, 2) <= 1e-6);
  const Vec r = residual_batch(f, *m.model, node.topRows(2), Vec::Constant(b.N, b.time(2)), 3);
  CHECK(weighted_L1_residual(f, *m.model, b, 2, 2) == r.mean());
}

TEST_CASE("energy curves") {
  const auto lqc = make_builtin_model("lqc_pendulum");
  const auto b = generate_trajectories(lqc, GaussianSpec{Vec::Zero(4), Vec::Constant(4, 0.04)},
                                       {IntegratorKind::LinearFlow, 10}, 50, 20, 2.0, 1);
  const auto e = energy_curve(*lqc.model, b);
  for (double v : e) CHECK(std::abs(v - e[0]) <= 1e-10 * std::max(1.0, std::abs(e[0])));

  const auto kep = make_builtin_model("kepler");
  const auto kb = generate_trajectories(kep, GaussianSpec{Vec::Constant(2, -3.0), Vec::Constant(2, 0.25)}, {}, 200,
                                        300, 9.0, 2);
  const auto ke = energy_curve(*kep.model, kb);
  CHECK(max_drift(ke) / std::abs(ke[0]) <= 1e-3);
  // bounded oscillation: the second half drifts no more than the first
  const std::vector<double> first(ke.begin(), ke.begin() + 151), second(ke.begin() + 150, ke.end());
  CHECK(max_drift(second) <= 3 * max_drift(first));

  // field mode with a perfect field equals bundle mode: p is constant for free particles
  ModelParams fp;
  fp.velocity = (Vec(2) << 0.5, 0).finished();
  const auto free = make_builtin_model("free_particle", fp);
  const auto fb = generate_trajectories(free, GaussianSpec{Vec::Zero(2), Vec::Ones(2)}, {}, 30, 5, 1.0, 3);
  CHECK(energy_curve(LinearField(*fp.velocity), *free.model, fb) == energy_curve(*free.model, fb));
}

TEST_CASE("plane grid layout and quartiles") {
  const Vec anchor = (Vec(3) << 7, 8, 9).finished();
  const Mat P = plane_grid(anchor, 0, 2, -1, 1, 0, 4, 3);
  REQUIRE(P.cols() == 9);
  CHECK(P(0, 1) == 0.0);
  CHECK(P(2, 1) == 0.0);
  CHECK(P(2, 3) == 2.0);
  CHECK(P(1, 5) == 8.0);
  const auto q = quartiles({4, 1, 3, 2, 5});
  CHECK(q.median == 3.0);
  CHECK(q.q25 == 2.0);
  CHECK(q.q75 == 4.0);
}
