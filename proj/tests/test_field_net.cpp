#include "doctest.h"

#include <cmath>

#include "hjdc/field_net.hpp"
#include "hjdc/hamiltonians.hpp"
#include "hjdc/rng.hpp"

using namespace hjdc;

namespace {

// L = 3, width 1, d = 1: A1 = (1, 0), b1 = 0, A2 = 1, b2 = 0, A3 = 1.
FieldNetwork hand_net() {
  NetShape s;
  s.d = 1;
  s.depth = 3;
  s.width = 1;
  FieldNetwork net(s);
  net.weight(1)(0, 0) = 1.0;
  net.weight(2)(0, 0) = 1.0;
  net.weight(3)(0, 0) = 1.0;
  return net;
}

NetShape shape(int d, int depth, int width, Activation a = Activation::Tanh) {
  NetShape s;
  s.d = d;
  s.depth = depth;
  s.width = width;
  s.activation = a;
  return s;
}

}  // namespace

TEST_CASE("parameter count formula") {
  CHECK(shape(2, 3, 4).param_count() == 40);
  const NetShape s = shape(30, 6, 50);
  CHECK(s.param_count() == static_cast<std::size_t>(4 * 2500 + 50 * 32 + 5 * 50));
  CHECK(FieldNetwork::he_init(s, 1).params().size() == static_cast<Eigen::Index>(s.param_count()));
  CHECK_THROWS_AS(shape(2, 2, 4).validate(), ConfigError);
}

TEST_CASE("he initialization statistics and determinism") {
  const NetShape s = shape(2, 3, 10000);
  const auto a = FieldNetwork::he_init(s, 5), b = FieldNetwork::he_init(s, 5);
  CHECK(a.params() == b.params());
  const auto A1 = a.weight(1);
  const double mean = A1.mean();
  const double sd = std::sqrt((A1.array() - mean).square().sum() / (A1.size() - 1.0));
  CHECK(std::abs(sd - std::sqrt(2.0 / 3.0)) / std::sqrt(2.0 / 3.0) < 0.05);
  CHECK(a.bias(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero network") {
  const FieldNetwork net(shape(3, 4, 5));
  const Vec x = Vec::Constant(3, 0.7);
  CHECK(net.eval(x, 0.3) == 0.0);
  CHECK(net.grad_x(x, 0.3).norm() == 0.0);
  const auto sd = net.second_derivatives(x, 0.3);
  CHECK(sd.hessian.norm() == 0.0);
  CHECK(sd.dt_grad.norm() == 0.0);
}

TEST_CASE("hand-built network value and derivatives") {
  const FieldNetwork net = hand_net();
  const Vec x = Vec::Constant(1, 0.5);
  // tanh(1.5 tanh(0.5)) evaluated independently
  CHECK(net.eval(x, 0.0) == doctest::Approx(0.6000182751).epsilon(1e-9));
  const double h1 = std::tanh(0.5), h2 = std::tanh(1.5 * h1);
  const double g = (1 - h2 * h2) * 1.5 * (1 - h1 * h1);
  CHECK(net.grad_x(x, 0.0)[0] == doctest::Approx(0.7549639).epsilon(1e-6));
  CHECK(net.grad_x(x, 0.0)[0] == doctest::Approx(g).epsilon(1e-14));
  CHECK(net.grad_xt(x, 0.0).second == 0.0);  // A1 ignores t

  // d2/dx2 by hand: psi = tanh(1.5 tanh(x))
  const double s1 = 1 - h1 * h1, s2 = 1 - h2 * h2;
  const double hess = -2 * h2 * s2 * (1.5 * s1) * (1.5 * s1) + s2 * 1.5 * (-2 * h1 * s1);
  CHECK(std::abs(net.second_derivatives(x, 0.0).hessian(0, 0) - hess) <= 1e-6);  // finite differences
}

TEST_CASE("spatial gradients match central differences") {
  Rng rng(21);
  for (Activation a : {Activation::Tanh, Activation::Sin, Activation::Softplus}) {
    for (int n = 0; n < 20; ++n) {
      const int d = 1 + n % 4;
      NetShape s = shape(d, 3 + n % 3, 7, a);
      const auto net = FieldNetwork::he_init(s, 100 + n);
      for (int s = 0; s < 5; ++s) {
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = rng.uniform(-2, 2);
        const double t = rng.uniform(0, 2);
        const auto [g, gt] = net.grad_xt(x, t);
        Vec fd(d);
        for (int i = 0; i < d; ++i) {
          Vec a1 = x, b1 = x;
          a1[i] += 1e-5;
          b1[i] -= 1e-5;
          fd[i] = (net.eval(a1, t) - net.eval(b1, t)) / 2e-5;
        }
        const double fdt = (net.eval(x, t + 1e-5) - net.eval(x, t - 1e-5)) / 2e-5;
        CHECK((g - fd).norm() / std::max(1e-3, fd.norm()) <= 1e-6);
        CHECK(std::abs(gt - fdt) / std::max(1e-3, std::abs(fdt)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("loss gradient matches central differences") {
  Rng rng(22);
  for (int n = 0; n < 10; ++n) {
    const int d = 1 + n % 3;
    auto net = FieldNetwork::he_init(shape(d, 3 + n % 2, 5), 200 + n);
    RegressionBatch b{Mat(d, 6), Vec(6), Mat(d, 6)};
    for (int k = 0; k < 6; ++k) {
      for (int i = 0; i < d; ++i) b.x(i, k) = rng.uniform(-2, 2), b.p(i, k) = rng.uniform(-1, 1);
      b.t[k] = rng.uniform(0, 1);
    }
    const auto lg = loss_value_and_param_grad(net, b);
    Vec& th = net.params();
    for (Eigen::Index j = 0; j < th.size(); ++j) {
      const double keep = th[j];
      th[j] = keep + 1e-5;
      const double up = loss_value_and_param_grad(net, b).loss;
      th[j] = keep - 1e-5;
      const double dn = loss_value_and_param_grad(net, b).loss;
      th[j] = keep;
      const double fd = (up - dn) / 2e-5;
      if (std::abs(lg.grad[j]) > 1e-8) CHECK(std::abs(lg.grad[j] - fd) / std::abs(lg.grad[j]) <= 1e-5);
    }
  }
}

TEST_CASE("loss is zero at its own targets") {
  const auto net = FieldNetwork::he_init(shape(2, 4, 6), 3);
  RegressionBatch b{Mat::Random(2, 5), Vec::LinSpaced(5, 0, 1), Mat()};
  b.p = net.grad_x_batch(b.x, b.t);
  const auto lg = loss_value_and_param_grad(net, b);
  CHECK(lg.loss <= 1e-28);
  CHECK(lg.grad.norm() <= 1e-13);

  const FieldNetwork zero(shape(2, 4, 6));
  RegressionBatch z{Mat::Random(2, 5), Vec::Zero(5), Mat::Zero(2, 5)};
  const auto lz = loss_value_and_param_grad(zero, z);
  CHECK(lz.loss == 0.0);
  CHECK(lz.grad.norm() == 0.0);
  CHECK_THROWS_AS(loss_value_and_param_grad(zero, RegressionBatch{Mat(2, 0), Vec(0), Mat(2, 0)}), ConfigError);
}

TEST_CASE("bregman loss is half the quadratic loss for quadratic kinetic energy") {
  ModelParams p;
  p.dim = 2;
  const auto model = make_builtin_model("harmonic", p).model;
  const auto net = FieldNetwork::he_init(shape(2, 4, 6), 8);
  RegressionBatch b{Mat::Random(2, 7), Vec::LinSpaced(7, 0, 1), Mat::Random(2, 7)};
  const auto q = loss_value_and_param_grad(net, b, LossKind::Quadratic);
  const auto br = loss_value_and_param_grad(net, b, LossKind::Bregman, model.get());
  CHECK(std::abs(br.loss - 0.5 * q.loss) <= 1e-12);
  CHECK((br.grad - 0.5 * q.grad).norm() <= 1e-12 * std::max(1.0, q.grad.norm()));
}

TEST_CASE("second derivatives are symmetric and relu is rejected") {
  const auto net = FieldNetwork::he_init(shape(3, 5, 8), 4);
  const auto sd = net.second_derivatives(Vec::Constant(3, 0.2), 0.4);
  CHECK((sd.hessian - sd.hessian.transpose()).norm() <= 1e-10);
  const auto relu = FieldNetwork::he_init(shape(3, 4, 8, Activation::Relu), 4);
  CHECK_FALSE(relu.twice_differentiable());
  CHECK_THROWS_AS(relu.second_derivatives(Vec::Zero(3), 0.0), ConfigError);
}

TEST_CASE("piecewise dispatch is left-closed") {
  const NetShape s = shape(1, 3, 4);
  std::vector<FieldNetwork> nets{FieldNetwork::he_init(s, 1), FieldNetwork::he_init(s, 2)};
  const PiecewiseField f(PiecewiseField::uniform_edges(2.0, 2), nets);
  const Vec x = Vec::Constant(1, 0.3);
  CHECK(f.interval_of(0.0) == 0);
  CHECK(f.interval_of(1.0) == 1);
  CHECK(f.interval_of(2.0) == 1);
  CHECK(f.eval(x, 1.0) == nets[1].eval(x, 1.0));
  CHECK(f.eval(x, 0.5) == nets[0].eval(x, 0.5));
}

TEST_CASE("model JSON round-trips bitwise") {
  const NetShape s = shape(2, 4, 5, Activation::Sin);
  std::vector<FieldNetwork> nets{FieldNetwork::he_init(s, 9), FieldNetwork::he_init(s, 10)};
  const PiecewiseField f({0.0, 0.3, 1.0}, nets);
  const PiecewiseField g = field_from_json(nlohmann::json::parse(to_json(f).dump()));
  REQUIRE(g.intervals() == 2);
  CHECK(g.edges() == f.edges());
  for (int k = 0; k < 2; ++k) {
    CHECK(g.net(k).params() == f.net(k).params());
    CHECK(g.net(k).shape() == f.net(k).shape());
  }
  CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"schema":"other"})")), ConfigError);
}
