#include "doctest.h"

#include <cmath>

#include "hjdc/hamiltonians.hpp"
#include "hjdc/rng.hpp"

using namespace hjdc;

namespace {

Vec random_vec(Rng& rng, int d, double scale) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

// Central differences of H in x and p, step relative to the coordinate.
std::pair<Vec, Vec> fd_partials(const HamiltonianModel& m, const Vec& x, const Vec& p) {
  const int d = m.dim();
  Vec gx(d), gp(d);
  for (int i = 0; i < d; ++i) {
    const double hx = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vec a = x, b = x;
    a[i] += hx;
    b[i] -= hx;
    gx[i] = (m.eval(a, p) - m.eval(b, p)) / (2 * hx);
    const double hp = 1e-6 * std::max(1.0, std::abs(p[i]));
    Vec c = p, e = p;
    c[i] += hp;
    e[i] -= hp;
    gp[i] = (m.eval(x, c) - m.eval(x, e)) / (2 * hp);
  }
  return {gx, gp};
}

double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

ModelParams small_params(const std::string& name) {
  ModelParams p;
  if (name == "sinusoidal_potential") p.dim = 6, p.i1 = 2, p.i2 = 5;
  if (name == "nonseparable_quartic") p.dim = 5;
  if (name == "harmonic") p.dim = 3;
  if (name == "degenerate_kinetic") p.dim = 4;
  return p;
}

}  // namespace

TEST_CASE("harmonic values at a hand-picked state") {
  const auto mb = make_builtin_model("harmonic", small_params("harmonic"));
  ModelParams p2;
  p2.dim = 2;
  const auto h2 = make_builtin_model("harmonic", p2).model;
  const Vec x = (Vec(2) << 1, 0).finished(), p = (Vec(2) << 0, 1).finished();
  CHECK(h2->eval(x, p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((h2->grad_x(x, p) - x).norm() == 0.0);
  CHECK((h2->grad_p(x, p) - p).norm() == 0.0);
  CHECK(mb.model->structure() == Structure::Separable);
}

TEST_CASE("nonseparable quartic at the origin") {
  const auto m = make_builtin_model("nonseparable_quartic", small_params("nonseparable_quartic")).model;
  const Vec z = Vec::Zero(5);
  CHECK(m->eval(z, z) == 0.5);
  CHECK(m->grad_x(z, z).norm() == 0.0);
  CHECK(m->grad_p(z, z).norm() == 0.0);
}

TEST_CASE("kepler energy and singular state") {
  const auto m = make_builtin_model("kepler").model;
  const Vec x = (Vec(2) << -3, -3).finished(), p = (Vec(2) << 0.5, 0).finished();
  CHECK(m->eval(x, p) == doctest::Approx(0.125 - 1.0 / (3.0 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK_THROWS_AS(m->eval(Vec::Zero(2), p), NumericError);
  CHECK_THROWS_AS(m->grad_x(Vec::Zero(2), p), NumericError);
}

TEST_CASE("unknown model and bad dimension are rejected") {
  CHECK_THROWS_AS(make_builtin_model("no_such_model"), ConfigError);
  ModelParams p;
  p.dim = 0;
  CHECK_THROWS_AS(make_builtin_model("harmonic", p), ConfigError);
  p.dim = -2;
  CHECK_THROWS_AS(make_builtin_model("nonseparable_quartic", p), ConfigError);
}

TEST_CASE("analytic partials match central differences") {
  Rng rng(11);
  for (const char* name : {"harmonic", "degenerate_kinetic", "sinusoidal_potential", "nonseparable_quartic",
                           "kepler", "lqc_pendulum", "free_particle"}) {
    CAPTURE(name);
    const auto mb = make_builtin_model(name, small_params(name));
    const auto& m = *mb.model;
    for (int s = 0; s < 100; ++s) {
      Vec x = random_vec(rng, m.dim(), 10.0);
      if (std::string(name) == "kepler" && x.norm() < 0.5) x.array() += 1.0;
      const Vec p = random_vec(rng, m.dim(), 10.0);
      const auto [gx, gp] = fd_partials(m, x, p);
      CHECK(rel_err(m.grad_x(x, p), gx) <= 1e-7);
      CHECK(rel_err(m.grad_p(x, p), gp) <= 1e-7);
      if (m.structure() == Structure::Separable)
        CHECK(m.eval(x, p) == m.kinetic(p) + m.potential(x));
    }
  }
}

TEST_CASE("initial-condition gradients match central differences") {
  Rng rng(12);
  for (const char* name : {"harmonic", "degenerate_kinetic", "sinusoidal_potential", "nonseparable_quartic",
                           "kepler", "lqc_pendulum"}) {
    CAPTURE(name);
    const auto mb = make_builtin_model(name, small_params(name));
    const int d = mb.model->dim();
    for (int s = 0; s < 20; ++s) {
      const Vec x = random_vec(rng, d, 5.0);
      Vec fd(d);
      for (int i = 0; i < d; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        Vec a = x, b = x;
        a[i] += h;
        b[i] -= h;
        fd[i] = (mb.initial.g(a) - mb.initial.g(b)) / (2 * h);
      }
      CHECK(rel_err(mb.initial.grad_g(x), fd) <= 1e-7);
    }
  }
}

TEST_CASE("degenerate kinetic matches its closed form") {
  ModelParams p;
  p.dim = 3;
  const auto m = make_builtin_model("degenerate_kinetic", p).model;
  const Vec x = Vec::Zero(3), q = (Vec(3) << 1, 2, -0.5).finished();
  const double s = q.sum() / std::sqrt(3.0);
  CHECK(m->eval(x, q) == doctest::Approx(0.5 * s * s + 3.0 * s).epsilon(1e-14));
}

TEST_CASE("bregman divergence examples") {
  ModelParams p2;
  p2.dim = 2;
  const auto h = make_builtin_model("harmonic", p2).model;
  const Vec q1 = (Vec(2) << 1, 0).finished(), q2 = (Vec(2) << 0, 1).finished();
  CHECK(bregman_divergence(*h, (Vec(2) << 4, -1).finished(), q1, Vec::Zero(2)) == doctest::Approx(0.5));
  const auto quartic = make_builtin_model("nonseparable_quartic", p2).model;
  CHECK(bregman_divergence(*quartic, Vec::Zero(2), q1, q2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bregman properties on random inputs") {
  Rng rng(13);
  for (const char* name : {"harmonic", "degenerate_kinetic", "sinusoidal_potential", "nonseparable_quartic"}) {
    CAPTURE(name);
    const auto m = make_builtin_model(name, small_params(name)).model;
    const int d = m->dim();
    for (int s = 0; s < 1000; ++s) {
      const Vec x = random_vec(rng, d, 5.0), q1 = random_vec(rng, d, 5.0), q2 = random_vec(rng, d, 5.0);
      CHECK(bregman_divergence(*m, x, q1, q2) >= -1e-12);
      CHECK(bregman_divergence(*m, x, q1, q1) == 0.0);
    }
  }
  for (const char* name : {"harmonic", "sinusoidal_potential"}) {
    const auto m = make_builtin_model(name, small_params(name)).model;
    const int d = m->dim();
    for (int s = 0; s < 1000; ++s) {
      const Vec x = random_vec(rng, d, 5.0), q1 = random_vec(rng, d, 5.0), q2 = random_vec(rng, d, 5.0);
      const double half_sq = 0.5 * (q1 - q2).squaredNorm();
      CHECK(std::abs(bregman_divergence(*m, x, q1, q2) - half_sq) <= 1e-12 * std::max(1.0, half_sq));
      // f = f* = |.|^2 / 2: D(q1 : q2) = f(q1) + f*(q2) - q1 . q2
      const double legendre = 0.5 * q1.squaredNorm() + 0.5 * q2.squaredNorm() - q1.dot(q2);
      CHECK(std::abs(half_sq - legendre) <= 1e-12 * std::max(1.0, half_sq));
    }
  }
}

TEST_CASE("pendulum system has the expected structure") {
  const LqcSystem sys = pendulum_lqc_system({});
  CHECK(sys.dim() == 4);
  CHECK(sys.Q.isApprox(sys.P1));
  CHECK(sys.Q.diagonal().isApprox((Vec(4) << 1, 0, 1, 0).finished()));
  CHECK(sys.R(0, 0) == 1.0);
  // g(x) = x' P1 x / 2
  const auto mb = make_builtin_model("lqc_pendulum");
  const Vec x = (Vec(4) << 1, 2, 3, 4).finished();
  CHECK(mb.initial.g(x) == doctest::Approx(0.5 * (1 + 9)));
}
