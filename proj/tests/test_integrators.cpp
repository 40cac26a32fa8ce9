#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "hjdc/integrators.hpp"
#include "hjdc/rng.hpp"
#include "hjdc/trajectory.hpp"

using namespace hjdc;

namespace {

ModelBundle harmonic(int d) {
  ModelParams p;
  p.dim = d;
  return make_builtin_model("harmonic", p);
}

Vec v1(double a) { return Vec::Constant(1, a); }

// Global error at T = 1 of the scheme on the 1-D oscillator from (1, 0.5).
double global_error(IntegratorKind kind, double h) {
  const auto m = harmonic(1);
  Vec x = v1(1.0), p = v1(0.5);
  const int n = static_cast<int>(std::lround(1.0 / h));
  for (int i = 0; i < n; ++i) {
    PhaseState s;
    switch (kind) {
      case IntegratorKind::StormerVerlet: s = stormer_verlet_step(*m.model, x, p, h); break;
      case IntegratorKind::Tao: s = tao_step(*m.model, x, p, h, 10.0); break;
      case IntegratorKind::Euler: s = euler_step(*m.model, x, p, h); break;
      default: s = rk4_step(*m.model, x, p, h); break;
    }
    x = s.x;
    p = s.p;
  }
  const double xe = std::cos(1.0) + 0.5 * std::sin(1.0), pe = -std::sin(1.0) + 0.5 * std::cos(1.0);
  return std::hypot(x[0] - xe, p[0] - pe);
}

double slope(IntegratorKind kind) {
  const double hs[] = {0.1, 0.05, 0.025, 0.0125};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double h : hs) {
    const double a = std::log(h), b = std::log(global_error(kind, h));
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
}

}  // namespace

TEST_CASE("stormer-verlet hand examples") {
  ModelParams fp;
  fp.velocity = v1(3.0);
  const auto free = make_builtin_model("free_particle", fp);
  auto s = stormer_verlet_step(*free.model, v1(2.0), v1(3.0), 0.1);
  CHECK(s.x[0] == doctest::Approx(2.3).epsilon(1e-15));
  CHECK(s.p[0] == 3.0);

  const auto h = harmonic(1);
  s = stormer_verlet_step(*h.model, v1(1.0), v1(0.0), 0.1);
  CHECK(s.x[0] == doctest::Approx(0.995).epsilon(1e-15));
  CHECK(s.p[0] == doctest::Approx(-0.09975).epsilon(1e-15));
}

TEST_CASE("stormer-verlet is reversible") {
  const auto h = harmonic(3);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    Vec x(3), p(3);
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-5, 5), p[i] = rng.uniform(-5, 5);
    const auto a = stormer_verlet_step(*h.model, x, p, 0.1);
    const auto b = stormer_verlet_step(*h.model, a.x, a.p, -0.1);
    CHECK((b.x - x).norm() <= 1e-12);
    CHECK((b.p - p).norm() <= 1e-12);
  }
}

TEST_CASE("stormer-verlet rejects non-separable models") {
  const auto q = make_builtin_model("nonseparable_quartic");
  CHECK_THROWS_AS(check_compatible(*q.model, IntegratorKind::StormerVerlet), ConfigError);
  CHECK_THROWS_AS(stormer_verlet_step(*q.model, Vec::Zero(10), Vec::Zero(10), 0.1), ConfigError);
}

TEST_CASE("tao step examples") {
  const auto h = harmonic(1);
  const auto s = tao_step(*h.model, v1(0.7), v1(-0.3), 0.01, 10.0);
  CHECK(std::abs(s.x[0] - (0.7 * std::cos(0.01) - 0.3 * std::sin(0.01))) <= 5e-6);
  CHECK(std::abs(s.p[0] - (-0.7 * std::sin(0.01) - 0.3 * std::cos(0.01))) <= 5e-6);

  ModelParams zp;
  zp.velocity = v1(0.0);
  // free particle with zero momentum: a zero vector field
  const auto free = make_builtin_model("free_particle", zp);
  const auto z = tao_step(*free.model, v1(1.25), v1(0.0), 0.1, 10.0);
  CHECK(z.x[0] == 1.25);
  CHECK(z.p[0] == 0.0);

  const auto q = make_builtin_model("nonseparable_quartic");
  Vec x = Vec::Zero(10), p = Vec::Zero(10);
  x[0] = 1.0;
  const double h0 = q.model->eval(x, p);
  for (int i = 0; i < 100; ++i) {
    const auto st = tao_step(*q.model, x, p, 0.01, 10.0);
    x = st.x;
    p = st.p;
  }
  CHECK(std::abs(q.model->eval(x, p) - h0) / std::abs(h0) <= 1e-3);
}

TEST_CASE("linear flow examples") {
  const Mat zero = Mat::Zero(2, 2);
  const Vec z = (Vec(2) << 1, 0).finished();
  CHECK(linear_flow_step(zero, z, 0.3) == z);
  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  const Vec r = linear_flow_step(rot, z, std::numbers::pi / 2);
  CHECK(std::abs(r[0]) <= 1e-12);
  CHECK(std::abs(r[1] + 1.0) <= 1e-12);
}

TEST_CASE("linear flow matches fine RK4 on the pendulum generator") {
  const auto mb = make_builtin_model("lqc_pendulum");
  const Mat& G = mb.model->generator();
  const double h = 0.02;
  for (int k = 0; k < 8; ++k) {
    Vec z = Vec::Zero(8);
    z[k] = 1.0;
    Vec y = z;
    const double dt = h / 100;
    for (int s = 0; s < 100; ++s) {
      const Vec k1 = G * y, k2 = G * (y + 0.5 * dt * k1), k3 = G * (y + 0.5 * dt * k2), k4 = G * (y + dt * k3);
      y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK((linear_flow_step(G, z, h) - y).norm() <= 1e-10);
  }
}

TEST_CASE("euler and rk4 examples") {
  ModelParams fp;
  fp.velocity = v1(1.0);
  const auto free = make_builtin_model("free_particle", fp);
  const auto e = euler_step(*free.model, v1(0.0), v1(1.0), 0.5);
  CHECK(e.x[0] == 0.5);
  CHECK(e.p[0] == 1.0);

  const auto h = harmonic(1);
  const auto r = rk4_step(*h.model, v1(1.0), v1(0.0), 0.1);
  CHECK(std::abs(r.x[0] - std::cos(0.1)) <= 1e-7);
  CHECK(std::abs(r.p[0] + std::sin(0.1)) <= 1e-7);

  Vec x = v1(1.0), p = v1(0.0);
  const double h0 = h.model->eval(x, p);
  const int n = static_cast<int>(std::lround(2 * std::numbers::pi / 0.01));
  for (int i = 0; i < n; ++i) {
    const auto s = euler_step(*h.model, x, p, 0.01);
    x = s.x;
    p = s.p;
  }
  CHECK(h.model->eval(x, p) > h0);
}

TEST_CASE("convergence orders on the oscillator") {
  CHECK(slope(IntegratorKind::StormerVerlet) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(slope(IntegratorKind::Tao) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(slope(IntegratorKind::Euler) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(slope(IntegratorKind::RK4) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("generated bundle matches the documented step") {
  const auto h = harmonic(1);
  const Mat x0 = Mat::Constant(1, 1, 1.0);
  const auto b = integrate_ensemble(h, x0, {}, 1, 0.1, 0);
  CHECK(b.N == 1);
  CHECK(b.M == 1);
  CHECK(b.x(0, 0)[0] == 1.0);
  CHECK(b.p(0, 0)[0] == 1.0);  // grad g(x) = x
  const auto s = stormer_verlet_step(*h.model, v1(1.0), v1(1.0), 0.1);
  CHECK(b.x(1, 0)[0] == s.x[0]);
  CHECK(b.p(1, 0)[0] == s.p[0]);
  CHECK_THROWS_AS(integrate_ensemble(h, x0, {}, 0, 0.1, 0), ConfigError);
}

TEST_CASE("generation is deterministic and thread-independent") {
  const auto h = harmonic(2);
  const SamplerSpec rho0 = GaussianSpec{Vec::Constant(2, 3.0), Vec::Ones(2)};
  const auto a = generate_trajectories(h, rho0, {}, 200, 20, 1.0, 5, 1);
  const auto b = generate_trajectories(h, rho0, {}, 200, 20, 1.0, 5, 4);
  CHECK(a.states == b.states);
  CHECK(a.all_finite());
}

TEST_CASE("HJT1 round-trip and layout") {
  const auto h = harmonic(3);
  const SamplerSpec rho0 = GaussianSpec{Vec::Zero(3), Vec::Ones(3)};
  const auto a = generate_trajectories(h, rho0, {}, 17, 5, 0.5, 9);
  const auto path = std::filesystem::temp_directory_path() / "hjdc_roundtrip.hjt";
  write_trajectories(a, path);
  const auto b = read_trajectories(path);
  CHECK(b.states == a.states);
  CHECK(b.d == 3);
  CHECK(b.N == 17);
  CHECK(b.M == 5);
  CHECK(b.h == a.h);
  CHECK(b.model_id == "harmonic");
  CHECK(b.integrator_id == "stormer_verlet");
  CHECK(b.seed == 9);

  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "HJTRAJB1");
  unsigned char len[4];
  in.read(reinterpret_cast<char*>(len), 4);
  const std::uint32_t L = len[0] | len[1] << 8 | len[2] << 16 | static_cast<std::uint32_t>(len[3]) << 24;
  CHECK(std::filesystem::file_size(path) == 12 + L + 8 * (6 * 17 * 6));
  std::filesystem::remove(path);
}

TEST_CASE("corrupt trajectory files raise I/O errors") {
  const auto path = std::filesystem::temp_directory_path() / "hjdc_bad.hjt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTMAGIC";
  }
  CHECK_THROWS_AS(read_trajectories(path), IoError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_trajectories(path), IoError);
}
