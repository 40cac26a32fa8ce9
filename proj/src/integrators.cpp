#include "hjdc/integrators.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "hjdc/parallel.hpp"

namespace hjdc {

PhaseState stormer_verlet_step(const HamiltonianModel& model, const Vec& x, const Vec& p,
                               double h) {
  if (model.structure() != Structure::Separable)
    throw ConfigError("stormer_verlet requires a separable Hamiltonian; '" + model.id() +
                      "' is " + to_string(model.structure()));
  Vec p_half = p - 0.5 * h * model.grad_potential(x);
  Vec x_new = x + h * model.grad_kinetic(p_half);
  Vec p_new = p_half - 0.5 * h * model.grad_potential(x_new);
  return {std::move(x_new), std::move(p_new)};
}

namespace {

// phi_A: the H(q, y) part moves (x, p).
void tao_flow_a(const HamiltonianModel& m, ExtendedState& s, double delta) {
  const Vec dx = m.grad_x(s.q, s.y);
  const Vec dp = m.grad_p(s.q, s.y);
  s.p -= delta * dx;
  s.x += delta * dp;
}

// phi_B: the H(x, p) part moves (q, y).
void tao_flow_b(const HamiltonianModel& m, ExtendedState& s, double delta) {
  const Vec dx = m.grad_x(s.x, s.p);
  const Vec dp = m.grad_p(s.x, s.p);
  s.q += delta * dp;
  s.y -= delta * dx;
}

// phi_C: exact flow of the binding term; rotates (q - x, p - y) by 2 omega delta.
void tao_flow_c(ExtendedState& s, double delta, double omega) {
  const double c = std::cos(2.0 * omega * delta);
  const double sn = std::sin(2.0 * omega * delta);
  const Vec sum_qx = s.q + s.x, sum_py = s.p + s.y;
  const Vec u = s.q - s.x, v = s.p - s.y;
  const Vec u_new = c * u + sn * v;
  const Vec v_new = -sn * u + c * v;
  s.q = 0.5 * (sum_qx + u_new);
  s.x = 0.5 * (sum_qx - u_new);
  s.p = 0.5 * (sum_py + v_new);
  s.y = 0.5 * (sum_py - v_new);
}

}  // namespace

ExtendedState tao_extended_step(const HamiltonianModel& model, const ExtendedState& in, double h,
                                double omega) {
  ExtendedState s = in;
  tao_flow_a(model, s, 0.5 * h);
  tao_flow_b(model, s, 0.5 * h);
  tao_flow_c(s, h, omega);
  tao_flow_b(model, s, 0.5 * h);
  tao_flow_a(model, s, 0.5 * h);
  return s;
}

PhaseState tao_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h,
                    double omega) {
  ExtendedState s{x, p, x, p};
  s = tao_extended_step(model, s, h, omega);
  return {std::move(s.q), std::move(s.p)};
}

PhaseState euler_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h) {
  return {x + h * model.grad_p(x, p), p - h * model.grad_x(x, p)};
}

PhaseState rk4_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h) {
  auto fx = [&](const Vec& a, const Vec& b) { return model.grad_p(a, b); };
  auto fp = [&](const Vec& a, const Vec& b) -> Vec { return -model.grad_x(a, b); };
  const Vec k1x = fx(x, p), k1p = fp(x, p);
  const Vec x2 = x + 0.5 * h * k1x, p2 = p + 0.5 * h * k1p;
  const Vec k2x = fx(x2, p2), k2p = fp(x2, p2);
  const Vec x3 = x + 0.5 * h * k2x, p3 = p + 0.5 * h * k2p;
  const Vec k3x = fx(x3, p3), k3p = fp(x3, p3);
  const Vec x4 = x + h * k3x, p4 = p + h * k3p;
  const Vec k4x = fx(x4, p4), k4p = fp(x4, p4);
  return {x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x),
          p + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)};
}

Mat linear_flow_propagator(const Mat& generator, double h) {
  if (generator.rows() != generator.cols())
    throw ConfigError("linear flow generator must be square");
  const Mat scaled = h * generator;
  return scaled.exp();
}

Vec linear_flow_step(const Mat& generator, const Vec& z, double h) {
  return linear_flow_propagator(generator, h) * z;
}

IntegratorKind parse_integrator(const std::string& name) {
  if (name == "stormer_verlet" || name == "sv") return IntegratorKind::StormerVerlet;
  if (name == "tao") return IntegratorKind::Tao;
  if (name == "linear_flow") return IntegratorKind::LinearFlow;
  if (name == "euler") return IntegratorKind::Euler;
  if (name == "rk4") return IntegratorKind::RK4;
  throw ConfigError("unknown integrator '" + name + "'");
}

std::string to_string(IntegratorKind kind) {
  switch (kind) {
    case IntegratorKind::StormerVerlet:
      return "stormer_verlet";
    case IntegratorKind::Tao:
      return "tao";
    case IntegratorKind::LinearFlow:
      return "linear_flow";
    case IntegratorKind::Euler:
      return "euler";
    case IntegratorKind::RK4:
      return "rk4";
  }
  return "unknown";
}

void check_compatible(const HamiltonianModel& model, IntegratorKind kind) {
  if (kind == IntegratorKind::StormerVerlet && model.structure() != Structure::Separable)
    throw ConfigError("integrator stormer_verlet needs a separable model; '" + model.id() +
                      "' is " + to_string(model.structure()));
  if (kind == IntegratorKind::LinearFlow && model.structure() != Structure::LinearSymplectic)
    throw ConfigError("integrator linear_flow needs a linear model; '" + model.id() + "' is " +
                      to_string(model.structure()));
}

TrajectoryBundle integrate_ensemble(const ModelBundle& mb, const Mat& x0,
                                    const IntegratorSpec& spec, int M, double T,
                                    std::uint64_t seed, int threads) {
  const HamiltonianModel& model = *mb.model;
  const int d = model.dim();
  const int N = static_cast<int>(x0.rows());
  if (N < 1) throw ConfigError("trajectory: N must be at least 1");
  if (M < 1) throw ConfigError("trajectory: M must be at least 1");
  if (!(T > 0)) throw ConfigError("trajectory: T must be positive");
  if (x0.cols() != d)
    throw ConfigError("trajectory: rho0 dimension " + std::to_string(x0.cols()) +
                      " does not match model dimension " + std::to_string(d));
  check_compatible(model, spec.kind);

  TrajectoryBundle b(d, N, M, T / M);
  b.model_id = model.id();
  b.integrator_id = to_string(spec.kind);
  b.seed = seed;

  Mat propagator;
  if (spec.kind == IntegratorKind::LinearFlow)
    propagator = linear_flow_propagator(model.generator(), b.h);

  constexpr int kChunk = 64;
  const int n_chunks = (N + kChunk - 1) / kChunk;
  parallel_tasks(n_chunks, threads, [&](int chunk) {
    const int k_end = std::min(N, (chunk + 1) * kChunk);
    for (int k = chunk * kChunk; k < k_end; ++k) {
      Vec x = x0.row(k).transpose();
      Vec p = mb.initial.grad_g(x);
      b.node(0).col(k) << x, p;
      for (int i = 0; i < M; ++i) {
        switch (spec.kind) {
          case IntegratorKind::StormerVerlet: {
            auto s = stormer_verlet_step(model, x, p, b.h);
            x = std::move(s.x), p = std::move(s.p);
            break;
          }
          case IntegratorKind::Tao: {
            auto s = tao_step(model, x, p, b.h, spec.omega);
            x = std::move(s.x), p = std::move(s.p);
            break;
          }
          case IntegratorKind::Euler: {
            auto s = euler_step(model, x, p, b.h);
            x = std::move(s.x), p = std::move(s.p);
            break;
          }
          case IntegratorKind::RK4: {
            auto s = rk4_step(model, x, p, b.h);
            x = std::move(s.x), p = std::move(s.p);
            break;
          }
          case IntegratorKind::LinearFlow: {
            Vec z(2 * d);
            z << x, p;
            z = propagator * z;
            x = z.head(d), p = z.tail(d);
            break;
          }
        }
        if (!x.allFinite() || !p.allFinite())
          throw NumericError("non-finite state at step " + std::to_string(i + 1) + ", particle " +
                             std::to_string(k));
        b.node(i + 1).col(k) << x, p;
      }
    }
  });
  return b;
}

TrajectoryBundle generate_trajectories(const ModelBundle& model, const SamplerSpec& rho0,
                                       const IntegratorSpec& integrator, int N, int M, double T,
                                       std::uint64_t seed, int threads) {
  if (N < 1) throw ConfigError("trajectory: N must be at least 1");
  if (sampler_dim(rho0) != model.model->dim())
    throw ConfigError("rho0 dimension " + std::to_string(sampler_dim(rho0)) +
                      " does not match model dimension " + std::to_string(model.model->dim()));
  return integrate_ensemble(model, draw(rho0, N, seed), integrator, M, T, seed, threads);
}

}  // namespace hjdc
