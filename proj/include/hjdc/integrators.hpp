#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hjdc/hamiltonians.hpp"
#include "hjdc/sampling.hpp"
#include "hjdc/trajectory.hpp"

namespace hjdc {

struct PhaseState {
  Vec x, p;
};

/// Kick-drift-kick for separable H = K(p) + V(x). Symplectic and symmetric,
/// so a negative h runs the map backwards.
PhaseState stormer_verlet_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h);

/// Tao's extended phase space (q, p, x, y): two copies of the system bound by
/// omega (|q - x|^2 + |p - y|^2) / 2.
struct ExtendedState {
  Vec q, p, x, y;
};

ExtendedState tao_extended_step(const HamiltonianModel& model, const ExtendedState& s, double h,
                                double omega);

/// One second-order Tao step started from q = x = x_in, p = y = p_in; returns (q, p).
PhaseState tao_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h,
                    double omega);

PhaseState euler_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h);
PhaseState rk4_step(const HamiltonianModel& model, const Vec& x, const Vec& p, double h);

/// exp(h * generator), by scaling and squaring of a Pade approximant.
Mat linear_flow_propagator(const Mat& generator, double h);

Vec linear_flow_step(const Mat& generator, const Vec& z, double h);

enum class IntegratorKind { StormerVerlet, Tao, LinearFlow, Euler, RK4 };

struct IntegratorSpec {
  IntegratorKind kind = IntegratorKind::StormerVerlet;
  double omega = 10.0;  // Tao binding strength
};

IntegratorKind parse_integrator(const std::string& name);
std::string to_string(IntegratorKind kind);

/// Throws ConfigError if the scheme needs structure the model lacks.
void check_compatible(const HamiltonianModel& model, IntegratorKind kind);

/// Integrates every particle from (x0_k, grad g(x0_k)) over M steps of h = T / M.
/// x0 is N x d. Output is identical for any thread count.
TrajectoryBundle integrate_ensemble(const ModelBundle& model, const Mat& x0,
                                    const IntegratorSpec& integrator, int M, double T,
                                    std::uint64_t seed, int threads = 1);

/// Draws N initial positions from rho0 with `seed`, then integrate_ensemble.
TrajectoryBundle generate_trajectories(const ModelBundle& model, const SamplerSpec& rho0,
                                       const IntegratorSpec& integrator, int N, int M, double T,
                                       std::uint64_t seed, int threads = 1);

}  // namespace hjdc
