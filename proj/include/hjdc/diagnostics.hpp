#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjdc/field_net.hpp"
#include "hjdc/hamiltonians.hpp"
#include "hjdc/trajectory.hpp"

namespace hjdc {

/// Res(x, t) = |d/dt grad psi + grad^2 psi dH/dp(x, grad psi) + dH/dx(x, grad psi)|,
/// the spatial gradient of the HJ residual of psi.
double residual(const ScalarField& field, const HamiltonianModel& model, const Vec& x, double t);

/// Residual at each column of X (d x n) with times t. Chunked; threads do not
/// change the result.
Vec residual_batch(const ScalarField& field, const HamiltonianModel& model, const Mat& X,
                   const Vec& t, int threads = 1);

using GradOracle = std::function<Vec(const Vec& x, double t)>;

/// Err(x, t) = |grad psi(x, t) - grad u(x, t)|.
double error_field(const ScalarField& field, const GradOracle& oracle, const Vec& x, double t);

/// Per-node training-error curves, i = 0..M, with e_i^k = grad psi(x_i^k, t_i) - p_i^k:
///   eps_i = mean_k |e_i^k|,  mse_i = mean_k |e_i^k|^2,
///   delta_i = mean_k |e_{i+1}^k - e_i^k| / h  (i < M; the last node repeats delta_{M-1}).
struct NodeCurves {
  std::vector<double> t, eps, delta, mse;
};

NodeCurves loss_curves(const ScalarField& field, const TrajectoryBundle& bundle, int threads = 1);

/// Particle mean of Res over the bundle's particles at node i.
double weighted_L1_residual(const ScalarField& field, const HamiltonianModel& model,
                            const TrajectoryBundle& bundle, int i, int threads = 1);

/// Mean H(x, p) per node from the stored momenta.
std::vector<double> energy_curve(const HamiltonianModel& model, const TrajectoryBundle& bundle);

/// Mean H(x, grad psi(x, t)) per node.
std::vector<double> energy_curve(const ScalarField& field, const HamiltonianModel& model,
                                 const TrajectoryBundle& bundle, int threads = 1);

/// max_i |E_i - E_0|.
double max_drift(const std::vector<double>& energy);

/// Points of a uniform n x n grid on the plane of coordinates (i, j) (0-based),
/// other coordinates frozen at `anchor`. Column r * n + c has x_i = lo_i + c
/// step_i and x_j = lo_j + r step_j.
Mat plane_grid(const Vec& anchor, int i, int j, double lo_i, double hi_i, double lo_j, double hi_j,
               int n);

struct Quartiles {
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};

/// Linear-interpolation quantiles of a nonempty sample.
Quartiles quartiles(std::vector<double> values);

}  // namespace hjdc
