#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hjdc/field_net.hpp"
#include "hjdc/hamiltonians.hpp"

namespace hjdc {

/// First focus of the harmonic problem, where cot(t + pi/4) blows up.
inline constexpr double kHarmonicPole = 0.75 * 3.14159265358979323846;

/// True when t + pi/4 is within `tol` of a multiple of pi.
bool harmonic_is_pole(double t, double tol = 1e-12);

/// grad u = cot(t + pi/4) x for u = 1/2 cot(t + pi/4) |x|^2. Throws NumericError at a pole.
Vec harmonic_exact_grad(const Vec& x, double t);

/// The harmonic classical solution as a field, with exact second derivatives.
class HarmonicSolutionField final : public ScalarField {
 public:
  explicit HarmonicSolutionField(int dim) : dim_(dim) {}

  int dim() const override { return dim_; }
  double eval(const Vec& x, double t) const override;
  Mat grad_xt_batch(const Mat& X, const Vec& t) const override;
  SecondDerivativesBatch second_derivatives_batch(const Mat& X, const Vec& t) const override;

 private:
  int dim_;
};

/// psi(x, t) = 1/2 x' S(t) x for a time-dependent symmetric matrix with
/// known rate dS/dt.
class QuadraticField final : public ScalarField {
 public:
  using MatrixFn = std::function<Mat(double)>;

  QuadraticField(int dim, MatrixFn S, MatrixFn S_rate)
      : dim_(dim), S_(std::move(S)), S_rate_(std::move(S_rate)) {}

  int dim() const override { return dim_; }
  double eval(const Vec& x, double t) const override;
  Mat grad_xt_batch(const Mat& X, const Vec& t) const override;

 private:
  int dim_;
  MatrixFn S_, S_rate_;
};

/// Characteristic maps of the one-dimensional reductions:
///   CosInitial:        phi_t(xi) = xi - t sin(xi)
///   SinusoidalKinetic: phi_t(xi) = xi + t (tau - sqrt3 sin(sqrt3 xi)), tau = 3
enum class PhiVariant { CosInitial, SinusoidalKinetic };

double phi(PhiVariant v, double t, double xi);
double phi_prime(PhiVariant v, double t, double xi);

struct BranchSet {
  double z = 0.0;
  double t = 0.0;
  std::vector<double> roots;      // increasing
  std::vector<double> jacobians;  // |phi_t'(root)|
  std::vector<bool> degenerate;   // |phi_t'| < 1e-10
};

/// All sign-change roots of phi_t(xi) = z on a 4096-point grid over the
/// variant's window, each refined by 60 bisection steps.
BranchSet invert_phi(double t, double z, PhiVariant v = PhiVariant::CosInitial);

/// Degenerate-endpoint location z_t* = sqrt(t^2 - 1) - arccos(1/t), t > 1.
double caustic_endpoint(double t);

/// Weighted-momentum weak solution d/dz f(z, t) for g = cos z, rho0 = U[-pi, pi].
double weighted_momentum(double t, double z);

/// Classical d/dz f = -sqrt3 sin(sqrt3 phi_t^{-1}(z)) for the sinusoidal-kinetic
/// variant, valid while phi_t is injective (t <= 1/3).
double sinusoidal_kinetic_momentum(double t, double z);

/// Particle-histogram oracle: xi drawn on [-pi, pi] with mass lambda1 on
/// xi < 0 (uniform when lambda1 = 1/2), moved to z = xi - t sin xi, momenta
/// -sin xi averaged per bin of the given width on [-pi, pi].
struct HistogramOracle {
  double lo = 0.0;
  double width = 0.0;
  std::vector<double> mean;
  std::vector<long> count;

  int bin_of(double z) const;
  /// Bin mean at z; NaN for an empty bin.
  double value(double z) const;
};

HistogramOracle caustic_histogram(double t, long n_particles, double bin_width, std::uint64_t seed,
                                  double lambda1 = 0.5);

/// Optimal-control reference through the linear Hamiltonian flow: q_0 = rows of
/// q0 (n x d), p_0 = P1 q_0, states at nodes t_i = i T / steps.
/// In physical time s = T - t the optimal state is x_s = q_{T-s} with control
/// v_s = -R^{-1} B' p_{T-s}.
struct LqcReference {
  double h = 0.0;
  std::vector<Mat> q, p;  // per node, d x n
};

LqcReference lqc_optimal_reference(const LqcSystem& sys, const Mat& q0, double T, int steps);

/// S(t) with p_t = S(t) q_t along the flow from p_0 = P1 q_0; grad u(x, t) = S(t) x.
Mat lqc_value_matrix(const LqcSystem& sys, double t);

/// dS/dt = S A + A'S + Q - S B R^{-1} B' S.
Mat lqc_value_matrix_rate(const LqcSystem& sys, double t);

/// The exact LQC value gradient as a field.
QuadraticField lqc_value_field(const LqcSystem& sys);

}  // namespace hjdc
