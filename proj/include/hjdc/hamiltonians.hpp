#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "hjdc/common.hpp"

namespace hjdc {

enum class Structure { Separable, LinearSymplectic, General };

const char* to_string(Structure s);

/// A Hamiltonian H(x, p) on R^d x R^d with exact partial derivatives.
///
/// Models are immutable after construction and may be evaluated from any
/// number of threads. Separable models additionally expose their kinetic and
/// potential parts; linear models expose the generator of their flow.
class HamiltonianModel {
 public:
  HamiltonianModel(std::string id, int dim);
  virtual ~HamiltonianModel() = default;

  const std::string& id() const { return id_; }
  int dim() const { return dim_; }

  virtual Structure structure() const = 0;
  virtual double eval(const Vec& x, const Vec& p) const = 0;
  virtual Vec grad_x(const Vec& x, const Vec& p) const = 0;
  virtual Vec grad_p(const Vec& x, const Vec& p) const = 0;

  // Separable structure only; the base versions throw.
  virtual double kinetic(const Vec& p) const;
  virtual double potential(const Vec& x) const;
  virtual Vec grad_kinetic(const Vec& p) const;
  virtual Vec grad_potential(const Vec& x) const;

  // LinearSymplectic structure only: d/dt (x, p) = generator * (x, p).
  virtual const Mat& generator() const;

 private:
  std::string id_;
  int dim_;
};

using ModelPtr = std::shared_ptr<const HamiltonianModel>;

/// H(x, p) = K(p) + V(x).
class SeparableHamiltonian final : public HamiltonianModel {
 public:
  using ScalarFn = std::function<double(const Vec&)>;
  using VectorFn = std::function<Vec(const Vec&)>;

  SeparableHamiltonian(std::string id, int dim, ScalarFn kinetic, VectorFn grad_kinetic,
                       ScalarFn potential, VectorFn grad_potential);

  Structure structure() const override { return Structure::Separable; }
  double eval(const Vec& x, const Vec& p) const override;
  Vec grad_x(const Vec& x, const Vec& p) const override;
  Vec grad_p(const Vec& x, const Vec& p) const override;

  double kinetic(const Vec& p) const override { return kinetic_(p); }
  double potential(const Vec& x) const override { return potential_(x); }
  Vec grad_kinetic(const Vec& p) const override { return grad_kinetic_(p); }
  Vec grad_potential(const Vec& x) const override { return grad_potential_(x); }

 private:
  ScalarFn kinetic_;
  VectorFn grad_kinetic_;
  ScalarFn potential_;
  VectorFn grad_potential_;
};

/// Matrices of a linear-quadratic control problem
///   min  int 1/2 v'Rv + 1/2 x'Qx  +  1/2 x_T' P1 x_T,   x' = Ax + Bv.
struct LqcSystem {
  Mat A, B, Q, R, P1;

  int dim() const { return static_cast<int>(A.rows()); }
  void validate() const;
};

/// Time-reversed LQC Hamiltonian
///   H(x, p) = 1/2 (B'p)' R^{-1} (B'p) - p'Ax - 1/2 x'Qx
/// whose characteristics are the linear system [[-A, BR^{-1}B'], [Q, A']].
class LqcHamiltonian final : public HamiltonianModel {
 public:
  LqcHamiltonian(std::string id, LqcSystem sys);

  Structure structure() const override { return Structure::LinearSymplectic; }
  double eval(const Vec& x, const Vec& p) const override;
  Vec grad_x(const Vec& x, const Vec& p) const override;
  Vec grad_p(const Vec& x, const Vec& p) const override;
  const Mat& generator() const override { return generator_; }

  const LqcSystem& system() const { return sys_; }

 private:
  LqcSystem sys_;
  Mat control_gain_;  // B R^{-1} B'
  Mat generator_;
};

/// H(x, p) = 1/2 (|x|^2 + 1)(|p|^2 + 1).
class QuarticHamiltonian final : public HamiltonianModel {
 public:
  explicit QuarticHamiltonian(int dim);

  Structure structure() const override { return Structure::General; }
  double eval(const Vec& x, const Vec& p) const override;
  Vec grad_x(const Vec& x, const Vec& p) const override;
  Vec grad_p(const Vec& x, const Vec& p) const override;
};

struct InitialCondition {
  std::function<double(const Vec&)> g;
  std::function<Vec(const Vec&)> grad_g;
};

struct PendulumConstants {
  double cart_mass = 1.0;
  double bob_mass = 0.1;
  double length = 1.0;
  double gravity = 9.8;
};

/// Linearized cart-pole with Q = P1 = diag(1, 0, 1, 0), R = 1.
LqcSystem pendulum_lqc_system(const PendulumConstants& c);

/// Per-model knobs. Unset optionals fall back to the model's own default.
struct ModelParams {
  std::optional<int> dim;
  std::optional<double> tau;        // degenerate_kinetic drift strength
  std::optional<double> frequency;  // degenerate_kinetic: g = amplitude * cos(frequency * eta'x)
  std::optional<double> amplitude;
  std::optional<int> i1, i2;        // sinusoidal_potential coordinates, 1-based
  std::optional<Vec> velocity;      // kepler / free_particle: g = v'x
  PendulumConstants pendulum;
};

struct ModelBundle {
  ModelPtr model;
  InitialCondition initial;
};

/// Builtin names: harmonic, degenerate_kinetic, sinusoidal_potential,
/// nonseparable_quartic, kepler, lqc_pendulum, free_particle.
ModelBundle make_builtin_model(const std::string& name, const ModelParams& params = {});

bool is_builtin_model(const std::string& name);

/// D_{H,x}(q1 : q2) = H(x,q1) - H(x,q2) - dH/dp(x,q2) . (q1 - q2).
double bregman_divergence(const HamiltonianModel& model, const Vec& x, const Vec& q1,
                          const Vec& q2);

/// Threshold below which the Kepler model reports a singular state.
inline constexpr double kKeplerSingularRadius = 1e-8;

}  // namespace hjdc
