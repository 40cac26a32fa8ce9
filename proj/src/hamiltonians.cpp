#include "hjdc/hamiltonians.hpp"

#include <cmath>
#include <utility>

namespace hjdc {

const char* to_string(Structure s) {
  switch (s) {
    case Structure::Separable:
      return "separable";
    case Structure::LinearSymplectic:
      return "linear";
    case Structure::General:
      return "general";
  }
  return "unknown";
}

HamiltonianModel::HamiltonianModel(std::string id, int dim) : id_(std::move(id)), dim_(dim) {
  if (dim <= 0) throw ConfigError("hamiltonian dimension must be positive, got " + std::to_string(dim));
}

namespace {
[[noreturn]] void not_separable(const std::string& id) {
  throw std::logic_error("model '" + id + "' is not separable");
}
}  // namespace

double HamiltonianModel::kinetic(const Vec&) const { not_separable(id_); }
double HamiltonianModel::potential(const Vec&) const { not_separable(id_); }
Vec HamiltonianModel::grad_kinetic(const Vec&) const { not_separable(id_); }
Vec HamiltonianModel::grad_potential(const Vec&) const { not_separable(id_); }
const Mat& HamiltonianModel::generator() const {
  throw std::logic_error("model '" + id_ + "' has no linear generator");
}

SeparableHamiltonian::SeparableHamiltonian(std::string id, int dim, ScalarFn kinetic,
                                           VectorFn grad_kinetic, ScalarFn potential,
                                           VectorFn grad_potential)
    : HamiltonianModel(std::move(id), dim),
      kinetic_(std::move(kinetic)),
      grad_kinetic_(std::move(grad_kinetic)),
      potential_(std::move(potential)),
      grad_potential_(std::move(grad_potential)) {}

double SeparableHamiltonian::eval(const Vec& x, const Vec& p) const {
  return kinetic_(p) + potential_(x);
}
Vec SeparableHamiltonian::grad_x(const Vec& x, const Vec&) const { return grad_potential_(x); }
Vec SeparableHamiltonian::grad_p(const Vec&, const Vec& p) const { return grad_kinetic_(p); }

void LqcSystem::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw ConfigError("LQC: A must be square and nonempty");
  if (B.rows() != n) throw ConfigError("LQC: B must have as many rows as A");
  if (Q.rows() != n || Q.cols() != n) throw ConfigError("LQC: Q must match A");
  if (P1.rows() != n || P1.cols() != n) throw ConfigError("LQC: P1 must match A");
  if (R.rows() != B.cols() || R.cols() != B.cols()) throw ConfigError("LQC: R must be m x m");
}

LqcHamiltonian::LqcHamiltonian(std::string id, LqcSystem sys)
    : HamiltonianModel(std::move(id), static_cast<int>(sys.A.rows())), sys_(std::move(sys)) {
  sys_.validate();
  const int d = dim();
  control_gain_ = sys_.B * sys_.R.ldlt().solve(sys_.B.transpose());
  generator_.resize(2 * d, 2 * d);
  generator_.topLeftCorner(d, d) = -sys_.A;
  generator_.topRightCorner(d, d) = control_gain_;
  generator_.bottomLeftCorner(d, d) = sys_.Q;
  generator_.bottomRightCorner(d, d) = sys_.A.transpose();
}

double LqcHamiltonian::eval(const Vec& x, const Vec& p) const {
  return 0.5 * p.dot(control_gain_ * p) - p.dot(sys_.A * x) - 0.5 * x.dot(sys_.Q * x);
}
Vec LqcHamiltonian::grad_x(const Vec& x, const Vec& p) const {
  return -sys_.A.transpose() * p - sys_.Q * x;
}
Vec LqcHamiltonian::grad_p(const Vec& x, const Vec& p) const {
  return control_gain_ * p - sys_.A * x;
}

QuarticHamiltonian::QuarticHamiltonian(int dim) : HamiltonianModel("nonseparable_quartic", dim) {}

double QuarticHamiltonian::eval(const Vec& x, const Vec& p) const {
  return 0.5 * (x.squaredNorm() + 1.0) * (p.squaredNorm() + 1.0);
}
Vec QuarticHamiltonian::grad_x(const Vec& x, const Vec& p) const {
  return (p.squaredNorm() + 1.0) * x;
}
Vec QuarticHamiltonian::grad_p(const Vec& x, const Vec& p) const {
  return (x.squaredNorm() + 1.0) * p;
}

LqcSystem pendulum_lqc_system(const PendulumConstants& c) {
  const double M = c.cart_mass, m = c.bob_mass, l = c.length, g = c.gravity;
  if (M <= 0 || l <= 0) throw ConfigError("pendulum: cart_mass and length must be positive");
  LqcSystem s;
  s.A = Mat::Zero(4, 4);
  s.A(0, 1) = 1.0;
  s.A(1, 2) = m / M * g;
  s.A(2, 3) = 1.0;
  s.A(3, 2) = (M + m) / (M * l) * g;
  s.B = Mat::Zero(4, 1);
  s.B(1, 0) = 1.0 / M;
  s.B(3, 0) = 1.0 / (M * l);
  s.Q = Mat::Zero(4, 4);
  s.Q(0, 0) = 1.0;
  s.Q(2, 2) = 1.0;
  s.P1 = s.Q;
  s.R = Mat::Identity(1, 1);
  return s;
}

namespace {

double half_sq(const Vec& v) { return 0.5 * v.squaredNorm(); }
Vec identity(const Vec& v) { return v; }
double zero_scalar(const Vec&) { return 0.0; }

InitialCondition linear_initial(const Vec& v) {
  return {[v](const Vec& x) { return v.dot(x); }, [v](const Vec&) { return v; }};
}

ModelBundle harmonic(const ModelParams& p) {
  const int d = p.dim.value_or(2);
  auto model = std::make_shared<SeparableHamiltonian>("harmonic", d, half_sq, identity, half_sq,
                                                      identity);
  return {model, {half_sq, identity}};
}

ModelBundle free_particle(const ModelParams& p) {
  const int d = p.dim.value_or(p.velocity ? static_cast<int>(p.velocity->size()) : 1);
  const Vec v = p.velocity.value_or(Vec::Ones(d));
  if (v.size() != d) throw ConfigError("free_particle: velocity length must equal dim");
  auto model = std::make_shared<SeparableHamiltonian>(
      "free_particle", d, half_sq, identity, zero_scalar,
      [d](const Vec&) -> Vec { return Vec::Zero(d); });
  return {model, linear_initial(v)};
}

// K(p) = 1/2 p' Sigma p + tau eta'p with Sigma = eta eta', eta = 1/sqrt(d);
// g(x) = amplitude * cos(frequency * eta'x).
ModelBundle degenerate_kinetic(const ModelParams& p) {
  const int d = p.dim.value_or(2);
  const double tau = p.tau.value_or(3.0);
  const double freq = p.frequency.value_or(std::sqrt(3.0));
  const double amp = p.amplitude.value_or(1.0);
  if (d <= 0) throw ConfigError("degenerate_kinetic: dim must be positive");
  const Vec eta = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  auto kinetic = [eta, tau](const Vec& q) {
    const double s = eta.dot(q);
    return 0.5 * s * s + tau * s;
  };
  auto grad_kinetic = [eta, tau](const Vec& q) -> Vec { return (eta.dot(q) + tau) * eta; };
  auto model = std::make_shared<SeparableHamiltonian>(
      "degenerate_kinetic", d, kinetic, grad_kinetic, zero_scalar,
      [d](const Vec&) -> Vec { return Vec::Zero(d); });
  InitialCondition ic{
      [eta, freq, amp](const Vec& x) { return amp * std::cos(freq * eta.dot(x)); },
      [eta, freq, amp](const Vec& x) -> Vec {
        return -amp * freq * std::sin(freq * eta.dot(x)) * eta;
      }};
  return {model, ic};
}

// V(x) = cos(2 x_i1 + 0.4) + cos(2 x_i2 + 0.4); g(x) = sin(x_i1 + 0.15) + sin(x_i2 + 0.15).
ModelBundle sinusoidal_potential(const ModelParams& p) {
  const int d = p.dim.value_or(30);
  const int i1 = p.i1.value_or(d >= 20 ? 10 : 1) - 1;
  const int i2 = p.i2.value_or(d >= 20 ? 20 : 2) - 1;
  if (i1 < 0 || i2 < 0 || i1 >= d || i2 >= d || i1 == i2)
    throw ConfigError("sinusoidal_potential: i1, i2 must be distinct indices in 1..dim");
  auto potential = [i1, i2](const Vec& x) {
    return std::cos(2 * x[i1] + 0.4) + std::cos(2 * x[i2] + 0.4);
  };
  auto grad_potential = [i1, i2, d](const Vec& x) -> Vec {
    Vec g = Vec::Zero(d);
    g[i1] = -2 * std::sin(2 * x[i1] + 0.4);
    g[i2] = -2 * std::sin(2 * x[i2] + 0.4);
    return g;
  };
  auto model = std::make_shared<SeparableHamiltonian>("sinusoidal_potential", d, half_sq,
                                                      identity, potential, grad_potential);
  InitialCondition ic{[i1, i2](const Vec& x) {
                        return std::sin(x[i1] + 0.15) + std::sin(x[i2] + 0.15);
                      },
                      [i1, i2, d](const Vec& x) -> Vec {
                        Vec g = Vec::Zero(d);
                        g[i1] = std::cos(x[i1] + 0.15);
                        g[i2] = std::cos(x[i2] + 0.15);
                        return g;
                      }};
  return {model, ic};
}

ModelBundle nonseparable_quartic(const ModelParams& p) {
  const int d = p.dim.value_or(10);
  return {std::make_shared<QuarticHamiltonian>(d),
          {zero_scalar, [d](const Vec&) -> Vec { return Vec::Zero(d); }}};
}

double kepler_radius(const Vec& x) {
  const double r = x.norm();
  if (!(r >= kKeplerSingularRadius))
    throw NumericError("kepler: singular state |x| = " + std::to_string(r));
  return r;
}

ModelBundle kepler(const ModelParams& p) {
  if (p.dim && *p.dim != 2) throw ConfigError("kepler: dim must be 2");
  Vec v(2);
  v << 0.5, 0.0;
  if (p.velocity) {
    if (p.velocity->size() != 2) throw ConfigError("kepler: velocity must have length 2");
    v = *p.velocity;
  }
  auto potential = [](const Vec& x) { return -1.0 / kepler_radius(x); };
  auto grad_potential = [](const Vec& x) -> Vec {
    const double r = kepler_radius(x);
    return x / (r * r * r);
  };
  auto model = std::make_shared<SeparableHamiltonian>("kepler", 2, half_sq, identity, potential,
                                                      grad_potential);
  return {model, linear_initial(v)};
}

ModelBundle lqc_pendulum(const ModelParams& p) {
  if (p.dim && *p.dim != 4) throw ConfigError("lqc_pendulum: dim must be 4");
  auto sys = pendulum_lqc_system(p.pendulum);
  const Mat P1 = sys.P1;
  auto model = std::make_shared<LqcHamiltonian>("lqc_pendulum", std::move(sys));
  InitialCondition ic{[P1](const Vec& x) { return 0.5 * x.dot(P1 * x); },
                      [P1](const Vec& x) -> Vec { return P1 * x; }};
  return {model, ic};
}

}  // namespace

bool is_builtin_model(const std::string& name) {
  return name == "harmonic" || name == "degenerate_kinetic" || name == "sinusoidal_potential" ||
         name == "nonseparable_quartic" || name == "kepler" || name == "lqc_pendulum" ||
         name == "free_particle";
}

ModelBundle make_builtin_model(const std::string& name, const ModelParams& params) {
  if (params.dim && *params.dim <= 0)
    throw ConfigError("hamiltonian dimension must be positive, got " + std::to_string(*params.dim));
  if (name == "harmonic") return harmonic(params);
  if (name == "degenerate_kinetic") return degenerate_kinetic(params);
  if (name == "sinusoidal_potential") return sinusoidal_potential(params);
  if (name == "nonseparable_quartic") return nonseparable_quartic(params);
  if (name == "kepler") return kepler(params);
  if (name == "lqc_pendulum") return lqc_pendulum(params);
  if (name == "free_particle") return free_particle(params);
  throw ConfigError("unknown hamiltonian '" + name + "'");
}

double bregman_divergence(const HamiltonianModel& model, const Vec& x, const Vec& q1,
                          const Vec& q2) {
  return model.eval(x, q1) - model.eval(x, q2) - model.grad_p(x, q2).dot(q1 - q2);
}

}  // namespace hjdc
