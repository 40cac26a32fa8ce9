#include "hjdc/reference_solutions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hjdc/integrators.hpp"
#include "hjdc/rng.hpp"

namespace hjdc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kTau = 3.0;
constexpr int kGrid = 4096;
constexpr int kBisect = 60;
constexpr double kDegenerate = 1e-10;

double cot_shifted(double t) {
  if (harmonic_is_pole(t))
    throw NumericError("harmonic oracle has a pole at t = " + std::to_string(t));
  return 1.0 / std::tan(t + 0.25 * kPi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Harmonic

bool harmonic_is_pole(double t, double tol) {
  const double s = (t + 0.25 * kPi) / kPi;
  return std::abs(s - std::round(s)) * kPi < tol;
}

Vec harmonic_exact_grad(const Vec& x, double t) { return cot_shifted(t) * x; }

double HarmonicSolutionField::eval(const Vec& x, double t) const {
  return 0.5 * cot_shifted(t) * x.squaredNorm();
}

Mat HarmonicSolutionField::grad_xt_batch(const Mat& X, const Vec& t) const {
  Mat g(dim_ + 1, X.cols());
  for (Eigen::Index b = 0; b < X.cols(); ++b) {
    const double c = cot_shifted(t[b]);
    const double s = std::sin(t[b] + 0.25 * kPi);
    g.col(b).head(dim_) = c * X.col(b);
    g(dim_, b) = -0.5 * X.col(b).squaredNorm() / (s * s);
  }
  return g;
}

SecondDerivativesBatch HarmonicSolutionField::second_derivatives_batch(const Mat& X,
                                                                       const Vec& t) const {
  SecondDerivativesBatch out{Mat(dim_, X.cols()), Mat::Zero(dim_, dim_ * X.cols())};
  for (Eigen::Index b = 0; b < X.cols(); ++b) {
    const double c = cot_shifted(t[b]);
    const double s = std::sin(t[b] + 0.25 * kPi);
    out.dt_grad.col(b) = -X.col(b) / (s * s);
    out.hessians.middleCols(b * dim_, dim_).diagonal().setConstant(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic

double QuadraticField::eval(const Vec& x, double t) const { return 0.5 * x.dot(S_(t) * x); }

Mat QuadraticField::grad_xt_batch(const Mat& X, const Vec& t) const {
  Mat g(dim_ + 1, X.cols());
  for (Eigen::Index b = 0; b < X.cols(); ++b) {
    const Mat S = S_(t[b]);
    const Mat R = S_rate_(t[b]);
    g.col(b).head(dim_) = S * X.col(b);
    g(dim_, b) = 0.5 * X.col(b).dot(R * X.col(b));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Characteristic maps

double phi(PhiVariant v, double t, double xi) {
  if (v == PhiVariant::CosInitial) return xi - t * std::sin(xi);
  return xi + t * (kTau - kSqrt3 * std::sin(kSqrt3 * xi));
}

double phi_prime(PhiVariant v, double t, double xi) {
  if (v == PhiVariant::CosInitial) return 1.0 - t * std::cos(xi);
  return 1.0 - 3.0 * t * std::cos(kSqrt3 * xi);
}

BranchSet invert_phi(double t, double z, PhiVariant v) {
  if (!(t >= 0) || !std::isfinite(z)) throw ConfigError("invert_phi: need t >= 0 and finite z");
  double lo, hi;
  if (v == PhiVariant::CosInitial) {
    lo = -kPi - t * kPi;
    hi = kPi + t * kPi;
  } else {
    // phi_t(xi) - xi lies in [t (tau - sqrt3), t (tau + sqrt3)]
    lo = z - t * (kTau + kSqrt3) - 1.0;
    hi = z - t * (kTau - kSqrt3) + 1.0;
  }
  BranchSet out;
  out.z = z;
  out.t = t;
  auto f = [&](double xi) { return phi(v, t, xi) - z; };
  const double step = (hi - lo) / (kGrid - 1);
  double a = lo, fa = f(a);
  for (int i = 1; i < kGrid; ++i) {
    const double b = i == kGrid - 1 ? hi : lo + i * step;
    const double fb = f(b);
    double root = std::numeric_limits<double>::quiet_NaN();
    if (fa == 0.0) {
      root = a;
    } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      double l = a, r = b, fl = fa;
      for (int k = 0; k < kBisect; ++k) {
        const double m = 0.5 * (l + r);
        const double fm = f(m);
        if ((fm < 0.0) == (fl < 0.0)) {
          l = m;
          fl = fm;
        } else {
          r = m;
        }
      }
      root = 0.5 * (l + r);
    }
    if (!std::isnan(root)) {
      const double jac = std::abs(phi_prime(v, t, root));
      out.roots.push_back(root);
      out.jacobians.push_back(jac);
      out.degenerate.push_back(jac < kDegenerate);
    }
    a = b;
    fa = fb;
  }
  if (fa == 0.0) {
    const double jac = std::abs(phi_prime(v, t, a));
    out.roots.push_back(a);
    out.jacobians.push_back(jac);
    out.degenerate.push_back(jac < kDegenerate);
  }
  return out;
}

double caustic_endpoint(double t) {
  if (!(t > 1.0)) throw ConfigError("caustic endpoints exist only for t > 1");
  return std::sqrt(t * t - 1.0) - std::acos(1.0 / t);
}

double weighted_momentum(double t, double z) {
  if (!(t >= 0.0 && t <= 3.0) || !(std::abs(z) <= kPi))
    throw ConfigError("weighted_momentum: need t in [0, 3] and z in [-pi, pi]");
  if (t > 1.0) {
    const double zs = caustic_endpoint(t);
    const double tol = 1e-12 * std::max(1.0, std::abs(z));
    const double edge = std::sqrt(t * t - 1.0) / t;
    if (std::abs(z - zs) <= tol) return edge;
    if (std::abs(z + zs) <= tol) return -edge;
  }
  const BranchSet br = invert_phi(t, z, PhiVariant::CosInitial);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < br.roots.size(); ++j) {
    const double xi = br.roots[j];
    if (std::abs(xi) > kPi) continue;  // outside the support of rho0
    if (br.degenerate[j]) return -std::sin(xi);
    const double w = 1.0 / (2.0 * kPi * br.jacobians[j]);
    num += -std::sin(xi) * w;
    den += w;
  }
  if (den == 0.0) throw NumericError("weighted_momentum: no preimage of z in [-pi, pi]");
  return num / den;
}

double sinusoidal_kinetic_momentum(double t, double z) {
  if (t > 1.0 / 3.0 + 1e-12)
    throw ConfigError("sinusoidal-kinetic classical solution exists only for t <= 1/3");
  const BranchSet br = invert_phi(t, z, PhiVariant::SinusoidalKinetic);
  if (br.roots.empty()) throw NumericError("sinusoidal-kinetic: no preimage found");
  return -kSqrt3 * std::sin(kSqrt3 * br.roots.front());
}

// ---------------------------------------------------------------------------
// Histogram oracle

int HistogramOracle::bin_of(double z) const {
  const int n = static_cast<int>(mean.size());
  const int b = static_cast<int>(std::floor((z - lo) / width));
  return std::clamp(b, 0, n - 1);
}

double HistogramOracle::value(double z) const {
  const int b = bin_of(z);
  return count[b] > 0 ? mean[b] : std::numeric_limits<double>::quiet_NaN();
}

HistogramOracle caustic_histogram(double t, long n_particles, double bin_width, std::uint64_t seed,
                                  double lambda1) {
  if (n_particles < 1 || !(bin_width > 0) || !(lambda1 >= 0 && lambda1 <= 1))
    throw ConfigError("caustic_histogram: invalid arguments");
  HistogramOracle h;
  h.lo = -kPi;
  h.width = bin_width;
  const int n_bins = static_cast<int>(std::ceil(2.0 * kPi / bin_width));
  h.mean.assign(n_bins, 0.0);
  h.count.assign(n_bins, 0);
  std::vector<double> sum(n_bins, 0.0);
  Rng rng(seed);
  for (long k = 0; k < n_particles; ++k) {
    const bool left = rng.uniform() < lambda1;
    const double u = rng.uniform();
    const double xi = left ? -kPi * u : kPi * u;
    const double z = xi - t * std::sin(xi);
    if (std::abs(z) > kPi) continue;
    const int b = h.bin_of(z);
    sum[b] += -std::sin(xi);
    ++h.count[b];
  }
  for (int b = 0; b < n_bins; ++b)
    if (h.count[b] > 0) h.mean[b] = sum[b] / static_cast<double>(h.count[b]);
  return h;
}

// ---------------------------------------------------------------------------
// LQC

LqcReference lqc_optimal_reference(const LqcSystem& sys, const Mat& q0, double T, int steps) {
  sys.validate();
  const int d = sys.dim();
  if (q0.cols() != d) throw ConfigError("lqc reference: q0 must have d columns");
  if (steps < 1 || !(T > 0)) throw ConfigError("lqc reference: need steps >= 1 and T > 0");
  LqcHamiltonian model("lqc", sys);
  LqcReference ref;
  ref.h = T / steps;
  const Mat prop = linear_flow_propagator(model.generator(), ref.h);
  Mat z(2 * d, q0.rows());
  z.topRows(d) = q0.transpose();
  z.bottomRows(d) = sys.P1 * q0.transpose();
  for (int i = 0; i <= steps; ++i) {
    if (i > 0) z = prop * z;
    ref.q.push_back(z.topRows(d));
    ref.p.push_back(z.bottomRows(d));
  }
  return ref;
}

Mat lqc_value_matrix(const LqcSystem& sys, double t) {
  const int d = sys.dim();
  LqcHamiltonian model("lqc", sys);
  Mat basis(2 * d, d);
  basis.topRows(d) = Mat::Identity(d, d);
  basis.bottomRows(d) = sys.P1;
  const Mat z = t == 0.0 ? basis : Mat(linear_flow_propagator(model.generator(), t) * basis);
  // S = P Q^{-1}, i.e. solve Q' S' = P'
  const Mat S = z.topRows(d).transpose().partialPivLu().solve(z.bottomRows(d).transpose()).transpose();
  return 0.5 * (S + S.transpose());
}

Mat lqc_value_matrix_rate(const LqcSystem& sys, double t) {
  const Mat S = lqc_value_matrix(sys, t);
  const Mat G = sys.B * sys.R.inverse() * sys.B.transpose();
  return S * sys.A + sys.A.transpose() * S + sys.Q - S * G * S;
}

QuadraticField lqc_value_field(const LqcSystem& sys) {
  return QuadraticField(
      sys.dim(), [sys](double t) { return lqc_value_matrix(sys, t); },
      [sys](double t) { return lqc_value_matrix_rate(sys, t); });
}

}  // namespace hjdc
