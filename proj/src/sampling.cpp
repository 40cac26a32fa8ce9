#include "hjdc/sampling.hpp"

#include <cmath>
#include <string>

#include "hjdc/rng.hpp"

namespace hjdc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_box(const Vec& lo, const Vec& hi, const char* what) {
  if (lo.size() == 0 || lo.size() != hi.size())
    throw ConfigError(std::string(what) + ": lo and hi must be nonempty and equal length");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw ConfigError(std::string(what) + ": lo < hi must hold componentwise");
}

void check_gaussian(const Vec& mean, const Vec& var, const char* what) {
  if (mean.size() == 0 || mean.size() != var.size())
    throw ConfigError(std::string(what) + ": mean and covariance must be nonempty and equal length");
  if ((var.array() <= 0).any()) throw ConfigError(std::string(what) + ": covariance must be positive");
}

void fill_gaussian(Rng& rng, const Vec& mean, const Vec& var, Eigen::Ref<Vec> out) {
  for (Eigen::Index j = 0; j < mean.size(); ++j)
    out[j] = mean[j] + std::sqrt(var[j]) * rng.normal();
}

void fill_box(Rng& rng, const Vec& lo, const Vec& hi, Eigen::Ref<Vec> out) {
  for (Eigen::Index j = 0; j < lo.size(); ++j) out[j] = rng.uniform(lo[j], hi[j]);
}

}  // namespace

int sampler_dim(const SamplerSpec& spec) {
  return std::visit(
      overloaded{[](const GaussianSpec& s) { return static_cast<int>(s.mean.size()); },
                 [](const UniformBoxSpec& s) { return static_cast<int>(s.lo.size()); },
                 [](const GaussianMixtureSpec& s) {
                   return s.components.empty() ? 0 : static_cast<int>(s.components[0].mean.size());
                 },
                 [](const PiecewiseUniformHalvesSpec& s) { return static_cast<int>(s.lo.size()); },
                 [](const DeltaSpec& s) { return static_cast<int>(s.point.size()); },
                 [](const ProductSpec& s) { return static_cast<int>(s.factors.size()); }},
      spec);
}

void validate(const SamplerSpec& spec) {
  std::visit(
      overloaded{
          [](const GaussianSpec& s) { check_gaussian(s.mean, s.variance, "gaussian"); },
          [](const UniformBoxSpec& s) { check_box(s.lo, s.hi, "uniform_box"); },
          [](const GaussianMixtureSpec& s) {
            if (s.components.empty()) throw ConfigError("gaussian_mixture: no components");
            double total = 0.0;
            for (const auto& c : s.components) {
              if (!(c.weight >= 0)) throw ConfigError("gaussian_mixture: negative weight");
              check_gaussian(c.mean, c.variance, "gaussian_mixture");
              if (c.mean.size() != s.components[0].mean.size())
                throw ConfigError("gaussian_mixture: component dimensions differ");
              total += c.weight;
            }
            if (std::abs(total - 1.0) > 1e-12)
              throw ConfigError("gaussian_mixture: weights must sum to 1");
          },
          [](const PiecewiseUniformHalvesSpec& s) {
            check_box(s.lo, s.hi, "piecewise_uniform_halves");
            if (s.normal.size() != s.lo.size() || s.normal.norm() == 0.0)
              throw ConfigError("piecewise_uniform_halves: normal must be nonzero with box dimension");
            if (!(s.lambda1 >= 0 && s.lambda2 >= 0) || std::abs(s.lambda1 + s.lambda2 - 1.0) > 1e-12)
              throw ConfigError("piecewise_uniform_halves: lambda1 + lambda2 must equal 1");
          },
          [](const DeltaSpec& s) {
            if (s.point.size() == 0) throw ConfigError("delta: empty point");
          },
          [](const ProductSpec& s) {
            if (s.factors.empty()) throw ConfigError("product: no factors");
            for (const auto& f : s.factors) {
              if (f.kind == ProductFactor::Kind::Normal && !(f.b > 0))
                throw ConfigError("product: normal std must be positive");
              if (f.kind == ProductFactor::Kind::Uniform && !(f.a < f.b))
                throw ConfigError("product: uniform needs lo < hi");
            }
          }},
      spec);
}

Mat draw(const SamplerSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("draw: sample count must be at least 1");
  validate(spec);
  const int d = sampler_dim(spec);
  Mat out(n, d);
  Vec row(d);
  for (int k = 0; k < n; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    std::visit(
        overloaded{
            [&](const GaussianSpec& s) { fill_gaussian(rng, s.mean, s.variance, row); },
            [&](const UniformBoxSpec& s) { fill_box(rng, s.lo, s.hi, row); },
            [&](const GaussianMixtureSpec& s) {
              const double u = rng.uniform();
              double acc = 0.0;
              std::size_t pick = s.components.size() - 1;
              for (std::size_t c = 0; c < s.components.size(); ++c) {
                acc += s.components[c].weight;
                if (u < acc) {
                  pick = c;
                  break;
                }
              }
              fill_gaussian(rng, s.components[pick].mean, s.components[pick].variance, row);
            },
            [&](const PiecewiseUniformHalvesSpec& s) {
              const bool first_half = rng.uniform() < s.lambda1;
              for (int attempt = 0;; ++attempt) {
                if (attempt == 100000)
                  throw ConfigError("piecewise_uniform_halves: a half has (near) zero volume");
                fill_box(rng, s.lo, s.hi, row);
                if ((s.normal.dot(row) < 0.0) == first_half) break;
              }
            },
            [&](const DeltaSpec& s) { row = s.point; },
            [&](const ProductSpec& s) {
              for (int j = 0; j < d; ++j) {
                const auto& f = s.factors[j];
                row[j] = f.kind == ProductFactor::Kind::Normal ? f.a + f.b * rng.normal()
                                                               : rng.uniform(f.a, f.b);
              }
            }},
        spec);
    out.row(k) = row.transpose();
  }
  return out;
}

}  // namespace hjdc
