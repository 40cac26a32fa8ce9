#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "hjdc/common.hpp"

namespace hjdc {

struct GaussianSpec {
  Vec mean;
  Vec variance;  // diagonal covariance
};

struct UniformBoxSpec {
  Vec lo, hi;
};

struct MixtureComponent {
  double weight;
  Vec mean;
  Vec variance;
};

struct GaussianMixtureSpec {
  std::vector<MixtureComponent> components;
};

/// Uniform on a box split by the hyperplane normal'x = 0: the half
/// {normal'x < 0} receives probability lambda1, the rest lambda2.
struct PiecewiseUniformHalvesSpec {
  Vec lo, hi;
  Vec normal;
  double lambda1, lambda2;
};

struct DeltaSpec {
  Vec point;
};

/// Independent one-dimensional factors, each N(a, b^2) or U[a, b].
struct ProductFactor {
  enum class Kind { Normal, Uniform } kind;
  double a, b;
};

struct ProductSpec {
  std::vector<ProductFactor> factors;
};

using SamplerSpec = std::variant<GaussianSpec, UniformBoxSpec, GaussianMixtureSpec,
                                 PiecewiseUniformHalvesSpec, DeltaSpec, ProductSpec>;

int sampler_dim(const SamplerSpec& spec);

/// Throws ConfigError when the spec is inconsistent.
void validate(const SamplerSpec& spec);

/// n x d matrix of draws from rho0. Row k uses its own stream derived from
/// (seed, k), so any subset of rows can be regenerated independently.
Mat draw(const SamplerSpec& spec, int n, std::uint64_t seed);

}  // namespace hjdc
