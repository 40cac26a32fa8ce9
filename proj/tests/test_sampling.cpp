#include "doctest.h"

#include <cmath>

#include "hjdc/sampling.hpp"

using namespace hjdc;

TEST_CASE("delta sampler repeats its point") {
  const Vec c = (Vec(2) << 1.5, -2).finished();
  const Mat X = draw(DeltaSpec{c}, 3, 1);
  REQUIRE(X.rows() == 3);
  for (int k = 0; k < 3; ++k) CHECK(X.row(k).transpose() == c);
}

TEST_CASE("gaussian moments") {
  const Mat X = draw(GaussianSpec{Vec::Constant(2, 3.0), Vec::Ones(2)}, 100000, 7);
  const Vec mean = X.colwise().mean();
  CHECK((mean.array() - 3.0).abs().maxCoeff() < 0.02);
  const Mat C = (X.rowwise() - mean.transpose()).transpose() * (X.rowwise() - mean.transpose()) / (X.rows() - 1.0);
  CHECK((C - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("piecewise halves put lambda1 of the mass below the split") {
  const double a = std::acos(-1.0) / std::sqrt(2.0);
  const PiecewiseUniformHalvesSpec spec{Vec::Constant(2, -a), Vec::Constant(2, a), Vec::Ones(2), 1.0 / 11, 10.0 / 11};
  const Mat X = draw(spec, 100000, 3);
  const double frac = ((X.col(0) + X.col(1)).array() < 0).cast<double>().mean();
  CHECK(std::abs(frac - 1.0 / 11) < 0.005);
  CHECK(X.minCoeff() >= -a);
  CHECK(X.maxCoeff() <= a);
}

TEST_CASE("uniform box support, determinism and disjoint streams") {
  const UniformBoxSpec spec{(Vec(3) << -1, 0, 2).finished(), (Vec(3) << 1, 0.5, 2.25).finished()};
  const Mat X = draw(spec, 5000, 11);
  for (int j = 0; j < 3; ++j) {
    CHECK(X.col(j).minCoeff() >= spec.lo[j]);
    CHECK(X.col(j).maxCoeff() <= spec.hi[j]);
  }
  CHECK(draw(spec, 5000, 11) == X);
  const Mat Y = draw(spec, 5000, 12);
  CHECK((X.array() != Y.array()).cast<double>().mean() >= 0.99);
}

TEST_CASE("rows are independent of the sample count") {
  const GaussianSpec spec{Vec::Zero(4), Vec::Ones(4)};
  const Mat a = draw(spec, 10, 5), b = draw(spec, 50, 5);
  CHECK(b.topRows(10) == a);
}

TEST_CASE("mixture weights and product factors") {
  GaussianMixtureSpec mix;
  mix.components.push_back({0.25, Vec::Constant(1, -10.0), Vec::Ones(1)});
  mix.components.push_back({0.75, Vec::Constant(1, 10.0), Vec::Ones(1)});
  const Mat X = draw(mix, 40000, 2);
  CHECK(std::abs((X.array() < 0).cast<double>().mean() - 0.25) < 0.01);

  ProductSpec prod;
  prod.factors.push_back({ProductFactor::Kind::Normal, 1.0, 0.2});
  prod.factors.push_back({ProductFactor::Kind::Uniform, -0.5, 0.5});
  const Mat Y = draw(prod, 40000, 4);
  CHECK(std::abs(Y.col(0).mean() - 1.0) < 0.01);
  CHECK(std::abs(std::sqrt((Y.col(0).array() - Y.col(0).mean()).square().mean()) - 0.2) < 0.01);
  CHECK(Y.col(1).minCoeff() >= -0.5);
  CHECK(Y.col(1).maxCoeff() <= 0.5);
}

TEST_CASE("invalid specs are rejected") {
  GaussianMixtureSpec mix;
  mix.components.push_back({0.5, Vec::Zero(1), Vec::Ones(1)});
  CHECK_THROWS_AS(validate(mix), ConfigError);
  CHECK_THROWS_AS(validate(UniformBoxSpec{Vec::Ones(2), Vec::Zero(2)}), ConfigError);
  CHECK_THROWS_AS(validate(GaussianSpec{Vec::Zero(2), -Vec::Ones(2)}), ConfigError);
  CHECK_THROWS_AS(draw(DeltaSpec{Vec::Zero(2)}, 0, 1), ConfigError);
}
