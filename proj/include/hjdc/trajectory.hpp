#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hjdc/common.hpp"

namespace hjdc {

/// Particle states (x, p) at uniform time nodes t_i = t0 + i h, i = 0..M.
/// Storage is [time][particle][x_0..x_{d-1}, p_0..p_{d-1}] in 64-bit floats.
struct TrajectoryBundle {
  int d = 0;
  int N = 0;
  int M = 0;
  double h = 0.0;
  double t0 = 0.0;
  std::string model_id;
  std::string integrator_id;
  std::uint64_t seed = 0;
  std::vector<double> states;

  TrajectoryBundle() = default;
  TrajectoryBundle(int d, int N, int M, double h, double t0 = 0.0);

  double time(int i) const { return t0 + i * h; }
  double end_time() const { return time(M); }

  /// Column k holds particle k's (x, p) at node i, shape 2d x N.
  Eigen::Map<Mat> node(int i) { return {states.data() + offset(i), 2 * d, N}; }
  Eigen::Map<const Mat> node(int i) const { return {states.data() + offset(i), 2 * d, N}; }

  Vec x(int i, int k) const { return node(i).col(k).head(d); }
  Vec p(int i, int k) const { return node(i).col(k).tail(d); }

  bool all_finite() const;

 private:
  std::size_t offset(int i) const { return static_cast<std::size_t>(i) * N * 2 * d; }
};

/// HJT1 container: "HJTRAJB1", u32 LE header length, JSON header, raw LE doubles.
void write_trajectories(const TrajectoryBundle& bundle, const std::filesystem::path& path);
TrajectoryBundle read_trajectories(const std::filesystem::path& path);

}  // namespace hjdc
