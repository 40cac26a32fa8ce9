#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hjdc/field_net.hpp"
#include "hjdc/hamiltonians.hpp"
#include "hjdc/integrators.hpp"
#include "hjdc/sampling.hpp"
#include "hjdc/training.hpp"

namespace hjdc {

struct TrajectorySpec {
  int N = 1000;
  int M = 10;
  double T = 1.0;
  IntegratorSpec integrator;
  std::uint64_t seed = 0;
};

/// Evaluation plane: 0-based coordinates (i, j), n x n points. The JSON form
/// uses 1-based "plane" indices.
struct GridSpec {
  int i = 0, j = 1;
  double lo_i = -6, hi_i = 6, lo_j = -6, hi_j = 6;
  int n = 50;
};

struct EvalSpec {
  std::string oracle = "none";  // none, harmonic, caustic, sinusoidal_kinetic, lqc
  std::vector<double> times;
  std::optional<GridSpec> grid;
  int residual_particles = 0;  // particles per node for l1res; 0 = all
  // error-vs-N study
  std::vector<int> n_list;
  std::vector<std::uint64_t> seeds;
  int eval_sample_size = 45000;
  double study_time = 0.1;
  // caustic diagonal comparison
  int diagonal_points = 200;
  double exclude_radius = 0.2;
  // control rollout
  int agents = 40;
  std::uint64_t control_seed = 7;
  int control_substeps = 4;
  // "max_<metric>" / "min_<metric>" -> bound
  std::map<std::string, double> thresholds;
};

struct ExperimentConfig {
  std::string name;
  std::string hamiltonian;
  ModelParams model_params;
  SamplerSpec rho0;
  TrajectorySpec trajectory;
  NetShape network;
  std::uint64_t network_seed = 0;
  TrainPlan train;
  EvalSpec eval;

  /// Cross-field checks (dimensions, M_T | M, batch <= N, oracle vs model).
  void validate() const;
};

/// Parses and validates. Malformed JSON and schema violations raise
/// ConfigError naming the byte offset or field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

ModelBundle build_model(const ExperimentConfig& cfg);

}  // namespace hjdc
