#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

#include "hjdc/config.hpp"
#include "hjdc/diagnostics.hpp"
#include "hjdc/field_net.hpp"
#include "hjdc/training.hpp"
#include "hjdc/trajectory.hpp"

namespace hjdc {

namespace fs = std::filesystem;

/// Samples rho0 and integrates the characteristics described by the config.
/// `seed` overrides trajectory.seed.
TrajectoryBundle run_generate(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed,
                              int threads);

/// {N, M, h, model_id} as printed by the generate command.
nlohmann::json generate_summary(const TrajectoryBundle& bundle);

/// Throws ConfigError when the bundle was not produced by this config.
void check_bundle(const ExperimentConfig& cfg, const TrajectoryBundle& bundle);

/// Trains, writes the model JSON, the loss CSV (iter,loss) and
/// summary_train.json next to the model.
TrainResult run_train(const ExperimentConfig& cfg, const TrajectoryBundle& bundle,
                      const fs::path& model_out, const fs::path& loss_csv, int threads,
                      std::ostream* log = nullptr);

/// Gradient of the exact or weak solution for the config's oracle; empty
/// when the oracle is "none".
GradOracle make_oracle(const ExperimentConfig& cfg);

/// Writes curves.csv, the grid CSVs, diagonal.csv (caustic oracle) and
/// summary_eval.json into outdir. Returns the summary.
nlohmann::json run_eval(const ExperimentConfig& cfg, const PiecewiseField& field,
                        const TrajectoryBundle& bundle, const fs::path& outdir, int threads);

/// LQC rollout of the learned feedback against the optimal reference; writes
/// control.csv and summary_control.json.
nlohmann::json run_control(const ExperimentConfig& cfg, const ScalarField& field,
                           const fs::path& outdir, int threads);

/// Error-vs-N study: for every N in eval.n_list and seed in eval.seeds,
/// generates, trains and measures mean |grad psi - grad u|^2 at study_time on
/// fresh samples. Writes study.csv, study_summary.csv and summary_study.json.
nlohmann::json run_study(const ExperimentConfig& cfg, const fs::path& outdir, int threads,
                         std::ostream* log = nullptr);

/// Collates every summary_*.json in outdir, checks thresholds and writes
/// report.json. Returns true when all checks pass.
bool run_report(const fs::path& outdir, std::ostream* log = nullptr);

void write_json(const nlohmann::json& doc, const fs::path& path);
nlohmann::json read_json(const fs::path& path);

}  // namespace hjdc
