#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hjdc/config.hpp"
#include "hjdc/parallel.hpp"
#include "hjdc/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace hjdc;
  CLI::App app{"Hamilton-Jacobi solver by density-coupled characteristics"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads (default $HJDC_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  std::string config, out, traj, model, outdir, loss;
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("generate", "sample rho0 and integrate characteristics");
  gen->add_option("--config", config)->required();
  gen->add_option("--out", out)->required();
  gen->add_option("--seed", seed, "override trajectory.seed");

  auto* trn = app.add_subcommand("train", "fit the gradient field to a trajectory file");
  trn->add_option("--config", config)->required();
  trn->add_option("--traj", traj)->required();
  trn->add_option("--out", out, "model JSON")->required();
  trn->add_option("--loss", loss, "loss CSV (default: <out>.loss.csv)");

  auto* evl = app.add_subcommand("eval", "diagnostics of a trained model");
  evl->add_option("--config", config)->required();
  evl->add_option("--model", model)->required();
  evl->add_option("--traj", traj)->required();
  evl->add_option("--outdir", outdir)->required();

  auto* ctl = app.add_subcommand("control", "roll out the learned feedback control");
  ctl->add_option("--config", config)->required();
  ctl->add_option("--model", model)->required();
  ctl->add_option("--outdir", outdir)->required();

  auto* std_ = app.add_subcommand("study", "error versus sample size");
  std_->add_option("--config", config)->required();
  std_->add_option("--outdir", outdir)->required();

  auto* rep = app.add_subcommand("report", "collate summaries and check thresholds");
  rep->add_option("--outdir", outdir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*rep) {
      const bool ok = run_report(outdir, &std::cerr);
      return ok ? 0 : 1;
    }
    const ExperimentConfig cfg = load_config(config);
    if (*gen) {
      const TrajectoryBundle b = run_generate(cfg, seed, threads);
      write_trajectories(b, out);
      std::cout << generate_summary(b).dump() << '\n';
    } else if (*trn) {
      const TrajectoryBundle b = read_trajectories(traj);
      run_train(cfg, b, out, loss.empty() ? out + ".loss.csv" : loss, threads, &std::cerr);
    } else if (*evl) {
      const PiecewiseField field = load_field(model);
      const TrajectoryBundle b = read_trajectories(traj);
      std::cout << run_eval(cfg, field, b, outdir, threads)["metrics"].dump() << '\n';
    } else if (*ctl) {
      const PiecewiseField field = load_field(model);
      std::cout << run_control(cfg, field, outdir, threads)["metrics"].dump() << '\n';
    } else if (*std_) {
      std::cout << run_study(cfg, outdir, threads, &std::cerr)["metrics"].dump() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
