#include "hjdc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hjdc/csv.hpp"
#include "hjdc/integrators.hpp"
#include "hjdc/parallel.hpp"
#include "hjdc/reference_solutions.hpp"
#include "hjdc/rng.hpp"

namespace hjdc {

using nlohmann::json;

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in '" + path.string() + "' at byte " + std::to_string(e.byte));
  }
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

// Compact label for a time inside metric names, e.g. 0.375 -> "0.375".
std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

json run_metadata(const ExperimentConfig& cfg) {
  return {{"config", cfg.name},
          {"config_hash", config_hash(cfg)},
          {"model", cfg.hamiltonian},
          {"integrator", to_string(cfg.trajectory.integrator.kind)},
          {"seeds",
           {{"trajectory", cfg.trajectory.seed},
            {"network", cfg.network_seed},
            {"train", cfg.train.seed}}}};
}

json summary(const ExperimentConfig& cfg, const std::string& stage, const json& metrics) {
  json s = run_metadata(cfg);
  s["stage"] = stage;
  s["metrics"] = metrics;
  s["thresholds"] = cfg.eval.thresholds;
  return s;
}

// Node index closest to t; throws when t lies outside the bundle.
int node_of(const TrajectoryBundle& b, double t) {
  const double r = (t - b.t0) / b.h;
  if (r < -1e-9 || r > b.M + 1e-9)
    throw ConfigError("eval.times: " + time_label(t) + " lies outside the trajectory range");
  return std::clamp(static_cast<int>(std::lround(r)), 0, b.M);
}

Mat oracle_batch(const GradOracle& oracle, const Mat& X, double t, int threads) {
  Mat out(X.rows(), X.cols());
  parallel_tasks(static_cast<int>(X.cols()), threads, [&](int k) { out.col(k) = oracle(X.col(k), t); });
  return out;
}

bool oracle_defined(const ExperimentConfig& cfg, double t) {
  const auto& o = cfg.eval.oracle;
  if (o == "none") return false;
  if (o == "harmonic") return !harmonic_is_pole(t, 1e-9);
  if (o == "sinusoidal_kinetic") return t <= 1.0 / 3.0;
  if (o == "caustic") return t <= 1.0;  // single-valued before the caustic
  return true;
}

// RK4 in time for x' = dH/dp(x, grad psi(x, t)), columns of X advanced together.
Mat feedback_flow(const ScalarField& field, const HamiltonianModel& model, const Mat& X, double t,
                  double dt) {
  auto rhs = [&](const Mat& Y, double s) {
    const Mat P = field.grad_x_batch(Y, Vec::Constant(Y.cols(), s));
    Mat out(Y.rows(), Y.cols());
    for (Eigen::Index k = 0; k < Y.cols(); ++k) out.col(k) = model.grad_p(Y.col(k), P.col(k));
    return out;
  };
  const Mat k1 = rhs(X, t);
  const Mat k2 = rhs(X + 0.5 * dt * k1, t + 0.5 * dt);
  const Mat k3 = rhs(X + 0.5 * dt * k2, t + 0.5 * dt);
  const Mat k4 = rhs(X + dt * k3, t + dt);
  return X + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

TrajectoryBundle run_generate(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed,
                              int threads) {
  const ModelBundle mb = build_model(cfg);
  const auto& tr = cfg.trajectory;
  return generate_trajectories(mb, cfg.rho0, tr.integrator, tr.N, tr.M, tr.T, seed.value_or(tr.seed),
                               threads);
}

json generate_summary(const TrajectoryBundle& b) {
  return {{"N", b.N}, {"M", b.M}, {"h", b.h}, {"model_id", b.model_id}};
}

void check_bundle(const ExperimentConfig& cfg, const TrajectoryBundle& b) {
  const auto& tr = cfg.trajectory;
  const int d = build_model(cfg).model->dim();
  auto bad = [](const std::string& what) { throw ConfigError("trajectory file does not match config: " + what); };
  if (b.d != d) bad("dimension " + std::to_string(b.d) + " vs " + std::to_string(d));
  if (b.N != tr.N) bad("N " + std::to_string(b.N) + " vs " + std::to_string(tr.N));
  if (b.M != tr.M) bad("M " + std::to_string(b.M) + " vs " + std::to_string(tr.M));
  if (std::abs(b.h - tr.T / tr.M) > 1e-12 * std::max(1.0, tr.T)) bad("step size");
  if (b.model_id != cfg.hamiltonian) bad("model '" + b.model_id + "' vs '" + cfg.hamiltonian + "'");
  if (b.integrator_id != to_string(tr.integrator.kind))
    bad("integrator '" + b.integrator_id + "' vs '" + to_string(tr.integrator.kind) + "'");
}

TrainResult run_train(const ExperimentConfig& cfg, const TrajectoryBundle& bundle,
                      const fs::path& model_out, const fs::path& loss_csv, int threads,
                      std::ostream* log) {
  check_bundle(cfg, bundle);
  const ModelBundle mb = build_model(cfg);
  const int every = std::max(1, cfg.train.n_iter / 10);
  TrainProgress progress;
  if (log)
    progress = [&](int k, int it, double loss) {
      if (it % every == 0 || it + 1 == cfg.train.n_iter)
        *log << "interval " << k << " iter " << it << " loss " << format_double(loss) << '\n';
    };
  TrainResult res = train(bundle, cfg.network, cfg.network_seed, cfg.train, mb.model.get(), threads, progress);

  if (model_out.has_parent_path()) ensure_dir(model_out.parent_path());
  save_field(res.field, model_out.string());
  {
    CsvWriter csv(loss_csv.string(), {"iter", "loss"});
    for (std::size_t i = 0; i < res.loss_history.size(); ++i)
      csv.num(static_cast<long long>(i)).num(res.loss_history[i]).end_row();
  }
  const NodeCurves c = loss_curves(res.field, bundle, threads);
  const double final_loss = std::accumulate(c.mse.begin() + 1, c.mse.end(), 0.0) / bundle.M;
  json metrics = {{"final_loss", final_loss}};
  if (!res.loss_history.empty()) metrics["last_batch_loss"] = res.loss_history.back();
  json s = summary(cfg, "train", metrics);
  s["seeds"]["trajectory"] = bundle.seed;
  const fs::path dir = model_out.has_parent_path() ? model_out.parent_path() : fs::path(".");
  write_json(s, dir / "summary_train.json");
  return res;
}

GradOracle make_oracle(const ExperimentConfig& cfg) {
  const auto& o = cfg.eval.oracle;
  if (o == "none") return {};
  if (o == "harmonic") return [](const Vec& x, double t) { return harmonic_exact_grad(x, t); };
  if (o == "caustic" || o == "sinusoidal_kinetic") {
    // Both reduce to one dimension along eta = (1, ..., 1) / sqrt(d).
    const int d = build_model(cfg).model->dim();
    const Vec eta = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    if (o == "caustic")
      return [eta](const Vec& x, double t) -> Vec { return weighted_momentum(t, eta.dot(x)) * eta; };
    return [eta](const Vec& x, double t) -> Vec { return sinusoidal_kinetic_momentum(t, eta.dot(x)) * eta; };
  }
  if (o == "lqc") {
    const ModelBundle mb = build_model(cfg);
    const auto* lqc = dynamic_cast<const LqcHamiltonian*>(mb.model.get());
    if (!lqc) throw ConfigError("eval.oracle: lqc needs an LQC model");
    const LqcSystem sys = lqc->system();
    return [sys](const Vec& x, double t) -> Vec { return lqc_value_matrix(sys, t) * x; };
  }
  throw ConfigError("eval.oracle: unknown oracle '" + o + "'");
}

json run_eval(const ExperimentConfig& cfg, const PiecewiseField& field, const TrajectoryBundle& b,
              const fs::path& outdir, int threads) {
  check_bundle(cfg, b);
  if (field.dim() != b.d) throw ConfigError("model dimension does not match trajectory dimension");
  ensure_dir(outdir);
  const ModelBundle mb = build_model(cfg);
  const HamiltonianModel& model = *mb.model;
  const auto& ev = cfg.eval;
  const bool second = field.twice_differentiable();
  json metrics = json::object();

  // Per-node curves.
  const NodeCurves c = loss_curves(field, b, threads);
  const std::vector<double> energy = energy_curve(field, model, b, threads);
  const int n_res = ev.residual_particles > 0 ? std::min(ev.residual_particles, b.N) : b.N;
  std::vector<double> l1res(b.M + 1, std::nan(""));
  if (second)
    for (int i = 0; i <= b.M; ++i) {
      const auto node = b.node(i);
      l1res[i] = residual_batch(field, model, node.topRows(b.d).leftCols(n_res),
                                Vec::Constant(n_res, b.time(i)), threads)
                     .mean();
    }
  {
    CsvWriter csv((outdir / "curves.csv").string(), {"t", "eps", "delta", "mse", "l1res", "energy"});
    for (int i = 0; i <= b.M; ++i)
      csv.num(c.t[i]).num(c.eps[i]).num(c.delta[i]).num(c.mse[i]).num(l1res[i]).num(energy[i]).end_row();
  }
  const auto peak = std::max_element(c.mse.begin() + 1, c.mse.end()) - c.mse.begin();
  metrics["mse_peak_time"] = c.t[peak];
  metrics["final_loss"] = std::accumulate(c.mse.begin() + 1, c.mse.end(), 0.0) / b.M;
  metrics["energy_drift"] = max_drift(energy);

  const GradOracle oracle = make_oracle(cfg);

  // Mean error over the particle cloud at each requested time.
  for (double t : ev.times) {
    const int i = node_of(b, t);
    const double ti = b.time(i);
    if (!oracle || !oracle_defined(cfg, ti)) continue;
    const auto node = b.node(i);
    const Mat X = node.topRows(b.d);
    const Mat G = field.grad_x_batch(X, Vec::Constant(b.N, ti));
    const Mat U = oracle_batch(oracle, X, ti, threads);
    metrics["mean_err@" + time_label(t)] = (G - U).colwise().norm().mean();
  }

  // Plane grids with the other coordinates frozen at the cloud mean.
  if (ev.grid && !ev.times.empty()) {
    const GridSpec& g = *ev.grid;
    CsvWriter res_csv((outdir / "residual_grid.csv").string(), {"x1", "x2", "t", "res"});
    std::optional<CsvWriter> err_csv;
    if (oracle) err_csv.emplace((outdir / "error_grid.csv").string(), std::vector<std::string>{"x1", "x2", "t", "err"});
    for (double t : ev.times) {
      const int i = node_of(b, t);
      const double ti = b.time(i);
      const auto node = b.node(i);
      const Mat X = node.topRows(b.d);
      const Vec mean = X.rowwise().mean();
      const Vec sd = ((X.colwise() - mean).array().square().rowwise().sum() / b.N).sqrt();
      const Mat P = plane_grid(mean, g.i, g.j, g.lo_i, g.hi_i, g.lo_j, g.hi_j, g.n);
      const Vec tv = Vec::Constant(P.cols(), ti);
      Vec res = Vec::Constant(P.cols(), std::nan(""));
      if (second) res = residual_batch(field, model, P, tv, threads);
      for (Eigen::Index k = 0; k < P.cols(); ++k)
        res_csv.num(P(g.i, k)).num(P(g.j, k)).num(ti).num(res[k]).end_row();
      if (second) {
        double out_sum = 0.0;
        long out_n = 0;
        for (Eigen::Index k = 0; k < P.cols(); ++k) {
          const bool inside = std::abs(P(g.i, k) - mean[g.i]) <= 2 * sd[g.i] &&
                              std::abs(P(g.j, k) - mean[g.j]) <= 2 * sd[g.j];
          if (!inside) {
            out_sum += res[k];
            ++out_n;
          }
        }
        const double in_mean =
            residual_batch(field, model, X.leftCols(n_res), Vec::Constant(n_res, ti), threads).mean();
        if (out_n > 0) metrics["residual_ratio@" + time_label(t)] = (out_sum / out_n) / in_mean;
      }
      if (err_csv) {
        const bool defined = oracle_defined(cfg, ti);
        const bool pole = ev.oracle == "harmonic" && !defined;
        Mat G, U;
        if (defined) {
          G = field.grad_x_batch(P, tv);
          U = oracle_batch(oracle, P, ti, threads);
        }
        for (Eigen::Index k = 0; k < P.cols(); ++k) {
          err_csv->num(P(g.i, k)).num(P(g.j, k)).num(ti);
          if (defined)
            err_csv->num((G.col(k) - U.col(k)).norm());
          else
            err_csv->text(pole ? "pole" : "nan");
          err_csv->end_row();
        }
      }
    }
  }

  // Weak solution along the diagonal.
  if (ev.oracle == "caustic") {
    const int d = b.d;
    const Vec eta = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    const double pi = std::acos(-1.0);
    const int n = ev.diagonal_points;
    CsvWriter csv((outdir / "diagonal.csv").string(), {"z", "t", "oracle", "net", "err"});
    for (double t : ev.times) {
      if (t < 0 || t > 3.0) continue;
      Mat X(d, n);
      Vec z(n);
      for (int k = 0; k < n; ++k) {
        z[k] = -pi + 2 * pi * k / (n - 1);
        X.col(k) = z[k] * eta;
      }
      const Mat G = field.grad_x_batch(X, Vec::Constant(n, t));
      double sum = 0.0;
      int count = 0;
      for (int k = 0; k < n; ++k) {
        const double o = weighted_momentum(t, z[k]);
        const double v = eta.dot(G.col(k));
        const double err = std::abs(v - o);
        csv.num(z[k]).num(t).num(o).num(v).num(err).end_row();
        const bool near_jump = t > 1.0 && std::abs(std::abs(z[k]) - caustic_endpoint(t)) < ev.exclude_radius;
        if (!near_jump) {
          sum += err;
          ++count;
        }
      }
      if (count > 0) metrics["caustic_err@" + time_label(t)] = sum / count;
    }
  }

  json s = summary(cfg, "eval", metrics);
  s["seeds"]["trajectory"] = b.seed;
  if (ev.grid)
    s["grid"] = {{"plane", {ev.grid->i + 1, ev.grid->j + 1}},
                 {"lo", {ev.grid->lo_i, ev.grid->lo_j}},
                 {"hi", {ev.grid->hi_i, ev.grid->hi_j}},
                 {"n", ev.grid->n}};
  write_json(s, outdir / "summary_eval.json");
  return s;
}

json run_control(const ExperimentConfig& cfg, const ScalarField& field, const fs::path& outdir,
                 int threads) {
  const ModelBundle mb = build_model(cfg);
  const auto* lqc = dynamic_cast<const LqcHamiltonian*>(mb.model.get());
  if (!lqc) throw ConfigError("control: the config's hamiltonian is not a linear-quadratic control model");
  const int d = lqc->dim();
  if (field.dim() != d) throw ConfigError("control: model dimension does not match the hamiltonian");
  ensure_dir(outdir);
  const auto& ev = cfg.eval;
  const int M = cfg.trajectory.M;
  const double T = cfg.trajectory.T;
  const int A = ev.agents;

  // Agents start from fresh draws, carried to the state distribution at
  // t = T by the optimal flow; the learned feedback then runs back to t = 0.
  const Mat q0 = draw(cfg.rho0, A, ev.control_seed);
  const LqcReference ref = lqc_optimal_reference(lqc->system(), q0, T, M);

  std::vector<Mat> learned(M + 1);
  learned[M] = ref.q[M];
  const double dt = -ref.h / ev.control_substeps;
  const int n_chunks = (A + 7) / 8;
  for (int i = M; i > 0; --i) {
    learned[i - 1] = learned[i];
    parallel_tasks(n_chunks, threads, [&](int c) {
      const int lo = c * 8, m = std::min(8, A - lo);
      Mat X = learned[i].middleCols(lo, m);
      double t = i * ref.h;
      for (int s = 0; s < ev.control_substeps; ++s, t += dt) X = feedback_flow(field, *lqc, X, t, dt);
      learned[i - 1].middleCols(lo, m) = X;
    });
    if (!learned[i - 1].allFinite()) throw NumericError("control: rollout diverged");
  }

  std::vector<std::string> header{"agent", "t", "s"};
  for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
  for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k) + "_opt");
  header.push_back("sqdev");
  CsvWriter csv((outdir / "control.csv").string(), header);
  double sum = 0.0;
  for (int a = 0; a < A; ++a)
    for (int i = M; i >= 0; --i) {
      const double t = i * ref.h;
      const double dev = (learned[i].col(a) - ref.q[i].col(a)).squaredNorm();
      sum += dev;
      csv.num(static_cast<long long>(a)).num(t).num(T - t);
      for (int k = 0; k < d; ++k) csv.num(learned[i](k, a));
      for (int k = 0; k < d; ++k) csv.num(ref.q[i](k, a));
      csv.num(dev).end_row();
    }
  const double mse = sum / (static_cast<double>(A) * (M + 1));
  const double terminal = (learned[0] - ref.q[0]).colwise().squaredNorm().mean();
  json s = summary(cfg, "control", {{"control_mse", mse}, {"control_terminal_mse", terminal}});
  s["seeds"]["control"] = ev.control_seed;
  write_json(s, outdir / "summary_control.json");
  return s;
}

json run_study(const ExperimentConfig& cfg, const fs::path& outdir, int threads, std::ostream* log) {
  const auto& ev = cfg.eval;
  if (ev.n_list.empty() || ev.seeds.empty()) throw ConfigError("study: eval.n_list and eval.seeds are required");
  const GradOracle oracle = make_oracle(cfg);
  if (!oracle) throw ConfigError("study: an oracle is required");
  const auto& tr = cfg.trajectory;
  const double h = tr.T / tr.M;
  const double steps_f = ev.study_time / h;
  const int steps = static_cast<int>(std::lround(steps_f));
  if (std::abs(steps_f - steps) > 1e-9 || steps < 1 || steps > tr.M)
    throw ConfigError("study: eval.study_time must be a positive time node of the trajectory grid");
  if (!oracle_defined(cfg, ev.study_time)) throw ConfigError("study: oracle undefined at study_time");
  ensure_dir(outdir);
  const ModelBundle mb = build_model(cfg);

  // One evaluation sample shared by every run.
  const Mat x_eval = draw(cfg.rho0, ev.eval_sample_size, derive_seed(tr.seed, 0x5eed));
  const TrajectoryBundle eb =
      integrate_ensemble(mb, x_eval, tr.integrator, steps, ev.study_time, tr.seed, threads);
  const Mat X = eb.node(steps).topRows(eb.d);
  const Mat U = oracle_batch(oracle, X, ev.study_time, threads);

  CsvWriter csv((outdir / "study.csv").string(), {"N", "seed", "error"});
  CsvWriter sum_csv((outdir / "study_summary.csv").string(), {"N", "median", "q25", "q75"});
  json rows = json::array();
  std::vector<double> medians;
  for (int N : ev.n_list) {
    std::vector<double> errs;
    for (std::uint64_t s : ev.seeds) {
      ExperimentConfig run = cfg;
      run.trajectory.N = N;
      run.trajectory.seed = s;
      run.network_seed = derive_seed(s, 1);
      run.train.seed = derive_seed(s, 2);
      run.train.batch = std::min(cfg.train.batch, N);
      const TrajectoryBundle b = run_generate(run, std::nullopt, threads);
      const TrainResult r = train(b, run.network, run.network_seed, run.train, mb.model.get(), threads);
      const Mat G = r.field.grad_x_batch(X, Vec::Constant(X.cols(), ev.study_time));
      const double err = (G - U).colwise().squaredNorm().mean();
      errs.push_back(err);
      csv.num(static_cast<long long>(N)).num(static_cast<long long>(s)).num(err).end_row();
      if (log) *log << "N " << N << " seed " << s << " error " << format_double(err) << '\n';
    }
    const Quartiles q = quartiles(errs);
    medians.push_back(q.median);
    sum_csv.num(static_cast<long long>(N)).num(q.median).num(q.q25).num(q.q75).end_row();
    rows.push_back({{"N", N}, {"median", q.median}, {"q25", q.q25}, {"q75", q.q75}});
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < medians.size(); ++k) decreasing = decreasing && medians[k] < medians[k - 1];
  json s = summary(cfg, "study", {{"study_monotone", decreasing ? 1.0 : 0.0}});
  s["table"] = rows;
  s["seeds"]["study"] = ev.seeds;
  write_json(s, outdir / "summary_study.json");
  return s;
}

bool run_report(const fs::path& outdir, std::ostream* log) {
  if (!fs::is_directory(outdir)) throw IoError("report: '" + outdir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(outdir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("summary_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("report: no summary_*.json in '" + outdir.string() + "'");

  json metrics = json::object(), thresholds = json::object(), sources = json::array();
  for (const auto& f : files) {
    const json s = read_json(f);
    sources.push_back(f.filename().string());
    if (s.contains("metrics") && s["metrics"].is_object())
      for (auto it = s["metrics"].begin(); it != s["metrics"].end(); ++it) metrics[it.key()] = it.value();
    if (s.contains("thresholds") && s["thresholds"].is_object())
      for (auto it = s["thresholds"].begin(); it != s["thresholds"].end(); ++it) thresholds[it.key()] = it.value();
  }

  json checks = json::array();
  bool all = true;
  for (auto it = thresholds.begin(); it != thresholds.end(); ++it) {
    const std::string& key = it.key();
    const bool is_max = key.rfind("max_", 0) == 0;
    const std::string metric = key.substr(4);
    const double bound = it.value().get<double>();
    json c = {{"name", key}, {"metric", metric}, {"bound", bound}};
    bool pass = false;
    if (metrics.contains(metric) && metrics[metric].is_number()) {
      const double v = metrics[metric].get<double>();
      c["value"] = v;
      pass = std::isfinite(v) && (is_max ? v <= bound : v >= bound);
    } else {
      c["value"] = nullptr;
    }
    c["pass"] = pass;
    all = all && pass;
    checks.push_back(c);
    if (log) *log << (pass ? "PASS " : "FAIL ") << key << '\n';
  }
  write_json({{"sources", sources}, {"metrics", metrics}, {"checks", checks}, {"pass", all}},
             outdir / "report.json");
  return all;
}

}  // namespace hjdc
