#include "hjdc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hjdc {

using nlohmann::json;

namespace {

// Read access to one JSON object with its dotted path for error messages.
class Node {
 public:
  Node(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "must be an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) fail(it.key(), "unknown field");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) const {
    if (!has(key)) fail(key, "is required");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) const {
    const json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) fail(key, "must be an integer");
        const auto x = v.get<long long>();
        if (x < INT32_MIN || x > INT32_MAX) fail(key, "is out of range");
        return static_cast<int>(x);
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
          fail(key, "must be a non-negative integer");
        return v.get<std::uint64_t>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) fail(key, "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
      } else if constexpr (std::is_same_v<T, Vec>) {
        if (!v.is_array()) fail(key, "must be an array of numbers");
        Vec out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (!v[i].is_number()) fail(key, "must be an array of numbers");
          out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        }
        return out;
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config: " + (key.empty() ? path_ : path(key)) + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
};

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Scalar or per-coordinate variance.
Vec variance_of(const Node& n, const std::string& key, Eigen::Index d) {
  const json& v = n.raw(key);
  if (v.is_number()) return Vec::Constant(d, n.get<double>(key));
  return n.get<Vec>(key);
}

SamplerSpec parse_rho0(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("config: rho0.kind: is required");
  const std::string kind = j.at("kind").is_string() ? j.at("kind").get<std::string>() : "";
  SamplerSpec spec;
  if (kind == "gaussian") {
    Node n(j, "rho0", {"kind", "mean", "variance"});
    const Vec mean = n.get<Vec>("mean");
    spec = GaussianSpec{mean, variance_of(n, "variance", mean.size())};
  } else if (kind == "uniform_box") {
    Node n(j, "rho0", {"kind", "lo", "hi"});
    spec = UniformBoxSpec{n.get<Vec>("lo"), n.get<Vec>("hi")};
  } else if (kind == "gaussian_mixture") {
    Node n(j, "rho0", {"kind", "components"});
    const json& comps = n.raw("components");
    if (!comps.is_array()) n.fail("components", "must be an array");
    GaussianMixtureSpec m;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      Node cn(comps[c], "rho0.components[" + std::to_string(c) + "]", {"weight", "mean", "variance"});
      const Vec mean = cn.get<Vec>("mean");
      m.components.push_back({cn.get<double>("weight"), mean, variance_of(cn, "variance", mean.size())});
    }
    spec = m;
  } else if (kind == "piecewise_uniform_halves") {
    Node n(j, "rho0", {"kind", "lo", "hi", "normal", "lambda1", "lambda2"});
    spec = PiecewiseUniformHalvesSpec{n.get<Vec>("lo"), n.get<Vec>("hi"), n.get<Vec>("normal"),
                                      n.get<double>("lambda1"), n.get<double>("lambda2")};
  } else if (kind == "delta") {
    Node n(j, "rho0", {"kind", "point"});
    spec = DeltaSpec{n.get<Vec>("point")};
  } else if (kind == "product") {
    Node n(j, "rho0", {"kind", "factors"});
    const json& fs = n.raw("factors");
    if (!fs.is_array()) n.fail("factors", "must be an array");
    ProductSpec p;
    for (std::size_t c = 0; c < fs.size(); ++c) {
      const std::string path = "rho0.factors[" + std::to_string(c) + "]";
      const std::string dist = fs[c].is_object() && fs[c].contains("dist") && fs[c]["dist"].is_string()
                                   ? fs[c]["dist"].get<std::string>()
                                   : "";
      if (dist == "normal") {
        Node fn(fs[c], path, {"dist", "mean", "std"});
        p.factors.push_back({ProductFactor::Kind::Normal, fn.get<double>("mean"), fn.get<double>("std")});
      } else if (dist == "uniform") {
        Node fn(fs[c], path, {"dist", "lo", "hi"});
        p.factors.push_back({ProductFactor::Kind::Uniform, fn.get<double>("lo"), fn.get<double>("hi")});
      } else {
        throw ConfigError("config: " + path + ".dist: must be \"normal\" or \"uniform\"");
      }
    }
    spec = p;
  } else {
    throw ConfigError("config: rho0.kind: unknown sampler '" + kind + "'");
  }
  try {
    validate(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: rho0: ") + e.what());
  }
  return spec;
}

json rho0_json(const SamplerSpec& spec) {
  struct Visitor {
    json operator()(const GaussianSpec& s) const {
      return {{"kind", "gaussian"}, {"mean", vec_json(s.mean)}, {"variance", vec_json(s.variance)}};
    }
    json operator()(const UniformBoxSpec& s) const {
      return {{"kind", "uniform_box"}, {"lo", vec_json(s.lo)}, {"hi", vec_json(s.hi)}};
    }
    json operator()(const GaussianMixtureSpec& s) const {
      json comps = json::array();
      for (const auto& c : s.components)
        comps.push_back({{"weight", c.weight}, {"mean", vec_json(c.mean)}, {"variance", vec_json(c.variance)}});
      return {{"kind", "gaussian_mixture"}, {"components", comps}};
    }
    json operator()(const PiecewiseUniformHalvesSpec& s) const {
      return {{"kind", "piecewise_uniform_halves"}, {"lo", vec_json(s.lo)}, {"hi", vec_json(s.hi)},
              {"normal", vec_json(s.normal)}, {"lambda1", s.lambda1}, {"lambda2", s.lambda2}};
    }
    json operator()(const DeltaSpec& s) const { return {{"kind", "delta"}, {"point", vec_json(s.point)}}; }
    json operator()(const ProductSpec& s) const {
      json fs = json::array();
      for (const auto& f : s.factors) {
        if (f.kind == ProductFactor::Kind::Normal)
          fs.push_back({{"dist", "normal"}, {"mean", f.a}, {"std", f.b}});
        else
          fs.push_back({{"dist", "uniform"}, {"lo", f.a}, {"hi", f.b}});
      }
      return {{"kind", "product"}, {"factors", fs}};
    }
  };
  return std::visit(Visitor{}, spec);
}

ModelParams parse_model_params(const json& j) {
  Node n(j, "hamiltonian.params",
         {"dim", "tau", "frequency", "amplitude", "i1", "i2", "velocity", "pendulum"});
  ModelParams p;
  if (n.has("dim")) p.dim = n.get<int>("dim");
  if (n.has("tau")) p.tau = n.get<double>("tau");
  if (n.has("frequency")) p.frequency = n.get<double>("frequency");
  if (n.has("amplitude")) p.amplitude = n.get<double>("amplitude");
  if (n.has("i1")) p.i1 = n.get<int>("i1");
  if (n.has("i2")) p.i2 = n.get<int>("i2");
  if (n.has("velocity")) p.velocity = n.get<Vec>("velocity");
  if (n.has("pendulum")) {
    Node c(n.raw("pendulum"), "hamiltonian.params.pendulum", {"cart_mass", "bob_mass", "length", "gravity"});
    p.pendulum.cart_mass = c.get<double>("cart_mass", p.pendulum.cart_mass);
    p.pendulum.bob_mass = c.get<double>("bob_mass", p.pendulum.bob_mass);
    p.pendulum.length = c.get<double>("length", p.pendulum.length);
    p.pendulum.gravity = c.get<double>("gravity", p.pendulum.gravity);
    if (!(p.pendulum.cart_mass > 0 && p.pendulum.length > 0))
      throw ConfigError("config: hamiltonian.params.pendulum: cart_mass and length must be positive");
  }
  return p;
}

json model_params_json(const ModelParams& p) {
  json j = json::object();
  if (p.dim) j["dim"] = *p.dim;
  if (p.tau) j["tau"] = *p.tau;
  if (p.frequency) j["frequency"] = *p.frequency;
  if (p.amplitude) j["amplitude"] = *p.amplitude;
  if (p.i1) j["i1"] = *p.i1;
  if (p.i2) j["i2"] = *p.i2;
  if (p.velocity) j["velocity"] = vec_json(*p.velocity);
  j["pendulum"] = {{"cart_mass", p.pendulum.cart_mass},
                   {"bob_mass", p.pendulum.bob_mass},
                   {"length", p.pendulum.length},
                   {"gravity", p.pendulum.gravity}};
  return j;
}

EvalSpec parse_eval(const json& j) {
  Node n(j, "eval",
         {"oracle", "times", "grid", "residual_particles", "n_list", "seeds", "eval_sample_size",
          "study_time", "diagonal_points", "exclude_radius", "agents", "control_seed",
          "control_substeps", "thresholds"});
  EvalSpec e;
  e.oracle = n.get<std::string>("oracle", e.oracle);
  if (n.has("times")) {
    const Vec t = n.get<Vec>("times");
    e.times.assign(t.data(), t.data() + t.size());
  }
  if (n.has("grid")) {
    Node g(n.raw("grid"), "eval.grid", {"plane", "lo", "hi", "n"});
    GridSpec gs;
    const auto plane = g.get<std::vector<int>>("plane");
    const Vec lo = g.get<Vec>("lo"), hi = g.get<Vec>("hi");
    if (plane.size() != 2) g.fail("plane", "must list two 1-based coordinates");
    if (lo.size() != 2 || hi.size() != 2) g.fail("lo", "lo and hi must have two entries");
    gs.i = plane[0] - 1;
    gs.j = plane[1] - 1;
    gs.lo_i = lo[0];
    gs.lo_j = lo[1];
    gs.hi_i = hi[0];
    gs.hi_j = hi[1];
    gs.n = g.get<int>("n", gs.n);
    if (gs.n < 2) g.fail("n", "must be at least 2");
    if (!(gs.lo_i < gs.hi_i && gs.lo_j < gs.hi_j)) g.fail("lo", "must be below hi");
    e.grid = gs;
  }
  e.residual_particles = n.get<int>("residual_particles", e.residual_particles);
  if (e.residual_particles < 0) n.fail("residual_particles", "must be non-negative");
  if (n.has("n_list")) e.n_list = n.get<std::vector<int>>("n_list");
  if (n.has("seeds")) e.seeds = n.get<std::vector<std::uint64_t>>("seeds");
  e.eval_sample_size = n.get<int>("eval_sample_size", e.eval_sample_size);
  e.study_time = n.get<double>("study_time", e.study_time);
  e.diagonal_points = n.get<int>("diagonal_points", e.diagonal_points);
  e.exclude_radius = n.get<double>("exclude_radius", e.exclude_radius);
  e.agents = n.get<int>("agents", e.agents);
  e.control_seed = n.get<std::uint64_t>("control_seed", e.control_seed);
  e.control_substeps = n.get<int>("control_substeps", e.control_substeps);
  if (e.agents < 1) n.fail("agents", "must be at least 1");
  if (e.control_substeps < 1) n.fail("control_substeps", "must be at least 1");
  if (e.eval_sample_size < 1) n.fail("eval_sample_size", "must be at least 1");
  if (e.diagonal_points < 2) n.fail("diagonal_points", "must be at least 2");
  for (int v : e.n_list)
    if (v < 1) n.fail("n_list", "entries must be positive");
  if (n.has("thresholds")) {
    const json& th = n.raw("thresholds");
    if (!th.is_object()) n.fail("thresholds", "must be an object");
    for (auto it = th.begin(); it != th.end(); ++it) {
      const std::string& k = it.key();
      if (k.rfind("max_", 0) != 0 && k.rfind("min_", 0) != 0)
        throw ConfigError("config: eval.thresholds." + k + ": name must start with max_ or min_");
      if (!it.value().is_number())
        throw ConfigError("config: eval.thresholds." + k + ": must be a number");
      e.thresholds[k] = it.value().get<double>();
    }
  }
  return e;
}

json eval_json(const EvalSpec& e) {
  json j = {{"oracle", e.oracle},
            {"times", e.times},
            {"residual_particles", e.residual_particles},
            {"n_list", e.n_list},
            {"seeds", e.seeds},
            {"eval_sample_size", e.eval_sample_size},
            {"study_time", e.study_time},
            {"diagonal_points", e.diagonal_points},
            {"exclude_radius", e.exclude_radius},
            {"agents", e.agents},
            {"control_seed", e.control_seed},
            {"control_substeps", e.control_substeps},
            {"thresholds", e.thresholds}};
  if (e.grid) {
    const auto& g = *e.grid;
    j["grid"] = {{"plane", {g.i + 1, g.j + 1}}, {"lo", {g.lo_i, g.lo_j}}, {"hi", {g.hi_i, g.hi_j}}, {"n", g.n}};
  }
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  Node root(doc, "", {"schema", "name", "hamiltonian", "rho0", "trajectory", "network", "train", "eval"});
  if (root.get<std::string>("schema") != "hjdc-config-1")
    root.fail("schema", "must be \"hjdc-config-1\"");
  ExperimentConfig c;
  c.name = root.get<std::string>("name", "");

  Node ham(root.raw("hamiltonian"), "hamiltonian", {"name", "params"});
  c.hamiltonian = ham.get<std::string>("name");
  if (!is_builtin_model(c.hamiltonian)) ham.fail("name", "unknown model '" + c.hamiltonian + "'");
  if (ham.has("params")) c.model_params = parse_model_params(ham.raw("params"));

  c.rho0 = parse_rho0(root.raw("rho0"));

  Node tr(root.raw("trajectory"), "trajectory", {"N", "M", "T", "integrator", "omega", "seed"});
  c.trajectory.N = tr.get<int>("N");
  c.trajectory.M = tr.get<int>("M");
  c.trajectory.T = tr.get<double>("T");
  try {
    c.trajectory.integrator.kind = parse_integrator(tr.get<std::string>("integrator"));
  } catch (const ConfigError& e) {
    tr.fail("integrator", e.what());
  }
  c.trajectory.integrator.omega = tr.get<double>("omega", 10.0);
  c.trajectory.seed = tr.get<std::uint64_t>("seed", 0);
  if (c.trajectory.N < 1) tr.fail("N", "must be at least 1");
  if (c.trajectory.M < 1) tr.fail("M", "must be at least 1");
  if (!(c.trajectory.T > 0)) tr.fail("T", "must be positive");
  if (!(c.trajectory.integrator.omega > 0)) tr.fail("omega", "must be positive");

  Node net(root.raw("network"), "network", {"L", "width", "kappa", "activation", "seed"});
  c.network.depth = net.get<int>("L");
  c.network.width = net.get<int>("width");
  c.network.kappa = net.get<double>("kappa", 0.5);
  try {
    c.network.activation = parse_activation(net.get<std::string>("activation", "tanh"));
  } catch (const ConfigError& e) {
    net.fail("activation", e.what());
  }
  c.network_seed = net.get<std::uint64_t>("seed", 0);
  if (c.network.depth < 3) net.fail("L", "must be at least 3");
  if (c.network.width < 1) net.fail("width", "must be at least 1");

  Node t(root.raw("train"), "train", {"lr", "n_iter", "batch", "M_T", "loss_kind", "seed"});
  c.train.lr = t.get<double>("lr");
  c.train.n_iter = t.get<int>("n_iter");
  c.train.batch = t.get<int>("batch");
  c.train.M_T = t.get<int>("M_T", 1);
  try {
    c.train.loss_kind = parse_loss_kind(t.get<std::string>("loss_kind", "quadratic"));
  } catch (const ConfigError& e) {
    t.fail("loss_kind", e.what());
  }
  c.train.seed = t.get<std::uint64_t>("seed", 0);

  if (root.has("eval")) c.eval = parse_eval(root.raw("eval"));
  c.network.d = build_model(c).model->dim();
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  const ModelBundle mb = build_model(*this);
  const int d = mb.model->dim();
  if (sampler_dim(rho0) != d)
    throw ConfigError("config: rho0: dimension " + std::to_string(sampler_dim(rho0)) +
                      " does not match hamiltonian dimension " + std::to_string(d));
  if (network.d != d) throw ConfigError("config: network: dimension does not match the hamiltonian");
  try {
    check_compatible(*mb.model, trajectory.integrator.kind);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: trajectory.integrator: ") + e.what());
  }
  try {
    train.validate(trajectory.N, trajectory.M);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto& o = eval.oracle;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: eval.oracle: '" + o + "' " + what);
  };
  if (o == "none") {
  } else if (o == "harmonic") {
    need(hamiltonian == "harmonic", "needs the harmonic model");
  } else if (o == "caustic") {
    need(hamiltonian == "degenerate_kinetic" && model_params.tau.value_or(3.0) == 0.0 &&
             model_params.frequency.value_or(0.0) == 1.0 && model_params.amplitude.value_or(1.0) == 1.0,
         "needs degenerate_kinetic with tau = 0, frequency = 1, amplitude = 1");
  } else if (o == "sinusoidal_kinetic") {
    need(hamiltonian == "degenerate_kinetic" && model_params.tau.value_or(3.0) == 3.0 &&
             std::abs(model_params.frequency.value_or(std::sqrt(3.0)) - std::sqrt(3.0)) < 1e-12 &&
             model_params.amplitude.value_or(1.0) == 1.0,
         "needs degenerate_kinetic with tau = 3, frequency = sqrt(3), amplitude = 1");
  } else if (o == "lqc") {
    need(hamiltonian == "lqc_pendulum", "needs the lqc_pendulum model");
  } else {
    throw ConfigError("config: eval.oracle: unknown oracle '" + o + "'");
  }
  if (eval.grid && (eval.grid->i < 0 || eval.grid->j < 0 || eval.grid->i >= d || eval.grid->j >= d ||
                    eval.grid->i == eval.grid->j))
    throw ConfigError("config: eval.grid.plane: coordinates must be distinct and within 1.." +
                      std::to_string(d));
}

json to_json(const ExperimentConfig& c) {
  json doc = {
      {"schema", "hjdc-config-1"},
      {"name", c.name},
      {"hamiltonian", {{"name", c.hamiltonian}, {"params", model_params_json(c.model_params)}}},
      {"rho0", rho0_json(c.rho0)},
      {"trajectory",
       {{"N", c.trajectory.N},
        {"M", c.trajectory.M},
        {"T", c.trajectory.T},
        {"integrator", to_string(c.trajectory.integrator.kind)},
        {"omega", c.trajectory.integrator.omega},
        {"seed", c.trajectory.seed}}},
      {"network",
       {{"L", c.network.depth},
        {"width", c.network.width},
        {"kappa", c.network.kappa},
        {"activation", to_string(c.network.activation)},
        {"seed", c.network_seed}}},
      {"train",
       {{"lr", c.train.lr},
        {"n_iter", c.train.n_iter},
        {"batch", c.train.batch},
        {"M_T", c.train.M_T},
        {"loss_kind", to_string(c.train.loss_kind)},
        {"seed", c.train.seed}}},
      {"eval", eval_json(c.eval)}};
  return doc;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelBundle build_model(const ExperimentConfig& cfg) {
  try {
    return make_builtin_model(cfg.hamiltonian, cfg.model_params);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: hamiltonian: ") + e.what());
  }
}

}  // namespace hjdc
