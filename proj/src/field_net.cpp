#include "hjdc/field_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "hjdc/rng.hpp"

namespace hjdc {

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sin") return Activation::Sin;
  if (name == "relu") return Activation::Relu;
  if (name == "softplus") return Activation::Softplus;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Sin:
      return "sin";
    case Activation::Relu:
      return "relu";
    case Activation::Softplus:
      return "softplus";
  }
  return "unknown";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "quadratic") return LossKind::Quadratic;
  if (name == "bregman") return LossKind::Bregman;
  throw ConfigError("unknown loss_kind '" + name + "'");
}

std::string to_string(LossKind k) { return k == LossKind::Quadratic ? "quadratic" : "bregman"; }

// ---------------------------------------------------------------------------
// ScalarField

Vec ScalarField::grad_x(const Vec& x, double t) const {
  return grad_xt_batch(x, Vec::Constant(1, t)).col(0).head(dim());
}

std::pair<Vec, double> ScalarField::grad_xt(const Vec& x, double t) const {
  const Mat g = grad_xt_batch(x, Vec::Constant(1, t));
  return {g.col(0).head(dim()), g(dim(), 0)};
}

Mat ScalarField::grad_x_batch(const Mat& X, const Vec& t) const {
  return grad_xt_batch(X, t).topRows(dim());
}

SecondDerivatives ScalarField::second_derivatives(const Vec& x, double t) const {
  auto b = second_derivatives_batch(x, Vec::Constant(1, t));
  return {b.dt_grad.col(0), b.hessians};
}

SecondDerivativesBatch ScalarField::second_derivatives_batch(const Mat& X, const Vec& t) const {
  return fd_second_derivatives(*this, X, t);
}

SecondDerivativesBatch fd_second_derivatives(const ScalarField& field, const Mat& X,
                                             const Vec& t) {
  if (!field.twice_differentiable())
    throw ConfigError("second derivatives need a twice-differentiable activation (relu is not)");
  const int d = field.dim();
  const auto n = X.cols();
  // Stencil layout: for point b, columns b*(2d+2) + {2j, 2j+1} perturb x_j,
  // the last two perturb t.
  const int per = 2 * d + 2;
  Mat Xs(d, n * per);
  Vec ts(n * per);
  Mat steps(d + 1, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    for (int j = 0; j <= d; ++j) {
      const double base = j < d ? X(j, b) : t[b];
      const double h = 1e-4 * std::max(1.0, std::abs(base));
      steps(j, b) = h;
      for (int s = 0; s < 2; ++s) {
        const auto c = b * per + 2 * j + s;
        Xs.col(c) = X.col(b);
        ts[c] = t[b];
        const double shifted = s == 0 ? base + h : base - h;
        if (j < d)
          Xs(j, c) = shifted;
        else
          ts[c] = shifted;
      }
    }
  }
  const Mat g = field.grad_xt_batch(Xs, ts);
  SecondDerivativesBatch out{Mat(d, n), Mat(d, d * n)};
  for (Eigen::Index b = 0; b < n; ++b) {
    auto H = out.hessians.middleCols(b * d, d);
    for (int j = 0; j < d; ++j) {
      const auto c = b * per + 2 * j;
      // actual step (x +- h may round) keeps the quotient consistent
      const double span = Xs(j, c) - Xs(j, c + 1);
      H.col(j) = (g.col(c).head(d) - g.col(c + 1).head(d)) / span;
    }
    const Mat sym = 0.5 * (H + H.transpose());
    H = sym;
    const auto c = b * per + 2 * d;
    out.dt_grad.col(b) = (g.col(c).head(d) - g.col(c + 1).head(d)) / (ts[c] - ts[c + 1]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// NetShape

std::size_t NetShape::param_count() const {
  const std::size_t w = width, L = depth, dd = d;
  return (L - 2) * w * w + w * (dd + 2) + (L - 1) * w;
}

void NetShape::validate() const {
  if (d < 1) throw ConfigError("network: d must be at least 1");
  if (depth < 3) throw ConfigError("network: depth L must be at least 3");
  if (width < 1) throw ConfigError("network: width must be at least 1");
  if (!std::isfinite(kappa)) throw ConfigError("network: kappa must be finite");
}

// ---------------------------------------------------------------------------
// Activations, applied elementwise. s1 = s', s2 = s''.

namespace {

struct ActivationValues {
  Mat h, s1, s2;
};

ActivationValues activate(Activation a, const Mat& z, bool need_second) {
  ActivationValues v;
  switch (a) {
    case Activation::Tanh:
      v.h = z.array().tanh().matrix();
      v.s1 = (1.0 - v.h.array().square()).matrix();
      if (need_second) v.s2 = (-2.0 * v.h.array() * v.s1.array()).matrix();
      break;
    case Activation::Sin:
      v.h = z.array().sin().matrix();
      v.s1 = z.array().cos().matrix();
      if (need_second) v.s2 = -v.h;
      break;
    case Activation::Relu:
      v.h = z.array().max(0.0).matrix();
      v.s1 = (z.array() > 0.0).cast<double>().matrix();
      if (need_second) v.s2 = Mat::Zero(z.rows(), z.cols());
      break;
    case Activation::Softplus: {
      // log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
      v.h = (z.array().max(0.0) + (-z.array().abs()).exp().log1p()).matrix();
      v.s1 = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      if (need_second) v.s2 = (v.s1.array() * (1.0 - v.s1.array())).matrix();
      break;
    }
  }
  return v;
}

// Forward pass carrying tangents along the first `ntan` input coordinates.
// Tangent matrices are w x (ntan * n): block j (columns j*n .. j*n+n-1) is
// the derivative along input coordinate j.
struct Forward {
  int n = 0, ntan = 0;
  Mat y0;
  std::vector<Mat> h, s1, s2;  // index k-1 for layer k = 1..L-1
  std::vector<Mat> pre_tan;    // layer k >= 2: (I + kappa A_k) G_{k-1}; index k-1
  std::vector<Mat> tan;        // G_k = s1_k .* pre_tan_k; index k-1
};

void scale_blocks(Mat& blocks, const Mat& s, int n) {
  const auto nb = blocks.cols() / n;
  for (Eigen::Index j = 0; j < nb; ++j) blocks.middleCols(j * n, n).array() *= s.array();
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldNetwork

FieldNetwork::FieldNetwork(const NetShape& shape) : shape_(shape) {
  shape_.validate();
  params_ = Vec::Zero(static_cast<Eigen::Index>(shape_.param_count()));
}

FieldNetwork::FieldNetwork(const NetShape& shape, Vec params)
    : shape_(shape), params_(std::move(params)) {
  shape_.validate();
  if (static_cast<std::size_t>(params_.size()) != shape_.param_count())
    throw ConfigError("network: expected " + std::to_string(shape_.param_count()) +
                      " parameters, got " + std::to_string(params_.size()));
}

FieldNetwork FieldNetwork::he_init(const NetShape& shape, std::uint64_t seed) {
  FieldNetwork net(shape);
  Rng rng(seed);
  for (int k = 1; k <= shape.depth; ++k) {
    auto A = net.weight(k);
    const double sd = std::sqrt(2.0 / static_cast<double>(A.cols()));
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = sd * rng.normal();
  }
  return net;
}

std::size_t FieldNetwork::weight_offset(int k) const {
  const std::size_t w = shape_.width, in = shape_.d + 1;
  if (k == 1) return 0;
  const std::size_t first = w * in + w;
  return first + static_cast<std::size_t>(k - 2) * (w * w + w);
}

std::size_t FieldNetwork::bias_offset(int k) const {
  const std::size_t w = shape_.width;
  const std::size_t cols = k == 1 ? shape_.d + 1 : w;
  return weight_offset(k) + w * cols;
}

Eigen::Map<const Mat> FieldNetwork::weight(int k) const {
  const int w = shape_.width;
  const int rows = k == shape_.depth ? 1 : w;
  const int cols = k == 1 ? shape_.d + 1 : w;
  return {params_.data() + weight_offset(k), rows, cols};
}

Eigen::Map<Mat> FieldNetwork::weight(int k) {
  const int w = shape_.width;
  const int rows = k == shape_.depth ? 1 : w;
  const int cols = k == 1 ? shape_.d + 1 : w;
  return {params_.data() + weight_offset(k), rows, cols};
}

Eigen::Map<const Vec> FieldNetwork::bias(int k) const {
  if (k < 1 || k >= shape_.depth) throw std::out_of_range("network: no bias in layer " + std::to_string(k));
  return {params_.data() + bias_offset(k), shape_.width};
}

Eigen::Map<Vec> FieldNetwork::bias(int k) {
  if (k < 1 || k >= shape_.depth) throw std::out_of_range("network: no bias in layer " + std::to_string(k));
  return {params_.data() + bias_offset(k), shape_.width};
}

namespace {

Mat stack_input(const Mat& X, const Vec& t, int d) {
  if (X.rows() != d || X.cols() != t.size())
    throw ConfigError("network: input has " + std::to_string(X.rows()) + " rows, expected " +
                      std::to_string(d));
  Mat y(d + 1, X.cols());
  y.topRows(d) = X;
  y.row(d) = t.transpose();
  return y;
}

Forward run_forward(const FieldNetwork& net, const Mat& X, const Vec& t, int ntan,
                    bool need_second) {
  const auto& sh = net.shape();
  const int L = sh.depth;
  Forward f;
  f.n = static_cast<int>(X.cols());
  f.ntan = ntan;
  f.y0 = stack_input(X, t, sh.d);
  f.h.resize(L - 1);
  f.s1.resize(L - 1);
  f.s2.resize(L - 1);
  f.pre_tan.resize(L - 1);
  f.tan.resize(L - 1);

  const auto A1 = net.weight(1);
  Mat z = A1 * f.y0;
  z.colwise() += net.bias(1);
  auto v = activate(sh.activation, z, need_second);
  f.h[0] = std::move(v.h);
  f.s1[0] = std::move(v.s1);
  f.s2[0] = std::move(v.s2);
  if (ntan > 0) {
    Mat g(sh.width, static_cast<Eigen::Index>(ntan) * f.n);
    for (int j = 0; j < ntan; ++j)
      g.middleCols(j * f.n, f.n) = (f.s1[0].array().colwise() * A1.col(j).array()).matrix();
    f.tan[0] = std::move(g);
  }

  for (int k = 2; k <= L - 1; ++k) {
    const auto A = net.weight(k);
    const Mat& hp = f.h[k - 2];
    z = hp + sh.kappa * (A * hp);
    z.colwise() += sh.kappa * net.bias(k);
    v = activate(sh.activation, z, need_second);
    f.h[k - 1] = std::move(v.h);
    f.s1[k - 1] = std::move(v.s1);
    f.s2[k - 1] = std::move(v.s2);
    if (ntan > 0) {
      const Mat& gp = f.tan[k - 2];
      Mat pre = gp + sh.kappa * (A * gp);
      Mat g = pre;
      scale_blocks(g, f.s1[k - 1], f.n);
      f.pre_tan[k - 1] = std::move(pre);
      f.tan[k - 1] = std::move(g);
    }
  }
  return f;
}

}  // namespace

double FieldNetwork::eval(const Vec& x, double t) const {
  return eval_batch(x, Vec::Constant(1, t))[0];
}

Vec FieldNetwork::eval_batch(const Mat& X, const Vec& t) const {
  const Forward f = run_forward(*this, X, t, 0, false);
  return (weight(shape_.depth) * f.h.back()).transpose();
}

Mat FieldNetwork::grad_xt_batch(const Mat& X, const Vec& t) const {
  const int d = shape_.d;
  const Forward f = run_forward(*this, X, t, d + 1, false);
  const Mat out = weight(shape_.depth) * f.tan.back();  // 1 x (d+1)n, blocked by direction
  Mat g(d + 1, f.n);
  for (int j = 0; j <= d; ++j) g.row(j) = out.middleCols(j * f.n, f.n);
  return g;
}

SecondDerivativesBatch FieldNetwork::second_derivatives_batch(const Mat& X, const Vec& t) const {
  return fd_second_derivatives(*this, X, t);
}

// Reverse pass through the tangent recurrence. With U_j = dLoss/d(grad_j psi),
// the adjoints are
//   bar G_{L-1,j} = A_L' U_j,           bar A_L = sum_j G_{L-1,j} U_j'
//   bar s_k = sum_j bar G_{k,j} .* pre_tan_{k,j}
//   bar pre_tan_k = s1_k .* bar G_k
//   bar z_k = bar s_k .* s2_k + bar h_k .* s1_k
//   bar G_{k-1} = bar pre_tan_k + kappa A_k' bar pre_tan_k
//   bar A_k += kappa (bar pre_tan_k G_{k-1}' + bar z_k h_{k-1}'),  bar b_k += kappa sum bar z_k
//   bar h_{k-1} = bar z_k + kappa A_k' bar z_k
// and for layer 1, G_{1,j} = s1_1 .* A_1[:, j].
LossAndGrad FieldNetwork::loss_and_grad(const RegressionBatch& batch, double normalizer,
                                        LossKind kind, const HamiltonianModel* model) const {
  const int d = shape_.d, L = shape_.depth;
  const int n = batch.size();
  if (n == 0) throw ConfigError("loss: empty batch");
  if (batch.p.rows() != d || batch.p.cols() != n || batch.x.cols() != n)
    throw ConfigError("loss: batch dimensions are inconsistent");
  if (kind == LossKind::Bregman && model == nullptr)
    throw ConfigError("loss: bregman loss needs a Hamiltonian model");

  const Forward f = run_forward(*this, batch.x, batch.t, d, true);
  const auto AL = weight(L);
  const Mat out = AL * f.tan.back();
  Mat grads(d, n);
  for (int j = 0; j < d; ++j) grads.row(j) = out.middleCols(j * n, n);

  LossAndGrad res;
  Mat U(d, n);  // dLoss / d grads
  const double c = 1.0 / normalizer;
  if (kind == LossKind::Quadratic) {
    const Mat r = grads - batch.p;
    res.loss = c * r.squaredNorm();
    U = 2.0 * c * r;
  } else {
    double total = 0.0;
    for (int b = 0; b < n; ++b) {
      const Vec x = batch.x.col(b), q = grads.col(b), p = batch.p.col(b);
      total += bregman_divergence(*model, x, q, p);
      U.col(b) = c * (model->grad_p(x, q) - model->grad_p(x, p));
    }
    res.loss = c * total;
  }

  res.grad = Vec::Zero(params_.size());
  FieldNetwork grad_net(shape_, Vec::Zero(params_.size()));

  // Output layer.
  Mat Ublk(1, static_cast<Eigen::Index>(d) * n);
  for (int j = 0; j < d; ++j) Ublk.middleCols(j * n, n) = U.row(j);
  grad_net.weight(L) = Ublk * f.tan.back().transpose();
  Mat gbar = AL.transpose() * Ublk;  // w x dn
  Mat hbar = Mat::Zero(shape_.width, n);

  for (int k = L - 1; k >= 2; --k) {
    const auto A = weight(k);
    const Mat& pre = f.pre_tan[k - 1];
    Mat sbar = Mat::Zero(shape_.width, n);
    for (int j = 0; j < d; ++j)
      sbar.array() += gbar.middleCols(j * n, n).array() * pre.middleCols(j * n, n).array();
    Mat prebar = gbar;
    scale_blocks(prebar, f.s1[k - 1], n);
    const Mat zbar = (sbar.array() * f.s2[k - 1].array() + hbar.array() * f.s1[k - 1].array()).matrix();
    const Mat& gprev = f.tan[k - 2];
    const Mat& hprev = f.h[k - 2];
    grad_net.weight(k) = shape_.kappa * (prebar * gprev.transpose() + zbar * hprev.transpose());
    grad_net.bias(k) = shape_.kappa * zbar.rowwise().sum();
    gbar = prebar + shape_.kappa * (A.transpose() * prebar);
    hbar = zbar + shape_.kappa * (A.transpose() * zbar);
  }

  // Layer 1.
  const auto A1 = weight(1);
  Mat sbar = Mat::Zero(shape_.width, n);
  auto gA1 = grad_net.weight(1);
  for (int j = 0; j < d; ++j) {
    const auto blk = gbar.middleCols(j * n, n);
    sbar.array() += blk.array().colwise() * A1.col(j).array();
    gA1.col(j) = (blk.array() * f.s1[0].array()).rowwise().sum().matrix();
  }
  const Mat zbar = (sbar.array() * f.s2[0].array() + hbar.array() * f.s1[0].array()).matrix();
  gA1 += zbar * f.y0.transpose();
  grad_net.bias(1) = zbar.rowwise().sum();

  res.grad = std::move(grad_net.params());
  return res;
}

LossAndGrad loss_value_and_param_grad(const FieldNetwork& net, const RegressionBatch& batch,
                                      LossKind kind, const HamiltonianModel* model) {
  if (batch.size() == 0) throw ConfigError("loss: empty batch");
  return net.loss_and_grad(batch, static_cast<double>(batch.size()), kind, model);
}

// ---------------------------------------------------------------------------
// PiecewiseField

PiecewiseField::PiecewiseField(std::vector<double> edges, std::vector<FieldNetwork> nets)
    : edges_(std::move(edges)), nets_(std::move(nets)) {
  if (nets_.empty()) throw ConfigError("piecewise field: no networks");
  if (edges_.size() != nets_.size() + 1)
    throw ConfigError("piecewise field: need one more edge than networks");
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k)
    if (!(edges_[k] < edges_[k + 1])) throw ConfigError("piecewise field: edges must increase");
  for (const auto& n : nets_)
    if (!(n.shape() == nets_.front().shape()))
      throw ConfigError("piecewise field: all networks must share one shape");
}

std::vector<double> PiecewiseField::uniform_edges(double T, int intervals) {
  if (intervals < 1) throw ConfigError("M_T must be at least 1");
  std::vector<double> e(intervals + 1);
  for (int k = 0; k <= intervals; ++k) e[k] = T * k / intervals;
  e.back() = T;
  return e;
}

int PiecewiseField::interval_of(double t) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  const int k = static_cast<int>(it - edges_.begin()) - 1;
  return std::clamp(k, 0, intervals() - 1);
}

double PiecewiseField::eval(const Vec& x, double t) const { return nets_[interval_of(t)].eval(x, t); }

namespace {

// Splits column indices of a batch by owning interval.
std::vector<std::vector<Eigen::Index>> group_by_interval(const PiecewiseField& f, const Vec& t) {
  std::vector<std::vector<Eigen::Index>> groups(f.intervals());
  for (Eigen::Index b = 0; b < t.size(); ++b) groups[f.interval_of(t[b])].push_back(b);
  return groups;
}

}  // namespace

Mat PiecewiseField::grad_xt_batch(const Mat& X, const Vec& t) const {
  if (intervals() == 1) return nets_[0].grad_xt_batch(X, t);
  Mat out(dim() + 1, X.cols());
  const auto groups = group_by_interval(*this, t);
  for (int k = 0; k < intervals(); ++k) {
    const auto& idx = groups[k];
    if (idx.empty()) continue;
    const Mat g = nets_[k].grad_xt_batch(X(Eigen::all, idx), t(idx));
    for (std::size_t c = 0; c < idx.size(); ++c) out.col(idx[c]) = g.col(static_cast<Eigen::Index>(c));
  }
  return out;
}

SecondDerivativesBatch PiecewiseField::second_derivatives_batch(const Mat& X, const Vec& t) const {
  if (intervals() == 1) return nets_[0].second_derivatives_batch(X, t);
  const int d = dim();
  SecondDerivativesBatch out{Mat(d, X.cols()), Mat(d, d * X.cols())};
  const auto groups = group_by_interval(*this, t);
  for (int k = 0; k < intervals(); ++k) {
    const auto& idx = groups[k];
    if (idx.empty()) continue;
    const auto s = nets_[k].second_derivatives_batch(X(Eigen::all, idx), t(idx));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      out.dt_grad.col(idx[c]) = s.dt_grad.col(static_cast<Eigen::Index>(c));
      out.hessians.middleCols(idx[c] * d, d) = s.hessians.middleCols(static_cast<Eigen::Index>(c) * d, d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json matrix_rows(const Eigen::Map<const Mat>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

void read_matrix(const nlohmann::json& rows, Eigen::Map<Mat> m, const std::string& name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != m.rows())
    throw ConfigError("model file: " + name + " has wrong row count");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& r = rows[i];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != m.cols())
      throw ConfigError("model file: " + name + " has wrong column count");
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r[j].get<double>();
  }
}

}  // namespace

nlohmann::json to_json(const PiecewiseField& field) {
  const auto& sh = field.net(0).shape();
  nlohmann::json doc = {{"schema", "hjdc-net-1"},
                        {"d", sh.d},
                        {"L", sh.depth},
                        {"width", sh.width},
                        {"kappa", sh.kappa},
                        {"activation", to_string(sh.activation)}};
  nlohmann::json intervals = nlohmann::json::array();
  for (int k = 0; k < field.intervals(); ++k) {
    const auto& net = field.net(k);
    nlohmann::json params;
    for (int layer = 1; layer <= sh.depth; ++layer) {
      params["A" + std::to_string(layer)] = matrix_rows(net.weight(layer));
      if (layer < sh.depth) {
        const auto b = net.bias(layer);
        params["b" + std::to_string(layer)] = std::vector<double>(b.data(), b.data() + b.size());
      }
    }
    intervals.push_back({{"t_lo", field.edges()[k]}, {"t_hi", field.edges()[k + 1]}, {"params", params}});
  }
  doc["intervals"] = std::move(intervals);
  return doc;
}

PiecewiseField field_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("schema", "") != "hjdc-net-1")
      throw ConfigError("model file: schema must be \"hjdc-net-1\"");
    NetShape sh;
    sh.d = doc.at("d").get<int>();
    sh.depth = doc.at("L").get<int>();
    sh.width = doc.at("width").get<int>();
    sh.kappa = doc.at("kappa").get<double>();
    sh.activation = parse_activation(doc.at("activation").get<std::string>());
    sh.validate();
    std::vector<double> edges;
    std::vector<FieldNetwork> nets;
    for (const auto& iv : doc.at("intervals")) {
      if (edges.empty()) edges.push_back(iv.at("t_lo").get<double>());
      edges.push_back(iv.at("t_hi").get<double>());
      FieldNetwork net(sh);
      const auto& params = iv.at("params");
      for (int layer = 1; layer <= sh.depth; ++layer) {
        const std::string an = "A" + std::to_string(layer);
        read_matrix(params.at(an), net.weight(layer), an);
        if (layer < sh.depth) {
          const std::string bn = "b" + std::to_string(layer);
          const auto v = params.at(bn).get<std::vector<double>>();
          if (static_cast<int>(v.size()) != sh.width) throw ConfigError("model file: " + bn + " has wrong length");
          net.bias(layer) = Eigen::Map<const Vec>(v.data(), sh.width);
        }
      }
      nets.push_back(std::move(net));
    }
    return PiecewiseField(std::move(edges), std::move(nets));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
}

void save_field(const PiecewiseField& field, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_json(field).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

PiecewiseField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("model file '" + path + "': " + e.what());
  }
  return field_from_json(doc);
}

}  // namespace hjdc
