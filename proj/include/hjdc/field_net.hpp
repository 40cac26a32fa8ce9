#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hjdc/common.hpp"
#include "hjdc/hamiltonians.hpp"

namespace hjdc {

enum class Activation { Tanh, Sin, Relu, Softplus };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct SecondDerivatives {
  Vec dt_grad;  // d/dt grad_x psi
  Mat hessian;  // grad_x^2 psi, symmetric
};

/// Second derivatives at n points: dt_grad is d x n; hessians holds n
/// consecutive d x d blocks side by side (d x dn).
struct SecondDerivativesBatch {
  Mat dt_grad;
  Mat hessians;
};

/// A scalar field psi(x, t) on R^d x R with first derivatives.
///
/// Second derivatives default to central differences of the exact first
/// derivative with step 1e-4 * max(1, |coordinate|), symmetrized.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual int dim() const = 0;
  virtual double eval(const Vec& x, double t) const = 0;

  /// Rows 0..d-1 hold grad_x psi, row d holds d/dt psi; one column per point.
  virtual Mat grad_xt_batch(const Mat& X, const Vec& t) const = 0;

  virtual bool twice_differentiable() const { return true; }
  virtual SecondDerivativesBatch second_derivatives_batch(const Mat& X, const Vec& t) const;

  Vec grad_x(const Vec& x, double t) const;
  std::pair<Vec, double> grad_xt(const Vec& x, double t) const;
  SecondDerivatives second_derivatives(const Vec& x, double t) const;
  Mat grad_x_batch(const Mat& X, const Vec& t) const;
};

/// Finite-difference second derivatives of `field` at a batch of points.
SecondDerivativesBatch fd_second_derivatives(const ScalarField& field, const Mat& X, const Vec& t);

struct NetShape {
  int d = 1;      // spatial dimension; the network input is (x, t)
  int depth = 3;  // L >= 3
  int width = 1;
  double kappa = 0.5;
  Activation activation = Activation::Tanh;

  std::size_t param_count() const;
  void validate() const;
  bool operator==(const NetShape&) const = default;
};

enum class LossKind { Quadratic, Bregman };

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind k);

/// Regression samples, one column per sample: x is d x n, p is d x n.
struct RegressionBatch {
  Mat x;
  Vec t;
  Mat p;

  int size() const { return static_cast<int>(t.size()); }
};

struct LossAndGrad {
  double loss = 0.0;  // already divided by the normalizer
  Vec grad;           // d loss / d params, flat layout
};

/// Residual network psi: R^{d+1} -> R,
///   h_1 = s(A_1 y + b_1),  h_k = s(h_{k-1} + kappa (A_k h_{k-1} + b_k)),  psi = A_L h_{L-1}.
///
/// Parameters are one flat vector laid out as A_1, b_1, A_2, b_2, ..., A_{L-1},
/// b_{L-1}, A_L with column-major matrices.
class FieldNetwork final : public ScalarField {
 public:
  explicit FieldNetwork(const NetShape& shape);  // all-zero parameters
  FieldNetwork(const NetShape& shape, Vec params);

  /// Weights ~ N(0, 2 / fan_in), biases zero.
  static FieldNetwork he_init(const NetShape& shape, std::uint64_t seed);

  const NetShape& shape() const { return shape_; }
  const Vec& params() const { return params_; }
  Vec& params() { return params_; }

  /// Layer k in 1..L. Layer L has no bias.
  Eigen::Map<const Mat> weight(int k) const;
  Eigen::Map<Mat> weight(int k);
  Eigen::Map<const Vec> bias(int k) const;
  Eigen::Map<Vec> bias(int k);

  int dim() const override { return shape_.d; }
  double eval(const Vec& x, double t) const override;
  Vec eval_batch(const Mat& X, const Vec& t) const;
  Mat grad_xt_batch(const Mat& X, const Vec& t) const override;
  bool twice_differentiable() const override { return shape_.activation != Activation::Relu; }
  SecondDerivativesBatch second_derivatives_batch(const Mat& X, const Vec& t) const override;

  /// Sum over the batch of |grad_x psi - p|^2 (Quadratic) or
  /// D_{H,x}(grad_x psi : p) (Bregman), divided by `normalizer`, with its
  /// exact parameter gradient. `model` is required for Bregman.
  LossAndGrad loss_and_grad(const RegressionBatch& batch, double normalizer,
                            LossKind kind = LossKind::Quadratic,
                            const HamiltonianModel* model = nullptr) const;

 private:
  std::size_t weight_offset(int k) const;
  std::size_t bias_offset(int k) const;

  NetShape shape_;
  Vec params_;
};

/// Mean loss and its gradient over a nonempty batch (normalizer = batch size).
LossAndGrad loss_value_and_param_grad(const FieldNetwork& net, const RegressionBatch& batch,
                                      LossKind kind = LossKind::Quadratic,
                                      const HamiltonianModel* model = nullptr);

/// One network per left-closed subinterval of [t_lo, t_hi]; the last interval
/// is closed on the right. Times outside the range use the nearest network.
class PiecewiseField final : public ScalarField {
 public:
  PiecewiseField(std::vector<double> edges, std::vector<FieldNetwork> nets);

  /// M_T equal subintervals of [0, T].
  static std::vector<double> uniform_edges(double T, int intervals);

  int intervals() const { return static_cast<int>(nets_.size()); }
  const std::vector<double>& edges() const { return edges_; }
  const FieldNetwork& net(int k) const { return nets_[k]; }
  FieldNetwork& net(int k) { return nets_[k]; }
  int interval_of(double t) const;

  int dim() const override { return nets_.front().dim(); }
  double eval(const Vec& x, double t) const override;
  Mat grad_xt_batch(const Mat& X, const Vec& t) const override;
  bool twice_differentiable() const override { return nets_.front().twice_differentiable(); }
  SecondDerivativesBatch second_derivatives_batch(const Mat& X, const Vec& t) const override;

 private:
  std::vector<double> edges_;
  std::vector<FieldNetwork> nets_;
};

/// Model file schema "hjdc-net-1".
nlohmann::json to_json(const PiecewiseField& field);
PiecewiseField field_from_json(const nlohmann::json& doc);
void save_field(const PiecewiseField& field, const std::string& path);
PiecewiseField load_field(const std::string& path);

}  // namespace hjdc
