#pragma once

#include "sclbench/errors.hpp"
#include "sclbench/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

namespace sclbench {

/// One-hidden-layer perceptron: logits = W2 relu(W1 x + b1) + b2.
/// Also used as the gradient and velocity container, so every shape is mirrored.
template <typename Scalar>
struct MlpParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // classes x hidden
  Vector b2;

  static MlpParams zeros(int input, int hidden, int classes) {
    return {Matrix::Zero(hidden, input), Vector::Zero(hidden), Matrix::Zero(classes, hidden),
            Vector::Zero(classes)};
  }

  /// Glorot-uniform weights, zero biases.
  static MlpParams glorot(int input, int hidden, int classes, Rng& rng) {
    MlpParams p = zeros(input, hidden, classes);
    auto fill = [&rng](Matrix& w) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      // column-major fill order keeps initialization independent of Eigen internals
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(u(rng));
    };
    fill(p.w1);
    fill(p.w2);
    return p;
  }

  /// PyTorch nn.Linear default: weights and biases uniform in +-1/sqrt(fan_in).
  static MlpParams fan_in_uniform(int input, int hidden, int classes, Rng& rng) {
    MlpParams p = zeros(input, hidden, classes);
    auto fill = [&rng](Matrix& w, Vector& b) {
      const double limit = 1.0 / std::sqrt(static_cast<double>(w.cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(u(rng));
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = static_cast<Scalar>(u(rng));
    };
    fill(p.w1, p.b1);
    fill(p.w2, p.b2);
    return p;
  }

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int classes() const { return static_cast<int>(w2.rows()); }
  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  bool same_shape(const MlpParams& o) const {
    return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
           w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size();
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }

  /// Concatenation of w1, b1, w2, b2 (column-major).
  Vector flatten() const {
    Vector out(size());
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
      out.segment(at, m.size()) = m.reshaped();
      at += m.size();
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    return out;
  }

  /// Inverse of flatten() onto this object's shapes.
  void unflatten(const Eigen::Ref<const Vector>& flat) {
    if (flat.size() != size()) throw std::invalid_argument("flat parameter size mismatch");
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
      m.reshaped() = flat.segment(at, m.size());
      at += m.size();
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
  }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    return a.same_shape(b) && a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
  }
};

/// Logits for a batch stored column-wise (input x batch); result is classes x batch.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mlp_forward(
    const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& batch) {
  if (batch.cols() == 0) throw std::invalid_argument("mlp_forward: empty batch");
  if (batch.rows() != p.w1.cols()) throw std::invalid_argument("mlp_forward: input dimension mismatch");
  const auto hidden = ((p.w1 * batch).colwise() + p.b1).cwiseMax(Scalar(0)).eval();
  return (p.w2 * hidden).colwise() + p.b2;
}

/// Gradients of the mean softmax cross-entropy and the loss itself.
template <typename Scalar, typename Derived>
std::pair<MlpParams<Scalar>, Scalar> mlp_backward(const MlpParams<Scalar>& p,
                                                  const Eigen::MatrixBase<Derived>& batch,
                                                  std::span<const int> labels) {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  if (batch.cols() == 0) throw std::invalid_argument("mlp_backward: empty batch");
  if (batch.rows() != p.w1.cols()) throw std::invalid_argument("mlp_backward: input dimension mismatch");
  if (static_cast<Eigen::Index>(labels.size()) != batch.cols()) {
    throw std::invalid_argument("mlp_backward: one label per column required");
  }
  const Eigen::Index n = batch.cols();
  const Matrix pre = (p.w1 * batch).colwise() + p.b1;
  const Matrix hidden = pre.cwiseMax(Scalar(0));
  const Matrix logits = (p.w2 * hidden).colwise() + p.b2;

  Matrix delta(logits.rows(), n);
  Scalar loss(0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    if (y < 0 || y >= logits.rows()) throw std::invalid_argument("mlp_backward: label out of range");
    const Scalar top = logits.col(j).maxCoeff();
    const auto shifted = (logits.col(j).array() - top).eval();
    const Scalar log_z = std::log(shifted.exp().sum());
    loss += log_z - shifted[y];
    delta.col(j) = (shifted - log_z).exp().matrix();
    delta(y, j) -= Scalar(1);
  }
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  delta *= inv_n;

  MlpParams<Scalar> g;
  g.w2 = delta * hidden.transpose();
  g.b2 = delta.rowwise().sum();
  const Matrix back = (p.w2.transpose() * delta).cwiseProduct(
      (pre.array() > Scalar(0)).template cast<Scalar>().matrix());
  g.w1 = back * batch.transpose();
  g.b1 = back.rowwise().sum();
  return {std::move(g), loss * inv_n};
}

/// Classical momentum: v <- mu v + g; p <- p - lr v.
template <typename Scalar>
class SgdMomentum {
 public:
  SgdMomentum(const MlpParams<Scalar>& shape_like, Scalar lr, Scalar momentum)
      : lr_(lr),
        momentum_(momentum),
        velocity_(MlpParams<Scalar>::zeros(shape_like.input_dim(), shape_like.hidden_dim(),
                                           shape_like.classes())) {}

  void step(MlpParams<Scalar>& params, const MlpParams<Scalar>& grads) {
    if (!params.same_shape(grads) || !params.same_shape(velocity_)) {
      throw std::invalid_argument("optimizer step: shape mismatch");
    }
    if (!grads.all_finite()) throw NumericError("non-finite gradient");
    auto update = [this](auto& p, auto& v, const auto& g) {
      v = momentum_ * v + g;
      p -= lr_ * v;
    };
    update(params.w1, velocity_.w1, grads.w1);
    update(params.b1, velocity_.b1, grads.b1);
    update(params.w2, velocity_.w2, grads.w2);
    update(params.b2, velocity_.b2, grads.b2);
  }

  const MlpParams<Scalar>& velocity() const { return velocity_; }
  Scalar learning_rate() const { return lr_; }
  Scalar momentum() const { return momentum_; }

 private:
  Scalar lr_;
  Scalar momentum_;
  MlpParams<Scalar> velocity_;
};

/// AGEM projection: g if g.g_ref >= 0, otherwise g - (g.g_ref / g_ref.g_ref) g_ref.
template <typename DerivedG, typename DerivedRef>
Eigen::Matrix<typename DerivedG::Scalar, Eigen::Dynamic, 1> agem_project(
    const Eigen::MatrixBase<DerivedG>& g, const Eigen::MatrixBase<DerivedRef>& g_ref) {
  if (g.size() != g_ref.size()) throw std::invalid_argument("agem_project: length mismatch");
  const auto dot = g.dot(g_ref);
  if (dot >= 0) return g;
  return g - (dot / g_ref.squaredNorm()) * g_ref;
}

}  // namespace sclbench
