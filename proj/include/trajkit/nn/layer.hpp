#pragma once

#include <cmath>
#include <string>
#include <type_traits>

#include "trajkit/nn/param_store.hpp"

namespace trajkit::nn {

enum class Activation { identity, tanh, relu, sigmoid };
enum class LayerKind { dense, rnn, lstm, gru, tcn_block, gated_tcn_block };

const char* to_string(Activation a);
const char* to_string(LayerKind k);
Activation parse_activation(const std::string& text);

/// One layer of a stack. For recurrent kinds output_size is the state size.
/// `activation` is the output nonlinearity for dense and vanilla rnn layers and
/// the convolution nonlinearity for tcn blocks; lstm/gru use their fixed gates.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  Index input_size = 1;
  Index output_size = 1;
  Activation activation = Activation::identity;
  Index kernel_size = 2;
  Index dilation = 1;

  bool is_recurrent() const {
    return kind == LayerKind::rnn || kind == LayerKind::lstm || kind == LayerKind::gru;
  }
  bool is_tcn() const {
    return kind == LayerKind::tcn_block || kind == LayerKind::gated_tcn_block;
  }
};

void validate(const LayerSpec& spec);
std::string describe(const LayerSpec& spec);

template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar sigmoid(Scalar z) {
  return Scalar(1) / (Scalar(1) + std::exp(-z));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
  using S = typename Derived::Scalar;
  return z.unaryExpr([](S v) { return sigmoid(v); });
}

template <typename Scalar>
Matrix<Scalar> activate(Activation a, const Matrix<Scalar>& z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::relu: return z.cwiseMax(Scalar(0));
    case Activation::sigmoid: return sigmoid(z);
  }
  return z;
}

/// Elementwise dy/dz given pre-activation z and output y = activate(z).
template <typename Scalar>
Matrix<Scalar> activation_grad(Activation a, const Matrix<Scalar>& z, const Matrix<Scalar>& y) {
  switch (a) {
    case Activation::identity: return Matrix<Scalar>::Ones(z.rows(), z.cols());
    case Activation::tanh: return (Scalar(1) - y.array().square()).matrix();
    case Activation::relu: return (z.array() > Scalar(0)).template cast<Scalar>().matrix();
    case Activation::sigmoid: return (y.array() * (Scalar(1) - y.array())).matrix();
  }
  return Matrix<Scalar>::Ones(z.rows(), z.cols());
}

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::rnn: return "rnn";
    case LayerKind::lstm: return "lstm";
    case LayerKind::gru: return "gru";
    case LayerKind::tcn_block: return "tcn_block";
    case LayerKind::gated_tcn_block: return "gated_tcn_block";
  }
  return "?";
}

inline Activation parse_activation(const std::string& text) {
  if (text == "identity" || text == "linear") return Activation::identity;
  if (text == "tanh") return Activation::tanh;
  if (text == "relu") return Activation::relu;
  if (text == "sigmoid") return Activation::sigmoid;
  fail(ErrorKind::config, "unknown activation '" + text + "'");
}

inline void validate(const LayerSpec& spec) {
  if (spec.input_size < 1 || spec.output_size < 1) {
    fail(ErrorKind::config, std::string(to_string(spec.kind)) + " layer sizes must be >= 1");
  }
  if (spec.is_tcn()) {
    if (spec.kernel_size < 2) fail(ErrorKind::config, "tcn kernel_size must be >= 2");
    if (spec.dilation < 1) fail(ErrorKind::config, "tcn dilation must be >= 1");
  }
}

inline std::string describe(const LayerSpec& spec) {
  std::string out = std::string(to_string(spec.kind)) + "(" + std::to_string(spec.input_size) +
                    "->" + std::to_string(spec.output_size) + "," + to_string(spec.activation);
  if (spec.is_tcn()) {
    out += ",k=" + std::to_string(spec.kernel_size) + ",d=" + std::to_string(spec.dilation);
  }
  return out + ")";
}

}  // namespace trajkit::nn
