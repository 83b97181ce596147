#pragma once

#include <type_traits>

#include "trajkit/nn/param_store.hpp"

namespace trajkit::nn {

template <typename Scalar>
struct LossResult {
  Scalar value = 0;
  Sequence<Scalar> grad;
};

/// Mean of squared differences over every entry of every step.
template <typename Scalar>
LossResult<Scalar> mse_loss(const Sequence<Scalar>& pred, const Sequence<Scalar>& target) {
  if (pred.size() != target.size() || pred.empty()) {
    fail(ErrorKind::invalid_input, "mse_loss: sequence length mismatch");
  }
  Index count = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].rows() != target[t].rows() || pred[t].cols() != target[t].cols()) {
      fail(ErrorKind::invalid_input, "mse_loss: shape mismatch");
    }
    count += pred[t].size();
  }
  LossResult<Scalar> out;
  out.grad.resize(pred.size());
  // Accumulate in at least double precision.
  using Acc = std::common_type_t<Scalar, double>;
  Acc sum = 0;
  const Scalar scale = Scalar(2) / static_cast<Scalar>(count);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const Matrix<Scalar> diff = pred[t] - target[t];
    sum += diff.template cast<Acc>().squaredNorm();
    out.grad[t] = scale * diff;
  }
  out.value = static_cast<Scalar>(sum / static_cast<Acc>(count));
  return out;
}

template <typename Scalar>
LossResult<Scalar> mse_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target) {
  return mse_loss(Sequence<Scalar>{pred}, Sequence<Scalar>{target});
}

}  // namespace trajkit::nn
