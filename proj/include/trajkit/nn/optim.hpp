#pragma once

#include <cmath>
#include <cstdint>

#include "trajkit/nn/param_store.hpp"

namespace trajkit::nn {

template <typename Scalar>
struct AdamState {
  std::int64_t step_count = 0;
  Vector<Scalar> first_moment;
  Vector<Scalar> second_moment;
  Scalar learning_rate = Scalar(0.005);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  AdamState() = default;
  AdamState(Index size, Scalar lr)
      : first_moment(Vector<Scalar>::Zero(size)),
        second_moment(Vector<Scalar>::Zero(size)),
        learning_rate(lr) {}
};

/// Bias-corrected ADAM update.
template <typename Scalar>
void adam_step(Vector<Scalar>& params, const Vector<Scalar>& grads, AdamState<Scalar>& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    fail(ErrorKind::invalid_input, "adam_step: array length mismatch");
  }
  ++state.step_count;
  state.first_moment = state.beta1 * state.first_moment + (Scalar(1) - state.beta1) * grads;
  state.second_moment =
      state.beta2 * state.second_moment + (Scalar(1) - state.beta2) * grads.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step_count));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step_count));
  params.array() -= state.learning_rate * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

template <typename Scalar>
void sgd_step(Vector<Scalar>& params, const Vector<Scalar>& grads, Scalar learning_rate) {
  if (grads.size() != params.size()) fail(ErrorKind::invalid_input, "sgd_step: length mismatch");
  params -= learning_rate * grads;
}

/// Rescales `grads` so its L2 norm is at most `max_norm`; returns the norm
/// before clipping.
template <typename Scalar>
Scalar clip_global_norm(Vector<Scalar>& grads, Scalar max_norm) {
  const Scalar norm = grads.norm();
  if (norm > max_norm) grads *= max_norm / norm;
  return norm;
}

}  // namespace trajkit::nn
