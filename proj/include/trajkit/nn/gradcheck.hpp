#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trajkit/nn/loss.hpp"
#include "trajkit/nn/network.hpp"

namespace trajkit::nn {

template <typename Scalar>
struct GradCheckReport {
  Scalar max_relative_error = 0;
  Index worst_index = -1;
  std::string worst_slice;
  Scalar tolerance = 0;
  bool passed = true;
};

/// Central differences of `loss` with respect to every parameter.
template <typename Scalar, typename LossFn>
Vector<Scalar> numeric_gradient(LossFn&& loss, Vector<Scalar> params, Scalar step) {
  Vector<Scalar> g(params.size());
  for (Index i = 0; i < params.size(); ++i) {
    const Scalar saved = params[i];
    params[i] = saved + step;
    const Scalar up = loss(params);
    params[i] = saved - step;
    const Scalar down = loss(params);
    params[i] = saved;
    g[i] = (up - down) / (Scalar(2) * step);
  }
  return g;
}

/// Relative error |a - n| / max(1e-8, |a| + |n|) per entry; passes iff the
/// maximum is below `tolerance`.
template <typename Scalar>
GradCheckReport<Scalar> compare_gradients(const ParamLayout& layout, const Vector<Scalar>& analytic,
                                          const Vector<Scalar>& numeric, Scalar tolerance) {
  if (analytic.size() != numeric.size() || analytic.size() != layout.size()) {
    fail(ErrorKind::invalid_input, "compare_gradients: length mismatch");
  }
  GradCheckReport<Scalar> r;
  r.tolerance = tolerance;
  for (Index i = 0; i < analytic.size(); ++i) {
    const Scalar denom =
        std::max(Scalar(1e-8), std::abs(analytic[i]) + std::abs(numeric[i]));
    const Scalar err = std::abs(analytic[i] - numeric[i]) / denom;
    if (err > r.max_relative_error || r.worst_index < 0) {
      r.max_relative_error = err;
      r.worst_index = i;
    }
  }
  if (r.worst_index >= 0) r.worst_slice = layout.slice_containing(r.worst_index).name;
  r.passed = r.max_relative_error < tolerance;
  return r;
}

struct GradCheckOptions {
  Index steps = 5;
  Index batch = 2;
  std::uint64_t seed = 0;
  double step = 1e-5;
  bool wide_reference = true;
};

/// Builds the stack with random parameters, input and target, and checks the
/// analytic double-precision gradient of the MSE loss against central finite
/// differences. The difference quotients are evaluated on a long double twin of
/// the network so that rounding in the loss stays far below the smallest
/// gradient entries being compared; with `wide_reference` off they use the
/// double network itself.
inline GradCheckReport<double> grad_check(const std::vector<LayerSpec>& specs, double tolerance,
                                          const GradCheckOptions& opt = {}) {
  using Wide = long double;
  ParamLayout layout;
  Network<double> net(specs, layout, "check");
  std::mt19937_64 rng(opt.seed);
  Vector<double> params = Vector<double>::Zero(layout.size());
  net.initialize(params, rng);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (Index i = 0; i < params.size(); ++i) params[i] += jitter(rng);

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Sequence<double> x(static_cast<std::size_t>(opt.steps));
  Sequence<double> target(static_cast<std::size_t>(opt.steps));
  for (auto& xt : x) xt = Matrix<double>::NullaryExpr(net.input_size(), opt.batch, [&] { return unit(rng); });
  for (auto& yt : target) {
    yt = Matrix<double>::NullaryExpr(net.output_size(), opt.batch, [&] { return unit(rng); });
  }

  typename Network<double>::Cache cache;
  const auto y = net.forward(params, x, &cache);
  const auto loss = mse_loss(y, target);
  Vector<double> analytic = Vector<double>::Zero(params.size());
  net.backward(params, cache, loss.grad, analytic);

  if (!opt.wide_reference) {
    const Vector<double> numeric = numeric_gradient<double>(
        [&](const Vector<double>& p) { return mse_loss(net.forward(p, x), target).value; }, params,
        opt.step);
    return compare_gradients(layout, analytic, numeric, tolerance);
  }

  ParamLayout twin_layout;
  Network<Wide> twin(specs, twin_layout, "check");
  Sequence<Wide> xw, tw;
  for (const auto& m : x) xw.push_back(m.cast<Wide>());
  for (const auto& m : target) tw.push_back(m.cast<Wide>());
  const Vector<Wide> numeric = numeric_gradient<Wide>(
      [&](const Vector<Wide>& p) { return mse_loss(twin.forward(p, xw), tw).value; },
      params.cast<Wide>(), static_cast<Wide>(opt.step));
  return compare_gradients(layout, analytic, Vector<double>(numeric.cast<double>()), tolerance);
}

struct GradCheckCase {
  std::string name;
  std::vector<LayerSpec> specs;
};

/// One small stack per layer kind, plus a two-layer recurrent stack.
inline std::vector<GradCheckCase> standard_grad_cases() {
  using K = LayerKind;
  return {
      {"dense", {{K::dense, 3, 4, Activation::tanh}, {K::dense, 4, 2}}},
      {"rnn", {{K::rnn, 2, 4}}},
      {"lstm", {{K::lstm, 2, 4}}},
      {"gru", {{K::gru, 2, 4}}},
      {"tcn_block", {{K::tcn_block, 2, 3, Activation::tanh, 2, 1}, {K::tcn_block, 3, 3, Activation::tanh, 3, 2}}},
      {"gated_tcn_block",
       {{K::gated_tcn_block, 2, 3, Activation::tanh, 2, 1}, {K::gated_tcn_block, 3, 3, Activation::tanh, 2, 2}}},
      {"lstm_stack", {{K::lstm, 2, 3}, {K::lstm, 3, 3}, {K::dense, 3, 2}}},
  };
}

}  // namespace trajkit::nn
