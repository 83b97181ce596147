#include <utility>

#include "trajkit/analysis.hpp"
#include "trajkit/models.hpp"

namespace trajkit::models {
namespace {

using nn::Activation;
using nn::LayerKind;
using nn::LayerSpec;

constexpr Eigen::Index kWindowLen = kObserveLen + kPredictLen;

LayerKind recurrent_kind(Cell cell) {
  switch (cell) {
    case Cell::vanilla: return LayerKind::rnn;
    case Cell::lstm: return LayerKind::lstm;
    case Cell::gru: return LayerKind::gru;
  }
  return LayerKind::lstm;
}

std::vector<LayerSpec> recurrent_stack(const PredictorConfig& c, Eigen::Index input) {
  std::vector<LayerSpec> specs;
  for (int l = 0; l < c.layers; ++l) {
    specs.push_back({recurrent_kind(c.cell), l == 0 ? input : c.hidden, c.hidden});
  }
  return specs;
}

std::vector<LayerSpec> head_specs(const PredictorConfig& c, Eigen::Index out) {
  if (c.activation == Activation::identity) return {{LayerKind::dense, c.hidden, out}};
  return {{LayerKind::dense, c.hidden, c.hidden, c.activation}, {LayerKind::dense, c.hidden, out}};
}

bool full_path(const PredictorConfig& c) { return c.output_mode != OutputMode::next_step_recursive; }

Eigen::Index input_steps(const PredictorConfig& c) {
  return c.input_mode == InputMode::positions ? kObserveLen : kObserveLen - 1;
}

nn::Sequence<double> to_sequence(const Eigen::MatrixXd& m) {
  nn::Sequence<double> seq;
  seq.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.cols(); ++t) seq.push_back(m.col(t));
  return seq;
}

}  // namespace

Graph::Graph(const PredictorConfig& c, nn::ParamLayout& layout, const std::string& prefix) {
  const bool whole = full_path(c);
  switch (c.family) {
    case Family::linear_interp:
      fail(ErrorKind::config, "linear_interp has no network");
    case Family::mlp: {
      std::vector<LayerSpec> specs;
      for (int l = 0; l < c.layers; ++l) {
        specs.push_back({LayerKind::dense, l == 0 ? 2 * input_steps(c) : c.hidden, c.hidden,
                         c.activation});
      }
      body_ = nn::Network<double>(specs, layout, prefix + ".body");
      head_ = nn::Network<double>({{LayerKind::dense, c.hidden, whole ? 2 * kPredictLen : 2}},
                                  layout, prefix + ".head");
      readout_ = Readout::last_step;
      return;
    }
    case Family::rnn_mlp:
      body_ = nn::Network<double>(recurrent_stack(c, 2), layout, prefix + ".body");
      head_ = nn::Network<double>(head_specs(c, 2), layout, prefix + ".head");
      readout_ = Readout::per_step;
      return;
    case Family::rnn_encoder_mlp:
      body_ = nn::Network<double>(recurrent_stack(c, 2), layout, prefix + ".body");
      head_ = nn::Network<double>(head_specs(c, whole ? 2 * kPredictLen : 2), layout,
                                  prefix + ".head");
      readout_ = Readout::last_step;
      return;
    case Family::seq2seq:
      body_ = nn::Network<double>(recurrent_stack(c, 2), layout, prefix + ".encoder");
      decoder_.emplace(recurrent_stack(c, c.hidden), layout, prefix + ".decoder");
      head_ = nn::Network<double>(head_specs(c, 2), layout, prefix + ".head");
      readout_ = Readout::repeat_last;
      repeat_steps_ = kPredictLen;
      return;
    case Family::tcn:
    case Family::gated_tcn: {
      std::vector<LayerSpec> specs;
      const LayerKind kind =
          c.family == Family::tcn ? LayerKind::tcn_block : LayerKind::gated_tcn_block;
      for (int l = 0; l < c.layers; ++l) {
        specs.push_back({kind, l == 0 ? 2 : c.hidden, c.hidden, c.activation, c.kernel_size,
                         Eigen::Index{1} << l});
      }
      body_ = nn::Network<double>(specs, layout, prefix + ".body");
      head_ = nn::Network<double>(head_specs(c, whole ? 2 * kPredictLen : 2), layout,
                                  prefix + ".head");
      readout_ = Readout::last_step;
      return;
    }
  }
}

Eigen::Index Graph::output_steps(Eigen::Index steps) const {
  switch (readout_) {
    case Readout::per_step: return steps;
    case Readout::last_step: return 1;
    case Readout::repeat_last: return repeat_steps_;
  }
  return 1;
}

nn::Sequence<double> Graph::forward(const nn::Vector<double>& params,
                                    const nn::Sequence<double>& x, Cache* cache) const {
  nn::Sequence<double> h = body_.forward(params, x, cache ? &cache->body : nullptr);
  if (cache) cache->body_steps = static_cast<Eigen::Index>(h.size());
  switch (readout_) {
    case Readout::per_step:
      break;
    case Readout::last_step:
      h = {h.back()};
      break;
    case Readout::repeat_last:
      h = decoder_->forward(params, nn::Sequence<double>(repeat_steps_, h.back()),
                            cache ? &cache->decoder : nullptr);
      break;
  }
  return head_.forward(params, h, cache ? &cache->head : nullptr);
}

void Graph::backward(const nn::Vector<double>& params, const Cache& cache,
                     const nn::Sequence<double>& dy, nn::Vector<double>& grad) const {
  nn::Sequence<double> dh = head_.backward(params, cache.head, dy, grad);
  if (readout_ == Readout::per_step) {
    body_.backward(params, cache.body, dh, grad);
    return;
  }
  if (readout_ == Readout::repeat_last) {
    const nn::Sequence<double> dd = decoder_->backward(params, cache.decoder, dh, grad);
    nn::Matrix<double> sum = nn::Matrix<double>::Zero(dd.front().rows(), dd.front().cols());
    for (const auto& d : dd) sum += d;
    dh = {std::move(sum)};
  }
  nn::Sequence<double> dbody(
      static_cast<std::size_t>(cache.body_steps),
      nn::Matrix<double>::Zero(body_.output_size(), dh.front().cols()));
  dbody.back() = dh.front();
  body_.backward(params, cache.body, dbody, grad);
}

TrainedPredictor::TrainedPredictor(PredictorConfig config, std::optional<StandardizationStats> stats)
    : config_(config),
      stats_(needs_stats(config) ? stats : std::nullopt),
      codec_(config.family == Family::linear_interp ? InputMode::offsets : config.input_mode,
             stats_, config.standardize_targets) {
  validate(config_);
  if (config_.family == Family::linear_interp) return;
  const bool unshared = !config_.shared_step_weights;
  const int count = unshared ? static_cast<int>(kPredictLen) : 1;
  graphs_.reserve(static_cast<std::size_t>(count));
  for (int g = 0; g < count; ++g) {
    graphs_.emplace_back(config_, layout_, unshared ? "step" + std::to_string(g) : "net");
  }
  params_ = nn::Vector<double>::Zero(layout_.size());
}

Eigen::MatrixXd TrainedPredictor::model_input(const Eigen::Ref<const Path>& history) const {
  Eigen::MatrixXd x = codec_.encode(history);
  if (config_.family == Family::mlp) {
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), x.size(), 1);
  }
  return x;
}

Eigen::MatrixXd TrainedPredictor::run(std::size_t graph, const Eigen::MatrixXd& input) const {
  const nn::Sequence<double> y = graphs_.at(graph).forward(params_, to_sequence(input));
  Eigen::MatrixXd out(y.front().rows(), static_cast<Eigen::Index>(y.size()));
  for (std::size_t t = 0; t < y.size(); ++t) out.col(static_cast<Eigen::Index>(t)) = y[t];
  return out;
}

std::vector<TrainingPair> TrainedPredictor::make_pairs(const Eigen::Ref<const Path>& window) const {
  if (graphs_.empty()) return {};
  if (window.rows() != kWindowLen) {
    fail(ErrorKind::invalid_input, "training window must hold " + std::to_string(kWindowLen) +
                                       " positions, got " + std::to_string(window.rows()));
  }
  require_finite(window, "training window");
  const bool positions = config_.input_mode == InputMode::positions;
  std::vector<TrainingPair> pairs;

  if (full_path(config_)) {
    const auto observed = window.topRows(kObserveLen);
    Path future = window.bottomRows(kPredictLen);
    if (config_.smooth_targets) {
      const auto smoothed = analysis::fit_smoothing_poly(window);
      if (!smoothed.fit) fail(ErrorKind::data, "target smoothing failed: " + smoothed.skip_reason);
      future = smoothed.fit->poly.evaluate().bottomRows(kPredictLen);
    }
    const Eigen::Matrix2d frame = codec_.frame(observed);
    const Eigen::Vector2d last = observed.row(kObserveLen - 1).transpose();
    Eigen::MatrixXd target(2, kPredictLen);
    Eigen::Vector2d prev = last;
    for (Eigen::Index k = 0; k < kPredictLen; ++k) {
      const Eigen::Vector2d p = future.row(k).transpose();
      Eigen::Vector2d world;
      if (positions) {
        world = p;
      } else if (config_.output_mode == OutputMode::full_path_integrated) {
        world = p - prev;
      } else {
        world = p - last;
      }
      target.col(k) = codec_.to_target(world, frame);
      prev = p;
    }
    if (graphs_.front().readout() == Graph::Readout::last_step) {
      target = Eigen::Map<const Eigen::MatrixXd>(target.data(), target.size(), 1).eval();
    }
    pairs.push_back({model_input(observed), std::move(target), 0});
    return pairs;
  }

  auto next_target = [&](Eigen::Index h) {
    const auto history = window.topRows(h);
    const Eigen::Vector2d p = window.row(h).transpose();
    const Eigen::Vector2d world = positions ? p : Eigen::Vector2d(p - window.row(h - 1).transpose());
    return codec_.to_target(world, codec_.frame(history));
  };

  if (config_.family == Family::rnn_mlp) {
    const Eigen::MatrixXd input = codec_.encode(window.topRows(kWindowLen - 1));
    Eigen::MatrixXd target(2, input.cols());
    const Eigen::Index first = positions ? 1 : 2;
    for (Eigen::Index j = 0; j < input.cols(); ++j) target.col(j) = next_target(first + j);
    pairs.push_back({input, std::move(target), 0});
    return pairs;
  }

  for (Eigen::Index t = 0; t < kPredictLen; ++t) {
    const Eigen::MatrixXd target = next_target(t + kObserveLen);
    pairs.push_back({model_input(window.middleRows(t, kObserveLen)), target,
                     config_.shared_step_weights ? 0 : static_cast<std::size_t>(t)});
  }
  return pairs;
}

Path TrainedPredictor::predict(const Eigen::Ref<const Path>& observed) const {
  require_finite(observed, "observed path");
  if (graphs_.empty()) return predict_linear(observed, config_.two_point_velocity);
  if (observed.rows() != kObserveLen) {
    fail(ErrorKind::invalid_input, "expected " + std::to_string(kObserveLen) +
                                       " observed positions, got " +
                                       std::to_string(observed.rows()));
  }
  const bool positions = config_.input_mode == InputMode::positions;
  Path out(kPredictLen, 2);

  if (full_path(config_)) {
    Eigen::MatrixXd y = run(0, model_input(observed));
    const Eigen::MatrixXd steps = Eigen::Map<const Eigen::MatrixXd>(y.data(), 2, kPredictLen);
    const Eigen::Matrix2d frame = codec_.frame(observed);
    const Eigen::Vector2d last = observed.row(kObserveLen - 1).transpose();
    Eigen::Vector2d prev = last;
    for (Eigen::Index k = 0; k < kPredictLen; ++k) {
      const Eigen::Vector2d v = codec_.from_output(steps.col(k), frame);
      Eigen::Vector2d p;
      if (positions) {
        p = v;
      } else if (config_.output_mode == OutputMode::full_path_integrated) {
        p = prev + v;
      } else {
        p = last + v;
      }
      out.row(k) = p.transpose();
      prev = p;
    }
    return out;
  }

  Path history(kWindowLen, 2);
  history.topRows(kObserveLen) = observed;
  for (Eigen::Index k = 0; k < kPredictLen; ++k) {
    const Eigen::Index h = kObserveLen + k;
    Eigen::Vector2d y;
    Eigen::Matrix2d frame;
    if (config_.family == Family::rnn_mlp) {
      const auto past = history.topRows(h);
      y = run(0, codec_.encode(past)).rightCols<1>();
      frame = codec_.frame(past);
    } else {
      const auto past = history.middleRows(k, kObserveLen);
      y = run(config_.shared_step_weights ? 0 : static_cast<std::size_t>(k), model_input(past));
      frame = codec_.frame(past);
    }
    const Eigen::Vector2d v = codec_.from_output(y, frame);
    history.row(h) = positions ? v.transpose() : (history.row(h - 1) + v.transpose()).eval();
    out.row(k) = history.row(h);
  }
  return out;
}

}  // namespace trajkit::models
