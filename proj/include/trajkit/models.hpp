#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trajkit/nn/network.hpp"
#include "trajkit/types.hpp"

namespace trajkit::models {

inline constexpr Eigen::Index kObserveLen = 8;
inline constexpr Eigen::Index kPredictLen = 12;

enum class Family { linear_interp, mlp, rnn_mlp, rnn_encoder_mlp, seq2seq, tcn, gated_tcn };
enum class InputMode { positions, offsets, standardized_offsets, polar_offsets };
enum class OutputMode { next_step_recursive, full_path_offsets_to_reference, full_path_integrated };
enum class Cell { vanilla, lstm, gru };

const char* to_string(Family f);
const char* to_string(InputMode m);
const char* to_string(OutputMode m);
const char* to_string(Cell c);
Family parse_family(const std::string& text);  // also accepts "red", "linear", dashed names
InputMode parse_input_mode(const std::string& text);
OutputMode parse_output_mode(const std::string& text);
Cell parse_cell(const std::string& text);

/// Architecture and pre/post-processing of a predictor.
///
/// `activation` is the hidden nonlinearity of the MLP, the convolution
/// nonlinearity of TCN blocks, and selects the head of recurrent families: with
/// identity the head is a single dense layer, otherwise a hidden dense layer
/// with that activation precedes the linear output layer.
///
/// With input_mode == positions every head emits absolute positions, so
/// full_path_integrated is not available there.
struct PredictorConfig {
  Family family = Family::rnn_encoder_mlp;
  InputMode input_mode = InputMode::standardized_offsets;
  OutputMode output_mode = OutputMode::full_path_offsets_to_reference;
  Cell cell = Cell::lstm;
  int layers = 1;
  int hidden = 32;
  nn::Activation activation = nn::Activation::identity;
  int kernel_size = 3;
  bool smooth_targets = true;       // full-path targets taken from the degree-4 fit of the window
  bool standardize_targets = true;  // standardized_offsets also standardizes regression targets
  bool two_point_velocity = false;  // linear_interp: last-two-point velocity instead of least squares
  bool shared_step_weights = true;  // mlp + next_step_recursive: one network for all 12 steps
};

/// LSTM(32) encoder, one layer, dense 32->24 identity head, standardized
/// offsets in, full path as offsets to the last observed position out.
PredictorConfig red_config();
PredictorConfig default_config(Family family);
void validate(const PredictorConfig& config);
bool needs_stats(const PredictorConfig& config);

struct StandardizationStats {
  double mean_dx = 0.0;
  double mean_dy = 0.0;
  double std_dx = 1.0;
  double std_dy = 1.0;

  Eigen::Vector2d standardize(const Eigen::Vector2d& v) const {
    return {(v.x() - mean_dx) / std_dx, (v.y() - mean_dy) / std_dy};
  }
  Eigen::Vector2d destandardize(const Eigen::Vector2d& v) const {
    return {v.x() * std_dx + mean_dx, v.y() * std_dy + mean_dy};
  }
};

/// Per-axis mean and population std over every offset of every sample's
/// observed+future window. Fails on a degenerate (zero-spread) corpus.
StandardizationStats fit_standardization(const std::vector<Sample>& samples);

/// Constant-velocity extrapolation. Velocity is the least-squares slope over
/// the observed time indices (or the last two points with `two_point`);
/// future step k sits at intercept + slope * (n - 1 + k).
Path predict_linear(const Eigen::Ref<const Path>& observed, bool two_point = false);

/// Maps a position history onto network inputs and regression targets.
class FeatureCodec {
 public:
  FeatureCodec(InputMode mode, std::optional<StandardizationStats> stats, bool standardize_targets);

  InputMode mode() const { return mode_; }

  /// Steps produced by encode() for a history of n positions.
  Eigen::Index steps_for(Eigen::Index positions) const {
    return mode_ == InputMode::positions ? positions : positions - 1;
  }

  /// (2 x steps) features, one column per position or offset.
  Eigen::MatrixXd encode(const Eigen::Ref<const Path>& history) const;

  /// World-to-model rotation. Identity except in polar mode, where outputs are
  /// expressed along the heading of the last moving offset of `history`.
  Eigen::Matrix2d frame(const Eigen::Ref<const Path>& history) const;

  /// World offset (or absolute position in positions mode) -> target space.
  Eigen::Vector2d to_target(const Eigen::Vector2d& world, const Eigen::Matrix2d& frame) const;
  Eigen::Vector2d from_output(const Eigen::Vector2d& output, const Eigen::Matrix2d& frame) const;

 private:
  bool scales_targets() const;

  InputMode mode_;
  std::optional<StandardizationStats> stats_;
  bool standardize_targets_;
};

/// Composition of networks behind one predictor: a body (dense stack,
/// recurrent stack or TCN stack), an optional seq2seq decoder fed with the
/// repeated final encoder state, and a dense head.
class Graph {
 public:
  enum class Readout { per_step, last_step, repeat_last };

  struct Cache {
    nn::Network<double>::Cache body;
    nn::Network<double>::Cache decoder;
    nn::Network<double>::Cache head;
    Eigen::Index body_steps = 0;
  };

  Graph(const PredictorConfig& config, nn::ParamLayout& layout, const std::string& prefix);

  Readout readout() const { return readout_; }
  Eigen::Index input_width() const { return body_.input_size(); }
  Eigen::Index output_width() const { return head_.output_size(); }
  Eigen::Index output_steps(Eigen::Index input_steps) const;

  template <typename Rng>
  void initialize(nn::Vector<double>& params, Rng& rng) const {
    body_.initialize(params, rng);
    if (decoder_) decoder_->initialize(params, rng);
    head_.initialize(params, rng);
  }

  nn::Sequence<double> forward(const nn::Vector<double>& params, const nn::Sequence<double>& x,
                               Cache* cache = nullptr) const;
  void backward(const nn::Vector<double>& params, const Cache& cache,
                const nn::Sequence<double>& dy, nn::Vector<double>& grad) const;

 private:
  Readout readout_ = Readout::last_step;
  Eigen::Index repeat_steps_ = 0;
  nn::Network<double> body_;
  std::optional<nn::Network<double>> decoder_;
  nn::Network<double> head_;
};

/// One regression example: inputs (width x steps) and targets (out x steps),
/// routed to graph `graph` of the predictor.
struct TrainingPair {
  Eigen::MatrixXd input;
  Eigen::MatrixXd target;
  std::size_t graph = 0;
};

enum class Optimizer { adam, sgd };
const char* to_string(Optimizer o);

struct TrainOptions {
  int epochs = 100;
  std::uint64_t seed = 0;
  double learning_rate = 0.005;
  Optimizer optimizer = Optimizer::adam;
  Eigen::Index batch_size = 64;
  double clip_norm = 5.0;
};

struct TrainingMetadata {
  TrainOptions options;
  std::size_t training_pairs = 0;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

class TrainedPredictor {
 public:
  TrainedPredictor(PredictorConfig config, std::optional<StandardizationStats> stats);

  const PredictorConfig& config() const { return config_; }
  const std::optional<StandardizationStats>& stats() const { return stats_; }
  const nn::ParamLayout& layout() const { return layout_; }
  const nn::Vector<double>& params() const { return params_; }
  nn::Vector<double>& params() { return params_; }
  const FeatureCodec& codec() const { return codec_; }
  /// Empty for linear_interp; one graph per step for unshared step weights.
  const std::vector<Graph>& graphs() const { return graphs_; }

  /// Training examples cut from one full (observed + future) window.
  std::vector<TrainingPair> make_pairs(const Eigen::Ref<const Path>& window) const;

  /// 12 future positions from 8 observed ones; pure in (weights, stats, input).
  Path predict(const Eigen::Ref<const Path>& observed) const;

  TrainingMetadata metadata;

 private:
  Eigen::MatrixXd model_input(const Eigen::Ref<const Path>& history) const;
  Eigen::MatrixXd run(std::size_t graph, const Eigen::MatrixXd& input) const;

  PredictorConfig config_;
  std::optional<StandardizationStats> stats_;
  FeatureCodec codec_;
  nn::ParamLayout layout_;
  std::vector<Graph> graphs_;
  nn::Vector<double> params_;
};

inline Path predict(const TrainedPredictor& trained, const Eigen::Ref<const Path>& observed) {
  return trained.predict(observed);
}

/// Deterministic in (config, samples, options). RED-style full-path targets
/// come from the smoothed window when config.smooth_targets is set.
TrainedPredictor train(const PredictorConfig& config, const std::vector<Sample>& samples,
                       const TrainOptions& options);

/// Model bundle: `weights.tkw` plus `model.meta` (key=value text).
void save_bundle(const std::filesystem::path& dir, const TrainedPredictor& trained);
TrainedPredictor load_bundle(const std::filesystem::path& dir);
std::string metadata_text(const TrainedPredictor& trained);

}  // namespace trajkit::models
