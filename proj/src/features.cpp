#include <cmath>
#include <numbers>

#include "trajkit/models.hpp"

namespace trajkit::models {
namespace {

constexpr double kMovingEps = 1e-9;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

template <typename E>
E parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  fail(ErrorKind::config, std::string("unknown ") + what + " '" + text + "'");
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::linear_interp: return "linear_interp";
    case Family::mlp: return "mlp";
    case Family::rnn_mlp: return "rnn_mlp";
    case Family::rnn_encoder_mlp: return "rnn_encoder_mlp";
    case Family::seq2seq: return "seq2seq";
    case Family::tcn: return "tcn";
    case Family::gated_tcn: return "gated_tcn";
  }
  return "?";
}

const char* to_string(InputMode m) {
  switch (m) {
    case InputMode::positions: return "positions";
    case InputMode::offsets: return "offsets";
    case InputMode::standardized_offsets: return "standardized_offsets";
    case InputMode::polar_offsets: return "polar_offsets";
  }
  return "?";
}

const char* to_string(OutputMode m) {
  switch (m) {
    case OutputMode::next_step_recursive: return "next_step_recursive";
    case OutputMode::full_path_offsets_to_reference: return "full_path_offsets_to_reference";
    case OutputMode::full_path_integrated: return "full_path_integrated";
  }
  return "?";
}

const char* to_string(Cell c) {
  switch (c) {
    case Cell::vanilla: return "vanilla";
    case Cell::lstm: return "lstm";
    case Cell::gru: return "gru";
  }
  return "?";
}

const char* to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

Family parse_family(const std::string& text) {
  return parse_enum<Family>(text,
                            {{"linear_interp", Family::linear_interp},
                             {"linear", Family::linear_interp},
                             {"mlp", Family::mlp},
                             {"rnn_mlp", Family::rnn_mlp},
                             {"rnn-mlp", Family::rnn_mlp},
                             {"rnn_encoder_mlp", Family::rnn_encoder_mlp},
                             {"rnn-encoder-mlp", Family::rnn_encoder_mlp},
                             {"red", Family::rnn_encoder_mlp},
                             {"seq2seq", Family::seq2seq},
                             {"tcn", Family::tcn},
                             {"gated_tcn", Family::gated_tcn},
                             {"gated-tcn", Family::gated_tcn}},
                            "family");
}

InputMode parse_input_mode(const std::string& text) {
  return parse_enum<InputMode>(text,
                               {{"positions", InputMode::positions},
                                {"offsets", InputMode::offsets},
                                {"standardized_offsets", InputMode::standardized_offsets},
                                {"polar_offsets", InputMode::polar_offsets}},
                               "input mode");
}

OutputMode parse_output_mode(const std::string& text) {
  return parse_enum<OutputMode>(
      text,
      {{"next_step_recursive", OutputMode::next_step_recursive},
       {"full_path_offsets_to_reference", OutputMode::full_path_offsets_to_reference},
       {"full_path_integrated", OutputMode::full_path_integrated}},
      "output mode");
}

Cell parse_cell(const std::string& text) {
  return parse_enum<Cell>(
      text, {{"vanilla", Cell::vanilla}, {"lstm", Cell::lstm}, {"gru", Cell::gru}}, "cell");
}

PredictorConfig red_config() { return PredictorConfig{}; }

PredictorConfig default_config(Family family) {
  PredictorConfig c;
  c.family = family;
  c.smooth_targets = false;
  switch (family) {
    case Family::rnn_encoder_mlp:
      return red_config();
    case Family::linear_interp:
    case Family::mlp:
      break;
    case Family::rnn_mlp:
      c.cell = Cell::vanilla;
      c.output_mode = OutputMode::next_step_recursive;
      c.activation = nn::Activation::tanh;
      break;
    case Family::seq2seq:
      c.output_mode = OutputMode::full_path_integrated;
      c.activation = nn::Activation::tanh;
      break;
    case Family::tcn:
    case Family::gated_tcn:
      c.layers = 2;
      c.activation = nn::Activation::relu;
      break;
  }
  return c;
}

bool needs_stats(const PredictorConfig& config) {
  return config.family != Family::linear_interp &&
         config.input_mode == InputMode::standardized_offsets;
}

void validate(const PredictorConfig& c) {
  if (c.family == Family::linear_interp) return;
  if (c.layers < 1 || c.layers > 5) fail(ErrorKind::config, "layers must be in [1, 5]");
  if (c.hidden < 4 || c.hidden > 64) fail(ErrorKind::config, "hidden must be in [4, 64]");
  if (c.kernel_size < 2) fail(ErrorKind::config, "kernel_size must be >= 2");
  if (c.input_mode == InputMode::positions && c.output_mode == OutputMode::full_path_integrated) {
    fail(ErrorKind::config, "positions input emits absolute positions; full_path_integrated unavailable");
  }
  if (c.family == Family::rnn_mlp && c.output_mode != OutputMode::next_step_recursive) {
    fail(ErrorKind::config, "rnn_mlp predicts per step and requires next_step_recursive");
  }
  if (c.family == Family::seq2seq && c.output_mode == OutputMode::next_step_recursive) {
    fail(ErrorKind::config, "seq2seq decodes the full path; next_step_recursive unavailable");
  }
  if (!c.shared_step_weights &&
      (c.family != Family::mlp || c.output_mode != OutputMode::next_step_recursive)) {
    fail(ErrorKind::config, "unshared step weights apply to mlp with next_step_recursive only");
  }
}

StandardizationStats fit_standardization(const std::vector<Sample>& samples) {
  std::vector<Path> all;
  Eigen::Index total = 0;
  for (const auto& s : samples) {
    const Path window = s.future ? s.full_window() : s.observed;
    if (window.rows() < 2) continue;
    all.push_back(positions_to_offsets(window).offsets);
    total += all.back().rows();
  }
  if (total < 2) fail(ErrorKind::data, "standardization needs at least 2 offsets");
  Path offsets(total, 2);
  Eigen::Index at = 0;
  for (const auto& o : all) {
    offsets.middleRows(at, o.rows()) = o;
    at += o.rows();
  }
  const Eigen::RowVector2d mean = offsets.colwise().mean();
  const Eigen::RowVector2d sd =
      ((offsets.rowwise() - mean).array().square().colwise().mean()).sqrt();
  if (!(sd.x() > 1e-12) || !(sd.y() > 1e-12)) {
    fail(ErrorKind::data, "degenerate training corpus: zero offset spread on an axis");
  }
  return {mean.x(), mean.y(), sd.x(), sd.y()};
}

Path predict_linear(const Eigen::Ref<const Path>& observed, bool two_point) {
  const Eigen::Index n = observed.rows();
  if (n < 2) fail(ErrorKind::invalid_input, "linear prediction needs >= 2 observed positions");
  Path out(kPredictLen, 2);
  if (two_point) {
    const Eigen::RowVector2d last = observed.row(n - 1);
    const Eigen::RowVector2d v = last - observed.row(n - 2);
    for (Eigen::Index k = 0; k < kPredictLen; ++k) {
      out.row(k) = last + static_cast<double>(k + 1) * v;
    }
    return out;
  }
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  const double t_mean = t.mean();
  const Eigen::VectorXd tc = t.array() - t_mean;
  const Eigen::RowVector2d mean = observed.colwise().mean();
  const Eigen::RowVector2d slope = (tc.transpose() * (observed.rowwise() - mean)) / tc.squaredNorm();
  for (Eigen::Index k = 0; k < kPredictLen; ++k) {
    const double tk = static_cast<double>(n - 1 + k + 1) - t_mean;
    out.row(k) = mean + tk * slope;
  }
  return out;
}

FeatureCodec::FeatureCodec(InputMode mode, std::optional<StandardizationStats> stats,
                           bool standardize_targets)
    : mode_(mode), stats_(stats), standardize_targets_(standardize_targets) {
  if (mode_ == InputMode::standardized_offsets && !stats_) {
    fail(ErrorKind::config, "standardized_offsets input requires standardization stats");
  }
}

bool FeatureCodec::scales_targets() const {
  return mode_ == InputMode::standardized_offsets && standardize_targets_;
}

Eigen::MatrixXd FeatureCodec::encode(const Eigen::Ref<const Path>& history) const {
  if (mode_ == InputMode::positions) return history.transpose();
  const Path offsets = positions_to_offsets(history).offsets;
  Eigen::MatrixXd out(2, offsets.rows());
  double prev_heading = 0.0;
  for (Eigen::Index k = 0; k < offsets.rows(); ++k) {
    const Eigen::Vector2d o = offsets.row(k).transpose();
    switch (mode_) {
      case InputMode::offsets:
        out.col(k) = o;
        break;
      case InputMode::standardized_offsets:
        out.col(k) = stats_->standardize(o);
        break;
      case InputMode::polar_offsets: {
        const double mag = o.norm();
        const double heading = mag > kMovingEps ? std::atan2(o.y(), o.x()) : prev_heading;
        out(0, k) = mag;
        out(1, k) = wrap_angle(heading - prev_heading);
        prev_heading = heading;
        break;
      }
      case InputMode::positions:
        break;
    }
  }
  return out;
}

Eigen::Matrix2d FeatureCodec::frame(const Eigen::Ref<const Path>& history) const {
  if (mode_ != InputMode::polar_offsets) return Eigen::Matrix2d::Identity();
  double heading = 0.0;
  for (Eigen::Index k = history.rows() - 1; k > 0; --k) {
    const Eigen::Vector2d o = (history.row(k) - history.row(k - 1)).transpose();
    if (o.norm() > kMovingEps) {
      heading = std::atan2(o.y(), o.x());
      break;
    }
  }
  return rotation(-heading);
}

Eigen::Vector2d FeatureCodec::to_target(const Eigen::Vector2d& world,
                                        const Eigen::Matrix2d& frame) const {
  if (mode_ == InputMode::positions) return world;
  const Eigen::Vector2d local = frame * world;
  return scales_targets() ? stats_->standardize(local) : local;
}

Eigen::Vector2d FeatureCodec::from_output(const Eigen::Vector2d& output,
                                          const Eigen::Matrix2d& frame) const {
  if (mode_ == InputMode::positions) return output;
  const Eigen::Vector2d local = scales_targets() ? stats_->destandardize(output) : output;
  return frame.transpose() * local;
}

}  // namespace trajkit::models
