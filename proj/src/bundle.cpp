#include <map>
#include <sstream>

#include "trajkit/io_util.hpp"
#include "trajkit/models.hpp"
#include "trajkit/nn/weights_io.hpp"

namespace trajkit::models {
namespace {

constexpr const char* kMetaFile = "model.meta";
constexpr const char* kWeightsFile = "weights.tkw";
constexpr int kFormatVersion = 1;

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_meta(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::data, "model.meta: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) fail(ErrorKind::data, "model.meta: missing key '" + key + "'");
  return it->second;
}

double number(const KeyValues& kv, const std::string& key) {
  const auto v = parse_double(require(kv, key));
  if (!v) fail(ErrorKind::data, "model.meta: '" + key + "' is not a number");
  return *v;
}

int integer(const KeyValues& kv, const std::string& key) {
  const double v = number(kv, key);
  if (v != static_cast<double>(static_cast<int>(v))) {
    fail(ErrorKind::data, "model.meta: '" + key + "' is not an integer");
  }
  return static_cast<int>(v);
}

bool flag(const KeyValues& kv, const std::string& key) {
  const std::string& v = require(kv, key);
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorKind::data, "model.meta: '" + key + "' must be true or false");
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string metadata_text(const TrainedPredictor& trained) {
  const PredictorConfig& c = trained.config();
  const TrainingMetadata& m = trained.metadata;
  std::ostringstream out;
  out << "format_version=" << kFormatVersion << '\n'
      << "family=" << to_string(c.family) << '\n'
      << "input_mode=" << to_string(c.input_mode) << '\n'
      << "output_mode=" << to_string(c.output_mode) << '\n'
      << "cell=" << to_string(c.cell) << '\n'
      << "layers=" << c.layers << '\n'
      << "hidden=" << c.hidden << '\n'
      << "activation=" << nn::to_string(c.activation) << '\n'
      << "kernel_size=" << c.kernel_size << '\n'
      << "smooth_targets=" << boolean(c.smooth_targets) << '\n'
      << "standardize_targets=" << boolean(c.standardize_targets) << '\n'
      << "two_point_velocity=" << boolean(c.two_point_velocity) << '\n'
      << "shared_step_weights=" << boolean(c.shared_step_weights) << '\n';
  if (const auto& s = trained.stats()) {
    out << "mean_dx=" << format_double(s->mean_dx) << '\n'
        << "mean_dy=" << format_double(s->mean_dy) << '\n'
        << "std_dx=" << format_double(s->std_dx) << '\n'
        << "std_dy=" << format_double(s->std_dy) << '\n';
  }
  out << "param_count=" << trained.params().size() << '\n'
      << "layout_digest=" << to_hex(nn::layout_digest<double>(trained.layout())) << '\n'
      << "epochs=" << m.options.epochs << '\n'
      << "seed=" << m.options.seed << '\n'
      << "learning_rate=" << format_double(m.options.learning_rate) << '\n'
      << "optimizer=" << to_string(m.options.optimizer) << '\n'
      << "batch_size=" << m.options.batch_size << '\n'
      << "clip_norm=" << format_double(m.options.clip_norm) << '\n'
      << "training_pairs=" << m.training_pairs << '\n'
      << "loss_curve=";
  for (std::size_t i = 0; i < m.loss_curve.size(); ++i) {
    out << (i ? "," : "") << format_double(m.loss_curve[i]);
  }
  out << '\n';
  return out.str();
}

void save_bundle(const std::filesystem::path& dir, const TrainedPredictor& trained) {
  nn::save_weights(dir / kWeightsFile, trained.layout(), trained.params());
  write_file_atomic(dir / kMetaFile, metadata_text(trained));
}

TrainedPredictor load_bundle(const std::filesystem::path& dir) {
  const KeyValues kv = parse_meta(read_file(dir / kMetaFile));
  if (integer(kv, "format_version") != kFormatVersion) {
    fail(ErrorKind::data, "model.meta: unsupported format_version");
  }
  PredictorConfig c;
  c.family = parse_family(require(kv, "family"));
  c.input_mode = parse_input_mode(require(kv, "input_mode"));
  c.output_mode = parse_output_mode(require(kv, "output_mode"));
  c.cell = parse_cell(require(kv, "cell"));
  c.layers = integer(kv, "layers");
  c.hidden = integer(kv, "hidden");
  c.activation = nn::parse_activation(require(kv, "activation"));
  c.kernel_size = integer(kv, "kernel_size");
  c.smooth_targets = flag(kv, "smooth_targets");
  c.standardize_targets = flag(kv, "standardize_targets");
  c.two_point_velocity = flag(kv, "two_point_velocity");
  c.shared_step_weights = flag(kv, "shared_step_weights");
  std::optional<StandardizationStats> stats;
  if (needs_stats(c)) {
    stats = StandardizationStats{number(kv, "mean_dx"), number(kv, "mean_dy"),
                                 number(kv, "std_dx"), number(kv, "std_dy")};
  }
  TrainedPredictor trained(c, stats);
  trained.params() = nn::load_weights<double>(dir / kWeightsFile, trained.layout());

  TrainOptions& o = trained.metadata.options;
  o.epochs = integer(kv, "epochs");
  o.seed = std::stoull(require(kv, "seed"));
  o.learning_rate = number(kv, "learning_rate");
  o.optimizer = require(kv, "optimizer") == "sgd" ? Optimizer::sgd : Optimizer::adam;
  o.batch_size = integer(kv, "batch_size");
  o.clip_norm = number(kv, "clip_norm");
  trained.metadata.training_pairs = static_cast<std::size_t>(number(kv, "training_pairs"));
  std::istringstream curve(require(kv, "loss_curve"));
  std::string item;
  while (std::getline(curve, item, ',')) {
    const auto v = parse_double(item);
    if (!v) fail(ErrorKind::data, "model.meta: bad loss_curve entry");
    trained.metadata.loss_curve.push_back(*v);
  }
  return trained;
}

}  // namespace trajkit::models
