#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "trajkit/models.hpp"
#include "trajkit/nn/loss.hpp"
#include "trajkit/nn/optim.hpp"

namespace trajkit::models {
namespace {

constexpr std::uint64_t kShuffleSalt = 0x9E3779B97F4A7C15ULL;

void check_options(const TrainOptions& o) {
  if (o.epochs < 0) fail(ErrorKind::config, "epochs must be >= 0");
  if (!(o.learning_rate > 0.0) || !std::isfinite(o.learning_rate)) {
    fail(ErrorKind::config, "learning rate must be positive");
  }
  if (o.batch_size < 1) fail(ErrorKind::config, "batch size must be >= 1");
  if (!(o.clip_norm > 0.0)) fail(ErrorKind::config, "clip norm must be positive");
}

nn::Sequence<double> stack(const std::vector<TrainingPair>& pairs,
                           const std::vector<std::size_t>& members, bool targets) {
  const Eigen::MatrixXd& first = targets ? pairs[members.front()].target : pairs[members.front()].input;
  const Eigen::Index batch = static_cast<Eigen::Index>(members.size());
  nn::Sequence<double> seq(static_cast<std::size_t>(first.cols()),
                           nn::Matrix<double>(first.rows(), batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::MatrixXd& m = targets ? pairs[members[b]].target : pairs[members[b]].input;
    for (Eigen::Index t = 0; t < m.cols(); ++t) seq[static_cast<std::size_t>(t)].col(b) = m.col(t);
  }
  return seq;
}

}  // namespace

TrainedPredictor train(const PredictorConfig& config, const std::vector<Sample>& samples,
                       const TrainOptions& options) {
  validate(config);
  check_options(options);
  std::optional<StandardizationStats> stats;
  if (needs_stats(config)) stats = fit_standardization(samples);
  TrainedPredictor trained(config, stats);
  trained.metadata.options = options;
  if (trained.graphs().empty()) return trained;

  std::vector<TrainingPair> pairs;
  for (const auto& s : samples) {
    if (!s.future) fail(ErrorKind::invalid_input, "training sample without future positions");
    for (auto& p : trained.make_pairs(s.full_window())) pairs.push_back(std::move(p));
  }
  if (pairs.empty()) fail(ErrorKind::data, "no training samples");
  trained.metadata.training_pairs = pairs.size();

  std::mt19937_64 init_rng(options.seed);
  for (const auto& g : trained.graphs()) g.initialize(trained.params(), init_rng);
  std::mt19937_64 shuffle_rng(options.seed ^ kShuffleSalt);

  nn::Vector<double>& params = trained.params();
  nn::AdamState<double> adam(params.size(), options.learning_rate);
  nn::Vector<double> grad(params.size());
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = static_cast<std::size_t>(options.batch_size);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch_no = 0; start < order.size(); start += batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::map<std::size_t, std::vector<std::size_t>> groups;
      Eigen::Index total_entries = 0;
      for (std::size_t i = start; i < end; ++i) {
        groups[pairs[order[i]].graph].push_back(order[i]);
        total_entries += pairs[order[i]].target.size();
      }
      grad.setZero();
      double batch_loss = 0.0;
      for (const auto& [g, members] : groups) {
        const Graph& graph = trained.graphs()[g];
        Graph::Cache cache;
        const nn::Sequence<double> y = graph.forward(params, stack(pairs, members, false), &cache);
        auto loss = nn::mse_loss(y, stack(pairs, members, true));
        Eigen::Index entries = 0;
        for (const auto& m : members) entries += pairs[m].target.size();
        const double share = static_cast<double>(entries) / static_cast<double>(total_entries);
        batch_loss += share * loss.value;
        for (auto& d : loss.grad) d *= share;
        graph.backward(params, cache, loss.grad, grad);
      }
      if (!std::isfinite(batch_loss) || !grad.allFinite()) {
        fail(ErrorKind::numerical, "non-finite loss at epoch " + std::to_string(epoch) +
                                       ", batch " + std::to_string(batch_no));
      }
      nn::clip_global_norm(grad, options.clip_norm);
      if (options.optimizer == Optimizer::adam) {
        nn::adam_step(params, grad, adam);
      } else {
        nn::sgd_step(params, grad, options.learning_rate);
      }
      epoch_loss += batch_loss * static_cast<double>(end - start);
    }
    trained.metadata.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return trained;
}

}  // namespace trajkit::models
