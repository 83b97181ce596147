#include "trajkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "trajkit/analysis.hpp"
#include "trajkit/evaluation.hpp"
#include "trajkit/ingestion.hpp"
#include "trajkit/io_util.hpp"
#include "trajkit/models.hpp"
#include "trajkit/nn/gradcheck.hpp"
#include "trajkit/synth.hpp"

namespace trajkit::cli {
namespace {

namespace fs = std::filesystem;
using Meta = std::vector<std::pair<std::string, std::string>>;

unsigned default_threads() { return std::max(1U, std::thread::hardware_concurrency()); }

struct ModelArgs {
  std::string family = "red";
  std::optional<std::uint64_t> seed;
  int epochs = 100;
  double lr = 0.005;
  int batch_size = 64;
  std::string optimizer = "adam";
  double clip_norm = 5.0;
  std::optional<std::string> input_mode;
  std::optional<std::string> output_mode;
  std::optional<std::string> cell;
  std::optional<int> layers;
  std::optional<int> hidden;
  std::optional<std::string> activation;
  std::optional<int> kernel_size;
  std::optional<bool> smooth_targets;
  std::optional<bool> standardize_targets;
  std::optional<bool> shared_step_weights;
  bool two_point = false;
};

struct Args {
  std::string data_dir;
  std::string out;
  std::string model;
  std::string holdout;
  unsigned threads = default_threads();
  int stride = 1;
  std::optional<int> bins;
  std::optional<std::string> range;
  ModelArgs m;
  double tolerance = 1e-4;
  std::size_t count = 0;
  double noise = 0.0;
  std::string mix = "line=0.5,arc=0.3,stop_and_go=0.1,standing=0.1";
  int length = 20;
};

void add_model_options(CLI::App* app, ModelArgs& m) {
  app->add_option("--family", m.family, "Predictor family (red, linear, mlp, rnn_mlp, ...)")
      ->capture_default_str();
  app->add_option("--seed", m.seed, "Random seed")->required();
  app->add_option("--epochs", m.epochs, "Training epochs")->capture_default_str();
  app->add_option("--lr", m.lr, "Learning rate")->capture_default_str();
  app->add_option("--batch-size", m.batch_size, "Mini-batch size")->capture_default_str();
  app->add_option("--optimizer", m.optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  app->add_option("--clip-norm", m.clip_norm, "Global gradient norm cap")->capture_default_str();
  app->add_option("--input-mode", m.input_mode,
                  "positions, offsets, standardized_offsets or polar_offsets");
  app->add_option("--output-mode", m.output_mode,
                  "next_step_recursive, full_path_offsets_to_reference or full_path_integrated");
  app->add_option("--cell", m.cell, "vanilla, lstm or gru");
  app->add_option("--layers", m.layers, "Hidden layer count");
  app->add_option("--hidden", m.hidden, "Hidden width");
  app->add_option("--activation", m.activation, "identity, tanh, relu or sigmoid");
  app->add_option("--kernel-size", m.kernel_size, "TCN kernel size");
  app->add_option("--smooth-targets", m.smooth_targets, "Train on smoothed futures (true/false)");
  app->add_option("--standardize-targets", m.standardize_targets,
                  "Standardize regression targets with the input stats (true/false)");
  app->add_option("--shared-step-weights", m.shared_step_weights,
                  "One network for all recursive steps (true/false)");
  app->add_flag("--two-point", m.two_point, "Linear baseline uses the last two points");
}

models::PredictorConfig resolve_config(const ModelArgs& m) {
  models::PredictorConfig c = models::default_config(models::parse_family(m.family));
  if (m.input_mode) c.input_mode = models::parse_input_mode(*m.input_mode);
  if (m.output_mode) c.output_mode = models::parse_output_mode(*m.output_mode);
  if (m.cell) c.cell = models::parse_cell(*m.cell);
  if (m.layers) c.layers = *m.layers;
  if (m.hidden) c.hidden = *m.hidden;
  if (m.activation) c.activation = nn::parse_activation(*m.activation);
  if (m.kernel_size) c.kernel_size = *m.kernel_size;
  if (m.smooth_targets) c.smooth_targets = *m.smooth_targets;
  if (m.standardize_targets) c.standardize_targets = *m.standardize_targets;
  if (m.shared_step_weights) c.shared_step_weights = *m.shared_step_weights;
  c.two_point_velocity = m.two_point;
  models::validate(c);
  return c;
}

models::TrainOptions resolve_options(const ModelArgs& m) {
  models::TrainOptions o;
  o.epochs = m.epochs;
  o.seed = m.seed.value_or(0);
  o.learning_rate = m.lr;
  o.optimizer = m.optimizer == "sgd" ? models::Optimizer::sgd : models::Optimizer::adam;
  o.batch_size = m.batch_size;
  o.clip_norm = m.clip_norm;
  return o;
}

SliceConfig slice_config(int stride) {
  SliceConfig s;
  s.observe_len = models::kObserveLen;
  s.predict_len = models::kPredictLen;
  s.stride = stride;
  s.validate();
  return s;
}

std::vector<Dataset> load_nonempty(const std::string& dir) {
  std::vector<Dataset> datasets = load_data_dir(dir);
  if (datasets.empty()) fail(ErrorKind::data, "no *.txt datasets under " + dir);
  return datasets;
}

std::vector<Sample> samples_of(const Dataset& d, int stride) {
  return slice_samples(d.tracklets, slice_config(stride), d.name);
}

Meta digest_files(const fs::path& root, const std::vector<fs::path>& files, const std::string& tag) {
  Meta meta;
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, root).generic_string();
    meta.emplace_back(tag + "." + rel, to_hex(fnv1a64(read_file(f))));
  }
  return meta;
}

Meta digest_data_dir(const std::vector<Dataset>& datasets, const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& d : datasets) files.push_back(root / d.name);
  return digest_files(root, files, "input");
}

Meta config_meta(const models::PredictorConfig& c, const models::TrainOptions& o) {
  return {{"family", models::to_string(c.family)},
          {"input_mode", models::to_string(c.input_mode)},
          {"output_mode", models::to_string(c.output_mode)},
          {"cell", models::to_string(c.cell)},
          {"layers", std::to_string(c.layers)},
          {"hidden", std::to_string(c.hidden)},
          {"activation", nn::to_string(c.activation)},
          {"kernel_size", std::to_string(c.kernel_size)},
          {"smooth_targets", c.smooth_targets ? "true" : "false"},
          {"standardize_targets", c.standardize_targets ? "true" : "false"},
          {"shared_step_weights", c.shared_step_weights ? "true" : "false"},
          {"two_point_velocity", c.two_point_velocity ? "true" : "false"},
          {"seed", std::to_string(o.seed)},
          {"epochs", std::to_string(o.epochs)},
          {"learning_rate", format_double(o.learning_rate)},
          {"optimizer", models::to_string(o.optimizer)},
          {"batch_size", std::to_string(o.batch_size)},
          {"clip_norm", format_double(o.clip_norm)}};
}

void write_run_meta(const fs::path& dir, const std::string& subcommand, const Meta& entries) {
  std::ostringstream out;
  out << "tool=trajkit\nversion=" << TRAJKIT_VERSION << "\nsubcommand=" << subcommand << '\n';
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  write_file_atomic(dir / "run.meta", out.str());
}

void append(Meta& to, const Meta& from) { to.insert(to.end(), from.begin(), from.end()); }

void write_evaluation(const fs::path& dir, const evaluation::EvalReport& report,
                      const std::string& prefix = "") {
  write_file_atomic(dir / (prefix + "report.csv"), evaluation::report_csv(report));
  write_file_atomic(dir / (prefix + "diagnostics.csv"),
                    evaluation::diagnostics_csv(evaluation::diagnostic_breakdown(report)));
  write_file_atomic(dir / (prefix + "records.csv"), evaluation::records_csv(report));
}

evaluation::EvalReport evaluate_model(const models::TrainedPredictor& model,
                                      const std::vector<evaluation::SampleGroup>& groups,
                                      unsigned threads) {
  return evaluation::evaluate(
      [&model](const Eigen::Ref<const Path>& observed) { return model.predict(observed); }, groups,
      threads);
}

int cmd_analyze(const Args& a, std::ostream& out) {
  const auto datasets = load_nonempty(a.data_dir);
  analysis::OffsetHistogramSpecs specs;
  if (a.bins) {
    specs.dx.bin_count = specs.dy.bin_count = specs.magnitude.bin_count = *a.bins;
  }
  if (a.range) {
    const auto colon = a.range->find(':');
    const auto lo = colon == std::string::npos ? std::nullopt : parse_double(a.range->substr(0, colon));
    const auto hi = colon == std::string::npos ? std::nullopt : parse_double(a.range->substr(colon + 1));
    if (!lo || !hi) fail(ErrorKind::config, "--range expects LO:HI, got '" + *a.range + "'");
    specs.dx.min = specs.dy.min = *lo;
    specs.dx.max = specs.dy.max = *hi;
  }
  specs.dx.validate();
  specs.magnitude.validate();

  const auto rows = analysis::dataset_analysis_report(datasets, a.threads);
  std::vector<Tracklet> all;
  std::ostringstream ingest;
  ingest << "dataset,tracklets,records,malformed,duplicates,splits,dropped_runs,dropped_records\n";
  for (const auto& d : datasets) {
    all.insert(all.end(), d.tracklets.begin(), d.tracklets.end());
    const ParseSummary& s = d.summary;
    ingest << d.name << ',' << d.tracklets.size() << ',' << s.records << ',' << s.malformed << ','
           << s.duplicates << ',' << s.splits << ',' << s.dropped_runs << ',' << s.dropped_records
           << '\n';
  }
  const fs::path dir = a.out;
  write_file_atomic(dir / "analysis.csv", analysis::report_csv(rows));
  write_file_atomic(dir / "ingestion.csv", ingest.str());
  if (!all.empty()) {
    const auto h = analysis::offset_histograms(all, specs);
    write_file_atomic(dir / "hist_dx.csv", analysis::histogram_csv(h.dx));
    write_file_atomic(dir / "hist_dy.csv", analysis::histogram_csv(h.dy));
    write_file_atomic(dir / "hist_magnitude.csv", analysis::histogram_csv(h.magnitude));
  }
  Meta meta = {{"data_dir", a.data_dir},
               {"out_dir", a.out},
               {"dx_range", format_double(specs.dx.min) + ":" + format_double(specs.dx.max)},
               {"dx_bins", std::to_string(specs.dx.bin_count)},
               {"magnitude_range",
                format_double(specs.magnitude.min) + ":" + format_double(specs.magnitude.max)},
               {"magnitude_bins", std::to_string(specs.magnitude.bin_count)}};
  append(meta, digest_data_dir(datasets, a.data_dir));
  write_run_meta(dir, "analyze", meta);
  out << analysis::report_csv(rows);
  return 0;
}

int cmd_train(const Args& a, std::ostream& out) {
  const auto config = resolve_config(a.m);
  const auto options = resolve_options(a.m);
  const auto datasets = load_nonempty(a.data_dir);
  std::vector<Sample> samples;
  for (const auto& d : datasets) {
    auto s = samples_of(d, a.stride);
    samples.insert(samples.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  if (samples.empty()) fail(ErrorKind::data, "no training windows in " + a.data_dir);
  const auto trained = models::train(config, samples, options);
  models::save_bundle(a.out, trained);
  Meta meta = {{"data_dir", a.data_dir}, {"out", a.out}, {"stride", std::to_string(a.stride)},
               {"samples", std::to_string(samples.size())}};
  append(meta, config_meta(config, options));
  append(meta, digest_data_dir(datasets, a.data_dir));
  write_run_meta(a.out, "train", meta);
  out << "trained " << models::to_string(config.family) << " on " << samples.size()
      << " samples";
  if (!trained.metadata.loss_curve.empty()) {
    out << ", final loss " << format_double(trained.metadata.loss_curve.back());
  }
  out << '\n';
  return 0;
}

int cmd_evaluate(const Args& a, std::ostream& out) {
  const auto model = models::load_bundle(a.model);
  const auto datasets = load_nonempty(a.data_dir);
  std::vector<evaluation::SampleGroup> groups;
  for (const auto& d : datasets) groups.push_back({d.name, samples_of(d, a.stride)});
  const auto report = evaluate_model(model, groups, a.threads);
  write_evaluation(a.out, report);
  Meta meta = {{"model", a.model}, {"data_dir", a.data_dir}, {"out", a.out},
               {"stride", std::to_string(a.stride)}};
  append(meta, digest_files(a.model, {fs::path(a.model) / "model.meta",
                                      fs::path(a.model) / "weights.tkw"}, "model"));
  append(meta, digest_data_dir(datasets, a.data_dir));
  write_run_meta(a.out, "evaluate", meta);
  out << evaluation::report_csv(report);
  return 0;
}

int cmd_benchmark(const Args& a, std::ostream& out) {
  const auto config = resolve_config(a.m);
  const auto options = resolve_options(a.m);
  const auto datasets = load_nonempty(a.data_dir);
  std::vector<Sample> train_samples;
  std::optional<evaluation::SampleGroup> held;
  for (const auto& d : datasets) {
    const bool match = d.name == a.holdout || fs::path(d.name).stem().string() == a.holdout;
    auto s = samples_of(d, a.stride);
    if (match && !held) {
      held = evaluation::SampleGroup{d.name, std::move(s)};
    } else {
      train_samples.insert(train_samples.end(), std::make_move_iterator(s.begin()),
                           std::make_move_iterator(s.end()));
    }
  }
  if (!held) fail(ErrorKind::data, "holdout dataset '" + a.holdout + "' not found");
  if (train_samples.empty() && config.family != models::Family::linear_interp) {
    fail(ErrorKind::data, "no training windows outside the holdout");
  }
  const auto trained = models::train(config, train_samples, options);
  const fs::path dir = a.out;
  models::save_bundle(dir / "model", trained);
  const std::vector<evaluation::SampleGroup> groups = {*held};
  const auto report = evaluate_model(trained, groups, a.threads);
  write_evaluation(dir, report);
  models::PredictorConfig baseline = models::default_config(models::Family::linear_interp);
  baseline.two_point_velocity = a.m.two_point;
  const auto baseline_report = evaluate_model(models::TrainedPredictor(baseline, std::nullopt),
                                              groups, a.threads);
  write_evaluation(dir, baseline_report, "baseline_");
  Meta meta = {{"data_dir", a.data_dir}, {"out", a.out}, {"holdout", held->name},
               {"stride", std::to_string(a.stride)},
               {"training_samples", std::to_string(train_samples.size())}};
  append(meta, config_meta(config, options));
  append(meta, digest_data_dir(datasets, a.data_dir));
  write_run_meta(dir, "benchmark", meta);
  out << evaluation::report_csv(report);
  return 0;
}

int cmd_gradcheck(const Args& a, std::ostream& out) {
  bool ok = true;
  std::string failed;
  for (const auto& c : nn::standard_grad_cases()) {
    nn::GradCheckOptions opt;
    opt.seed = a.m.seed.value_or(0);
    const auto r = nn::grad_check(c.specs, a.tolerance, opt);
    out << c.name << " max_rel_err=" << format_double(r.max_relative_error) << " worst="
        << r.worst_slice << ' ' << (r.passed ? "pass" : "FAIL") << '\n';
    if (!r.passed) {
      ok = false;
      failed += (failed.empty() ? "" : ",") + c.name;
    }
  }
  if (!ok) fail(ErrorKind::numerical, "gradient check failed for " + failed);
  return 0;
}

int cmd_synth(const Args& a, std::ostream& out) {
  synth::SynthSpec spec;
  spec.count = a.count;
  spec.noise = a.noise;
  spec.seed = a.m.seed.value_or(0);
  spec.mix = synth::parse_mix(a.mix);
  spec.length = a.length;
  const auto corpus = synth::generate(spec);
  synth::write_corpus(a.out, corpus);
  write_run_meta(a.out, "synth",
                 {{"count", std::to_string(spec.count)},
                  {"noise", format_double(spec.noise)},
                  {"seed", std::to_string(spec.seed)},
                  {"mix", a.mix},
                  {"length", std::to_string(spec.length)},
                  {"out", a.out}});
  out << "wrote " << corpus.size() << " tracklets to " << a.out << '\n';
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 1;
    case ErrorKind::invalid_input:
    case ErrorKind::data: return 2;
    case ErrorKind::numerical: return 3;
  }
  return 2;
}

void report_error(std::ostream& err, const char* kind, std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  err << "error kind=" << kind << " msg=" << msg << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pedestrian trajectory forecasting toolkit", "trajkit"};
  app.set_version_flag("--version", TRAJKIT_VERSION);
  app.require_subcommand(1);
  Args a;

  auto* analyze = app.add_subcommand("analyze", "Noise, linearity and offset statistics");
  analyze->add_option("--data-dir", a.data_dir, "Directory of TrajNet .txt files")->required();
  analyze->add_option("--out-dir", a.out, "Output directory")->required();
  analyze->add_option("--bins", a.bins, "Histogram bin count");
  analyze->add_option("--range", a.range, "dx/dy histogram range LO:HI");
  analyze->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train a predictor");
  train->add_option("--data-dir", a.data_dir, "Directory of TrajNet .txt files")->required();
  train->add_option("--out", a.out, "Model bundle directory")->required();
  train->add_option("--stride", a.stride, "Hop between training windows")->capture_default_str();
  add_model_options(train, a.m);

  auto* evaluate = app.add_subcommand("evaluate", "ADE/FDE report for a trained model");
  evaluate->add_option("--model", a.model, "Model bundle directory")->required();
  evaluate->add_option("--data-dir", a.data_dir, "Directory of TrajNet .txt files")->required();
  evaluate->add_option("--out", a.out, "Report directory")->required();
  evaluate->add_option("--stride", a.stride, "Hop between windows")->capture_default_str();
  evaluate->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* benchmark = app.add_subcommand("benchmark", "Leave-one-dataset-out train and evaluate");
  benchmark->add_option("--holdout", a.holdout, "Dataset evaluated (name or file stem)")->required();
  benchmark->add_option("--data-dir", a.data_dir, "Directory of TrajNet .txt files")->required();
  benchmark->add_option("--out", a.out, "Output directory")->required();
  benchmark->add_option("--stride", a.stride, "Hop between windows")->capture_default_str();
  benchmark->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_model_options(benchmark, a.m);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer kind");
  gradcheck->add_option("--tolerance", a.tolerance, "Max relative error")->capture_default_str();
  gradcheck->add_option("--seed", a.m.seed, "Random seed (default 0)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--count", a.count, "Number of tracklets")->required();
  synth->add_option("--noise", a.noise, "Gaussian noise std in meters")->required();
  synth->add_option("--seed", a.m.seed, "Random seed")->required();
  synth->add_option("--out", a.out, "Output directory")->default_val("synth");
  synth->add_option("--mix", a.mix, "Motion class weights")->capture_default_str();
  synth->add_option("--length", a.length, "Positions per tracklet")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    err << app.help();
    return 1;
  }

  try {
    if (*analyze) return cmd_analyze(a, out);
    if (*train) return cmd_train(a, out);
    if (*evaluate) return cmd_evaluate(a, out);
    if (*benchmark) return cmd_benchmark(a, out);
    if (*gradcheck) return cmd_gradcheck(a, out);
    if (*synth) return cmd_synth(a, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error(err, "data", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(err, "data", e.what());
    return 2;
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace trajkit::cli
