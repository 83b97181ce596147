#include "trajkit/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>

namespace trajkit {
namespace {

struct Record {
  std::int64_t frame;
  double x;
  double y;
};

std::optional<double> parse_number(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// Integer keys may be written as decimals ("3.0").
std::optional<std::int64_t> parse_integral(std::string_view token) {
  auto value = parse_number(token);
  if (!value || std::floor(*value) != *value || std::fabs(*value) > 9.0e15) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(*value);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

ParseResult parse_dataset(std::istream& in, const std::string& name) {
  ParseResult result;
  ParseSummary& summary = result.summary;
  std::map<std::int64_t, std::vector<Record>> by_pedestrian;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty() || fields.front().front() == '#') continue;

    std::optional<std::int64_t> frame, ped;
    std::optional<double> x, y;
    if (fields.size() == 4) {
      frame = parse_integral(fields[0]);
      ped = parse_integral(fields[1]);
      x = parse_number(fields[2]);
      y = parse_number(fields[3]);
    }
    if (!frame || !ped || !x || !y) {
      ++summary.malformed;
      summary.messages.push_back(name + ":" + std::to_string(line_no) +
                                 ": malformed record");
      continue;
    }
    ++summary.records;
    by_pedestrian[*ped].push_back({*frame, *x, *y});
  }

  if (summary.records == 0 && summary.malformed == 0) {
    summary.messages.push_back(name + ": empty file");
  }

  for (auto& [ped, records] : by_pedestrian) {
    std::stable_sort(records.begin(), records.end(),
                     [](const Record& a, const Record& b) { return a.frame < b.frame; });
    auto last = std::unique(records.begin(), records.end(),
                            [](const Record& a, const Record& b) { return a.frame == b.frame; });
    summary.duplicates += static_cast<std::size_t>(records.end() - last);
    records.erase(last, records.end());

    auto emit_run = [&](std::size_t begin, std::size_t end) {
      const std::size_t len = end - begin;
      if (len < 2) {
        ++summary.dropped_runs;
        summary.dropped_records += len;
        return;
      }
      std::vector<std::int64_t> frames(len);
      Path positions(static_cast<Eigen::Index>(len), 2);
      for (std::size_t i = 0; i < len; ++i) {
        frames[i] = records[begin + i].frame;
        positions(static_cast<Eigen::Index>(i), 0) = records[begin + i].x;
        positions(static_cast<Eigen::Index>(i), 1) = records[begin + i].y;
      }
      result.tracklets.emplace_back(ped, std::move(frames), std::move(positions));
    };

    std::size_t run_start = 0;
    for (std::size_t i = 2; i < records.size(); ++i) {
      const std::int64_t stride = records[run_start + 1].frame - records[run_start].frame;
      if (i - run_start < 2) continue;
      if (records[i].frame - records[i - 1].frame != stride) {
        ++summary.splits;
        emit_run(run_start, i);
        run_start = i;
      }
    }
    emit_run(run_start, records.size());
  }
  return result;
}

std::vector<Dataset> load_data_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    fail(ErrorKind::data, "data directory not found: " + root.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::vector<Dataset> datasets;
  datasets.reserve(files.size());
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) fail(ErrorKind::data, "cannot open " + file.string());
    Dataset ds;
    ds.name = fs::relative(file, root).generic_string();
    auto parsed = parse_dataset(in, ds.name);
    ds.tracklets = std::move(parsed.tracklets);
    ds.summary = std::move(parsed.summary);
    datasets.push_back(std::move(ds));
  }
  std::sort(datasets.begin(), datasets.end(),
            [](const Dataset& a, const Dataset& b) { return a.name < b.name; });
  return datasets;
}

void SliceConfig::validate() const {
  if (observe_len < 2) fail(ErrorKind::config, "observe_len must be >= 2");
  if (predict_len < 1) fail(ErrorKind::config, "predict_len must be >= 1");
  if (stride < 1) fail(ErrorKind::config, "slice stride must be >= 1");
}

std::vector<Sample> slice_samples(const std::vector<Tracklet>& tracklets,
                                  const SliceConfig& config,
                                  const std::string& dataset_name, bool with_future) {
  config.validate();
  const Eigen::Index window =
      with_future ? config.observe_len + config.predict_len : config.observe_len;
  std::vector<Sample> samples;
  for (const auto& tracklet : tracklets) {
    const Path& pos = tracklet.positions();
    for (Eigen::Index start = 0; start + window <= tracklet.size(); start += config.stride) {
      Sample s;
      s.observed = pos.middleRows(start, config.observe_len);
      if (with_future) {
        s.future = Path(pos.middleRows(start + config.observe_len, config.predict_len));
      }
      s.source_dataset = dataset_name;
      s.pedestrian_id = tracklet.pedestrian_id();
      s.start_frame = tracklet.frames()[static_cast<std::size_t>(start)];
      s.frame_period = tracklet.frame_period();
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

}  // namespace trajkit
