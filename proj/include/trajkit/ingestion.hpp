#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "trajkit/types.hpp"

namespace trajkit {

/// Bookkeeping for one parsed file. Record-level problems land here instead of
/// aborting the parse.
struct ParseSummary {
  std::size_t records = 0;          // well-formed records read
  std::size_t malformed = 0;        // lines that failed to parse
  std::size_t duplicates = 0;       // repeated (pedestrian, frame) pairs, later copy dropped
  std::size_t splits = 0;           // gaps at which a pedestrian's frames were cut
  std::size_t dropped_runs = 0;     // constant-stride runs shorter than 2 frames
  std::size_t dropped_records = 0;  // records lost with those runs
  std::vector<std::string> messages;
};

struct ParseResult {
  std::vector<Tracklet> tracklets;
  ParseSummary summary;
};

/// Parses whitespace-separated "frame pedestrian_id x y" records. Blank lines
/// and '#' comments are skipped. Each pedestrian's frames are sorted and split
/// into maximal constant-stride runs; runs shorter than 2 are dropped.
ParseResult parse_dataset(std::istream& in, const std::string& name);

struct Dataset {
  std::string name;  // path relative to the data directory
  std::vector<Tracklet> tracklets;
  ParseSummary summary;
};

/// Every regular `*.txt` file below `root`, sorted by relative path.
std::vector<Dataset> load_data_dir(const std::filesystem::path& root);

struct SliceConfig {
  Eigen::Index observe_len = 8;
  Eigen::Index predict_len = 12;
  Eigen::Index stride = 1;  // hop between successive windows

  void validate() const;
};

/// Cuts every window of observe_len + predict_len consecutive frames (hop =
/// stride) into a Sample. With `with_future == false` only observe_len windows
/// are cut and the samples carry no future.
std::vector<Sample> slice_samples(const std::vector<Tracklet>& tracklets,
                                  const SliceConfig& config,
                                  const std::string& dataset_name,
                                  bool with_future = true);

}  // namespace trajkit
