#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajkit/types.hpp"

namespace trajkit::synth {

enum class Motion { line, arc, stop_and_go, standing };

const char* to_string(Motion m);
Motion parse_motion(const std::string& text);
/// Data file holding one motion class, e.g. "arcs.txt".
const char* file_name(Motion m);

/// Relative weights; normalized internally.
struct MotionMix {
  double line = 0.5;
  double arc = 0.3;
  double stop_and_go = 0.1;
  double standing = 0.1;
};

/// Parses "line=0.5,arc=0.3,stop_and_go=0.1,standing=0.1"; omitted classes get 0.
MotionMix parse_mix(const std::string& text);

struct SynthSpec {
  std::size_t count = 0;
  double noise = 0.0;  // Gaussian std per coordinate, meters
  std::uint64_t seed = 0;
  MotionMix mix;
  Eigen::Index length = 20;
  std::int64_t frame_stride = 10;
  double frame_period = kDefaultFramePeriod;

  void validate() const;
};

/// Ground truth behind one generated tracklet.
struct Generated {
  Motion motion = Motion::line;
  std::int64_t pedestrian_id = 0;
  double start_x = 0.0;
  double start_y = 0.0;
  double speed = 0.0;    // m/s
  double heading = 0.0;  // rad
  double turn_rate = 0.0;  // rad/s, arcs only
  Eigen::Index stop_start = 0;  // first stationary step, stop_and_go only
  Eigen::Index stop_length = 0;
  Path clean;
  Tracklet tracklet;  // clean + noise
};

/// Class counts follow the mix by largest remainder; generation order is
/// line, arc, stop_and_go, standing with pedestrian ids 1..count.
std::vector<Generated> generate(const SynthSpec& spec);

std::vector<Tracklet> tracklets(const std::vector<Generated>& corpus);

/// One TrajNet-format file per non-empty motion class plus generator_params.csv.
void write_corpus(const std::filesystem::path& dir, const std::vector<Generated>& corpus);

}  // namespace trajkit::synth
