#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trajkit/error.hpp"

namespace trajkit {

/// World-plane position in meters.
using Position = Eigen::Vector2d;

/// Ordered positions (or offsets), one row per time step.
using Path = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double kDefaultFramePeriod = 0.4;  // 2.5 Hz

/// Time-ordered positions of one pedestrian sampled at a constant frame
/// stride. Construction validates the invariants; the value is immutable
/// afterwards.
class Tracklet {
 public:
  Tracklet(std::int64_t pedestrian_id, std::vector<std::int64_t> frames,
           Path positions, double frame_period = kDefaultFramePeriod);

  std::int64_t pedestrian_id() const { return pedestrian_id_; }
  const std::vector<std::int64_t>& frames() const { return frames_; }
  const Path& positions() const { return positions_; }
  Eigen::Index size() const { return positions_.rows(); }
  std::int64_t frame_stride() const { return frames_[1] - frames_[0]; }
  double frame_period() const { return frame_period_; }

 private:
  std::int64_t pedestrian_id_;
  std::vector<std::int64_t> frames_;
  Path positions_;
  double frame_period_;
};

/// An observation window plus (in training/evaluation mode) the target window.
struct Sample {
  Path observed;
  std::optional<Path> future;
  std::string source_dataset;
  std::int64_t pedestrian_id = 0;
  std::int64_t start_frame = 0;
  double frame_period = kDefaultFramePeriod;

  /// Observed followed by future positions; requires a future.
  Path full_window() const;
};

struct OffsetSequence {
  Path offsets;
  Position origin = Position::Zero();
};

OffsetSequence positions_to_offsets(const Eigen::Ref<const Path>& positions);
Path offsets_to_positions(const OffsetSequence& seq);

/// Throws invalid_input when any coordinate is NaN or infinite.
void require_finite(const Eigen::Ref<const Path>& path, const char* what);

}  // namespace trajkit
