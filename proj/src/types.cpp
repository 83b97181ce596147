#include "trajkit/types.hpp"

#include <string>

namespace trajkit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

Tracklet::Tracklet(std::int64_t pedestrian_id, std::vector<std::int64_t> frames,
                   Path positions, double frame_period)
    : pedestrian_id_(pedestrian_id),
      frames_(std::move(frames)),
      positions_(std::move(positions)),
      frame_period_(frame_period) {
  if (frames_.size() < 2) {
    fail(ErrorKind::invalid_input, "tracklet needs at least 2 frames");
  }
  if (static_cast<Eigen::Index>(frames_.size()) != positions_.rows()) {
    fail(ErrorKind::invalid_input, "tracklet frame/position count mismatch");
  }
  const std::int64_t stride = frames_[1] - frames_[0];
  if (stride <= 0) {
    fail(ErrorKind::invalid_input, "tracklet frames must be strictly increasing");
  }
  for (std::size_t i = 2; i < frames_.size(); ++i) {
    if (frames_[i] - frames_[i - 1] != stride) {
      fail(ErrorKind::invalid_input,
           "tracklet frame stride is not constant at frame " +
               std::to_string(frames_[i]));
    }
  }
  if (!(frame_period_ > 0.0)) {
    fail(ErrorKind::invalid_input, "frame period must be positive");
  }
  require_finite(positions_, "tracklet positions");
}

Path Sample::full_window() const {
  if (!future) {
    fail(ErrorKind::invalid_input, "sample has no future window");
  }
  Path full(observed.rows() + future->rows(), 2);
  full << observed, *future;
  return full;
}

OffsetSequence positions_to_offsets(const Eigen::Ref<const Path>& positions) {
  if (positions.rows() < 2) {
    fail(ErrorKind::invalid_input, "need at least 2 positions to form offsets");
  }
  const Eigen::Index n = positions.rows();
  OffsetSequence seq;
  seq.origin = positions.row(0).transpose();
  seq.offsets = positions.bottomRows(n - 1) - positions.topRows(n - 1);
  return seq;
}

Path offsets_to_positions(const OffsetSequence& seq) {
  const Eigen::Index n = seq.offsets.rows();
  Path out(n + 1, 2);
  out.row(0) = seq.origin.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i + 1) = out.row(i) + seq.offsets.row(i);
  }
  return out;
}

void require_finite(const Eigen::Ref<const Path>& path, const char* what) {
  if (!path.allFinite()) {
    fail(ErrorKind::invalid_input, std::string(what) + " contain non-finite values");
  }
}

}  // namespace trajkit
