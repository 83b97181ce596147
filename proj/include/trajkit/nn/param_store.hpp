#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trajkit/error.hpp"
#include "trajkit/io_util.hpp"

namespace trajkit::nn {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Time-major sequence; entry t is a (features x batch) matrix.
template <typename Scalar>
using Sequence = std::vector<Matrix<Scalar>>;

struct Slice {
  std::string name;
  Index offset = 0;
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
};

/// Named, contiguous, non-overlapping slices of one flat parameter array. Slices
/// are only ever appended, so they tile [0, size()) in registration order.
class ParamLayout {
 public:
  const Slice& add(std::string name, Index rows, Index cols) {
    if (rows < 1 || cols < 1) fail(ErrorKind::config, "empty parameter slice " + name);
    if (find(name)) fail(ErrorKind::config, "duplicate parameter slice " + name);
    slices_.push_back({std::move(name), size_, rows, cols});
    size_ += rows * cols;
    return slices_.back();
  }

  Index size() const { return size_; }
  const std::vector<Slice>& slices() const { return slices_; }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < slices_.size(); ++i) {
      if (slices_[i].name == name) return i;
    }
    return std::nullopt;
  }

  const Slice& at(const std::string& name) const {
    auto i = find(name);
    if (!i) fail(ErrorKind::config, "unknown parameter slice " + name);
    return slices_[*i];
  }

  const Slice& slice_containing(Index param) const {
    for (const auto& s : slices_) {
      if (param >= s.offset && param < s.offset + s.size()) return s;
    }
    fail(ErrorKind::invalid_input, "parameter index out of range");
  }

  /// Canonical text form; two layouts agree iff their descriptions agree.
  std::string describe() const {
    std::ostringstream out;
    for (const auto& s : slices_) out << s.name << ':' << s.rows << 'x' << s.cols << ';';
    return out.str();
  }

 private:
  std::vector<Slice> slices_;
  Index size_ = 0;
};

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> view(Vector<Scalar>& values, const Slice& s) {
  return {values.data() + s.offset, s.rows, s.cols};
}

template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> view(const Vector<Scalar>& values, const Slice& s) {
  return {values.data() + s.offset, s.rows, s.cols};
}

template <typename Scalar>
struct ParamStore {
  ParamLayout layout;
  Vector<Scalar> values;

  void allocate() { values = Vector<Scalar>::Zero(layout.size()); }
  Eigen::Map<Matrix<Scalar>> operator[](const std::string& name) { return view(values, layout.at(name)); }
  Eigen::Map<const Matrix<Scalar>> operator[](const std::string& name) const {
    return view(values, layout.at(name));
  }
};

template <typename Scalar>
constexpr const char* scalar_name() {
  if constexpr (sizeof(Scalar) == 8) return "f64";
  else return "f32";
}

/// Digest of the layout and scalar width, stored in weight files.
template <typename Scalar>
std::uint64_t layout_digest(const ParamLayout& layout) {
  return fnv1a64(layout.describe() + "scalar=" + scalar_name<Scalar>());
}

}  // namespace trajkit::nn
