#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "trajkit/nn/param_store.hpp"

namespace trajkit::nn {

// Container: "TKW1" | digest u64 LE | count u64 LE | count values LE.
inline constexpr std::string_view kWeightsMagic = "TKW1";

namespace detail {

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(v >> (8 * i))));
  }
}

template <typename U>
U get_le(std::string_view in, std::size_t at) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<std::uint8_t>(in[at + i])) << (8 * i);
  }
  return v;
}

template <typename Scalar>
using Bits = std::conditional_t<sizeof(Scalar) == 8, std::uint64_t, std::uint32_t>;

}  // namespace detail

template <typename Scalar>
std::string encode_weights(std::uint64_t digest, const Vector<Scalar>& values) {
  std::string out(kWeightsMagic);
  detail::put_le(out, digest);
  detail::put_le(out, static_cast<std::uint64_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) {
    detail::put_le(out, std::bit_cast<detail::Bits<Scalar>>(values[i]));
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> decode_weights(std::string_view bytes, std::uint64_t expected_digest,
                              Index expected_count) {
  constexpr std::size_t header = 4 + 8 + 8;
  if (bytes.size() < header || bytes.substr(0, 4) != kWeightsMagic) {
    fail(ErrorKind::data, "weights: bad magic");
  }
  if (detail::get_le<std::uint64_t>(bytes, 4) != expected_digest) {
    fail(ErrorKind::data, "weights: architecture digest mismatch");
  }
  const auto count = detail::get_le<std::uint64_t>(bytes, 12);
  if (count != static_cast<std::uint64_t>(expected_count)) {
    fail(ErrorKind::data, "weights: parameter count mismatch");
  }
  if (bytes.size() != header + count * sizeof(Scalar)) {
    fail(ErrorKind::data, "weights: truncated or oversized payload");
  }
  Vector<Scalar> values(expected_count);
  for (Index i = 0; i < expected_count; ++i) {
    values[i] = std::bit_cast<Scalar>(detail::get_le<detail::Bits<Scalar>>(
        bytes, header + static_cast<std::size_t>(i) * sizeof(Scalar)));
  }
  return values;
}

template <typename Scalar>
void save_weights(const std::filesystem::path& path, const ParamLayout& layout,
                  const Vector<Scalar>& values) {
  write_file_atomic(path, encode_weights(layout_digest<Scalar>(layout), values));
}

template <typename Scalar>
Vector<Scalar> load_weights(const std::filesystem::path& path, const ParamLayout& layout) {
  return decode_weights<Scalar>(read_file(path), layout_digest<Scalar>(layout), layout.size());
}

}  // namespace trajkit::nn
