#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "trajkit/io_util.hpp"
#include "trajkit/types.hpp"

using namespace trajkit;

namespace {

Path make_path(std::initializer_list<std::pair<double, double>> pts) {
  Path p(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [x, y] : pts) p.row(i++) << x, y;
  return p;
}

}  // namespace

TEST(Offsets, ConstantVelocity) {
  const auto seq = positions_to_offsets(make_path({{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(seq.origin, Position(0, 0));
  EXPECT_EQ(seq.offsets, make_path({{1, 0}, {1, 0}}));
}

TEST(Offsets, DirectDifferencing) {
  const auto seq = positions_to_offsets(make_path({{0, 0}, {1, 1}, {1, 3}}));
  EXPECT_EQ(seq.offsets, make_path({{1, 1}, {0, 2}}));
}

TEST(Offsets, SinglePositionIsInvalid) {
  try {
    positions_to_offsets(make_path({{5, 5}}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(Offsets, InverseExamples) {
  EXPECT_EQ(offsets_to_positions({make_path({{1, 0}, {1, 0}}), Position(0, 0)}),
            make_path({{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(offsets_to_positions({Path(0, 2), Position(3, 4)}), make_path({{3, 4}}));
  EXPECT_EQ(offsets_to_positions({make_path({{0.5, 0.5}}), Position(2, -1)}),
            make_path({{2, -1}, {2.5, -0.5}}));
}

TEST(Offsets, RoundTripOnRandomPaths) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_int_distribution<int> len(2, 40);
  for (int trial = 0; trial < 200; ++trial) {
    Path p(len(rng), 2);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
    const Path back = offsets_to_positions(positions_to_offsets(p));
    ASSERT_EQ(back.rows(), p.rows());
    EXPECT_LT((back - p).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Offsets, TranslationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Path p(20, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  Path q = p;
  q.rowwise() += Eigen::RowVector2d(123.25, -77.5);
  const Path a = positions_to_offsets(p).offsets;
  const Path b = positions_to_offsets(q).offsets;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tracklet, ValidatesInvariants) {
  const Path two = make_path({{0, 0}, {1, 0}});
  EXPECT_NO_THROW(Tracklet(1, {10, 20}, two));
  EXPECT_THROW(Tracklet(1, {10}, make_path({{0, 0}})), Error);
  EXPECT_THROW(Tracklet(1, {20, 10}, two), Error);
  EXPECT_THROW(Tracklet(1, {10, 10}, two), Error);
  EXPECT_THROW(Tracklet(1, {10, 20, 40}, make_path({{0, 0}, {1, 0}, {2, 0}})), Error);
  EXPECT_THROW(Tracklet(1, {10, 20, 30}, two), Error);
  EXPECT_THROW(Tracklet(1, {10, 20}, two, 0.0), Error);
  Path bad = two;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Tracklet(1, {10, 20}, bad), Error);
}

TEST(Tracklet, StoresStrideAndPeriod) {
  const Tracklet t(7, {12, 24, 36}, make_path({{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(t.frame_stride(), 12);
  EXPECT_EQ(t.frame_period(), kDefaultFramePeriod);
  EXPECT_EQ(t.size(), 3);
}

TEST(Sample, FullWindowConcatenates) {
  Sample s;
  s.observed = make_path({{0, 0}, {1, 0}});
  s.future = make_path({{2, 0}});
  EXPECT_EQ(s.full_window(), make_path({{0, 0}, {1, 0}, {2, 0}}));
  s.future.reset();
  EXPECT_THROW(s.full_window(), Error);
}

TEST(IoUtil, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(parse_double(format_double(v)).value(), v);
  }
  EXPECT_EQ(format_optional(std::nullopt), "");
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double(""));
  EXPECT_EQ(parse_double("+2").value(), 2.0);
}

TEST(IoUtil, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(to_hex(0xabcULL), "0000000000000abc");
}
