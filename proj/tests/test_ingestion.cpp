#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "trajkit/ingestion.hpp"

using namespace trajkit;
namespace fs = std::filesystem;

namespace {

ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "mem");
}

Tracklet straight(Eigen::Index length, std::int64_t id = 1) {
  std::vector<std::int64_t> frames;
  Path p(length, 2);
  for (Eigen::Index i = 0; i < length; ++i) {
    frames.push_back(10 * i);
    p.row(i) << 0.5 * static_cast<double>(i), 0.1 * static_cast<double>(i * i);
  }
  return Tracklet(id, frames, p);
}

}  // namespace

TEST(Parse, MinimalFile) {
  const auto r = parse("10 3 0.0 0.0\n20 3 1.0 0.0\n");
  ASSERT_EQ(r.tracklets.size(), 1U);
  EXPECT_EQ(r.tracklets[0].size(), 2);
  EXPECT_EQ(r.tracklets[0].frame_stride(), 10);
  EXPECT_EQ(r.tracklets[0].pedestrian_id(), 3);
}

TEST(Parse, GapSplitsAndDropsShortRun) {
  const auto r = parse("10 3 0.0 0.0\n20 3 1.0 0.0\n40 3 3.0 0.0\n");
  ASSERT_EQ(r.tracklets.size(), 1U);
  EXPECT_EQ(r.tracklets[0].size(), 2);
  EXPECT_EQ(r.summary.splits, 1U);
  EXPECT_EQ(r.summary.dropped_runs, 1U);
  EXPECT_EQ(r.summary.dropped_records, 1U);
}

TEST(Parse, MalformedRecordIsCounted) {
  const auto r = parse("10 3 a b\n");
  EXPECT_TRUE(r.tracklets.empty());
  EXPECT_EQ(r.summary.malformed, 1U);
}

TEST(Parse, EmptyFileWarns) {
  const auto r = parse("");
  EXPECT_TRUE(r.tracklets.empty());
  ASSERT_EQ(r.summary.messages.size(), 1U);
}

TEST(Parse, CommentsBlankLinesAndDecimalIds) {
  const auto r = parse("# header\n\n10 3.0 0 0\n20 3 1 0\n30\t3\t2\t0\n");
  ASSERT_EQ(r.tracklets.size(), 1U);
  EXPECT_EQ(r.tracklets[0].size(), 3);
  EXPECT_EQ(r.summary.malformed, 0U);
}

TEST(Parse, RejectsFractionalIdsWrongArityAndNonFinite) {
  const auto r = parse("10 3.5 0 0\n10 3 0\n10 3 0 0 0\n10 3 nan 0\n10 3 inf 0\n");
  EXPECT_EQ(r.summary.malformed, 5U);
  EXPECT_EQ(r.summary.records, 0U);
}

TEST(Parse, SortsFramesAndDropsDuplicates) {
  const auto r = parse("30 1 3 0\n10 1 1 0\n20 1 2 0\n20 1 9 9\n");
  ASSERT_EQ(r.tracklets.size(), 1U);
  EXPECT_EQ(r.summary.duplicates, 1U);
  const Path& p = r.tracklets[0].positions();
  EXPECT_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(1, 0), 2.0);
  EXPECT_EQ(p(2, 0), 3.0);
}

TEST(Parse, GroupsByPedestrianInIdOrder) {
  const auto r = parse("10 9 0 0\n10 2 5 5\n20 9 1 0\n20 2 6 5\n");
  ASSERT_EQ(r.tracklets.size(), 2U);
  EXPECT_EQ(r.tracklets[0].pedestrian_id(), 2);
  EXPECT_EQ(r.tracklets[1].pedestrian_id(), 9);
}

TEST(Parse, PerTrackletStride) {
  const auto r = parse("0 1 0 0\n12 1 1 0\n24 1 2 0\n0 2 0 0\n10 2 1 0\n");
  ASSERT_EQ(r.tracklets.size(), 2U);
  EXPECT_EQ(r.tracklets[0].frame_stride(), 12);
  EXPECT_EQ(r.tracklets[1].frame_stride(), 10);
}

TEST(Slice, ExactFitOneHopAndTooShort) {
  const SliceConfig cfg;
  EXPECT_EQ(slice_samples({straight(20)}, cfg, "d").size(), 1U);
  EXPECT_EQ(slice_samples({straight(21)}, cfg, "d").size(), 2U);
  EXPECT_EQ(slice_samples({straight(19)}, cfg, "d").size(), 0U);
}

TEST(Slice, CountMatchesEnumeration) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(2, 60), stride(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index L = len(rng);
    SliceConfig cfg;
    cfg.stride = stride(rng);
    std::size_t expected = 0;
    for (Eigen::Index start = 0; start < L; ++start) {
      if (start % cfg.stride == 0 && start + 20 <= L) ++expected;
    }
    EXPECT_EQ(slice_samples({straight(L)}, cfg, "d").size(), expected) << "L=" << L;
  }
}

TEST(Slice, CopiesPositionsVerbatim) {
  const Tracklet t = straight(30, 4);
  SliceConfig cfg;
  cfg.stride = 3;
  const auto samples = slice_samples({t}, cfg, "set");
  ASSERT_FALSE(samples.empty());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    const Eigen::Index start = static_cast<Eigen::Index>(k) * 3;
    EXPECT_EQ(s.start_frame, t.frames()[static_cast<std::size_t>(start)]);
    EXPECT_EQ(s.observed, t.positions().middleRows(start, 8));
    EXPECT_EQ(*s.future, t.positions().middleRows(start + 8, 12));
    EXPECT_EQ(s.source_dataset, "set");
    EXPECT_EQ(s.pedestrian_id, 4);
  }
}

TEST(Slice, TestModeCutsObservedOnly) {
  const auto samples = slice_samples({straight(10)}, SliceConfig{}, "d", false);
  EXPECT_EQ(samples.size(), 3U);
  for (const auto& s : samples) EXPECT_FALSE(s.future);
}

TEST(Slice, InvalidConfig) {
  SliceConfig cfg;
  cfg.observe_len = 1;
  EXPECT_THROW(slice_samples({straight(20)}, cfg, "d"), Error);
}

TEST(DataDir, RecursiveSortedTxtOnly) {
  const fs::path root = fs::temp_directory_path() / "trajkit_test_datadir";
  fs::remove_all(root);
  fs::create_directories(root / "sub");
  std::ofstream(root / "b.txt") << "10 1 0 0\n20 1 1 0\n";
  std::ofstream(root / "sub" / "a.txt") << "10 1 0 0\n20 1 1 0\n";
  std::ofstream(root / "notes.csv") << "x\n";
  const auto datasets = load_data_dir(root);
  ASSERT_EQ(datasets.size(), 2U);
  EXPECT_EQ(datasets[0].name, "b.txt");
  EXPECT_EQ(datasets[1].name, "sub/a.txt");
  fs::remove_all(root);
  EXPECT_THROW(load_data_dir(root), Error);
}
