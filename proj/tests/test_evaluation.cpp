#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "trajkit/analysis.hpp"
#include "trajkit/evaluation.hpp"
#include "trajkit/models.hpp"

using namespace trajkit;
using namespace trajkit::evaluation;

namespace {

Path line(const Eigen::RowVector2d& p0, const Eigen::RowVector2d& v, Eigen::Index n,
          Eigen::Index first = 0) {
  Path p(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) = p0 + static_cast<double>(first + i) * v;
  return p;
}

Sample make_sample(const Path& window, std::int64_t id, std::string dataset = "d") {
  Sample s;
  s.observed = window.topRows(8);
  s.future = Path(window.bottomRows(12));
  s.pedestrian_id = id;
  s.start_frame = 10 * id;
  s.source_dataset = std::move(dataset);
  return s;
}

Path last_position(const Eigen::Ref<const Path>& obs) {
  Path p(12, 2);
  p.rowwise() = obs.row(obs.rows() - 1);
  return p;
}

Path random_path(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Path p(n, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = d(rng);
  return p;
}

// Mixed corpus: straight walkers, slow curvy walkers, jittering standers.
std::vector<Sample> constructed_corpus(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pick(0.0, 1.0);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = pick(rng);
    Path w(20, 2);
    if (r < 0.35) {
      w = line({u(rng), u(rng)}, {0.5 * u(rng), 0.5 * u(rng)}, 20);
      w += random_path(rng, 20, 0.01);
    } else if (r < 0.7) {
      const double omega = 0.4 * u(rng), speed = 0.1 * (1.0 + u(rng));
      Eigen::RowVector2d p(u(rng), u(rng));
      double heading = 3.0 * u(rng);
      for (Eigen::Index k = 0; k < 20; ++k) {
        w.row(k) = p;
        heading += omega;
        p += speed * Eigen::RowVector2d(std::cos(heading), std::sin(heading));
      }
    } else {
      w = random_path(rng, 20, 0.01);
      w.rowwise() += Eigen::RowVector2d(u(rng), u(rng));
    }
    out.push_back(make_sample(w, static_cast<std::int64_t>(i)));
  }
  return out;
}

}  // namespace

TEST(Metrics, Examples) {
  const Path truth = line({0, 0}, {0.5, 0.2}, 12);
  EXPECT_EQ(ade(truth, truth), 0.0);
  EXPECT_EQ(fde(truth, truth), 0.0);
  Path shifted = truth;
  shifted.rowwise() += Eigen::RowVector2d(0.3, 0.4);
  EXPECT_NEAR(ade(shifted, truth), 0.5, 1e-15);
  Path last = truth;
  last.topRows(11).setConstant(9.0);
  last(11, 0) += 1.0;
  EXPECT_EQ(fde(last, truth), 1.0);
  EXPECT_THROW(ade(truth.topRows(11), truth), Error);
  EXPECT_THROW(fde(Path(0, 2), Path(0, 2)), Error);
}

TEST(Metrics, MatchBruteForceOnRandomPairs) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const Path a = random_path(rng, 12, 5.0), b = random_path(rng, 12, 5.0);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < 12; ++k) {
      const double dx = a(k, 0) - b(k, 0), dy = a(k, 1) - b(k, 1);
      sum += std::sqrt(dx * dx + dy * dy);
    }
    const double dx = a(11, 0) - b(11, 0), dy = a(11, 1) - b(11, 1);
    EXPECT_NEAR(ade(a, b), sum / 12.0, 1e-12);
    EXPECT_NEAR(fde(a, b), std::sqrt(dx * dx + dy * dy), 1e-12);
  }
}

TEST(Metrics, SharedTranslationInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Path a = random_path(rng, 12, 2.0), b = random_path(rng, 12, 2.0);
    const Eigen::RowVector2d t(shift(rng), shift(rng));
    Path at = a, bt = b;
    at.rowwise() += t;
    bt.rowwise() += t;
    EXPECT_NEAR(ade(at, bt), ade(a, b), 1e-12);
    EXPECT_NEAR(fde(at, bt), fde(a, b), 1e-12);
    EXPECT_EQ(ade(a, b), ade(b, a));
  }
}

TEST(Evaluate, PerfectPredictorScoresZero) {
  const auto samples = constructed_corpus(3, 30);
  std::map<std::string, Path> truth;
  for (const auto& s : samples) truth.emplace(std::to_string(s.observed(7, 0)), *s.future);
  const auto report = evaluate(
      [&](const Eigen::Ref<const Path>& obs) { return truth.at(std::to_string(obs(7, 0))); },
      {{"d", samples}});
  for (const auto& row : report.rows) {
    EXPECT_EQ(*row.ade, 0.0);
    EXPECT_EQ(*row.fde, 0.0);
  }
}

TEST(Evaluate, LastPositionOnStraightWalkers) {
  std::vector<Sample> samples;
  for (int i = 0; i < 5; ++i) {
    const double a = 0.7 * i;
    samples.push_back(make_sample(line({i, -i}, {0.5 * std::cos(a), 0.5 * std::sin(a)}, 20), i));
  }
  const auto report = evaluate(last_position, {{"d", samples}});
  // Step k lags by 0.5 k, so FDE = 6 and ADE = 0.5 (1 + ... + 12) / 12.
  EXPECT_NEAR(*report.rows[0].fde, 6.0, 1e-12);
  EXPECT_NEAR(*report.rows[0].ade, 3.25, 1e-12);
  EXPECT_NEAR(*report.rows[0].overall, 4.625, 1e-12);
}

TEST(Evaluate, LinearBaselineOnNoiselessLines) {
  std::vector<Sample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(make_sample(line({i, 2}, {0.3, -0.1 * i}, 20), i));
  const auto report =
      evaluate([](const Eigen::Ref<const Path>& o) { return models::predict_linear(o); },
               {{"d", samples}});
  EXPECT_LT(*report.rows[0].ade, 1e-9);
  EXPECT_LT(*report.rows[0].fde, 1e-9);
}

TEST(Evaluate, RowsAreSampleWeightedWithNullForEmptyGroups) {
  const auto a = constructed_corpus(4, 7), b = constructed_corpus(5, 23);
  const auto report = evaluate(last_position, {{"a", a}, {"empty", {}}, {"b", b}});
  ASSERT_EQ(report.rows.size(), 4U);
  EXPECT_EQ(report.rows[0].name, kAggregateRow);
  EXPECT_EQ(report.rows[0].samples, 30U);
  EXPECT_EQ(report.rows[2].name, "empty");
  EXPECT_FALSE(report.rows[2].ade);
  EXPECT_FALSE(report.rows[2].overall);
  const double weighted =
      (7.0 * *report.rows[1].ade + 23.0 * *report.rows[3].ade) / 30.0;
  EXPECT_NEAR(*report.rows[0].ade, weighted, 1e-12);
  for (const auto& row : report.rows) {
    if (row.ade) EXPECT_EQ(*row.overall, (*row.ade + *row.fde) / 2.0);
  }
  EXPECT_NE(report_csv(report).find("empty,0,,,"), std::string::npos);
  EXPECT_EQ(report_csv(report).rfind("# aggregate=sample_weighted_mean", 0), 0U);
}

TEST(Evaluate, OrderAndThreadIndependent) {
  auto samples = constructed_corpus(6, 200);
  const auto drift = [](const Eigen::Ref<const Path>& o) {
    Path p = models::predict_linear(o);
    p.col(0).array() += 0.1;
    return p;
  };
  const auto ref = evaluate(drift, {{"d", samples}}, 1);
  std::mt19937_64 rng(7);
  std::shuffle(samples.begin(), samples.end(), rng);
  const auto shuffled = evaluate(drift, {{"d", samples}}, 8);
  EXPECT_NEAR(*ref.rows[0].ade, *shuffled.rows[0].ade, 1e-12);
  EXPECT_NEAR(*ref.rows[0].fde, *shuffled.rows[0].fde, 1e-12);
  EXPECT_EQ(report_csv(ref), report_csv(shuffled));
  EXPECT_EQ(records_csv(ref), records_csv(shuffled));
}

TEST(Diagnostics, Classification) {
  EXPECT_EQ(classify_speed(0.0), SpeedClass::standing);
  EXPECT_EQ(classify_speed(0.1), SpeedClass::slow);
  EXPECT_EQ(classify_speed(0.4999), SpeedClass::slow);
  EXPECT_EQ(classify_speed(0.5), SpeedClass::walking);
  EXPECT_EQ(classify_r2(0.49), R2Band::low);
  EXPECT_EQ(classify_r2(0.5), R2Band::mid);
  EXPECT_EQ(classify_r2(0.9), R2Band::mid);
  EXPECT_EQ(classify_r2(0.9001), R2Band::high);
}

TEST(Diagnostics, WalkingLinesFillOneCell) {
  std::vector<Sample> samples;
  for (int i = 0; i < 12; ++i) samples.push_back(make_sample(line({0, i}, {0.4, 0.1}, 20), i));
  const auto cells = diagnostic_breakdown(evaluate(last_position, {{"d", samples}}));
  ASSERT_EQ(cells.size(), 9U);
  for (const auto& c : cells) {
    const bool target = c.speed == SpeedClass::walking && c.band == R2Band::high;
    EXPECT_EQ(c.count, target ? 12U : 0U);
    EXPECT_EQ(c.ade.has_value(), target);
  }
}

TEST(Diagnostics, DriftOnStandersLandsInStandingClass) {
  std::mt19937_64 rng(8);
  std::vector<Sample> samples;
  for (int i = 0; i < 20; ++i) {
    Path w = random_path(rng, 20, 0.005);
    w.rowwise() += Eigen::RowVector2d(i, 0);
    samples.push_back(make_sample(w, i));
  }
  for (int i = 20; i < 30; ++i) samples.push_back(make_sample(line({0, i}, {0.4, 0}, 20), i));
  const auto drift = [](const Eigen::Ref<const Path>& o) {
    Path p = models::predict_linear(o, true);
    for (Eigen::Index k = 0; k < 12; ++k) p(k, 0) += 0.2 * static_cast<double>(k + 1);
    return p;
  };
  const auto cells = diagnostic_breakdown(evaluate(drift, {{"d", samples}}));
  double standing = 0.0, rest = 0.0;
  std::size_t standing_n = 0;
  for (const auto& c : cells) {
    if (!c.ade) continue;
    if (c.speed == SpeedClass::standing) {
      standing += *c.ade * c.count;
      standing_n += c.count;
    } else {
      rest = std::max(rest, *c.ade);
    }
  }
  EXPECT_EQ(standing_n, 20U);
  EXPECT_GT(standing / standing_n, rest);
}

TEST(Diagnostics, CellsMatchGroupByOracle) {
  const auto samples = constructed_corpus(9, 400);
  const auto drift = [](const Eigen::Ref<const Path>& o) {
    Path p = models::predict_linear(o);
    p.col(1).array() += 0.05;
    return p;
  };
  const auto report = evaluate(drift, {{"d", samples}}, 4);
  struct Acc {
    std::size_t n = 0;
    long double ade = 0, fde = 0;
  };
  std::map<std::pair<int, int>, Acc> oracle;
  for (const auto& s : samples) {
    const Path pred = drift(s.observed);
    double step = 0.0;
    for (Eigen::Index k = 1; k < 8; ++k) step += (s.observed.row(k) - s.observed.row(k - 1)).norm();
    const double speed = step / 7.0 / s.frame_period;
    const double r2 = analysis::combined_r_squared(s.full_window());
    const int sc = speed < 0.1 ? 0 : speed < 0.5 ? 1 : 2;
    const int band = r2 < 0.5 ? 0 : r2 <= 0.9 ? 1 : 2;
    Acc& a = oracle[{sc, band}];
    ++a.n;
    double sum = 0.0;
    for (Eigen::Index k = 0; k < 12; ++k) sum += (pred.row(k) - s.future->row(k)).norm();
    a.ade += sum / 12.0;
    a.fde += (pred.row(11) - s.future->row(11)).norm();
  }
  const auto cells = diagnostic_breakdown(report);
  ASSERT_EQ(cells.size(), 9U);
  std::size_t populated = 0;
  for (const auto& c : cells) {
    const auto it = oracle.find({static_cast<int>(c.speed), static_cast<int>(c.band)});
    if (it == oracle.end()) {
      EXPECT_EQ(c.count, 0U);
      EXPECT_FALSE(c.ade);
      continue;
    }
    ++populated;
    EXPECT_EQ(c.count, it->second.n);
    EXPECT_NEAR(*c.ade, static_cast<double>(it->second.ade / it->second.n), 1e-12);
    EXPECT_NEAR(*c.fde, static_cast<double>(it->second.fde / it->second.n), 1e-12);
  }
  EXPECT_GE(populated, 4U);
  EXPECT_EQ(diagnostics_csv(cells).rfind("speed_class,r2_band,count,ade,fde\n", 0), 0U);
}
