#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "trajkit/analysis.hpp"
#include "trajkit/synth.hpp"

using namespace trajkit;
using namespace trajkit::analysis;

namespace {

Tracklet from_path(const Path& p, std::int64_t id = 1) {
  std::vector<std::int64_t> frames;
  for (Eigen::Index i = 0; i < p.rows(); ++i) frames.push_back(10 * i);
  return Tracklet(id, frames, p);
}

Sample sample_from(const Path& window) {
  Sample s;
  s.observed = window.topRows(8);
  s.future = Path(window.bottomRows(window.rows() - 8));
  return s;
}

// Residual std of the degree-4 least-squares fit, solved via normal equations
// in long double.
double oracle_sigma(const Eigen::VectorXd& v) {
  using LD = long double;
  const Eigen::Index n = v.size();
  Eigen::Matrix<LD, Eigen::Dynamic, 5> V(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LD t = static_cast<LD>(i) / static_cast<LD>(n - 1);
    LD p = 1;
    for (int k = 0; k < 5; ++k, p *= t) V(i, k) = p;
  }
  const Eigen::Matrix<LD, Eigen::Dynamic, 1> y = v.cast<LD>();
  const Eigen::Matrix<LD, 5, 1> c = (V.transpose() * V).ldlt().solve(V.transpose() * y);
  const Eigen::Matrix<LD, Eigen::Dynamic, 1> r = V * c - y;
  const LD mean = r.mean();
  return static_cast<double>(std::sqrt((r.array() - mean).square().mean()));
}

}  // namespace

TEST(Histogram, ConstantVelocityMass) {
  Path w(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) w.row(i) << static_cast<double>(i), 0.0;
  const auto h = offset_histograms(std::vector<Sample>{sample_from(w)});
  EXPECT_EQ(h.dx.counts[static_cast<std::size_t>(h.dx.bin_of(1.0))], 19U);
  EXPECT_EQ(h.dy.counts[static_cast<std::size_t>(h.dy.bin_of(0.0))], 19U);
  EXPECT_EQ(h.dx.total(), 19U);
}

TEST(Histogram, StandingMassAtZero) {
  const Path w = Path::Constant(20, 2, 3.0);
  const auto h = offset_histograms(std::vector<Sample>{sample_from(w)});
  EXPECT_EQ(h.magnitude.counts[0], 19U);
}

TEST(Histogram, RandomWalkCountsEveryOffset) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> step(0.0, 1.5);
  std::vector<Sample> samples;
  for (int i = 0; i < 1000; ++i) {
    Path w(20, 2);
    w.row(0).setZero();
    for (Eigen::Index k = 1; k < 20; ++k) w.row(k) = w.row(k - 1) + Eigen::RowVector2d(step(rng), step(rng));
    samples.push_back(sample_from(w));
  }
  const auto h = offset_histograms(samples);
  EXPECT_EQ(h.dx.total(), 19U * 1000U);
  EXPECT_EQ(h.dy.total(), 19U * 1000U);
  EXPECT_EQ(h.magnitude.total(), 19U * 1000U);
}

TEST(Histogram, EdgesAndClamping) {
  const HistogramSpec spec{-1.0, 1.0, 4};
  Eigen::VectorXd v(5);
  v << -5.0, -1.0, 0.0, 0.99, 7.0;
  const Histogram h = make_histogram(v, spec);
  EXPECT_EQ(h.bin_left(0), -1.0);
  EXPECT_EQ(h.bin_right(3), 1.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 0, 1, 2}));
  EXPECT_THROW(make_histogram(v, {1.0, 1.0, 3}), Error);
  EXPECT_THROW(make_histogram(v, {0.0, 1.0, 0}), Error);
  EXPECT_THROW(offset_histograms(std::vector<Sample>{}), Error);
}

TEST(Smoothing, QuarticIsExact) {
  Path p(20, 2);
  const Eigen::VectorXd t = normalized_time(20);
  for (Eigen::Index i = 0; i < 20; ++i) p.row(i) << 2.0 * t[i], std::pow(t[i], 4);
  const auto r = fit_smoothing_poly(p);
  ASSERT_TRUE(r.fit);
  EXPECT_LT(r.fit->residual_sigma_x, 1e-9);
  EXPECT_LT(r.fit->residual_sigma_y, 1e-9);
  EXPECT_EQ(r.fit->poly.evaluate().rows(), 20);
}

TEST(Smoothing, AlternatingPerturbationMatchesOracle) {
  Path p(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) {
    p.row(i) << 0.4 * static_cast<double>(i) + (i % 2 ? 0.05 : -0.05), 0.3 * static_cast<double>(i);
  }
  const auto r = fit_smoothing_poly(p);
  ASSERT_TRUE(r.fit);
  EXPECT_NEAR(r.fit->residual_sigma_x, oracle_sigma(p.col(0)), 1e-12);
  EXPECT_NEAR(r.fit->residual_sigma_x, 0.05, 0.05 * 0.15);
}

TEST(Smoothing, ShortTrackletIsSkipped) {
  const auto r = fit_smoothing_poly(Path::Zero(4, 2));
  EXPECT_FALSE(r.fit);
  EXPECT_FALSE(r.skip_reason.empty());
}

TEST(Smoothing, ReproducesRandomLowDegreePolynomials) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  std::uniform_int_distribution<int> degree(0, 4), len(6, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = len(rng);
    const Eigen::VectorXd t = normalized_time(n);
    Path p = Path::Zero(n, 2);
    for (int axis = 0; axis < 2; ++axis) {
      const int d = degree(rng);
      for (int k = 0; k <= d; ++k) p.col(axis).array() += coef(rng) * t.array().pow(k);
    }
    const auto r = fit_smoothing_poly(p);
    ASSERT_TRUE(r.fit);
    EXPECT_LT(r.fit->residual_sigma_x, 1e-8);
    EXPECT_LT(r.fit->residual_sigma_y, 1e-8);
  }
}

TEST(Smoothing, SigmaIsTranslationInvariant) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 0.3);
  Path p(20, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
  Path q = p;
  q.rowwise() += Eigen::RowVector2d(40.0, -12.0);
  const auto a = fit_smoothing_poly(p), b = fit_smoothing_poly(q);
  EXPECT_NEAR(a.fit->residual_sigma_x, b.fit->residual_sigma_x, 1e-9);
  EXPECT_NEAR(a.fit->residual_sigma_y, b.fit->residual_sigma_y, 1e-9);
}

TEST(Linearity, LinearMotionScoresOne) {
  Path p(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i) p.row(i) << 1.0 + 0.5 * i, -2.0 * i;
  const auto s = linearity_score(p);
  EXPECT_NEAR(s.r2_x, 1.0, 1e-12);
  EXPECT_NEAR(s.r2_y, 1.0, 1e-12);
}

TEST(Linearity, ConstantAxisConvention) {
  Path p(5, 2);
  for (Eigen::Index i = 0; i < 5; ++i) p.row(i) << 3.0, static_cast<double>(i);
  const auto s = linearity_score(p);
  EXPECT_EQ(s.r2_x, 1.0);
  EXPECT_NEAR(s.r2_y, 1.0, 1e-12);
}

TEST(Linearity, ThreePointParabola) {
  Path p(3, 2);
  p << 0.0, 0.0, 0.25, 0.5, 1.0, 1.0;
  // Hand regression of x = t^2 on t = 0, 0.5, 1: SS_res = 1/24, SS_tot = 13/24.
  EXPECT_NEAR(linearity_score(p).r2_x, 12.0 / 13.0, 1e-12);
  EXPECT_THROW(linearity_score(Path::Zero(2, 2)), Error);
}

TEST(Linearity, AffineInvariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-100.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    Path p(15, 2);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
    Path q = p;
    const double sx = (trial % 2 ? -1.0 : 1.0) * scale(rng), sy = scale(rng);
    q.col(0) = (q.col(0).array() * sx + shift(rng)).matrix();
    q.col(1) = (q.col(1).array() * sy + shift(rng)).matrix();
    const auto a = linearity_score(p), b = linearity_score(q);
    EXPECT_NEAR(a.r2_x, b.r2_x, 1e-9);
    EXPECT_NEAR(a.r2_y, b.r2_y, 1e-9);
    EXPECT_GE(a.r2_x, 0.0);
    EXPECT_LE(a.r2_x, 1.0);
  }
}

TEST(Report, SingleDatasetOverallEqualsRow) {
  synth::SynthSpec spec;
  spec.count = 30;
  spec.noise = 0.02;
  spec.seed = 5;
  const Dataset d{"only.txt", synth::tracklets(synth::generate(spec)), {}};
  const auto rows = dataset_analysis_report({d});
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[0].name, kOverallRow);
  EXPECT_EQ(rows[0].sigma_x, rows[1].sigma_x);
  EXPECT_EQ(rows[0].sigma_y, rows[1].sigma_y);
  EXPECT_EQ(rows[0].r2_x, rows[1].r2_x);
  EXPECT_EQ(rows[0].r2_y, rows[1].r2_y);
}

TEST(Report, IneligibleDatasetHasNullFields) {
  Path p(2, 2);
  p << 0, 0, 1, 1;
  const Dataset d{"short.txt", {from_path(p)}, {}};
  const auto rows = dataset_analysis_report({d});
  EXPECT_FALSE(rows[1].sigma_x);
  EXPECT_FALSE(rows[1].r2_x);
  EXPECT_NE(report_csv(rows).find("short.txt,,,,"), std::string::npos);
}

TEST(Report, NoiseEstimateForNoisyLines) {
  synth::SynthSpec spec;
  spec.count = 200;
  spec.noise = 0.05;
  spec.seed = 21;
  spec.mix = {1.0, 0.0, 0.0, 0.0};
  const Dataset d{"lines.txt", synth::tracklets(synth::generate(spec)), {}};
  const auto rows = dataset_analysis_report({d}, 4);
  EXPECT_GE(*rows[0].sigma_x, 0.04);
  EXPECT_LE(*rows[0].sigma_x, 0.06);
  EXPECT_GE(*rows[0].sigma_y, 0.04);
  EXPECT_LE(*rows[0].sigma_y, 0.06);
}

TEST(Report, ThreadCountDoesNotChangeOutput) {
  synth::SynthSpec spec;
  spec.count = 150;
  spec.noise = 0.03;
  spec.seed = 6;
  const Dataset a{"a.txt", synth::tracklets(synth::generate(spec)), {}};
  spec.seed = 7;
  const Dataset b{"b.txt", synth::tracklets(synth::generate(spec)), {}};
  EXPECT_EQ(report_csv(dataset_analysis_report({a, b}, 1)),
            report_csv(dataset_analysis_report({a, b}, 8)));
}
