#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trajkit/ingestion.hpp"
#include "trajkit/types.hpp"

namespace trajkit::analysis {

struct HistogramSpec {
  double min = 0.0;
  double max = 1.0;
  Eigen::Index bin_count = 1;

  void validate() const;
};

/// Fixed-width histogram. Values below min (above max) are counted in the
/// first (last) bin so the counts always sum to the number of inputs.
struct Histogram {
  HistogramSpec spec;
  std::vector<std::size_t> counts;

  double bin_left(Eigen::Index i) const;
  double bin_right(Eigen::Index i) const;
  Eigen::Index bin_of(double value) const;
  std::size_t total() const;
};

Histogram make_histogram(const Eigen::Ref<const Eigen::VectorXd>& values,
                         const HistogramSpec& spec);

struct OffsetHistogramSpecs {
  HistogramSpec dx{-2.0, 2.0, 80};
  HistogramSpec dy{-2.0, 2.0, 80};
  HistogramSpec magnitude{0.0, 2.5, 50};
};

struct OffsetHistograms {
  Histogram dx;
  Histogram dy;
  Histogram magnitude;
};

/// Counts every consecutive offset of each sample's observed+future window.
OffsetHistograms offset_histograms(const std::vector<Sample>& samples,
                                   const OffsetHistogramSpecs& specs = {});

/// Same, over whole tracklets (each offset counted once).
OffsetHistograms offset_histograms(const std::vector<Tracklet>& tracklets,
                                   const OffsetHistogramSpecs& specs = {});

/// Sample times 0..n-1 rescaled to [0, 1].
Eigen::VectorXd normalized_time(Eigen::Index n);

/// Per-axis least-squares polynomial over normalized time. Coefficients are in
/// ascending powers.
struct PolynomialFit {
  Eigen::VectorXd coefficients_x;
  Eigen::VectorXd coefficients_y;
  Eigen::Index length = 0;  // number of fitted samples

  /// Evaluates at (possibly fractional or out-of-range) sample indices.
  Path evaluate_at_indices(const Eigen::Ref<const Eigen::VectorXd>& indices) const;
  Path evaluate() const;
};

PolynomialFit fit_polynomial(const Eigen::Ref<const Path>& path, int degree);

inline constexpr int kSmoothingDegree = 4;
inline constexpr Eigen::Index kMinSmoothingLength = 6;

struct SmoothedTracklet {
  PolynomialFit poly;
  double residual_sigma_x = 0.0;  // population std of fit - truth
  double residual_sigma_y = 0.0;
};

struct SmoothingResult {
  std::optional<SmoothedTracklet> fit;
  std::string skip_reason;
};

SmoothingResult fit_smoothing_poly(const Eigen::Ref<const Path>& path);
inline SmoothingResult fit_smoothing_poly(const Tracklet& t) {
  return fit_smoothing_poly(t.positions());
}

struct LinearityScore {
  double r2_x = 0.0;
  double r2_y = 0.0;
};

/// R² of a least-squares line through (t, v). A (near) constant series scores
/// 1 when the line explains it and 0 otherwise.
double line_r_squared(const Eigen::Ref<const Eigen::VectorXd>& t,
                      const Eigen::Ref<const Eigen::VectorXd>& v);

LinearityScore linearity_score(const Eigen::Ref<const Path>& path);
inline LinearityScore linearity_score(const Tracklet& t) {
  return linearity_score(t.positions());
}

/// Both axes pooled: 1 - (SSres_x + SSres_y) / (SStot_x + SStot_y). Unlike the
/// per-axis scores this does not depend on the direction of travel.
double combined_r_squared(const Eigen::Ref<const Path>& path);

inline constexpr double kZeroVariance = 1e-12;

struct AnalysisRow {
  std::string name;
  std::size_t tracklets = 0;
  std::size_t fitted = 0;  // tracklets long enough for the smoothing fit
  std::optional<double> sigma_x;
  std::optional<double> sigma_y;
  std::optional<double> r2_x;
  std::optional<double> r2_y;
};

inline constexpr const char* kOverallRow = "Overall";

/// One row per dataset (input order) preceded by an "Overall" row over every
/// tracklet. Sigmas pool the residual variance of all fitted tracklets.
std::vector<AnalysisRow> dataset_analysis_report(const std::vector<Dataset>& datasets,
                                                 unsigned threads = 1);

std::string report_csv(const std::vector<AnalysisRow>& rows);
std::string histogram_csv(const Histogram& histogram);

}  // namespace trajkit::analysis
