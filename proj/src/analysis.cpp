#include "trajkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "trajkit/io_util.hpp"
#include "trajkit/parallel.hpp"

namespace trajkit::analysis {

void HistogramSpec::validate() const {
  if (!(max > min)) fail(ErrorKind::config, "histogram max must exceed min");
  if (bin_count < 1) fail(ErrorKind::config, "histogram needs at least one bin");
}

double Histogram::bin_left(Eigen::Index i) const {
  return spec.min + (spec.max - spec.min) * static_cast<double>(i) /
                        static_cast<double>(spec.bin_count);
}

double Histogram::bin_right(Eigen::Index i) const { return bin_left(i + 1); }

Eigen::Index Histogram::bin_of(double value) const {
  const double width = (spec.max - spec.min) / static_cast<double>(spec.bin_count);
  const double pos = std::floor((value - spec.min) / width);
  if (!(pos >= 0.0)) return 0;
  return std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), spec.bin_count - 1);
}

std::size_t Histogram::total() const {
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

Histogram make_histogram(const Eigen::Ref<const Eigen::VectorXd>& values,
                         const HistogramSpec& spec) {
  spec.validate();
  Histogram h{spec, std::vector<std::size_t>(static_cast<std::size_t>(spec.bin_count), 0)};
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    ++h.counts[static_cast<std::size_t>(h.bin_of(values[i]))];
  }
  return h;
}

namespace {

OffsetHistograms histograms_of(const std::vector<Path>& offsets,
                               const OffsetHistogramSpecs& specs) {
  Eigen::Index total = 0;
  for (const auto& o : offsets) total += o.rows();
  Eigen::VectorXd dx(total), dy(total), mag(total);
  Eigen::Index at = 0;
  for (const auto& o : offsets) {
    dx.segment(at, o.rows()) = o.col(0);
    dy.segment(at, o.rows()) = o.col(1);
    mag.segment(at, o.rows()) = o.rowwise().norm();
    at += o.rows();
  }
  return {make_histogram(dx, specs.dx), make_histogram(dy, specs.dy),
          make_histogram(mag, specs.magnitude)};
}

struct AxisSums {
  double ss_res = 0.0;
  double ss_tot = 0.0;
};

AxisSums line_fit_sums(const Eigen::Ref<const Eigen::VectorXd>& t,
                       const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double t_mean = t.mean();
  const double v_mean = v.mean();
  const Eigen::VectorXd tc = t.array() - t_mean;
  const Eigen::VectorXd vc = v.array() - v_mean;
  const double stt = tc.squaredNorm();
  const double slope = stt > 0.0 ? tc.dot(vc) / stt : 0.0;
  return {(vc - slope * tc).squaredNorm(), vc.squaredNorm()};
}

double r2_from_sums(const AxisSums& s) {
  if (s.ss_tot < kZeroVariance) {
    return s.ss_res < kZeroVariance ? 1.0 : 0.0;
  }
  return std::clamp(1.0 - s.ss_res / s.ss_tot, 0.0, 1.0);
}

double population_std(const Eigen::Ref<const Eigen::VectorXd>& r) {
  return std::sqrt((r.array() - r.mean()).square().mean());
}

}  // namespace

OffsetHistograms offset_histograms(const std::vector<Sample>& samples,
                                   const OffsetHistogramSpecs& specs) {
  if (samples.empty()) fail(ErrorKind::invalid_input, "offset histograms need samples");
  std::vector<Path> offsets;
  offsets.reserve(samples.size());
  for (const auto& s : samples) {
    offsets.push_back(positions_to_offsets(s.future ? s.full_window() : s.observed).offsets);
  }
  return histograms_of(offsets, specs);
}

OffsetHistograms offset_histograms(const std::vector<Tracklet>& tracklets,
                                   const OffsetHistogramSpecs& specs) {
  if (tracklets.empty()) fail(ErrorKind::invalid_input, "offset histograms need tracklets");
  std::vector<Path> offsets;
  offsets.reserve(tracklets.size());
  for (const auto& t : tracklets) offsets.push_back(positions_to_offsets(t.positions()).offsets);
  return histograms_of(offsets, specs);
}

Eigen::VectorXd normalized_time(Eigen::Index n) {
  if (n < 2) return Eigen::VectorXd::Zero(n);
  return Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
}

Path PolynomialFit::evaluate_at_indices(const Eigen::Ref<const Eigen::VectorXd>& indices) const {
  const double scale = length > 1 ? 1.0 / static_cast<double>(length - 1) : 1.0;
  const Eigen::VectorXd t = indices * scale;
  Path out = Path::Zero(indices.size(), 2);
  // Horner, highest power first.
  for (Eigen::Index k = coefficients_x.size() - 1; k >= 0; --k) {
    out.col(0) = (out.col(0).array() * t.array() + coefficients_x[k]).matrix();
    out.col(1) = (out.col(1).array() * t.array() + coefficients_y[k]).matrix();
  }
  return out;
}

Path PolynomialFit::evaluate() const {
  return evaluate_at_indices(
      Eigen::VectorXd::LinSpaced(length, 0.0, static_cast<double>(length - 1)));
}

PolynomialFit fit_polynomial(const Eigen::Ref<const Path>& path, int degree) {
  if (degree < 0 || path.rows() < degree + 1) {
    fail(ErrorKind::invalid_input, "polynomial fit needs at least degree+1 points");
  }
  const Eigen::Index n = path.rows();
  const Eigen::VectorXd t = normalized_time(n);
  Eigen::MatrixXd vander(n, degree + 1);
  vander.col(0).setOnes();
  for (int k = 1; k <= degree; ++k) {
    vander.col(k) = vander.col(k - 1).cwiseProduct(t);
  }
  const auto qr = vander.colPivHouseholderQr();
  const Eigen::MatrixXd coeffs = qr.solve(Eigen::MatrixXd(path));
  return {coeffs.col(0), coeffs.col(1), n};
}

SmoothingResult fit_smoothing_poly(const Eigen::Ref<const Path>& path) {
  if (path.rows() < kMinSmoothingLength) {
    return {std::nullopt, "tracklet shorter than " + std::to_string(kMinSmoothingLength)};
  }
  SmoothedTracklet s;
  s.poly = fit_polynomial(path, kSmoothingDegree);
  const Path residual = s.poly.evaluate() - path;
  s.residual_sigma_x = population_std(residual.col(0));
  s.residual_sigma_y = population_std(residual.col(1));
  return {std::move(s), {}};
}

double line_r_squared(const Eigen::Ref<const Eigen::VectorXd>& t,
                      const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (t.size() != v.size() || t.size() < 2) {
    fail(ErrorKind::invalid_input, "line fit needs matching series of length >= 2");
  }
  return r2_from_sums(line_fit_sums(t, v));
}

LinearityScore linearity_score(const Eigen::Ref<const Path>& path) {
  if (path.rows() < 3) fail(ErrorKind::invalid_input, "linearity score needs >= 3 positions");
  const Eigen::VectorXd t = normalized_time(path.rows());
  return {line_r_squared(t, path.col(0)), line_r_squared(t, path.col(1))};
}

double combined_r_squared(const Eigen::Ref<const Path>& path) {
  if (path.rows() < 3) fail(ErrorKind::invalid_input, "linearity score needs >= 3 positions");
  const Eigen::VectorXd t = normalized_time(path.rows());
  const AxisSums x = line_fit_sums(t, path.col(0));
  const AxisSums y = line_fit_sums(t, path.col(1));
  return r2_from_sums({x.ss_res + y.ss_res, x.ss_tot + y.ss_tot});
}

namespace {

struct TrackletStats {
  bool fitted = false;
  double n = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  bool scored = false;
  LinearityScore r2;
};

struct Accumulator {
  std::size_t tracklets = 0;
  std::size_t fitted = 0;
  double weight = 0.0;
  double sum_var_x = 0.0;
  double sum_var_y = 0.0;
  std::size_t scored = 0;
  double sum_r2_x = 0.0;
  double sum_r2_y = 0.0;

  void add(const TrackletStats& s) {
    ++tracklets;
    if (s.fitted) {
      ++fitted;
      weight += s.n;
      sum_var_x += s.n * s.var_x;
      sum_var_y += s.n * s.var_y;
    }
    if (s.scored) {
      ++scored;
      sum_r2_x += s.r2.r2_x;
      sum_r2_y += s.r2.r2_y;
    }
  }

  AnalysisRow row(std::string name) const {
    AnalysisRow r;
    r.name = std::move(name);
    r.tracklets = tracklets;
    r.fitted = fitted;
    if (fitted > 0) {
      r.sigma_x = std::sqrt(sum_var_x / weight);
      r.sigma_y = std::sqrt(sum_var_y / weight);
    }
    if (scored > 0) {
      r.r2_x = sum_r2_x / static_cast<double>(scored);
      r.r2_y = sum_r2_y / static_cast<double>(scored);
    }
    return r;
  }
};

}  // namespace

std::vector<AnalysisRow> dataset_analysis_report(const std::vector<Dataset>& datasets,
                                                 unsigned threads) {
  std::vector<const Tracklet*> all;
  for (const auto& ds : datasets) {
    for (const auto& t : ds.tracklets) all.push_back(&t);
  }
  std::vector<TrackletStats> stats(all.size());
  parallel_for(all.size(), threads, [&](std::size_t i) {
    const Path& p = all[i]->positions();
    TrackletStats& s = stats[i];
    auto fit = fit_smoothing_poly(p);
    if (fit.fit) {
      s.fitted = true;
      s.n = static_cast<double>(p.rows());
      s.var_x = fit.fit->residual_sigma_x * fit.fit->residual_sigma_x;
      s.var_y = fit.fit->residual_sigma_y * fit.fit->residual_sigma_y;
    }
    if (p.rows() >= 3) {
      s.scored = true;
      s.r2 = linearity_score(p);
    }
  });

  std::vector<AnalysisRow> rows;
  Accumulator overall;
  std::size_t at = 0;
  std::vector<AnalysisRow> per_dataset;
  for (const auto& ds : datasets) {
    Accumulator acc;
    for (std::size_t k = 0; k < ds.tracklets.size(); ++k, ++at) {
      acc.add(stats[at]);
      overall.add(stats[at]);
    }
    per_dataset.push_back(acc.row(ds.name));
  }
  rows.push_back(overall.row(kOverallRow));
  rows.insert(rows.end(), per_dataset.begin(), per_dataset.end());
  return rows;
}

std::string report_csv(const std::vector<AnalysisRow>& rows) {
  std::ostringstream out;
  out << "name,sigma_x,sigma_y,r2_x,r2_y\n";
  for (const auto& r : rows) {
    out << r.name << ',' << format_optional(r.sigma_x) << ',' << format_optional(r.sigma_y)
        << ',' << format_optional(r.r2_x) << ',' << format_optional(r.r2_y) << '\n';
  }
  return out.str();
}

std::string histogram_csv(const Histogram& histogram) {
  std::ostringstream out;
  out << "bin_left,bin_right,count\n";
  for (Eigen::Index i = 0; i < histogram.spec.bin_count; ++i) {
    out << format_double(histogram.bin_left(i)) << ',' << format_double(histogram.bin_right(i))
        << ',' << histogram.counts[static_cast<std::size_t>(i)] << '\n';
  }
  return out.str();
}

}  // namespace trajkit::analysis
