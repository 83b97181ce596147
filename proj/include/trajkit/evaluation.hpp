#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trajkit/types.hpp"

namespace trajkit::evaluation {

/// Mean Euclidean distance over all predicted steps.
double ade(const Eigen::Ref<const Path>& pred, const Eigen::Ref<const Path>& truth);
/// Euclidean distance at the last step.
double fde(const Eigen::Ref<const Path>& pred, const Eigen::Ref<const Path>& truth);

enum class SpeedClass { standing, slow, walking };
enum class R2Band { low, mid, high };

inline constexpr double kStandingSpeed = 0.1;  // m/s
inline constexpr double kWalkingSpeed = 0.5;

const char* to_string(SpeedClass c);
const char* to_string(R2Band b);
SpeedClass classify_speed(double speed);
R2Band classify_r2(double r2);

/// Mean step length of the observed window divided by the frame period.
double mean_observed_speed(const Sample& sample);

struct SampleRecord {
  std::string dataset;
  std::int64_t pedestrian_id = 0;
  std::int64_t start_frame = 0;
  double ade = 0.0;
  double fde = 0.0;
  double mean_speed = 0.0;
  double r2 = 0.0;  // combined R^2 of the full ground-truth window
};

struct ReportRow {
  std::string name;
  std::size_t samples = 0;
  std::optional<double> ade;
  std::optional<double> fde;
  std::optional<double> overall;
};

inline constexpr const char* kAggregateRow = "Overall";

/// rows[0] is the sample-weighted aggregate, then one row per group in input
/// order. Records are sorted by (dataset, pedestrian, start frame).
struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<SampleRecord> records;
};

struct SampleGroup {
  std::string name;
  std::vector<Sample> samples;
};

using PredictFn = std::function<Path(const Eigen::Ref<const Path>&)>;

/// Samples are predicted in parallel; all reductions run in sorted record order
/// so the report does not depend on `threads` or on input order.
EvalReport evaluate(const PredictFn& predict, const std::vector<SampleGroup>& groups,
                    unsigned threads = 1);

struct DiagnosticCell {
  SpeedClass speed = SpeedClass::standing;
  R2Band band = R2Band::low;
  std::size_t count = 0;
  std::optional<double> ade;
  std::optional<double> fde;
};

/// All nine speed x R^2 cells, empty ones with null means.
std::vector<DiagnosticCell> diagnostic_breakdown(const EvalReport& report);

std::string report_csv(const EvalReport& report);
std::string diagnostics_csv(const std::vector<DiagnosticCell>& cells);
std::string records_csv(const EvalReport& report);

}  // namespace trajkit::evaluation
