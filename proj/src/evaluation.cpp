#include "trajkit/evaluation.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "trajkit/analysis.hpp"
#include "trajkit/io_util.hpp"
#include "trajkit/parallel.hpp"

namespace trajkit::evaluation {
namespace {

void check_pair(const Eigen::Ref<const Path>& pred, const Eigen::Ref<const Path>& truth) {
  if (pred.rows() != truth.rows()) {
    fail(ErrorKind::invalid_input, "prediction has " + std::to_string(pred.rows()) +
                                       " steps, ground truth " + std::to_string(truth.rows()));
  }
  if (truth.rows() == 0) fail(ErrorKind::invalid_input, "empty prediction");
}

bool record_less(const SampleRecord& a, const SampleRecord& b) {
  return std::tie(a.dataset, a.pedestrian_id, a.start_frame, a.ade, a.fde) <
         std::tie(b.dataset, b.pedestrian_id, b.start_frame, b.ade, b.fde);
}

ReportRow reduce(std::string name, const std::vector<const SampleRecord*>& records) {
  ReportRow row{std::move(name), records.size(), {}, {}, {}};
  if (records.empty()) return row;
  double sum_ade = 0.0, sum_fde = 0.0;
  for (const SampleRecord* r : records) {
    sum_ade += r->ade;
    sum_fde += r->fde;
  }
  const double n = static_cast<double>(records.size());
  row.ade = sum_ade / n;
  row.fde = sum_fde / n;
  row.overall = (*row.ade + *row.fde) / 2.0;
  return row;
}

}  // namespace

double ade(const Eigen::Ref<const Path>& pred, const Eigen::Ref<const Path>& truth) {
  check_pair(pred, truth);
  return (pred - truth).rowwise().norm().mean();
}

double fde(const Eigen::Ref<const Path>& pred, const Eigen::Ref<const Path>& truth) {
  check_pair(pred, truth);
  const Eigen::Index last = truth.rows() - 1;
  return (pred.row(last) - truth.row(last)).norm();
}

const char* to_string(SpeedClass c) {
  switch (c) {
    case SpeedClass::standing: return "standing";
    case SpeedClass::slow: return "slow";
    case SpeedClass::walking: return "walking";
  }
  return "?";
}

const char* to_string(R2Band b) {
  switch (b) {
    case R2Band::low: return "<0.5";
    case R2Band::mid: return "0.5-0.9";
    case R2Band::high: return ">0.9";
  }
  return "?";
}

SpeedClass classify_speed(double speed) {
  if (speed < kStandingSpeed) return SpeedClass::standing;
  if (speed < kWalkingSpeed) return SpeedClass::slow;
  return SpeedClass::walking;
}

R2Band classify_r2(double r2) {
  if (r2 < 0.5) return R2Band::low;
  if (r2 <= 0.9) return R2Band::mid;
  return R2Band::high;
}

double mean_observed_speed(const Sample& sample) {
  if (sample.observed.rows() < 2) return 0.0;
  const Path offsets = positions_to_offsets(sample.observed).offsets;
  return offsets.rowwise().norm().mean() / sample.frame_period;
}

EvalReport evaluate(const PredictFn& predict, const std::vector<SampleGroup>& groups,
                    unsigned threads) {
  std::vector<const Sample*> flat;
  for (const auto& g : groups) {
    for (const auto& s : g.samples) {
      if (!s.future) fail(ErrorKind::invalid_input, "evaluation sample without ground truth");
      flat.push_back(&s);
    }
  }
  EvalReport report;
  report.records.resize(flat.size());
  std::vector<std::string> group_of(flat.size());
  std::size_t at = 0;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.samples.size(); ++i) group_of[at++] = g.name;
  }
  parallel_for(flat.size(), threads, [&](std::size_t i) {
    const Sample& s = *flat[i];
    const Path pred = predict(s.observed);
    SampleRecord& r = report.records[i];
    r.dataset = group_of[i];
    r.pedestrian_id = s.pedestrian_id;
    r.start_frame = s.start_frame;
    r.ade = ade(pred, *s.future);
    r.fde = fde(pred, *s.future);
    r.mean_speed = mean_observed_speed(s);
    r.r2 = analysis::combined_r_squared(s.full_window());
  });
  std::sort(report.records.begin(), report.records.end(), record_less);

  std::vector<const SampleRecord*> all;
  for (const auto& r : report.records) all.push_back(&r);
  report.rows.push_back(reduce(kAggregateRow, all));
  for (const auto& g : groups) {
    std::vector<const SampleRecord*> members;
    for (const auto& r : report.records) {
      if (r.dataset == g.name) members.push_back(&r);
    }
    report.rows.push_back(reduce(g.name, members));
  }
  return report;
}

std::vector<DiagnosticCell> diagnostic_breakdown(const EvalReport& report) {
  std::vector<DiagnosticCell> cells;
  for (SpeedClass sc : {SpeedClass::standing, SpeedClass::slow, SpeedClass::walking}) {
    for (R2Band band : {R2Band::low, R2Band::mid, R2Band::high}) {
      std::vector<const SampleRecord*> members;
      for (const auto& r : report.records) {
        if (classify_speed(r.mean_speed) == sc && classify_r2(r.r2) == band) members.push_back(&r);
      }
      const ReportRow row = reduce("", members);
      cells.push_back({sc, band, row.samples, row.ade, row.fde});
    }
  }
  return cells;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "# aggregate=sample_weighted_mean\n"
      << "dataset,samples,ade,fde,overall\n";
  for (const auto& row : report.rows) {
    out << row.name << ',' << row.samples << ',' << format_optional(row.ade) << ','
        << format_optional(row.fde) << ',' << format_optional(row.overall) << '\n';
  }
  return out.str();
}

std::string diagnostics_csv(const std::vector<DiagnosticCell>& cells) {
  std::ostringstream out;
  out << "speed_class,r2_band,count,ade,fde\n";
  for (const auto& c : cells) {
    out << to_string(c.speed) << ',' << to_string(c.band) << ',' << c.count << ','
        << format_optional(c.ade) << ',' << format_optional(c.fde) << '\n';
  }
  return out.str();
}

std::string records_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "dataset,pedestrian_id,start_frame,ade,fde,mean_speed,r2\n";
  for (const auto& r : report.records) {
    out << r.dataset << ',' << r.pedestrian_id << ',' << r.start_frame << ','
        << format_double(r.ade) << ',' << format_double(r.fde) << ','
        << format_double(r.mean_speed) << ',' << format_double(r.r2) << '\n';
  }
  return out.str();
}

}  // namespace trajkit::evaluation
