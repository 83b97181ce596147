#include "trajkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "trajkit/io_util.hpp"

namespace trajkit::synth {
namespace {

constexpr std::array<Motion, 4> kMotions = {Motion::line, Motion::arc, Motion::stop_and_go,
                                            Motion::standing};

std::array<std::size_t, 4> allocate(const SynthSpec& spec) {
  const std::array<double, 4> w = {spec.mix.line, spec.mix.arc, spec.mix.stop_and_go,
                                   spec.mix.standing};
  const double total = w[0] + w[1] + w[2] + w[3];
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> remainder{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = static_cast<double>(spec.count) * w[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    used += counts[i];
  }
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; used < spec.count; ++k, ++used) ++counts[order[k % 4]];
  return counts;
}

}  // namespace

const char* to_string(Motion m) {
  switch (m) {
    case Motion::line: return "line";
    case Motion::arc: return "arc";
    case Motion::stop_and_go: return "stop_and_go";
    case Motion::standing: return "standing";
  }
  return "?";
}

Motion parse_motion(const std::string& text) {
  for (Motion m : kMotions) {
    if (text == to_string(m)) return m;
  }
  fail(ErrorKind::config, "unknown motion class '" + text + "'");
}

const char* file_name(Motion m) {
  switch (m) {
    case Motion::line: return "lines.txt";
    case Motion::arc: return "arcs.txt";
    case Motion::stop_and_go: return "stop_and_go.txt";
    case Motion::standing: return "standing.txt";
  }
  return "?";
}

MotionMix parse_mix(const std::string& text) {
  MotionMix mix{0.0, 0.0, 0.0, 0.0};
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorKind::config, "motion mix entry '" + item + "' lacks '='");
    const auto w = parse_double(item.substr(eq + 1));
    if (!w || *w < 0.0) fail(ErrorKind::config, "bad weight in motion mix entry '" + item + "'");
    switch (parse_motion(item.substr(0, eq))) {
      case Motion::line: mix.line = *w; break;
      case Motion::arc: mix.arc = *w; break;
      case Motion::stop_and_go: mix.stop_and_go = *w; break;
      case Motion::standing: mix.standing = *w; break;
    }
  }
  return mix;
}

void SynthSpec::validate() const {
  if (count < 1) fail(ErrorKind::config, "synth count must be >= 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) fail(ErrorKind::config, "noise must be >= 0");
  if (length < 2) fail(ErrorKind::config, "synth length must be >= 2");
  if (frame_stride < 1) fail(ErrorKind::config, "frame stride must be >= 1");
  const double total = mix.line + mix.arc + mix.stop_and_go + mix.standing;
  if (!(total > 0.0)) fail(ErrorKind::config, "motion mix weights sum to zero");
}

std::vector<Generated> generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> start(-10.0, 10.0);
  std::uniform_real_distribution<double> speed(0.8, 1.6);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> turn(0.2, 0.5);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Eigen::Index n = spec.length;
  const double dt = spec.frame_period;

  std::vector<std::int64_t> frames(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) frames[static_cast<std::size_t>(k)] = k * spec.frame_stride;

  const auto counts = allocate(spec);
  std::vector<Generated> out;
  out.reserve(spec.count);
  std::int64_t id = 1;
  for (std::size_t c = 0; c < kMotions.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i, ++id) {
      const Motion motion = kMotions[c];
      const double x0 = start(rng), y0 = start(rng);
      double v = 0.0, th = 0.0, w = 0.0;
      Eigen::Index stop_start = 0, stop_length = 0;
      if (motion != Motion::standing) {
        v = speed(rng);
        th = heading(rng);
      }
      if (motion == Motion::arc) {
        w = turn(rng);
        if (rng() & 1U) w = -w;
      }
      if (motion == Motion::stop_and_go) {
        const Eigen::Index hi = std::max<Eigen::Index>(1, std::min<Eigen::Index>(14, n - 2));
        stop_start = std::uniform_int_distribution<Eigen::Index>(std::min<Eigen::Index>(3, hi), hi)(rng);
        stop_length = std::uniform_int_distribution<Eigen::Index>(3, 6)(rng);
      }
      Path clean(n, 2);
      clean.row(0) << x0, y0;
      for (Eigen::Index k = 1; k < n; ++k) {
        switch (motion) {
          case Motion::line:
            clean.row(k) << x0 + v * std::cos(th) * k * dt, y0 + v * std::sin(th) * k * dt;
            break;
          case Motion::arc: {
            const double a = th + w * static_cast<double>(k) * dt;
            clean.row(k) << x0 + v / w * (std::sin(a) - std::sin(th)),
                y0 - v / w * (std::cos(a) - std::cos(th));
            break;
          }
          case Motion::stop_and_go: {
            const bool stopped = k >= stop_start && k < stop_start + stop_length;
            const double step = stopped ? 0.0 : v * dt;
            clean.row(k) = clean.row(k - 1) + step * Eigen::RowVector2d(std::cos(th), std::sin(th));
            break;
          }
          case Motion::standing:
            clean.row(k) = clean.row(0);
            break;
        }
      }
      Path noisy = clean;
      if (spec.noise > 0.0) {
        for (Eigen::Index k = 0; k < n; ++k) {
          noisy(k, 0) += spec.noise * noise(rng);
          noisy(k, 1) += spec.noise * noise(rng);
        }
      }
      out.push_back({motion, id, x0, y0, v, th, w, stop_start, stop_length, clean,
                     Tracklet(id, frames, noisy, spec.frame_period)});
    }
  }
  return out;
}

std::vector<Tracklet> tracklets(const std::vector<Generated>& corpus) {
  std::vector<Tracklet> out;
  out.reserve(corpus.size());
  for (const auto& g : corpus) out.push_back(g.tracklet);
  return out;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<Generated>& corpus) {
  for (Motion m : kMotions) {
    std::ostringstream data;
    bool any = false;
    for (const auto& g : corpus) {
      if (g.motion != m) continue;
      any = true;
      const Tracklet& t = g.tracklet;
      for (Eigen::Index k = 0; k < t.size(); ++k) {
        data << t.frames()[static_cast<std::size_t>(k)] << ' ' << t.pedestrian_id() << ' '
             << format_double(t.positions()(k, 0)) << ' ' << format_double(t.positions()(k, 1))
             << '\n';
      }
    }
    if (any) write_file_atomic(dir / file_name(m), data.str());
  }
  std::ostringstream params;
  params << "pedestrian_id,motion,start_x,start_y,speed,heading,turn_rate,stop_start,stop_length\n";
  for (const auto& g : corpus) {
    params << g.pedestrian_id << ',' << to_string(g.motion) << ',' << format_double(g.start_x)
           << ',' << format_double(g.start_y) << ',' << format_double(g.speed) << ','
           << format_double(g.heading) << ',' << format_double(g.turn_rate) << ','
           << g.stop_start << ',' << g.stop_length << '\n';
  }
  write_file_atomic(dir / "generator_params.csv", params.str());
}

}  // namespace trajkit::synth
