#include "sonarsnoop/sonar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sonarsnoop/patterns.hpp"

namespace sonarsnoop {

DeviceGeometry DeviceGeometry::standard() {
  DeviceGeometry g;
  g.set_grid({24.0, 30.0}, 22.0);
  g.mic_bottom = {2.0, 85.0};
  g.speaker_bottom = {2.0, 89.0};
  g.mic_top = {13.0, 2.5};
  g.speaker_top = {17.0, 2.5};
  return g;
}

void DeviceGeometry::set_grid(Point origin, double pitch_mm) {
  for (int i = 0; i < 9; ++i)
    grid[static_cast<std::size_t>(i)] = {origin.x + (i % 3) * pitch_mm, origin.y + (i / 3) * pitch_mm};
}

double DeviceGeometry::pitch() const { return grid[1].x - grid[0].x; }

void DeviceGeometry::validate() const {
  if (width_mm <= 0 || height_mm <= 0) throw ConfigError("geometry: face size must be positive");
  auto inside = [&](Point p, const char* what) {
    if (p.x < 0 || p.x > width_mm || p.y < 0 || p.y > height_mm)
      throw ConfigError(std::string("geometry: ") + what + " lies outside the device face");
  };
  inside(speaker_top, "top speaker");
  inside(speaker_bottom, "bottom speaker");
  inside(mic_top, "top mic");
  inside(mic_bottom, "bottom mic");
  for (const Point& p : grid) inside(p, "grid point");
  const double pitch_x = grid[1].x - grid[0].x;
  if (pitch_x <= 0) throw ConfigError("geometry: grid pitch must be positive");
  for (int i = 0; i < 9; ++i) {
    const Point expect{grid[0].x + (i % 3) * pitch_x, grid[0].y + (i / 3) * pitch_x};
    if (distance(expect, grid[static_cast<std::size_t>(i)]) > 1e-6)
      throw ConfigError("geometry: grid points must form an equally spaced 3x3 lattice");
  }
}

ReflectorPath::ReflectorPath(std::vector<Keyframe> keyframes, double gain)
    : keys_(std::move(keyframes)), gain_(gain) {
  if (keys_.empty()) throw SimulationError("reflector path needs at least one keyframe");
  for (std::size_t i = 1; i < keys_.size(); ++i)
    if (keys_[i].time < keys_[i - 1].time)
      throw SimulationError("reflector path keyframes must be time-ordered");
}

double ReflectorPath::start_time() const { return keys_.empty() ? 0.0 : keys_.front().time; }
double ReflectorPath::end_time() const { return keys_.empty() ? 0.0 : keys_.back().time; }

bool ReflectorPath::defined_at(double t) const {
  return !keys_.empty() && t >= start_time() - 1e-12 && t <= end_time() + 1e-12;
}

Point ReflectorPath::at(double t) const {
  if (!defined_at(t)) throw SimulationError("reflector path undefined at t = " + std::to_string(t));
  auto it = std::upper_bound(keys_.begin(), keys_.end(), t,
                             [](double v, const Keyframe& k) { return v < k.time; });
  if (it == keys_.begin()) return keys_.front().position;
  if (it == keys_.end()) return keys_.back().position;
  const Keyframe& a = *(it - 1);
  const Keyframe& b = *it;
  const double span = b.time - a.time;
  return span <= 0 ? b.position : lerp(a.position, b.position, (t - a.time) / span);
}

void ReflectorPath::append(const ReflectorPath& next) {
  if (keys_.empty()) {
    *this = next;
    return;
  }
  const double offset = end_time() - next.start_time();
  for (const Keyframe& k : next.keys_) keys_.push_back({k.time + offset, k.position});
}

void ReflectorPath::hold(double seconds) {
  if (keys_.empty()) throw SimulationError("cannot extend an empty path");
  if (seconds > 0) keys_.push_back({end_time() + seconds, keys_.back().position});
}

ReflectorPath ReflectorPath::stationary(Point p, double duration, double gain) {
  return ReflectorPath({{0.0, p}, {duration, p}}, gain);
}

void SimConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("sim: sample_rate must be positive");
  if (speed_of_sound <= 0) throw ConfigError("sim: speed_of_sound must be positive");
  if (noise_std < 0) throw ConfigError("sim: noise_std must be non-negative");
}

double path_delay_samples(Point speaker, Point reflector, Point mic, const SimConfig& config) {
  const double path_m = (distance(speaker, reflector) + distance(reflector, mic)) / 1000.0;
  return path_m / config.speed_of_sound * config.sample_rate;
}

namespace {

std::vector<Mic> speakers_for(Mic mic, const SimConfig& config) {
  if (!config.cross_paths) return {mic};
  return {mic, mic == Mic::Bottom ? Mic::Top : Mic::Bottom};
}

void accumulate_reflections(Samples& out, const Samples& stream, const DeviceGeometry& geometry,
                            const std::vector<ReflectorPath>& paths, const SimConfig& config, Mic mic) {
  const std::size_t n = stream.size();
  const Point mic_pos = geometry.mic(mic);
  const auto speakers = speakers_for(mic, config);
  for (const ReflectorPath& path : paths) {
    const double t_end = static_cast<double>(n - 1) / config.sample_rate;
    if (!path.defined_at(0.0) || !path.defined_at(t_end))
      throw SimulationError("reflector path does not cover the stream interval");
    const double gain = config.reflection_gain * path.gain();
    const auto& keys = path.keyframes();
    std::size_t seg = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double time = static_cast<double>(t) / config.sample_rate;
      while (seg + 1 < keys.size() && keys[seg + 1].time <= time) ++seg;
      Point pos = keys[seg].position;
      if (seg + 1 < keys.size()) {
        const double span = keys[seg + 1].time - keys[seg].time;
        if (span > 0) pos = lerp(keys[seg].position, keys[seg + 1].position, (time - keys[seg].time) / span);
      }
      for (Mic spk : speakers) {
        const Point spk_pos = geometry.speaker(spk);
        const double delay = std::round(path_delay_samples(spk_pos, pos, mic_pos, config));
        const auto src = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(delay);
        if (src < 0) continue;
        double g = gain;
        if (config.inverse_square) {
          constexpr double ref_m = 0.05;
          const double d1 = std::max(distance(spk_pos, pos), 1.0) / 1000.0;
          const double d2 = std::max(distance(pos, mic_pos), 1.0) / 1000.0;
          g *= (ref_m / d1) * (ref_m / d2);
        }
        out[t] += g * stream[static_cast<std::size_t>(src)];
      }
    }
  }
}

}  // namespace

Samples simulate_reflections(const Samples& stream, const DeviceGeometry& geometry,
                             const std::vector<ReflectorPath>& paths, const SimConfig& config, Mic mic) {
  config.validate();
  if (stream.empty()) throw InputError("simulate_echo: empty stream");
  Samples out(stream.size(), 0.0);
  accumulate_reflections(out, stream, geometry, paths, config, mic);
  return out;
}

Samples simulate_echo(const Samples& stream, const DeviceGeometry& geometry,
                      const std::vector<ReflectorPath>& paths, const SimConfig& config, Mic mic) {
  Samples out = simulate_reflections(stream, geometry, paths, config, mic);
  if (config.include_direct_path) {
    for (Mic spk : speakers_for(mic, config)) {
      const double d_m = distance(geometry.speaker(spk), geometry.mic(mic)) / 1000.0;
      const auto delay = static_cast<std::ptrdiff_t>(
          std::round(d_m / config.speed_of_sound * config.sample_rate));
      for (std::size_t t = 0; t < out.size(); ++t) {
        const auto src = static_cast<std::ptrdiff_t>(t) - delay;
        if (src >= 0) out[t] += config.direct_gain * stream[static_cast<std::size_t>(src)];
      }
    }
  }
  if (config.noise_std > 0)
    add_noise(out, config.noise_std, mix_seed(config.seed, mic == Mic::Bottom ? 0 : 1));
  return out;
}

double noise_std_for_snr(const Samples& clean_echo, double snr_db) {
  if (clean_echo.empty()) return 0.0;
  double power = 0.0;
  for (double v : clean_echo) power += v * v;
  power /= static_cast<double>(clean_echo.size());
  return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

void add_noise(Samples& trace, double noise_std, std::uint64_t seed) {
  if (noise_std <= 0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std);
  for (double& v : trace) v += dist(rng);
}

ReflectorPath synth_stroke_path(int from_point, int to_point, const DeviceGeometry& geometry,
                                double duration, double pause_after) {
  if (from_point < 0 || from_point > 8 || to_point < 0 || to_point > 8)
    throw InputError("stroke endpoints must be grid indices 0..8");
  if (from_point == to_point) throw InputError("stroke endpoints must differ");
  if (duration <= 0) throw InputError("stroke duration must be positive");
  if (pause_after < 0) throw InputError("pause must be non-negative");
  const Point a = geometry.grid[static_cast<std::size_t>(from_point)];
  const Point b = geometry.grid[static_cast<std::size_t>(to_point)];
  std::vector<ReflectorPath::Keyframe> keys{{0.0, a}, {duration, b}};
  if (pause_after > 0) keys.push_back({duration + pause_after, b});
  return ReflectorPath(std::move(keys));
}

namespace {

double scale_at(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 1.0; }

struct PatternPlan {
  ReflectorPath path;
  std::vector<StrokeSpan> strokes;
  std::size_t n_frames = 0;
  Samples stream;
};

PatternPlan plan_strokes(const std::vector<Stroke>& strokes, const DeviceGeometry& geometry,
                         const FrameSpec& spec, const SimConfig& config, const PatternTiming& timing) {
  if (strokes.empty()) throw InputError("nothing to draw: no strokes");
  spec.validate();
  config.validate();
  if (timing.speed_mm_s <= 0) throw ConfigError("timing: speed must be positive");
  auto touch = [&](int p) {
    Point q = geometry.grid[static_cast<std::size_t>(p)];
    if (static_cast<std::size_t>(p) < timing.point_offsets.size()) {
      q.x += timing.point_offsets[static_cast<std::size_t>(p)].x;
      q.y += timing.point_offsets[static_cast<std::size_t>(p)].y;
    }
    return q;
  };

  PatternPlan plan;
  std::vector<ReflectorPath::Keyframe> keys;
  double t = 0.0;
  keys.push_back({t, touch(strokes.front().start)});
  t += timing.lead_in_s;
  keys.push_back({t, touch(strokes.front().start)});
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    const Point a = touch(strokes[i].start);
    const Point b = touch(strokes[i].end);
    if (distance(a, b) <= 0) throw InputError("stroke endpoints must differ");
    const double speed = timing.speed_mm_s * scale_at(timing.speed_scale, i);
    const double duration = distance(a, b) / speed;
    StrokeSpan span;
    span.from_point = strokes[i].start;
    span.to_point = strokes[i].end;
    span.start_sample = static_cast<std::size_t>(std::llround(t * config.sample_rate));
    t += duration;
    span.end_sample = static_cast<std::size_t>(std::llround(t * config.sample_rate));
    keys.push_back({t, b});
    plan.strokes.push_back(span);
    const double rest = i + 1 < strokes.size() ? timing.pause_s * scale_at(timing.pause_scale, i)
                                               : timing.lead_out_s;
    t += rest;
    keys.push_back({t, b});
  }

  const double samples_needed = std::ceil(t * config.sample_rate);
  plan.n_frames = static_cast<std::size_t>(
      std::max(1.0, std::ceil(samples_needed / static_cast<double>(spec.frame_len))));
  const double stream_end =
      static_cast<double>(plan.n_frames * static_cast<std::size_t>(spec.frame_len)) / config.sample_rate;
  if (stream_end > t) keys.push_back({stream_end, keys.back().position});
  plan.path = ReflectorPath(std::move(keys));
  plan.stream = emit_stream(build_frame(spec), plan.n_frames);
  return plan;
}

}  // namespace

PatternTrace synth_strokes_trace(const std::vector<Stroke>& strokes, const DeviceGeometry& geometry,
                                 const FrameSpec& spec, const SimConfig& config,
                                 const PatternTiming& timing) {
  PatternPlan plan = plan_strokes(strokes, geometry, spec, config, timing);
  const std::vector<ReflectorPath> paths{plan.path};
  PatternTrace out;
  out.bottom = simulate_echo(plan.stream, geometry, paths, config, Mic::Bottom);
  out.top = simulate_echo(plan.stream, geometry, paths, config, Mic::Top);
  out.strokes = std::move(plan.strokes);
  out.n_frames = plan.n_frames;
  return out;
}

PatternTrace synth_strokes_trace_snr(const std::vector<Stroke>& strokes, const DeviceGeometry& geometry,
                                     const FrameSpec& spec, const SimConfig& config,
                                     const PatternTiming& timing, double snr_db) {
  SimConfig clean = config;
  clean.noise_std = 0.0;
  PatternPlan plan = plan_strokes(strokes, geometry, spec, clean, timing);
  const std::vector<ReflectorPath> paths{plan.path};
  PatternTrace out;
  for (Mic mic : {Mic::Bottom, Mic::Top}) {
    Samples echo = simulate_reflections(plan.stream, geometry, paths, clean, mic);
    const double sigma = noise_std_for_snr(echo, snr_db);
    Samples trace = clean.include_direct_path
                        ? simulate_echo(plan.stream, geometry, paths, clean, mic)
                        : echo;
    add_noise(trace, sigma, mix_seed(config.seed, mic == Mic::Bottom ? 0 : 1));
    (mic == Mic::Bottom ? out.bottom : out.top) = std::move(trace);
  }
  out.strokes = std::move(plan.strokes);
  out.n_frames = plan.n_frames;
  return out;
}

PatternTrace synth_pattern_trace(const UnlockPattern& pattern, const DeviceGeometry& geometry,
                                 const FrameSpec& spec, const SimConfig& config,
                                 const PatternTiming& timing) {
  return synth_strokes_trace(decompose(pattern), geometry, spec, config, timing);
}

PatternTrace synth_pattern_trace_snr(const UnlockPattern& pattern, const DeviceGeometry& geometry,
                                     const FrameSpec& spec, const SimConfig& config,
                                     const PatternTiming& timing, double snr_db) {
  return synth_strokes_trace_snr(decompose(pattern), geometry, spec, config, timing, snr_db);
}

}  // namespace sonarsnoop
