#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sonarsnoop/common.hpp"
#include "sonarsnoop/ofdm_signal.hpp"

namespace sonarsnoop {

class UnlockPattern;
struct Stroke;

struct DeviceGeometry {
  double width_mm = 70.0;
  double height_mm = 137.0;
  Point speaker_top;
  Point speaker_bottom;
  Point mic_top;
  Point mic_bottom;
  std::array<Point, 9> grid{};

  // Default handset layout; see README for the coordinates.
  static DeviceGeometry standard();

  // Replaces the grid with a 3x3 lattice whose point 0 sits at origin.
  void set_grid(Point origin, double pitch_mm);

  Point mic(Mic m) const { return m == Mic::Bottom ? mic_bottom : mic_top; }
  Point speaker(Mic m) const { return m == Mic::Bottom ? speaker_bottom : speaker_top; }
  double pitch() const;

  // Throws ConfigError when a point leaves the face or the grid is not a lattice.
  void validate() const;
};

// Piecewise-linear trajectory through timed keyframes.
class ReflectorPath {
 public:
  struct Keyframe {
    double time = 0.0;
    Point position;
  };

  ReflectorPath() = default;
  explicit ReflectorPath(std::vector<Keyframe> keyframes, double gain = 1.0);

  double start_time() const;
  double end_time() const;
  double gain() const { return gain_; }
  const std::vector<Keyframe>& keyframes() const { return keys_; }

  bool defined_at(double t) const;
  // Throws SimulationError outside [start_time, end_time].
  Point at(double t) const;

  // Appends another path, shifted to start where this one ends.
  void append(const ReflectorPath& next);
  // Holds the final position for extra seconds.
  void hold(double seconds);

  static ReflectorPath stationary(Point p, double duration, double gain = 1.0);

 private:
  std::vector<Keyframe> keys_;
  double gain_ = 1.0;
};

struct SimConfig {
  double sample_rate = 48000.0;
  double speed_of_sound = 343.0;
  double reflection_gain = 0.1;
  double noise_std = 0.0;
  bool include_direct_path = false;
  double direct_gain = 1.0;
  bool inverse_square = false;
  // Also route each speaker's echo to the opposite-side microphone.
  bool cross_paths = false;
  std::uint64_t seed = 1;

  void validate() const;
};

// One microphone recording. Length equals the emitted stream length.
Samples simulate_echo(const Samples& stream, const DeviceGeometry& geometry,
                      const std::vector<ReflectorPath>& paths, const SimConfig& config, Mic mic);

// Echo-only part of simulate_echo (noise and direct path off).
Samples simulate_reflections(const Samples& stream, const DeviceGeometry& geometry,
                             const std::vector<ReflectorPath>& paths, const SimConfig& config, Mic mic);

// Round-trip delay, in samples, via one speaker and one microphone.
double path_delay_samples(Point speaker, Point reflector, Point mic, const SimConfig& config);

// Noise standard deviation giving snr_db relative to the mean echo power of a clean trace.
double noise_std_for_snr(const Samples& clean_echo, double snr_db);

// Adds white Gaussian noise in place.
void add_noise(Samples& trace, double noise_std, std::uint64_t seed);

ReflectorPath synth_stroke_path(int from_point, int to_point, const DeviceGeometry& geometry,
                                double duration, double pause_after = 0.6);

struct PatternTiming {
  double speed_mm_s = 200.0;
  double pause_s = 0.6;
  double lead_in_s = 0.3;
  double lead_out_s = 0.3;
  // Optional per-stroke multipliers on speed and pause (empty = 1.0).
  std::vector<double> speed_scale;
  std::vector<double> pause_scale;
  // Optional per-grid-point touch offsets in mm (empty = exact grid points).
  std::vector<Point> point_offsets;
};

struct StrokeSpan {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;
  int from_point = 0;
  int to_point = 0;
};

struct PatternTrace {
  Samples bottom;
  Samples top;
  std::vector<StrokeSpan> strokes;
  std::size_t n_frames = 0;
};

// Draws the pattern stroke by stroke with pauses; both mics share one time base.
// noise_std in config applies to both traces (independent seeds per mic).
PatternTrace synth_pattern_trace(const UnlockPattern& pattern, const DeviceGeometry& geometry,
                                 const FrameSpec& spec, const SimConfig& config,
                                 const PatternTiming& timing = {});

// Same as synth_pattern_trace but with noise set from an SNR in dB (per mic).
PatternTrace synth_pattern_trace_snr(const UnlockPattern& pattern, const DeviceGeometry& geometry,
                                     const FrameSpec& spec, const SimConfig& config,
                                     const PatternTiming& timing, double snr_db);

// Arbitrary stroke sequence (e.g. a single stroke) drawn with the same timing rules.
PatternTrace synth_strokes_trace(const std::vector<Stroke>& strokes, const DeviceGeometry& geometry,
                                 const FrameSpec& spec, const SimConfig& config,
                                 const PatternTiming& timing = {});
PatternTrace synth_strokes_trace_snr(const std::vector<Stroke>& strokes, const DeviceGeometry& geometry,
                                     const FrameSpec& spec, const SimConfig& config,
                                     const PatternTiming& timing, double snr_db);

}  // namespace sonarsnoop
