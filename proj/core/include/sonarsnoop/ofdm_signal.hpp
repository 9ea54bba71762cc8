#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "sonarsnoop/common.hpp"

namespace sonarsnoop {

struct FrameSpec {
  double sample_rate = 48000.0;
  int n_subcarriers = 64;
  double subcarrier_bw = 375.0;
  double band_lo = 18000.0;
  double band_hi = 20000.0;
  int pulse_len = 64;
  int frame_len = 264;

  // Throws ConfigError when the spec is inconsistent.
  void validate() const;
  double frame_duration() const { return frame_len / sample_rate; }
  // One-way distance an echo may travel before it folds into the next frame.
  double unaliased_range_m(double speed_of_sound = 343.0) const;
};

// 2 * n_subcarriers bins; the second half mirrors the first.
struct SpectrumVector {
  std::vector<std::complex<double>> bins;
};

struct SoundFrame {
  Samples samples;
  int pulse_len = 0;
};

SpectrumVector build_subcarrier_vector(const FrameSpec& spec);

std::vector<double> hann_window(std::size_t length);

// Windowed, peak-normalised pulse. With windowed = false the Hann step is skipped
// (used to measure how much leakage the window removes).
Samples synthesize_pulse(const FrameSpec& spec, bool windowed = true);

SoundFrame build_frame(const FrameSpec& spec);

// n_frames back-to-back copies of the frame. Throws EmptyStreamError for 0.
Samples emit_stream(const SoundFrame& frame, std::size_t n_frames);

// Spectral diagnostics, evaluated on an n_fft-point zero-padded real FFT.
double band_energy_fraction(const Samples& pulse, double sample_rate, double lo_hz, double hi_hz,
                            std::size_t n_fft = 65536);
double energy_below(const Samples& pulse, double sample_rate, double hz, std::size_t n_fft = 65536);

// Autocorrelation peak over the largest |autocorrelation| outside the main lobe.
// The main lobe extends to the first local minimum of the autocorrelation envelope.
double autocorrelation_sidelobe_ratio(const Samples& pulse);

}  // namespace sonarsnoop
