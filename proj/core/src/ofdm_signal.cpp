#include "sonarsnoop/ofdm_signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace sonarsnoop {

void FrameSpec::validate() const {
  if (sample_rate <= 0 || n_subcarriers <= 0 || subcarrier_bw <= 0)
    throw ConfigError("frame spec: rates and subcarrier counts must be positive");
  const double expected = 2.0 * n_subcarriers * subcarrier_bw;
  if (std::abs(sample_rate - expected) > 1e-9 * expected)
    throw ConfigError("frame spec: sample_rate must equal 2 * n_subcarriers * subcarrier_bw");
  if (band_lo < 0 || band_lo > band_hi || band_hi > sample_rate / 2)
    throw ConfigError("frame spec: band must satisfy 0 <= band_lo <= band_hi <= sample_rate/2");
  if (pulse_len < 1 || pulse_len > 2 * n_subcarriers)
    throw ConfigError("frame spec: pulse_len must lie in [1, 2 * n_subcarriers]");
  if (frame_len < pulse_len) throw ConfigError("frame spec: pulse_len must not exceed frame_len");
}

double FrameSpec::unaliased_range_m(double speed_of_sound) const {
  return frame_duration() * speed_of_sound / 2.0;
}

SpectrumVector build_subcarrier_vector(const FrameSpec& spec) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.n_subcarriers);
  SpectrumVector out;
  out.bins.assign(2 * n, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = static_cast<double>(k) * spec.subcarrier_bw;
    const double hi = lo + spec.subcarrier_bw;
    if (lo >= spec.band_lo && hi <= spec.band_hi) out.bins[k] = 1.0;
  }
  for (std::size_t k = 0; k < n; ++k) out.bins[2 * n - 1 - k] = out.bins[k];
  return out;
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom));
  return w;
}

Samples synthesize_pulse(const FrameSpec& spec, bool windowed) {
  const SpectrumVector spectrum = build_subcarrier_vector(spec);
  const auto time = detail::dft(spectrum.bins, true);
  const double scale = 1.0 / static_cast<double>(time.size());
  const std::size_t len = static_cast<std::size_t>(spec.pulse_len);

  Samples pulse(len);
  for (std::size_t i = 0; i < len; ++i) pulse[i] = time[i].real() * scale;
  if (windowed) {
    const auto w = hann_window(len);
    for (std::size_t i = 0; i < len; ++i) pulse[i] *= w[i];
  }
  double peak = 0.0;
  for (double v : pulse) peak = std::max(peak, std::abs(v));
  if (peak > 1e-12) {
    for (double& v : pulse) v /= peak;
  } else {
    std::fill(pulse.begin(), pulse.end(), 0.0);
  }
  return pulse;
}

SoundFrame build_frame(const FrameSpec& spec) {
  SoundFrame frame;
  frame.samples.assign(static_cast<std::size_t>(spec.frame_len), 0.0);
  const Samples pulse = synthesize_pulse(spec);
  std::copy(pulse.begin(), pulse.end(), frame.samples.begin());
  frame.pulse_len = spec.pulse_len;
  return frame;
}

Samples emit_stream(const SoundFrame& frame, std::size_t n_frames) {
  if (n_frames == 0) throw EmptyStreamError("emit_stream: n_frames must be at least 1");
  Samples out;
  out.reserve(frame.samples.size() * n_frames);
  for (std::size_t i = 0; i < n_frames; ++i)
    out.insert(out.end(), frame.samples.begin(), frame.samples.end());
  return out;
}

namespace {

std::vector<double> power_spectrum(const Samples& pulse, std::size_t n_fft) {
  const auto spec = detail::rfft(pulse, n_fft);
  std::vector<double> p(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) p[i] = std::norm(spec[i]);
  return p;
}

}  // namespace

double band_energy_fraction(const Samples& pulse, double sample_rate, double lo_hz, double hi_hz,
                            std::size_t n_fft) {
  const auto p = power_spectrum(pulse, n_fft);
  double total = 0.0, band = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double f = static_cast<double>(i) * sample_rate / static_cast<double>(n_fft);
    total += p[i];
    if (f >= lo_hz && f <= hi_hz) band += p[i];
  }
  return total > 0 ? band / total : 0.0;
}

double energy_below(const Samples& pulse, double sample_rate, double hz, std::size_t n_fft) {
  const auto p = power_spectrum(pulse, n_fft);
  double below = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double f = static_cast<double>(i) * sample_rate / static_cast<double>(n_fft);
    if (f < hz) below += p[i];
  }
  return below;
}

double autocorrelation_sidelobe_ratio(const Samples& pulse) {
  const std::size_t n = pulse.size();
  if (n == 0) throw InputError("autocorrelation of an empty pulse");
  const std::size_t m = 2 * n - 1;
  const std::size_t centre = n - 1;
  std::vector<double> ac(m, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += pulse[i] * pulse[i + lag];
    ac[centre + lag] = s;
    ac[centre - lag] = s;
  }

  // Envelope via the analytic signal.
  std::vector<detail::Complex> buf(ac.begin(), ac.end());
  auto spec = detail::dft(buf, false);
  for (std::size_t k = 1; k < m; ++k) {
    const bool positive = k < (m + 1) / 2;
    const bool nyquist = (m % 2 == 0) && k == m / 2;
    spec[k] *= nyquist ? 1.0 : (positive ? 2.0 : 0.0);
  }
  const auto analytic = detail::dft(spec, true);
  std::vector<double> env(m);
  for (std::size_t i = 0; i < m; ++i) env[i] = std::abs(analytic[i]) / static_cast<double>(m);

  std::size_t edge = centre;
  while (edge + 1 < m && env[edge + 1] < env[edge]) ++edge;
  const std::size_t half = edge - centre;

  double sidelobe = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t d = i > centre ? i - centre : centre - i;
    if (d >= half) sidelobe = std::max(sidelobe, std::abs(ac[i]));
  }
  return sidelobe > 0 ? std::abs(ac[centre]) / sidelobe : INFINITY;
}

}  // namespace sonarsnoop
