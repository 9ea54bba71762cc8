#pragma once

#include <string>
#include <vector>

#include "sonarsnoop/classifier.hpp"
#include "sonarsnoop/common.hpp"
#include "sonarsnoop/pipeline.hpp"

namespace sonarsnoop {

struct WavData {
  int sample_rate = 48000;
  std::vector<Samples> channels;  // one per channel, values in [-1, 1]
};

// PCM16 little-endian. Samples are clipped to [-1, 1] and scaled by 32767 with
// rounding half away from zero.
void write_wav(const std::string& path, const WavData& wav);
void write_wav(const std::string& path, const Samples& mono, int sample_rate = 48000);
// Channel 0 = bottom mic, channel 1 = top mic.
void write_wav_stereo(const std::string& path, const Samples& bottom, const Samples& top, int sample_rate = 48000);

// Accepts 16-bit PCM mono or stereo only; throws IoError otherwise.
WavData read_wav(const std::string& path);

std::vector<std::uint8_t> encode_pcm16(const Samples& samples);

// Binary greyscale image, min-max scaled to 0..255 (a constant matrix maps to 0).
void write_pgm(const std::string& path, const Matrix<double>& m);
void write_pgm(const std::string& path, const Matrix<std::uint8_t>& binary);
std::string encode_pgm(const Matrix<double>& m);

// Long format: one "row,col,value" line per cell.
void write_matrix_csv(const std::string& path, const Matrix<double>& m);
// Base matrix scaled to 0..254 with every component's bounding box outlined at 255.
Matrix<double> overlay_boxes(const Matrix<double>& base, const std::vector<ConnectedComponent>& components);
void write_features_csv(const std::string& path, const Analysis& analysis);
void write_components_csv(const std::string& path, const Analysis& analysis);

// Labeled stroke corpus: stroke_id,angle_bottom,range_bottom,angle_top,range_top ("nan" for a missed mic).
void write_corpus_csv(const std::string& path, const std::vector<LabeledStrokeSample>& samples);
std::vector<LabeledStrokeSample> read_corpus_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace sonarsnoop
