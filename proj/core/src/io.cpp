#include "sonarsnoop/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "sonarsnoop/config.hpp"

namespace sonarsnoop {

namespace {

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get16(const std::string& s, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) | (static_cast<unsigned char>(s[at + 1]) << 8));
}

std::uint32_t get32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + static_cast<std::size_t>(i)]);
  return v;
}

std::int16_t to_pcm(double v) {
  const double c = std::clamp(v, -1.0, 1.0) * 32767.0;
  return static_cast<std::int16_t>(std::round(c));  // std::round rounds half away from zero
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_pcm16(const Samples& samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 2);
  for (double v : samples) {
    const auto u = static_cast<std::uint16_t>(to_pcm(v));
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

void write_wav(const std::string& path, const WavData& wav) {
  if (wav.channels.empty() || wav.channels.size() > 2) throw IoError("wav: only mono or stereo is supported");
  const std::size_t n = wav.channels[0].size();
  for (const auto& c : wav.channels)
    if (c.size() != n) throw IoError("wav: channels differ in length");
  const auto ch = static_cast<std::uint16_t>(wav.channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(n * ch * 2);
  std::string out;
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, ch);
  put32(out, static_cast<std::uint32_t>(wav.sample_rate));
  put32(out, static_cast<std::uint32_t>(wav.sample_rate) * ch * 2);
  put16(out, static_cast<std::uint16_t>(ch * 2));
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& c : wav.channels) put16(out, static_cast<std::uint16_t>(to_pcm(c[i])));
  auto f = open_out(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + path);
}

void write_wav(const std::string& path, const Samples& mono, int sample_rate) {
  write_wav(path, WavData{sample_rate, {mono}});
}

void write_wav_stereo(const std::string& path, const Samples& bottom, const Samples& top, int sample_rate) {
  write_wav(path, WavData{sample_rate, {bottom, top}});
}

WavData read_wav(const std::string& path) {
  const std::string s = read_text(path);
  if (s.size() < 12 || s.compare(0, 4, "RIFF") != 0 || s.compare(8, 4, "WAVE") != 0)
    throw IoError(path + ": not a RIFF/WAVE file");
  WavData wav;
  int channels = 0, bits = 0, format = 0;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= s.size()) {
    const std::string id = s.substr(at, 4);
    const std::size_t len = get32(s, at + 4);
    const std::size_t body = at + 8;
    if (body + len > s.size()) throw IoError(path + ": truncated chunk '" + id + "'");
    if (id == "fmt ") {
      if (len < 16) throw IoError(path + ": short fmt chunk");
      format = get16(s, body);
      channels = get16(s, body + 2);
      wav.sample_rate = static_cast<int>(get32(s, body + 4));
      bits = get16(s, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt chunk");
      if (format != 1 || bits != 16) throw IoError(path + ": only 16-bit PCM is supported");
      if (channels < 1 || channels > 2) throw IoError(path + ": only mono or stereo is supported");
      const std::size_t frames = len / (2 * static_cast<std::size_t>(channels));
      wav.channels.assign(static_cast<std::size_t>(channels), Samples(frames));
      for (std::size_t i = 0; i < frames; ++i)
        for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c) {
          const auto v = static_cast<std::int16_t>(get16(s, body + 2 * (i * static_cast<std::size_t>(channels) + c)));
          wav.channels[c][i] = v / 32767.0;
        }
      return wav;
    }
    at = body + len + (len & 1);
  }
  throw IoError(path + ": no data chunk");
}

std::string encode_pgm(const Matrix<double>& m) {
  std::string out = "P5\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n255\n";
  if (m.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(m.data().begin(), m.data().end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  out.reserve(out.size() + m.size());
  for (double v : m.data())
    out.push_back(static_cast<char>(span > 0 ? static_cast<unsigned char>(std::lround((v - lo) / span * 255.0)) : 0));
  return out;
}

void write_pgm(const std::string& path, const Matrix<double>& m) {
  const std::string bytes = encode_pgm(m);
  auto f = open_out(path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path);
}

void write_pgm(const std::string& path, const Matrix<std::uint8_t>& binary) {
  Matrix<double> m(binary.rows(), binary.cols());
  std::transform(binary.data().begin(), binary.data().end(), m.data().begin(),
                 [](std::uint8_t v) { return v ? 1.0 : 0.0; });
  write_pgm(path, m);
}

void write_matrix_csv(const std::string& path, const Matrix<double>& m) {
  std::string out = "row,col,value\n";
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out += std::to_string(r) + "," + std::to_string(c) + "," + format_number(m(r, c)) + "\n";
  write_text(path, out);
}

Matrix<double> overlay_boxes(const Matrix<double>& base, const std::vector<ConnectedComponent>& components) {
  Matrix<double> out(base.rows(), base.cols(), 0.0);
  if (base.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(base.data().begin(), base.data().end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  for (std::size_t i = 0; i < base.size(); ++i)
    out.data()[i] = span > 0 ? std::round((base.data()[i] - lo) / span * 254.0) : 0.0;
  auto mark = [&](int r, int c) {
    if (r >= 0 && c >= 0 && static_cast<std::size_t>(r) < out.rows() && static_cast<std::size_t>(c) < out.cols())
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 255.0;
  };
  for (const auto& cc : components) {
    const BoundingBox& b = cc.bbox;
    for (int c = b.col_min; c <= b.col_max; ++c) {
      mark(b.row_min, c);
      mark(b.row_max, c);
    }
    for (int r = b.row_min; r <= b.row_max; ++r) {
      mark(r, b.col_min);
      mark(r, b.col_max);
    }
  }
  return out;
}

void write_features_csv(const std::string& path, const Analysis& a) {
  std::string out = "stroke,mic,angle_deg,range_rows,direction,components,col_first,col_last\n";
  for (std::size_t i = 0; i < a.strokes.size(); ++i)
    for (const auto* f : {a.strokes[i].bottom ? &*a.strokes[i].bottom : nullptr,
                          a.strokes[i].top ? &*a.strokes[i].top : nullptr}) {
      if (!f) continue;
      out += std::to_string(i) + "," + std::string(to_string(f->mic)) + "," + format_number(f->angle) + "," +
             format_number(f->range) + "," + direction_symbol(f->direction) + "," + std::to_string(f->n_components) +
             "," + std::to_string(f->col_first) + "," + std::to_string(f->col_last) + "\n";
    }
  write_text(path, out);
}

void write_components_csv(const std::string& path, const Analysis& a) {
  std::string out = "mic,group,row_min,row_max,col_min,col_max,pixels\n";
  for (const MicAnalysis* m : {&a.bottom, &a.top}) {
    if (!m->present) continue;
    for (std::size_t g = 0; g < m->groups.size(); ++g)
      for (const auto& cc : m->groups[g].components)
        out += std::string(to_string(m->mic)) + "," + std::to_string(g) + "," + std::to_string(cc.bbox.row_min) +
               "," + std::to_string(cc.bbox.row_max) + "," + std::to_string(cc.bbox.col_min) + "," +
               std::to_string(cc.bbox.col_max) + "," + std::to_string(cc.size()) + "\n";
  }
  write_text(path, out);
}

namespace {

std::string corpus_number(double v) { return std::isfinite(v) ? format_number(v) : "nan"; }

double corpus_field(const std::string& text, const std::string& path, int line) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw IoError(path + ":" + std::to_string(line) + ": bad number '" + text + "'");
}

}  // namespace

void write_corpus_csv(const std::string& path, const std::vector<LabeledStrokeSample>& samples) {
  std::string out = "stroke_id,angle_bottom,range_bottom,angle_top,range_top\n";
  for (const auto& s : samples)
    out += std::to_string(s.stroke_id) + "," + corpus_number(s.angle_bottom) + "," + corpus_number(s.range_bottom) +
           "," + corpus_number(s.angle_top) + "," + corpus_number(s.range_top) + "\n";
  write_text(path, out);
}

std::vector<LabeledStrokeSample> read_corpus_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<LabeledStrokeSample> out;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (n == 1 && line.rfind("stroke_id", 0) == 0)) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw IoError(path + ":" + std::to_string(n) + ": expected 5 fields");
    LabeledStrokeSample s;
    s.stroke_id = static_cast<int>(corpus_field(f[0], path, n));
    s.angle_bottom = corpus_field(f[1], path, n);
    s.range_bottom = corpus_field(f[2], path, n);
    s.angle_top = corpus_field(f[3], path, n);
    s.range_top = corpus_field(f[4], path, n);
    out.push_back(s);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sonarsnoop
