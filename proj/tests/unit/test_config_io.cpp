#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "sonarsnoop/config.hpp"
#include "sonarsnoop/io.hpp"

using namespace sonarsnoop;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sonarsnoop_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(Pcm, RoundsHalfAwayFromZeroAndClips) {
  const Samples s{0.0, 0.5 / 32767.0, -0.5 / 32767.0, 1.5 / 32767.0, 1.0, -1.0, 2.0, -3.0};
  const auto b = encode_pcm16(s);
  ASSERT_EQ(b.size(), 16u);
  auto at = [&](std::size_t i) { return static_cast<std::int16_t>(b[2 * i] | (b[2 * i + 1] << 8)); };
  EXPECT_EQ(at(0), 0);
  EXPECT_EQ(at(1), 1);
  EXPECT_EQ(at(2), -1);
  EXPECT_EQ(at(3), 2);
  EXPECT_EQ(at(4), 32767);
  EXPECT_EQ(at(5), -32767);
  EXPECT_EQ(at(6), 32767);
  EXPECT_EQ(at(7), -32767);
}

using Wav = TempDir;

TEST_F(Wav, MonoHeaderAndRoundTrip) {
  const Samples s{0.0, 0.25, -0.5, 0.999};
  write_wav(path("m.wav"), s);
  const std::string bytes = read_text(path("m.wav"));
  ASSERT_EQ(bytes.size(), 44u + 8u);
  EXPECT_EQ(bytes.substr(0, 4), "RIFF");
  EXPECT_EQ(bytes.substr(8, 8), "WAVEfmt ");
  EXPECT_EQ(static_cast<unsigned char>(bytes[22]), 1);                      // channels
  EXPECT_EQ(static_cast<unsigned char>(bytes[24]) | (static_cast<unsigned char>(bytes[25]) << 8), 48000 & 0xffff);
  EXPECT_EQ(static_cast<unsigned char>(bytes[34]), 16);                     // bits
  const WavData w = read_wav(path("m.wav"));
  EXPECT_EQ(w.sample_rate, 48000);
  ASSERT_EQ(w.channels.size(), 1u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(w.channels[0][i], s[i], 0.5 / 32767.0 + 1e-12);
}

TEST_F(Wav, StereoChannelOrder) {
  write_wav_stereo(path("s.wav"), {0.1, 0.2}, {-0.3, -0.4});
  const WavData w = read_wav(path("s.wav"));
  ASSERT_EQ(w.channels.size(), 2u);
  EXPECT_NEAR(w.channels[0][1], 0.2, 1e-4);   // bottom
  EXPECT_NEAR(w.channels[1][0], -0.3, 1e-4);  // top
}

TEST_F(Wav, RejectsOtherFormats) {
  std::string bytes = read_text((write_wav(path("a.wav"), Samples{0.1, 0.2}), path("a.wav")));
  bytes[34] = 8;  // claim 8-bit samples
  write_text(path("b.wav"), bytes);
  EXPECT_THROW(read_wav(path("b.wav")), IoError);
  write_text(path("c.wav"), "not a wave file");
  EXPECT_THROW(read_wav(path("c.wav")), IoError);
  EXPECT_THROW(read_wav(path("missing.wav")), IoError);
  EXPECT_THROW(write_wav(path("d.wav"), WavData{48000, {{0.1}, {0.1}, {0.1}}}), IoError);
}

TEST(Pgm, HeaderAndMinMaxScaling) {
  Matrix<double> m(2, 3);
  m.data() = {-1.0, 0.0, 1.0, 3.0, -1.0, 1.0};
  const std::string p = encode_pgm(m);
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(p.substr(0, header.size()), header);
  const std::string px = p.substr(header.size());
  ASSERT_EQ(px.size(), 6u);
  EXPECT_EQ(static_cast<unsigned char>(px[0]), 0);
  EXPECT_EQ(static_cast<unsigned char>(px[3]), 255);
  EXPECT_EQ(static_cast<unsigned char>(px[2]), 128);  // 0.5 rounds up
  const std::string flat = encode_pgm(Matrix<double>(2, 2, 7.0));
  EXPECT_EQ(flat.substr(flat.size() - 4), std::string(4, '\0'));
}

TEST(Overlay, BoxesBurnedAt255) {
  Matrix<double> base(6, 6, 0.0);
  base(0, 0) = 1.0;
  ConnectedComponent cc;
  cc.bbox = {1, 1, 3, 4};
  const auto o = overlay_boxes(base, {cc});
  EXPECT_EQ(o(0, 0), 254.0);
  EXPECT_EQ(o(1, 1), 255.0);
  EXPECT_EQ(o(3, 4), 255.0);
  EXPECT_EQ(o(2, 2), 0.0);
  EXPECT_EQ(o(5, 5), 0.0);
}

using Csv = TempDir;

TEST_F(Csv, MatrixLongFormat) {
  Matrix<double> m(2, 2);
  m.data() = {1.0, 2.5, -3.0, 0.125};
  write_matrix_csv(path("m.csv"), m);
  EXPECT_EQ(read_text(path("m.csv")), "row,col,value\n0,0,1\n0,1,2.5\n1,0,-3\n1,1,0.125\n");
}

TEST_F(Csv, CorpusRoundTripWithMissingMic) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<LabeledStrokeSample> in{{3, 100.5, 12, nan, nan}, {7, 80, 9.25, 95, 14}};
  write_corpus_csv(path("c.csv"), in);
  const auto out = read_corpus_csv(path("c.csv"));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].stroke_id, 3);
  EXPECT_DOUBLE_EQ(out[0].angle_bottom, 100.5);
  EXPECT_TRUE(std::isnan(out[0].angle_top));
  EXPECT_DOUBLE_EQ(out[1].range_bottom, 9.25);
  write_text(path("bad.csv"), "stroke_id,angle_bottom,range_bottom,angle_top,range_top\n1,x,2,3,4\n");
  EXPECT_THROW(read_corpus_csv(path("bad.csv")), IoError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(48000), "48000");
  EXPECT_EQ(format_number(2.2), "2.2");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Config, DefaultsMatchDocumentedValues) {
  const RunConfig c;
  EXPECT_EQ(c.get("frame.frame_len"), "264");
  EXPECT_EQ(c.get("analysis.delta_bottom"), "8");
  EXPECT_EQ(c.get("analysis.delta_top"), "16");
  EXPECT_EQ(c.get("analysis.percentile"), "94");
  EXPECT_EQ(c.get("analysis.min_component"), "20");
  EXPECT_EQ(c.get("analysis.group_gap"), "80");
  EXPECT_EQ(c.get("decision.mode"), "D2.1");
  EXPECT_EQ(c.get("sim.snr_db"), "none");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, EveryKeyReadsBack) {
  RunConfig c;
  for (const auto& key : RunConfig::keys()) EXPECT_NO_THROW(c.set(key, c.get(key))) << key;
  EXPECT_EQ(c.entries(), RunConfig{}.entries());
  EXPECT_EQ(c.entries().size(), RunConfig::keys().size());
}

TEST(Config, TextRoundTrip) {
  RunConfig a;
  a.set("seed", "99");
  a.set("sim.snr_db", "12.5");
  a.set("decision.mode", "D3.2");
  a.set("analysis.weighting", "pixel_count");
  a.set("gabor.orientations", "18");
  a.set("experiment.users", "3");
  a.set("geometry.mic_top.x", "14");
  RunConfig b;
  b.apply_text(a.to_text());
  EXPECT_EQ(b.entries(), a.entries());
  EXPECT_EQ(b.seed, 99u);
  ASSERT_TRUE(b.snr_db.has_value());
  EXPECT_DOUBLE_EQ(*b.snr_db, 12.5);
  EXPECT_EQ(b.analysis_config().gabor.orientations_deg.size(), 18u);
  EXPECT_DOUBLE_EQ(b.analysis_config().gabor.orientations_deg.front(), 5.0);
}

TEST(Config, CommentsAndWhitespace) {
  RunConfig c;
  c.apply_text("# header\n  seed = 5   # trailing\n\nexperiment.reps=2\n");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.experiment.reps, 2);
}

TEST(Config, Errors) {
  RunConfig c;
  EXPECT_THROW(c.set("no.such.key", "1"), ConfigError);
  EXPECT_THROW(c.set("seed", "abc"), ConfigError);
  EXPECT_THROW(c.set("analysis.percentile", "12x"), ConfigError);
  EXPECT_THROW(c.set("decision.mode", "D9.9"), ConfigError);
  EXPECT_THROW(c.apply_text("seed 5\n"), ConfigError);
  c.set("analysis.percentile", "150");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, SimSeedFollowsMasterSeed) {
  RunConfig c;
  c.set("seed", "17");
  EXPECT_EQ(c.sim_config().seed, 17u);
  EXPECT_EQ(c.catalog().size(), 12u);
}
