#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sonarsnoop/features.hpp"
#include "sonarsnoop/pipeline.hpp"
#include "sonarsnoop/sonar_sim.hpp"

using namespace sonarsnoop;

namespace {

// Line through the patch centre at `deg` from horizontal; positive = row grows with column.
Matrix<std::uint8_t> line_patch(double deg, int half = 30, int thickness = 1) {
  const int n = 2 * half + 1;
  Matrix<std::uint8_t> m(static_cast<std::size_t>(n), static_cast<std::size_t>(n), 0);
  const double rad = deg * M_PI / 180.0;
  for (int t = -half * 4; t <= half * 4; ++t) {
    const double s = t / 4.0;
    for (int k = 0; k < thickness; ++k) {
      const int r = static_cast<int>(std::lround(half + s * std::sin(rad))) + k;
      const int c = static_cast<int>(std::lround(half + s * std::cos(rad)));
      if (r >= 0 && r < n && c >= 0 && c < n) m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1;
    }
  }
  return m;
}

ConnectedComponent segment(int row0, int col0, int height, int width) {
  ConnectedComponent cc;
  const int steps = std::max(height, width) * 4;
  for (int i = 0; i <= steps; ++i) {
    const Pixel p{row0 + static_cast<int>(std::lround((height - 1) * double(i) / steps)),
                  col0 + static_cast<int>(std::lround((width - 1) * double(i) / steps))};
    if (cc.pixels.empty() || cc.pixels.back() != p) cc.pixels.push_back(p);
  }
  cc.bbox = {row0, col0, row0 + height - 1, col0 + width - 1};
  return cc;
}

Matrix<std::uint8_t> flip_rows(const Matrix<std::uint8_t>& m) {
  Matrix<std::uint8_t> out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(m.rows() - 1 - r, c) = m(r, c);
  return out;
}

}  // namespace

TEST(GaborSpec, StandardBank) {
  const auto s = GaborBankSpec::standard();
  ASSERT_EQ(s.orientations_deg.size(), 36u);
  EXPECT_DOUBLE_EQ(s.orientations_deg.front(), 2.5);
  EXPECT_DOUBLE_EQ(s.orientations_deg.back(), 177.5);
  EXPECT_EQ(s.kernel_radius, 16);
  GaborBankSpec bad = s;
  bad.wavelength = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.orientations_deg = {10, 5};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Gabor, AscendingLineAbove90) {
  const GaborBank bank;
  EXPECT_GT(bank.orientation(line_patch(45.0)), 90.0);
}

TEST(Gabor, DescendingLineBelow90) {
  const GaborBank bank;
  EXPECT_LT(bank.orientation(line_patch(-45.0)), 90.0);
}

TEST(Gabor, HorizontalLineIsIndeterminate) {
  const GaborBank bank;
  const double a = bank.orientation(line_patch(0.0));
  EXPECT_DOUBLE_EQ(a, 90.0);
  EXPECT_EQ(direction(a), Direction::Indeterminate);
}

TEST(Gabor, EmptyPatchThrows) {
  EXPECT_THROW(GaborBank{}.orientation(Matrix<std::uint8_t>(5, 5, 0)), NoSignalError);
}

TEST(Gabor, VerticalFlipMirrorsAngle) {
  const GaborBank bank;
  for (double deg : {-50.0, -20.0, 15.0, 35.0, 60.0}) {
    const auto p = line_patch(deg, 25, 2);
    EXPECT_NEAR(bank.orientation(flip_rows(p)), 180.0 - bank.orientation(p), 1e-9) << deg;
  }
}

TEST(Gabor, TracksRotationWithinOneStep) {
  const GaborBank bank;
  for (int deg = -60; deg <= 60; deg += 10) {
    if (deg == 0) continue;
    EXPECT_NEAR(bank.orientation(line_patch(deg, 30, 2)), 90.0 + deg, 5.0) << deg;
  }
}

TEST(StrokeAngle, SingleComponentIsItsAngle) {
  const GaborBank bank;
  StrokeGroup g;
  g.components = {segment(0, 0, 20, 30)};
  EXPECT_DOUBLE_EQ(stroke_angle(g, bank), bank.orientation(component_patch(g.components[0])));
}

TEST(StrokeAngle, AreaWeightedMean) {
  GaborBankSpec spec = GaborBankSpec::standard();
  spec.orientations_deg = {100.0, 120.0};
  const GaborBank bank(spec);
  StrokeGroup g;
  g.components = {segment(0, 0, 5, 20), segment(0, 40, 12, 25)};  // areas 100 and 300
  ASSERT_EQ(g.components[0].bbox.area(), 100);
  ASSERT_EQ(g.components[1].bbox.area(), 300);
  ASSERT_DOUBLE_EQ(bank.orientation(component_patch(g.components[0])), 100.0);
  ASSERT_DOUBLE_EQ(bank.orientation(component_patch(g.components[1])), 120.0);
  EXPECT_DOUBLE_EQ(stroke_angle(g, bank), 115.0);
}

TEST(StrokeAngle, UniformAreaScalingLeavesAngle) {
  GaborBankSpec spec = GaborBankSpec::standard();
  spec.orientations_deg = {100.0, 120.0};
  const GaborBank bank(spec);
  StrokeGroup small, big;
  small.components = {segment(0, 0, 5, 20), segment(0, 40, 12, 25)};
  big.components = {segment(0, 0, 10, 40), segment(0, 80, 24, 50)};
  EXPECT_NEAR(stroke_angle(small, bank), stroke_angle(big, bank), 1e-9);
}

TEST(StrokeAngle, NoComponentsThrows) { EXPECT_THROW(stroke_angle(StrokeGroup{}, GaborBank{}), NoSignalError); }

TEST(StrokeRange, InclusiveHeight) {
  StrokeGroup g;
  g.components = {segment(10, 0, 21, 30)};
  EXPECT_EQ(g.components[0].bbox.row_max, 30);
  EXPECT_DOUBLE_EQ(stroke_range(g), 21.0);
  g.components.push_back(segment(40, 50, 5, 10));
  EXPECT_DOUBLE_EQ(stroke_range(g), 26.0);
}

TEST(StrokeRange, EmptyGroupThrows) { EXPECT_THROW(stroke_range(StrokeGroup{}), InputError); }

TEST(Direction, Mapping) {
  EXPECT_EQ(direction(120.0), Direction::Away);
  EXPECT_EQ(direction(60.0), Direction::Towards);
  EXPECT_EQ(direction(90.0), Direction::Indeterminate);
  EXPECT_EQ(direction(92.0), Direction::Indeterminate);
  EXPECT_EQ(direction(92.5), Direction::Away);
  EXPECT_EQ(direction(87.5), Direction::Towards);
}

TEST(Simulated, StrokeAwayFromBottomMicScoresAbove90) {
  const auto g = DeviceGeometry::standard();
  const Analyzer analyzer;
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> speed(100.0, 400.0), jitter(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    PatternTiming t;
    t.speed_mm_s = speed(rng);
    for (int p = 0; p < 9; ++p) t.point_offsets.push_back({jitter(rng), jitter(rng)});
    const auto tr = synth_strokes_trace({{6, 0}}, g, FrameSpec{}, SimConfig{}, t);
    const auto a = analyzer.analyze(&tr.bottom, nullptr);
    ASSERT_EQ(a.bottom.features.size(), 1u) << "speed " << t.speed_mm_s;
    EXPECT_GT(a.bottom.features[0].angle, 90.0) << "speed " << t.speed_mm_s;
  }
}

TEST(Simulated, LongerHopHasLargerRange) {
  const auto g = DeviceGeometry::standard();
  const Analyzer analyzer;
  const std::vector<std::pair<Stroke, Stroke>> pairs{{{0, 3}, {0, 6}}, {{6, 3}, {6, 0}}, {{0, 1}, {0, 2}}, {{2, 5}, {2, 8}}};
  for (const auto& [short_s, long_s] : pairs) {
    const auto a = synth_strokes_trace({short_s}, g, FrameSpec{}, SimConfig{});
    const auto b = synth_strokes_trace({long_s}, g, FrameSpec{}, SimConfig{});
    const auto fa = analyzer.analyze(&a.bottom, nullptr).bottom.features;
    const auto fb = analyzer.analyze(&b.bottom, nullptr).bottom.features;
    ASSERT_EQ(fa.size(), 1u);
    ASSERT_EQ(fb.size(), 1u);
    EXPECT_GT(fb[0].range, fa[0].range) << short_s.to_string() << " vs " << long_s.to_string();
  }
}
