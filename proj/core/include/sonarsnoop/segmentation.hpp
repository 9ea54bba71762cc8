#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sonarsnoop/common.hpp"
#include "sonarsnoop/echo_profile.hpp"

namespace sonarsnoop {

struct BinaryMatrix {
  Matrix<std::uint8_t> cells;
  double threshold = 0.0;
};

struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

// Inclusive bounds.
struct BoundingBox {
  int row_min = 0;
  int col_min = 0;
  int row_max = 0;
  int col_max = 0;

  int height() const { return row_max - row_min + 1; }
  int width() const { return col_max - col_min + 1; }
  long area() const { return static_cast<long>(height()) * width(); }
  bool operator==(const BoundingBox&) const = default;
};

struct ConnectedComponent {
  std::vector<Pixel> pixels;
  BoundingBox bbox;

  std::size_t size() const { return pixels.size(); }
};

struct StrokeGroup {
  Mic mic = Mic::Bottom;
  std::vector<ConnectedComponent> components;
  int col_first = 0;
  int col_last = 0;
};

// Percentile of values with linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct);

// cell = 1 iff value > pct-th percentile of all cells.
BinaryMatrix binarize(const DiffMatrix& diff, double pct = 94.0);
BinaryMatrix binarize(const Matrix<double>& values, double pct = 94.0);

struct Labeling {
  BinaryMatrix cleaned;  // only pixels of retained components remain set
  std::vector<ConnectedComponent> components;
};

// 8-connected components with more than min_size pixels, ordered by (col_min, row_min).
Labeling label_components(const BinaryMatrix& binary, std::size_t min_size = 20);

// Fraction of the shorter extent covered by the overlap of [a0,a1] and [b0,b1].
double overlap_fraction(int a0, int a1, int b0, int b1);

// Keeps components seen on both mics (column overlap) and drops the smaller of any
// same-mic pair whose boxes overlap by more than half in both directions.
std::pair<std::vector<ConnectedComponent>, std::vector<ConnectedComponent>> cross_mic_filter(
    const std::vector<ConnectedComponent>& bottom, const std::vector<ConnectedComponent>& top);

// Same-mic duplicate suppression alone (used when only one mic is available).
std::vector<ConnectedComponent> suppress_overlaps(const std::vector<ConnectedComponent>& ccs);

// Single-linkage grouping along the column axis.
std::vector<StrokeGroup> group_strokes(std::vector<ConnectedComponent> ccs, int gap = 80,
                                       Mic mic = Mic::Bottom);

}  // namespace sonarsnoop
