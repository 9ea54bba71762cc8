#include "sonarsnoop/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace sonarsnoop {

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw InputError("percentile of an empty set");
  if (pct < 0 || pct > 100) throw InputError("percentile must lie in [0, 100]");
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (b - a) * (pos - static_cast<double>(lo));
}

BinaryMatrix binarize(const Matrix<double>& values, double pct) {
  if (values.empty()) throw InputError("binarize: empty matrix");
  BinaryMatrix out;
  out.threshold = percentile(values.data(), pct);
  out.cells = Matrix<std::uint8_t>(values.rows(), values.cols(), 0);
  for (std::size_t i = 0; i < values.size(); ++i)
    out.cells.data()[i] = values.data()[i] > out.threshold ? 1 : 0;
  return out;
}

BinaryMatrix binarize(const DiffMatrix& diff, double pct) { return binarize(diff.cells, pct); }

Labeling label_components(const BinaryMatrix& binary, std::size_t min_size) {
  const int rows = static_cast<int>(binary.cells.rows());
  const int cols = static_cast<int>(binary.cells.cols());
  Labeling out;
  out.cleaned.threshold = binary.threshold;
  out.cleaned.cells = Matrix<std::uint8_t>(binary.cells.rows(), binary.cells.cols(), 0);

  Matrix<std::uint8_t> seen(binary.cells.rows(), binary.cells.cols(), 0);
  std::vector<Pixel> stack;
  // Column-major scan so components come out ordered by their first column.
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      if (!binary.cells(r, c) || seen(r, c)) continue;
      ConnectedComponent cc;
      stack.push_back({r, c});
      seen(r, c) = 1;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        cc.pixels.push_back(p);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = p.row + dr, nc = p.col + dc;
            if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
            if (binary.cells(nr, nc) && !seen(nr, nc)) {
              seen(nr, nc) = 1;
              stack.push_back({nr, nc});
            }
          }
      }
      if (cc.size() <= min_size) continue;
      std::sort(cc.pixels.begin(), cc.pixels.end());
      cc.bbox = {cc.pixels.front().row, c, cc.pixels.front().row, c};
      for (const Pixel& p : cc.pixels) {
        cc.bbox.row_min = std::min(cc.bbox.row_min, p.row);
        cc.bbox.row_max = std::max(cc.bbox.row_max, p.row);
        cc.bbox.col_min = std::min(cc.bbox.col_min, p.col);
        cc.bbox.col_max = std::max(cc.bbox.col_max, p.col);
        out.cleaned.cells(p.row, p.col) = 1;
      }
      out.components.push_back(std::move(cc));
    }
  }
  return out;
}

double overlap_fraction(int a0, int a1, int b0, int b1) {
  const int overlap = std::min(a1, b1) - std::max(a0, b0) + 1;
  if (overlap <= 0) return 0.0;
  const int shorter = std::min(a1 - a0 + 1, b1 - b0 + 1);
  return static_cast<double>(overlap) / static_cast<double>(shorter);
}

namespace {

bool overlaps_any_column(const ConnectedComponent& cc, const std::vector<ConnectedComponent>& others) {
  return std::any_of(others.begin(), others.end(), [&](const ConnectedComponent& o) {
    return cc.bbox.col_min <= o.bbox.col_max && o.bbox.col_min <= cc.bbox.col_max;
  });
}

bool larger_first(const ConnectedComponent& a, const ConnectedComponent& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  if (a.bbox.area() != b.bbox.area()) return a.bbox.area() > b.bbox.area();
  return std::tie(a.bbox.col_min, a.bbox.row_min) < std::tie(b.bbox.col_min, b.bbox.row_min);
}

void sort_by_position(std::vector<ConnectedComponent>& ccs) {
  std::sort(ccs.begin(), ccs.end(), [](const ConnectedComponent& a, const ConnectedComponent& b) {
    return std::tie(a.bbox.col_min, a.bbox.row_min, a.bbox.col_max, a.bbox.row_max) <
           std::tie(b.bbox.col_min, b.bbox.row_min, b.bbox.col_max, b.bbox.row_max);
  });
}

}  // namespace

std::vector<ConnectedComponent> suppress_overlaps(const std::vector<ConnectedComponent>& ccs) {
  std::vector<ConnectedComponent> order(ccs);
  std::sort(order.begin(), order.end(), larger_first);
  std::vector<ConnectedComponent> kept;
  for (auto& cc : order) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const ConnectedComponent& k) {
      return overlap_fraction(cc.bbox.row_min, cc.bbox.row_max, k.bbox.row_min, k.bbox.row_max) > 0.5 &&
             overlap_fraction(cc.bbox.col_min, cc.bbox.col_max, k.bbox.col_min, k.bbox.col_max) > 0.5;
    });
    if (!duplicate) kept.push_back(std::move(cc));
  }
  sort_by_position(kept);
  return kept;
}

std::pair<std::vector<ConnectedComponent>, std::vector<ConnectedComponent>> cross_mic_filter(
    const std::vector<ConnectedComponent>& bottom, const std::vector<ConnectedComponent>& top) {
  std::vector<ConnectedComponent> b, t;
  for (const auto& cc : bottom)
    if (overlaps_any_column(cc, top)) b.push_back(cc);
  for (const auto& cc : top)
    if (overlaps_any_column(cc, bottom)) t.push_back(cc);
  return {suppress_overlaps(b), suppress_overlaps(t)};
}

std::vector<StrokeGroup> group_strokes(std::vector<ConnectedComponent> ccs, int gap, Mic mic) {
  sort_by_position(ccs);
  std::vector<StrokeGroup> groups;
  for (auto& cc : ccs) {
    if (groups.empty() || cc.bbox.col_min - groups.back().col_last > gap) {
      StrokeGroup g;
      g.mic = mic;
      g.col_first = cc.bbox.col_min;
      g.col_last = cc.bbox.col_max;
      groups.push_back(std::move(g));
    }
    StrokeGroup& g = groups.back();
    g.col_last = std::max(g.col_last, cc.bbox.col_max);
    g.components.push_back(std::move(cc));
  }
  return groups;
}

}  // namespace sonarsnoop
