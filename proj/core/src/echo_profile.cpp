#include "sonarsnoop/echo_profile.hpp"

#include <algorithm>
#include <cmath>

namespace sonarsnoop {

EchoProfileVector correlate(const Samples& trace, const Samples& pulse) {
  if (pulse.empty()) throw InputError("correlate: empty pulse");
  if (trace.size() < pulse.size()) throw InputError("correlate: trace shorter than pulse");
  const std::size_t n = trace.size() - pulse.size() + 1;
  const std::size_t len = pulse.size();
  EchoProfileVector out;
  out.values.resize(n);
  const double* tr = trace.data();
  const double* pu = pulse.data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += tr[i + k] * pu[k];
    out.values[i] = std::abs(s);
  }
  return out;
}

EchoProfileMatrix fold(const EchoProfileVector& vector, std::size_t frame_len) {
  if (frame_len == 0) throw InputError("fold: frame length must be positive");
  if (vector.values.size() < frame_len) throw InputError("fold: vector shorter than one frame");
  const std::size_t cols = vector.values.size() / frame_len;
  EchoProfileMatrix out{Matrix<double>(frame_len, cols)};
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < frame_len; ++r) out.cells(r, c) = vector.values[c * frame_len + r];
  return out;
}

DiffMatrix differentiate(const EchoProfileMatrix& matrix, int delta) {
  const std::size_t cols = matrix.cells.cols();
  if (delta < 1) throw InputError("differentiate: delta must be at least 1");
  if (static_cast<std::size_t>(delta) >= cols)
    throw InputError("differentiate: delta must be smaller than the column count");
  const std::size_t d = static_cast<std::size_t>(delta);
  const std::size_t rows = matrix.cells.rows();
  DiffMatrix out{Matrix<double>(rows, cols - d), delta};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c + d < cols; ++c)
      out.cells(r, c) = matrix.cells(r, c) - matrix.cells(r, c + d);
  return out;
}

std::size_t align_phase(const Samples& trace, const Samples& pulse, std::size_t frame_len) {
  const std::size_t needed = frame_len + pulse.size() - 1;
  Samples head(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(std::min(needed, trace.size())));
  const auto v = correlate(head, pulse);
  const std::size_t n = std::min(frame_len, v.values.size());
  return static_cast<std::size_t>(std::max_element(v.values.begin(), v.values.begin() + static_cast<std::ptrdiff_t>(n)) -
                                  v.values.begin());
}

std::vector<std::size_t> column_argmax(const Matrix<double>& m) {
  std::vector<std::size_t> out(m.cols(), 0);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double best = -INFINITY;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (m(r, c) > best) {
        best = m(r, c);
        out[c] = r;
      }
  }
  return out;
}

}  // namespace sonarsnoop
