#pragma once

#include <cstddef>

#include "sonarsnoop/common.hpp"

namespace sonarsnoop {

struct EchoProfileVector {
  std::vector<double> values;
};

// rows = frame length (delay axis), cols = frames (time axis).
struct EchoProfileMatrix {
  Matrix<double> cells;
};

struct DiffMatrix {
  Matrix<double> cells;
  int delta = 0;
};

// |sum_k trace[i+k] * pulse[k]| for every full overlap. Throws InputError if the
// trace is shorter than the pulse.
EchoProfileVector correlate(const Samples& trace, const Samples& pulse);

// matrix(r, c) = vector[c * frame_len + r]; a trailing partial frame is dropped.
EchoProfileMatrix fold(const EchoProfileVector& vector, std::size_t frame_len);

// diff(r, c) = matrix(r, c) - matrix(r, c + delta).
DiffMatrix differentiate(const EchoProfileMatrix& matrix, int delta);

// Phase offset of the first pulse in a real recording: argmax of the
// correlation over the first frame_len lags.
std::size_t align_phase(const Samples& trace, const Samples& pulse, std::size_t frame_len);

// Row of the column maximum for every column.
std::vector<std::size_t> column_argmax(const Matrix<double>& m);

}  // namespace sonarsnoop
