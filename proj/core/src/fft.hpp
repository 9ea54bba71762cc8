#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace sonarsnoop::detail {

using Complex = std::complex<double>;

// Unnormalised DFT; inverse uses the +i exponent. Caller applies any 1/N.
std::vector<Complex> dft(const std::vector<Complex>& in, bool inverse);

// Real input zero-padded (or truncated) to n; returns bins 0..n/2.
std::vector<Complex> rfft(const std::vector<double>& in, std::size_t n);

// Unnormalised forward 2-D DFT of a row-major complex array.
std::vector<Complex> dft2(const std::vector<Complex>& in, std::size_t rows, std::size_t cols);

}  // namespace sonarsnoop::detail
