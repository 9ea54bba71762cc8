#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace sonarsnoop::detail {

namespace {

// FFTW plan creation and destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanGuard {
  fftw_plan plan = nullptr;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

}  // namespace

std::vector<Complex> dft(const std::vector<Complex>& in, bool inverse) {
  const int n = static_cast<int>(in.size());
  std::vector<Complex> out(in.size());
  if (n == 0) return out;
  std::vector<Complex> buf(in);
  auto* src = reinterpret_cast<fftw_complex*>(buf.data());
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  PlanGuard g;
  {
    std::lock_guard lock(planner_mutex());
    g.plan = fftw_plan_dft_1d(n, src, dst, inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(g.plan);
  return out;
}

std::vector<Complex> rfft(const std::vector<double>& in, std::size_t n) {
  std::vector<double> buf(n, 0.0);
  std::copy_n(in.begin(), std::min(n, in.size()), buf.begin());
  std::vector<Complex> out(n / 2 + 1);
  PlanGuard g;
  {
    std::lock_guard lock(planner_mutex());
    g.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.data(),
                                  reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(g.plan);
  return out;
}

std::vector<Complex> dft2(const std::vector<Complex>& in, std::size_t rows, std::size_t cols) {
  std::vector<Complex> buf(in);
  std::vector<Complex> out(rows * cols);
  PlanGuard g;
  {
    std::lock_guard lock(planner_mutex());
    g.plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                              reinterpret_cast<fftw_complex*>(buf.data()),
                              reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(g.plan);
  return out;
}

}  // namespace sonarsnoop::detail
