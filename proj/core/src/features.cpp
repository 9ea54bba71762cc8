#include "sonarsnoop/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace sonarsnoop {

namespace {

constexpr std::size_t kCacheLimit = 24;

std::size_t round_up(std::size_t n, std::size_t step) { return (n + step - 1) / step * step; }

}  // namespace

GaborBankSpec GaborBankSpec::standard() {
  GaborBankSpec s;
  for (int k = 0; k < 36; ++k) s.orientations_deg.push_back(2.5 + 5.0 * k);
  return s;
}

void GaborBankSpec::validate() const {
  if (orientations_deg.empty()) throw ConfigError("gabor: at least one orientation required");
  for (std::size_t i = 0; i < orientations_deg.size(); ++i) {
    const double a = orientations_deg[i];
    if (a <= 0 || a >= 180) throw ConfigError("gabor: orientations must lie in (0, 180)");
    if (i && a <= orientations_deg[i - 1]) throw ConfigError("gabor: orientations must increase");
  }
  if (wavelength < 2) throw ConfigError("gabor: wavelength must be at least 2 pixels");
  if (aspect_ratio <= 0 || bandwidth <= 0 || kernel_radius < 1)
    throw ConfigError("gabor: aspect ratio, bandwidth and radius must be positive");
}

double GaborBankSpec::sigma() const {
  const double b = std::pow(2.0, bandwidth);
  return wavelength / std::numbers::pi * std::sqrt(std::log(2.0) / 2.0) * (b + 1.0) / (b - 1.0);
}

struct GaborBank::Spectra {
  std::vector<std::vector<double>> power;  // |G(f)|^2 per orientation
};

GaborBank::GaborBank(GaborBankSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

std::shared_ptr<const GaborBank::Spectra> GaborBank::spectra_for(std::size_t rows, std::size_t cols) const {
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find({rows, cols});
    if (it != cache_.end()) return it->second;
  }
  auto spectra = std::make_shared<Spectra>();
  const int r = spec_.kernel_radius;
  const double sigma = spec_.sigma();
  const double gamma2 = spec_.aspect_ratio * spec_.aspect_ratio;
  const int side = 2 * r + 1;
  for (double deg : spec_.orientations_deg) {
    const double th = deg * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    std::vector<detail::Complex> kernel(static_cast<std::size_t>(side * side));
    double mean_re = 0.0, env_sum = 0.0;
    std::vector<double> env(kernel.size());
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x) {
        const double xp = x * c + y * s;
        const double yp = -x * s + y * c;
        const std::size_t i = static_cast<std::size_t>((y + r) * side + (x + r));
        env[i] = std::exp(-(xp * xp + gamma2 * yp * yp) / (2.0 * sigma * sigma));
        const double phase = 2.0 * std::numbers::pi * xp / spec_.wavelength;
        kernel[i] = {env[i] * std::cos(phase), env[i] * std::sin(phase)};
        mean_re += kernel[i].real();
        env_sum += env[i];
      }
    // Remove the DC response of the even part so flat regions score zero.
    const double k = mean_re / env_sum;
    for (std::size_t i = 0; i < kernel.size(); ++i) kernel[i] -= env[i] * k;

    std::vector<detail::Complex> padded(rows * cols);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        padded[static_cast<std::size_t>(y) * cols + static_cast<std::size_t>(x)] =
            kernel[static_cast<std::size_t>(y * side + x)];
    const auto spec = detail::dft2(padded, rows, cols);
    std::vector<double> power(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) power[i] = std::norm(spec[i]);
    spectra->power.push_back(std::move(power));
  }
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() >= kCacheLimit) cache_.clear();
  cache_.emplace(std::make_pair(rows, cols), spectra);
  return spectra;
}

std::vector<double> GaborBank::energies(const Matrix<std::uint8_t>& patch) const {
  const std::size_t side = static_cast<std::size_t>(2 * spec_.kernel_radius + 1);
  const std::size_t rows = round_up(patch.rows() + side - 1, 16);
  const std::size_t cols = round_up(patch.cols() + side - 1, 16);
  std::vector<detail::Complex> padded(rows * cols);
  for (std::size_t r = 0; r < patch.rows(); ++r)
    for (std::size_t c = 0; c < patch.cols(); ++c) padded[r * cols + c] = patch(r, c) ? 1.0 : 0.0;
  const auto p = detail::dft2(padded, rows, cols);
  const auto spectra = spectra_for(rows, cols);
  std::vector<double> out;
  out.reserve(spectra->power.size());
  const double norm = 1.0 / static_cast<double>(rows * cols);
  for (const auto& g : spectra->power) {
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) e += std::norm(p[i]) * g[i];
    out.push_back(e * norm);
  }
  return out;
}

double GaborBank::orientation(const Matrix<std::uint8_t>& patch) const {
  if (patch.empty() || std::none_of(patch.data().begin(), patch.data().end(), [](auto v) { return v != 0; }))
    throw NoSignalError("gabor: patch has no set pixels");
  const auto e = energies(patch);
  const double best = *std::max_element(e.begin(), e.end());
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] >= best * (1.0 - 1e-9)) {
      sum += spec_.orientations_deg[i];
      ++n;
    }
  return sum / n;
}

double gabor_orientation(const Matrix<std::uint8_t>& patch, const GaborBank& bank) {
  return bank.orientation(patch);
}

Matrix<std::uint8_t> component_patch(const ConnectedComponent& cc) {
  Matrix<std::uint8_t> patch(static_cast<std::size_t>(cc.bbox.height()),
                             static_cast<std::size_t>(cc.bbox.width()), 0);
  for (const Pixel& p : cc.pixels)
    patch(static_cast<std::size_t>(p.row - cc.bbox.row_min), static_cast<std::size_t>(p.col - cc.bbox.col_min)) = 1;
  return patch;
}

double stroke_angle(const StrokeGroup& group, const GaborBank& bank, AngleWeighting weighting) {
  double num = 0.0, den = 0.0;
  for (const auto& cc : group.components) {
    if (cc.pixels.empty()) continue;
    const double w = weighting == AngleWeighting::BoxArea ? static_cast<double>(cc.bbox.area())
                                                          : static_cast<double>(cc.size());
    num += w * bank.orientation(component_patch(cc));
    den += w;
  }
  if (den <= 0) throw NoSignalError("stroke group has no usable component");
  return num / den;
}

double stroke_range(const StrokeGroup& group) {
  if (group.components.empty()) throw InputError("stroke_range: empty group");
  double sum = 0.0;
  for (const auto& cc : group.components) sum += cc.bbox.height();
  return sum;
}

Direction direction(double angle_deg, double tie_band_deg) {
  if (angle_deg > 90.0 + tie_band_deg) return Direction::Away;
  if (angle_deg < 90.0 - tie_band_deg) return Direction::Towards;
  return Direction::Indeterminate;
}

std::vector<StrokeFeature> extract_features(const std::vector<StrokeGroup>& groups,
                                            const GaborBank& bank, const FeatureOptions& options) {
  std::vector<StrokeFeature> out;
  for (const auto& g : groups) {
    StrokeFeature f;
    f.mic = g.mic;
    f.angle = stroke_angle(g, bank, options.weighting);
    f.range = stroke_range(g);
    f.direction = direction(f.angle, options.tie_band_deg);
    f.n_components = static_cast<int>(g.components.size());
    f.col_first = g.col_first;
    f.col_last = g.col_last;
    out.push_back(f);
  }
  return out;
}

}  // namespace sonarsnoop
