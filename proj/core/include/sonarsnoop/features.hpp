#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "sonarsnoop/common.hpp"
#include "sonarsnoop/patterns.hpp"
#include "sonarsnoop/segmentation.hpp"

namespace sonarsnoop {

struct GaborBankSpec {
  std::vector<double> orientations_deg;
  double wavelength = 8.0;
  double aspect_ratio = 0.5;
  double bandwidth = 1.0;  // octaves
  int kernel_radius = 16;

  // 36 orientations at 2.5, 7.5, ..., 177.5 degrees.
  static GaborBankSpec standard();
  void validate() const;
  // Gaussian envelope width implied by wavelength and bandwidth.
  double sigma() const;
};

// Complex Gabor filters for every orientation. Angles are measured in the
// (column = x, row = y) image plane, so 90 degrees responds to horizontal lines
// and lines whose row grows with column score above 90.
class GaborBank {
 public:
  explicit GaborBank(GaborBankSpec spec = GaborBankSpec::standard());

  const GaborBankSpec& spec() const { return spec_; }

  // Squared response energy per orientation over the full linear convolution.
  std::vector<double> energies(const Matrix<std::uint8_t>& patch) const;

  // Orientation with the largest energy; exact ties return the mean of the tied angles.
  // Throws NoSignalError for an all-zero patch.
  double orientation(const Matrix<std::uint8_t>& patch) const;

 private:
  struct Spectra;
  std::shared_ptr<const Spectra> spectra_for(std::size_t rows, std::size_t cols) const;

  GaborBankSpec spec_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const Spectra>> cache_;
};

double gabor_orientation(const Matrix<std::uint8_t>& patch, const GaborBank& bank);

// Binary patch covering the component's bounding box, holding only its own pixels.
Matrix<std::uint8_t> component_patch(const ConnectedComponent& cc);

enum class AngleWeighting { BoxArea, PixelCount };

struct FeatureOptions {
  double tie_band_deg = 2.0;
  AngleWeighting weighting = AngleWeighting::BoxArea;
};

struct StrokeFeature {
  Mic mic = Mic::Bottom;
  double angle = 90.0;
  double range = 0.0;
  Direction direction = Direction::Indeterminate;
  int n_components = 0;
  int col_first = 0;
  int col_last = 0;
};

double stroke_angle(const StrokeGroup& group, const GaborBank& bank,
                    AngleWeighting weighting = AngleWeighting::BoxArea);
double stroke_range(const StrokeGroup& group);
Direction direction(double angle_deg, double tie_band_deg = 2.0);

std::vector<StrokeFeature> extract_features(const std::vector<StrokeGroup>& groups,
                                            const GaborBank& bank, const FeatureOptions& options = {});

}  // namespace sonarsnoop
