#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "sonarsnoop/echo_profile.hpp"
#include "sonarsnoop/features.hpp"
#include "sonarsnoop/ofdm_signal.hpp"
#include "sonarsnoop/segmentation.hpp"

namespace sonarsnoop {

struct AnalysisConfig {
  FrameSpec frame;
  int delta_bottom = 8;
  int delta_top = 16;
  double percentile = 94.0;
  std::size_t min_component = 20;
  int group_gap = 80;
  GaborBankSpec gabor = GaborBankSpec::standard();
  FeatureOptions features;

  int delta(Mic mic) const { return mic == Mic::Bottom ? delta_bottom : delta_top; }
  void validate() const;
};

// Intermediate products for one microphone, kept for rendering and export.
struct MicStages {
  EchoProfileMatrix profile;
  DiffMatrix diff;
  BinaryMatrix binary;
  Labeling labeling;
};

struct MicAnalysis {
  Mic mic = Mic::Bottom;
  bool present = false;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double threshold = 0.0;
  std::vector<ConnectedComponent> components;  // after cross-mic filtering
  std::vector<StrokeGroup> groups;
  std::vector<StrokeFeature> features;

  std::vector<Direction> directions() const;
};

// One stroke as seen by whichever mics registered it.
struct StrokeObservation {
  std::optional<StrokeFeature> bottom;
  std::optional<StrokeFeature> top;
};

struct Analysis {
  MicAnalysis bottom;
  MicAnalysis top;
  std::vector<StrokeObservation> strokes;

  const MicAnalysis& mic(Mic m) const { return m == Mic::Bottom ? bottom : top; }
};

// Pairs bottom and top strokes whose column spans overlap.
std::vector<StrokeObservation> align_strokes(const std::vector<StrokeFeature>& bottom,
                                             const std::vector<StrokeFeature>& top);

class Analyzer {
 public:
  explicit Analyzer(AnalysisConfig config = {});

  const AnalysisConfig& config() const { return config_; }
  const Samples& pulse() const { return pulse_; }
  const GaborBank& bank() const { return *bank_; }

  MicStages stages(const Samples& trace, Mic mic) const;

  // Either trace may be null; when both are given they must have equal length.
  Analysis analyze(const Samples* bottom, const Samples* top) const;

 private:
  AnalysisConfig config_;
  Samples pulse_;
  std::shared_ptr<const GaborBank> bank_;
};

}  // namespace sonarsnoop
