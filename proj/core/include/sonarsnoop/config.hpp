#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sonarsnoop/classifier.hpp"
#include "sonarsnoop/decide.hpp"
#include "sonarsnoop/pipeline.hpp"
#include "sonarsnoop/sonar_sim.hpp"

namespace sonarsnoop {

// Synthetic user population for experiments.
struct ExperimentSettings {
  int users = 10;
  int reps = 5;
  double speed_min = 150.0;     // mm/s, per-user base speed drawn uniformly
  double speed_max = 350.0;
  double speed_jitter = 0.10;   // relative per-stroke speed variation
  double pause_min = 0.6;       // s, per-user base pause drawn uniformly
  double pause_max = 0.8;
  double pause_jitter = 0.10;
  double touch_jitter_mm = 1.0; // per-attempt offset of every grid point
  int train_per_stroke = 35;    // simulated training strokes per vocabulary stroke
  int threads = 0;              // 0 = hardware concurrency
};

struct RunConfig {
  FrameSpec frame;
  DeviceGeometry geometry = DeviceGeometry::standard();
  SimConfig sim;
  PatternTiming timing;
  std::optional<double> snr_db;  // overrides sim.noise_std when set
  AnalysisConfig analysis;       // its frame is replaced by `frame`
  DecisionMode mode;
  std::optional<std::string> d1_classifier;     // preset name overriding the defaults
  std::optional<std::string> group_classifier;  // preset name overriding the defaults
  ExperimentSettings experiment;
  std::string catalog_path;  // empty = built-in catalog
  std::uint64_t seed = 1;

  // Sets one dotted key; throws ConfigError for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  // Applies "key = value" lines; '#' starts a comment.
  void apply_text(std::string_view text);
  void load_file(const std::string& path);

  // Every key with its resolved value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;

  AnalysisConfig analysis_config() const;
  SimConfig sim_config() const;
  PatternCatalog catalog() const;
  TrainingPlan training_plan() const;

  void validate() const;

  static std::vector<std::string> keys();
};

// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace sonarsnoop
