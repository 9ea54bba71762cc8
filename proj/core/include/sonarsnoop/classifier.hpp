#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sonarsnoop/common.hpp"

namespace sonarsnoop {

struct StrokeObservation;

enum class Algorithm { GaussianSvm, QuadraticSvm, Knn, BaggedTrees };
enum class KnnMetric { Euclidean, Cosine };
enum class KnnWeighting { Equal, SquaredInverse };

struct ClassifierSpec {
  std::string name = "medium_gaussian_svm";
  Algorithm algorithm = Algorithm::GaussianSvm;
  double kernel_scale = 2.2;  // 0 selects sqrt(feature count)
  double box_constraint = 1.0;
  int neighbors = 10;
  KnnMetric metric = KnnMetric::Euclidean;
  KnnWeighting weighting = KnnWeighting::Equal;
  int max_splits = 11;
  int learners = 30;
  std::uint64_t seed = 1;

  // Named presets: medium_gaussian_svm, coarse_gaussian_svm, fine_gaussian_svm,
  // quadratic_svm, fine_knn, medium_knn, cosine_knn, weighted_knn, bagged_trees.
  static ClassifierSpec preset(std::string_view name);
  static std::vector<std::string> preset_names();
  void validate() const;
};

enum class MicMode { Both, Bottom, Top };

std::string_view to_string(MicMode mode);
MicMode parse_mic_mode(std::string_view text);

struct LabeledStrokeSample {
  int stroke_id = 0;
  double angle_bottom = 0.0;
  double range_bottom = 0.0;
  double angle_top = 0.0;
  double range_top = 0.0;
};

std::vector<double> feature_vector(const LabeledStrokeSample& sample, MicMode mode);
// Empty when a required mic did not register the stroke.
std::optional<std::vector<double>> feature_vector(const StrokeObservation& stroke, MicMode mode);

struct Prediction {
  int label = 0;
  std::vector<std::pair<int, double>> scores;  // per class, descending label order not implied
};

class StrokeClassifier {
 public:
  StrokeClassifier();
  StrokeClassifier(const StrokeClassifier&);
  StrokeClassifier& operator=(const StrokeClassifier&);
  StrokeClassifier(StrokeClassifier&&) noexcept;
  StrokeClassifier& operator=(StrokeClassifier&&) noexcept;
  ~StrokeClassifier();

  // Throws TrainingError unless at least two classes with two samples each are present.
  static StrokeClassifier train(const std::vector<LabeledStrokeSample>& samples, const ClassifierSpec& spec,
                                MicMode mode);

  Prediction predict(const std::vector<double>& features) const;
  int predict_label(const std::vector<double>& features) const { return predict(features).label; }

  const ClassifierSpec& spec() const;
  MicMode mic_mode() const;
  const std::vector<int>& classes() const;

  std::string serialize() const;
  static StrokeClassifier deserialize(std::string_view json);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double accuracy(const StrokeClassifier& model, const std::vector<LabeledStrokeSample>& samples);

// Stratified k-fold cross-validation; returns one accuracy per fold.
std::vector<double> cross_validate(const std::vector<LabeledStrokeSample>& samples, const ClassifierSpec& spec,
                                   MicMode mode, int folds = 5, std::uint64_t seed = 1);

}  // namespace sonarsnoop
