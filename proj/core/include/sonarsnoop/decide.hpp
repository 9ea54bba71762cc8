#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonarsnoop/classifier.hpp"
#include "sonarsnoop/patterns.hpp"
#include "sonarsnoop/pipeline.hpp"

namespace sonarsnoop {

enum class Strategy { D1, D2, D3 };

// D1.1 both / D1.2 bottom / D1.3 top.
// D2.1 both then bottom / D2.2 both then top / D2.3 bottom / D2.4 top; D3.x likewise.
struct DecisionMode {
  Strategy strategy = Strategy::D2;
  int variant = 1;

  static DecisionMode parse(std::string_view text);
  std::string to_string() const;

  MicMode primary() const;
  std::optional<MicMode> fallback() const;
  // Whether a trace from this mic is required by the mode.
  bool needs(Mic mic) const;

  bool operator==(const DecisionMode&) const = default;
};

struct Candidate {
  int pattern_id = 0;
  int count = 1;
};

struct CandidateSet {
  DecisionMode mode;
  std::vector<Candidate> candidates;  // in rank order
  // Where the set came from: "both", "bottom", "top", "catalog", "exact" or "positional".
  std::string source;
  std::string key;  // signature or stroke sequence that was looked up

  std::size_t size() const { return candidates.size(); }
  bool contains(int pattern_id) const;
  std::vector<int> ids() const;
};

struct MicDirections {
  std::optional<std::vector<Direction>> bottom;
  std::optional<std::vector<Direction>> top;
};

MicDirections directions_of(const Analysis& analysis);

// Strokes visible to the given mic mode, in time order.
std::vector<StrokeObservation> strokes_for(const std::vector<StrokeObservation>& strokes, MicMode mode);

CandidateSet d1_infer(const std::vector<StrokeObservation>& strokes, const StrokeClassifier& classifier,
                      const PatternCatalog& catalog, DecisionMode mode);

CandidateSet d2_infer(const MicDirections& directions, const GroupTables& tables, const PatternCatalog& catalog,
                      DecisionMode mode);

// Stroke positions at which members of a group disagree.
std::vector<int> distinguishing_positions(const PatternCatalog& catalog, const std::vector<int>& group);

std::string group_classifier_key(TableMode table, const std::vector<int>& group, int position);

class GroupClassifierBank {
 public:
  void add(TableMode table, const std::vector<int>& group, int position, StrokeClassifier classifier);
  const StrokeClassifier* find(TableMode table, const std::vector<int>& group, int position) const;
  std::size_t size() const { return models_.size(); }
  const std::map<std::string, StrokeClassifier>& models() const { return models_; }
  void insert(std::string key, StrokeClassifier classifier) { models_.insert_or_assign(std::move(key), std::move(classifier)); }

 private:
  std::map<std::string, StrokeClassifier> models_;
};

CandidateSet d3_infer(const std::vector<StrokeObservation>& strokes, const MicDirections& directions,
                      const GroupTables& tables, const PatternCatalog& catalog, const GroupClassifierBank& bank,
                      DecisionMode mode);

// Default classifier choices for the shipped catalog; anything else gets the medium Gaussian SVM.
ClassifierSpec default_d1_spec(MicMode mode);
ClassifierSpec default_group_spec(TableMode table, const std::vector<int>& group, int position);

struct ModelBundle {
  std::map<MicMode, StrokeClassifier> d1;
  GroupClassifierBank groups;

  std::string serialize() const;
  static ModelBundle deserialize(std::string_view json);
};

struct TrainingPlan {
  std::optional<ClassifierSpec> d1_override;     // replaces the per-mode defaults when set
  std::optional<ClassifierSpec> group_override;  // replaces the per-group defaults when set
  std::uint64_t seed = 1;
};

// Samples may hold NaN for a mic that missed the stroke; each model uses the samples it can.
// Models whose training set is degenerate are skipped.
ModelBundle train_models(const std::vector<LabeledStrokeSample>& samples, const PatternCatalog& catalog,
                         const GroupTables& tables, const TrainingPlan& plan = {});

CandidateSet infer(DecisionMode mode, const Analysis& analysis, const GroupTables& tables,
                   const PatternCatalog& catalog, const ModelBundle* models);

// Descending total count, then ascending pattern id.
std::vector<int> rank_candidates(const std::vector<CandidateSet>& observations);

struct TrialResult {
  int user = 0;
  int pattern = 0;
  CandidateSet set;
};

struct MetricsReport {
  std::string mode;
  std::size_t trials = 0;
  std::size_t catalog_size = 0;
  std::map<int, double> guess_rate_per_user;       // M1
  std::map<int, double> candidates_per_user;       // M2
  std::map<int, double> guess_rate_per_pattern;    // M3
  std::map<int, double> candidates_per_pattern;    // M4
  std::map<int, double> attempts_per_user;         // M5, averaged over the user's patterns
  std::map<int, double> attempts_per_pattern;      // M5, averaged over users
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0, m5 = 0;

  std::string to_json(int indent = 2) const;
  std::string to_table() const;
};

MetricsReport compute_metrics(const std::vector<TrialResult>& results, std::size_t catalog_size);

}  // namespace sonarsnoop
