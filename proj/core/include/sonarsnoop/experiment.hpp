#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sonarsnoop/config.hpp"
#include "sonarsnoop/decide.hpp"

namespace sonarsnoop {

struct SyntheticUser {
  int id = 0;
  double speed_mm_s = 200.0;
  double pause_s = 0.6;
};

// Users are drawn from the experiment settings; `stream` separates populations
// (e.g. training users from test users) under one master seed.
std::vector<SyntheticUser> make_users(const ExperimentSettings& settings, std::uint64_t seed, int count,
                                      std::uint64_t stream = 0);

// Per-attempt timing: the user's base speed and pause with per-stroke jitter, plus touch offsets.
PatternTiming attempt_timing(const SyntheticUser& user, const ExperimentSettings& settings,
                             const PatternTiming& base, std::size_t n_strokes, std::uint64_t seed);

// Simulates the strokes with the run's noise settings and analyses both mics.
Analysis simulate_and_analyze(const RunConfig& config, const Analyzer& analyzer, const std::vector<Stroke>& strokes,
                              const PatternTiming& timing, std::uint64_t seed);

// Single vocabulary strokes drawn by training users; features of a mic that missed
// the stroke are NaN.
std::vector<LabeledStrokeSample> simulate_training_corpus(const RunConfig& config, const PatternCatalog& catalog);

struct TrialRecord {
  int user = 0;
  int pattern = 0;
  int rep = 0;
  double speed_mm_s = 0.0;
  std::string bottom_signature;  // "" when the mic is not used
  std::string top_signature;
  std::size_t observed_strokes = 0;
  std::map<std::string, CandidateSet> sets;  // by mode
};

struct ExperimentResult {
  std::vector<DecisionMode> modes;
  std::vector<TrialRecord> trials;
  std::map<std::string, MetricsReport> metrics;  // by mode

  std::vector<TrialResult> results(const DecisionMode& mode) const;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs users x catalog x reps trials and evaluates every mode on the same traces.
// Models are trained from a simulated corpus when a D1/D3 mode needs them and none are given.
ExperimentResult run_experiment(const RunConfig& config, const std::vector<DecisionMode>& modes,
                                const ModelBundle* models = nullptr, const ProgressFn& progress = {});

// Deterministic JSON report with the resolved configuration embedded.
std::string experiment_report_json(const RunConfig& config, const ExperimentResult& result,
                                   bool include_trials = true);

// Resolved configuration as a JSON object text, used by every report.
std::string config_json(const RunConfig& config);

}  // namespace sonarsnoop
