#include "sonarsnoop/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

namespace sonarsnoop {

using nlohmann::ordered_json;

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct MicSet {
  bool bottom = true;
  bool top = true;
  auto operator<=>(const MicSet&) const = default;
};

MicSet mics_for(const DecisionMode& m) { return {m.needs(Mic::Bottom), m.needs(Mic::Top)}; }

PatternTrace simulate_trace(const RunConfig& config, const std::vector<Stroke>& strokes, const PatternTiming& timing,
                            std::uint64_t seed) {
  SimConfig sim = config.sim_config();
  sim.seed = seed;
  if (config.snr_db)
    return synth_strokes_trace_snr(strokes, config.geometry, config.frame, sim, timing, *config.snr_db);
  return synth_strokes_trace(strokes, config.geometry, config.frame, sim, timing);
}

constexpr std::uint64_t kTrainStream = 0x747261696eULL;
constexpr std::uint64_t kTestStream = 0x74657374ULL;

}  // namespace

std::vector<SyntheticUser> make_users(const ExperimentSettings& s, std::uint64_t seed, int count,
                                      std::uint64_t stream) {
  std::vector<SyntheticUser> users;
  for (int u = 0; u < count; ++u) {
    std::mt19937_64 rng(mix_seed(mix_seed(seed, stream), static_cast<std::uint64_t>(u)));
    SyntheticUser user;
    user.id = u + 1;
    user.speed_mm_s = uniform(rng, s.speed_min, s.speed_max);
    user.pause_s = uniform(rng, s.pause_min, s.pause_max);
    users.push_back(user);
  }
  return users;
}

PatternTiming attempt_timing(const SyntheticUser& user, const ExperimentSettings& s, const PatternTiming& base,
                             std::size_t n_strokes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PatternTiming t = base;
  t.speed_mm_s = user.speed_mm_s;
  t.pause_s = user.pause_s;
  t.speed_scale.clear();
  t.pause_scale.clear();
  for (std::size_t i = 0; i < n_strokes; ++i) {
    t.speed_scale.push_back(1.0 + uniform(rng, -s.speed_jitter, s.speed_jitter));
    t.pause_scale.push_back(1.0 + uniform(rng, -s.pause_jitter, s.pause_jitter));
  }
  t.point_offsets.clear();
  for (int p = 0; p < 9; ++p)
    t.point_offsets.push_back({uniform(rng, -s.touch_jitter_mm, s.touch_jitter_mm),
                               uniform(rng, -s.touch_jitter_mm, s.touch_jitter_mm)});
  return t;
}

Analysis simulate_and_analyze(const RunConfig& config, const Analyzer& analyzer, const std::vector<Stroke>& strokes,
                              const PatternTiming& timing, std::uint64_t seed) {
  const PatternTrace trace = simulate_trace(config, strokes, timing, seed);
  return analyzer.analyze(&trace.bottom, &trace.top);
}

std::vector<LabeledStrokeSample> simulate_training_corpus(const RunConfig& config, const PatternCatalog& catalog) {
  const ExperimentSettings& s = config.experiment;
  const Analyzer analyzer(config.analysis_config());
  const auto users = make_users(s, config.seed, 5, kTrainStream);
  const auto& vocab = catalog.vocabulary();
  const std::size_t per = static_cast<std::size_t>(s.train_per_stroke);
  std::vector<std::optional<LabeledStrokeSample>> slots(vocab.size() * per);
  parallel_for(slots.size(), s.threads, [&](std::size_t i) {
    const std::size_t v = i / per, k = i % per;
    const std::uint64_t seed = mix_seed(mix_seed(config.seed, kTrainStream + 1), i);
    const PatternTiming timing = attempt_timing(users[k % users.size()], s, config.timing, 1, seed);
    const Analysis a = simulate_and_analyze(config, analyzer, {vocab[v]}, timing, mix_seed(seed, 1));
    if (a.strokes.size() != 1) return;  // split or missed strokes would carry the wrong label
    const auto& o = a.strokes[0];
    LabeledStrokeSample sample;
    sample.stroke_id = static_cast<int>(v + 1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    sample.angle_bottom = o.bottom ? o.bottom->angle : nan;
    sample.range_bottom = o.bottom ? o.bottom->range : nan;
    sample.angle_top = o.top ? o.top->angle : nan;
    sample.range_top = o.top ? o.top->range : nan;
    slots[i] = sample;
  });
  std::vector<LabeledStrokeSample> out;
  for (auto& s_opt : slots)
    if (s_opt) out.push_back(*s_opt);
  return out;
}

std::vector<TrialResult> ExperimentResult::results(const DecisionMode& mode) const {
  std::vector<TrialResult> out;
  const std::string key = mode.to_string();
  for (const auto& t : trials) {
    const auto it = t.sets.find(key);
    if (it != t.sets.end()) out.push_back({t.user, t.pattern, it->second});
  }
  return out;
}

ExperimentResult run_experiment(const RunConfig& config, const std::vector<DecisionMode>& modes,
                                const ModelBundle* models, const ProgressFn& progress) {
  config.validate();
  if (modes.empty()) throw ConfigError("experiment: no decision mode selected");
  const PatternCatalog catalog = config.catalog();
  if (catalog.size() == 0) throw ConfigError("experiment: empty catalog");
  const GroupTables tables = GroupTables::build(catalog, config.geometry);
  const Analyzer analyzer(config.analysis_config());

  ModelBundle trained;
  const bool need_models = std::any_of(modes.begin(), modes.end(), [](const DecisionMode& m) {
    return m.strategy != Strategy::D2;
  });
  if (need_models && !models) {
    trained = train_models(simulate_training_corpus(config, catalog), catalog, tables, config.training_plan());
    models = &trained;
  }

  std::vector<MicSet> mic_sets;
  for (const auto& m : modes)
    if (std::find(mic_sets.begin(), mic_sets.end(), mics_for(m)) == mic_sets.end()) mic_sets.push_back(mics_for(m));

  const ExperimentSettings& s = config.experiment;
  const auto users = make_users(s, config.seed, s.users, kTestStream);
  const auto& patterns = catalog.patterns();
  const std::size_t reps = static_cast<std::size_t>(s.reps);
  const std::size_t total = users.size() * patterns.size() * reps;

  ExperimentResult result;
  result.modes = modes;
  result.trials.resize(total);
  std::mutex progress_mutex;
  std::size_t done = 0;

  parallel_for(total, s.threads, [&](std::size_t i) {
    const std::size_t u = i / (patterns.size() * reps);
    const std::size_t p = (i / reps) % patterns.size();
    const std::size_t r = i % reps;
    const UnlockPattern& pattern = patterns[p];
    const auto strokes = decompose(pattern);
    const std::uint64_t seed = mix_seed(mix_seed(config.seed, kTestStream + 1), i);
    const PatternTiming timing = attempt_timing(users[u], s, config.timing, strokes.size(), seed);
    const PatternTrace trace = simulate_trace(config, strokes, timing, mix_seed(seed, 1));

    TrialRecord rec;
    rec.user = users[u].id;
    rec.pattern = pattern.id();
    rec.rep = static_cast<int>(r) + 1;
    rec.speed_mm_s = users[u].speed_mm_s;
    std::map<MicSet, Analysis> analyses;
    for (const MicSet& ms : mic_sets)
      analyses.emplace(ms, analyzer.analyze(ms.bottom ? &trace.bottom : nullptr, ms.top ? &trace.top : nullptr));
    const auto both_it = analyses.find(MicSet{true, true});
    const Analysis& widest = both_it != analyses.end() ? both_it->second : analyses.begin()->second;
    if (widest.bottom.present) rec.bottom_signature = format_directions(widest.bottom.directions());
    if (widest.top.present) rec.top_signature = format_directions(widest.top.directions());
    rec.observed_strokes = widest.strokes.size();
    for (const auto& m : modes)
      rec.sets.emplace(m.to_string(), infer(m, analyses.at(mics_for(m)), tables, catalog, models));
    result.trials[i] = std::move(rec);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(++done, total);
    }
  });

  for (const auto& m : modes) result.metrics.emplace(m.to_string(), compute_metrics(result.results(m), catalog.size()));
  return result;
}

std::string config_json(const RunConfig& config) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : config.entries()) j[k] = v;
  return j.dump();
}

std::string experiment_report_json(const RunConfig& config, const ExperimentResult& result, bool include_trials) {
  ordered_json j;
  j["report"] = "experiment";
  j["seed"] = config.seed;
  j["config"] = ordered_json::parse(config_json(config));
  ordered_json modes = ordered_json::array();
  for (const auto& m : result.modes) modes.push_back(m.to_string());
  j["modes"] = modes;
  ordered_json metrics = ordered_json::object();
  for (const auto& m : result.modes) {
    const std::string key = m.to_string();
    metrics[key] = ordered_json::parse(result.metrics.at(key).to_json(-1));
  }
  j["metrics"] = metrics;
  if (include_trials) {
    ordered_json trials = ordered_json::array();
    for (const auto& t : result.trials) {
      ordered_json tj;
      tj["user"] = t.user;
      tj["pattern"] = t.pattern;
      tj["rep"] = t.rep;
      tj["speed_mm_s"] = t.speed_mm_s;
      tj["observed_strokes"] = t.observed_strokes;
      tj["bottom"] = t.bottom_signature;
      tj["top"] = t.top_signature;
      ordered_json sets = ordered_json::object();
      for (const auto& m : result.modes) {
        const auto& cs = t.sets.at(m.to_string());
        ordered_json cj;
        cj["source"] = cs.source;
        cj["key"] = cs.key;
        cj["candidates"] = cs.ids();
        cj["hit"] = cs.contains(t.pattern);
        sets[m.to_string()] = cj;
      }
      tj["sets"] = sets;
      trials.push_back(tj);
    }
    j["trials"] = trials;
  }
  return j.dump(2) + "\n";
}

}  // namespace sonarsnoop
