#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sonarsnoop/config.hpp"
#include "sonarsnoop/decide.hpp"
#include "sonarsnoop/experiment.hpp"
#include "sonarsnoop/io.hpp"
#include "sonarsnoop/ofdm_signal.hpp"
#include "sonarsnoop/patterns.hpp"
#include "sonarsnoop/pipeline.hpp"
#include "sonarsnoop/sonar_sim.hpp"

namespace sonarsnoop::cli {

namespace {

using nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> snr;
  std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_mode) {
  cmd->add_option("-c,--config", o.config_file, "Key-value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.sets, "Override a configuration key (key=value); repeatable");
  cmd->add_option("--seed", o.seed, "Master random seed");
  cmd->add_option("--snr", o.snr, "Additive noise SNR in dB, or 'none'");
  if (with_mode) cmd->add_option("-m,--mode", o.mode, "Decision mode, e.g. D2.1");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig c;
  if (!o.config_file.empty()) c.load_file(o.config_file);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.snr) c.set("sim.snr_db", *o.snr);
  if (o.mode) c.set("decision.mode", *o.mode);
  c.validate();
  return c;
}

ordered_json parse_json(const std::string& text) { return ordered_json::parse(text); }

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else write_text(path, text);
}

// ---- trace input --------------------------------------------------------------

struct TraceOptions {
  std::string wav;
  std::string wav_mic = "bottom";
  std::string bottom;
  std::string top;
  std::optional<int> simulate;
  std::optional<double> speed;
};

void add_trace_options(CLI::App* cmd, TraceOptions& t) {
  cmd->add_option("--wav", t.wav, "Stereo WAV (channel 0 bottom, channel 1 top) or mono WAV")
      ->check(CLI::ExistingFile);
  cmd->add_option("--wav-mic", t.wav_mic, "Mic recorded by a mono --wav file")
      ->check(CLI::IsMember({"bottom", "top"}));
  cmd->add_option("--bottom", t.bottom, "Mono WAV from the bottom mic")->check(CLI::ExistingFile);
  cmd->add_option("--top", t.top, "Mono WAV from the top mic")->check(CLI::ExistingFile);
  cmd->add_option("--simulate", t.simulate, "Simulate a catalog pattern instead of reading files");
  cmd->add_option("--speed", t.speed, "Finger speed in mm/s for --simulate");
}

struct Traces {
  std::optional<Samples> bottom;
  std::optional<Samples> top;
  std::optional<int> truth;
  std::string source;
};

Samples mono_channel(const WavData& w, const std::string& path, const RunConfig& c) {
  if (w.channels.size() != 1) throw UsageError(path + " must be a mono WAV");
  if (w.sample_rate != static_cast<int>(c.frame.sample_rate))
    throw InputError(path + ": sample rate " + std::to_string(w.sample_rate) + " does not match the configuration");
  return w.channels[0];
}

Traces load_traces(const TraceOptions& t, RunConfig& c) {
  Traces out;
  const int sources = !t.wav.empty() + (!t.bottom.empty() || !t.top.empty()) + t.simulate.has_value();
  if (sources == 0) throw UsageError("give --wav, --bottom/--top or --simulate");
  if (sources > 1) throw UsageError("--wav, --bottom/--top and --simulate are mutually exclusive");
  if (t.simulate) {
    const PatternCatalog catalog = c.catalog();
    if (!catalog.contains(*t.simulate)) throw UsageError("pattern " + std::to_string(*t.simulate) + " is not in the catalog");
    if (t.speed) c.timing.speed_mm_s = *t.speed;
    c.validate();
    SimConfig sim = c.sim_config();
    const auto& p = catalog.by_id(*t.simulate);
    const PatternTrace trace = c.snr_db
                                   ? synth_pattern_trace_snr(p, c.geometry, c.frame, sim, c.timing, *c.snr_db)
                                   : synth_pattern_trace(p, c.geometry, c.frame, sim, c.timing);
    out.bottom = trace.bottom;
    out.top = trace.top;
    out.truth = *t.simulate;
    out.source = "simulated pattern " + std::to_string(*t.simulate);
    return out;
  }
  if (!t.wav.empty()) {
    const WavData w = read_wav(t.wav);
    if (w.sample_rate != static_cast<int>(c.frame.sample_rate))
      throw InputError(t.wav + ": sample rate " + std::to_string(w.sample_rate) + " does not match the configuration");
    if (w.channels.size() == 2) {
      out.bottom = w.channels[0];
      out.top = w.channels[1];
    } else if (t.wav_mic == "top") {
      out.top = w.channels[0];
    } else {
      out.bottom = w.channels[0];
    }
    out.source = t.wav;
    return out;
  }
  if (!t.bottom.empty()) out.bottom = mono_channel(read_wav(t.bottom), t.bottom, c);
  if (!t.top.empty()) out.top = mono_channel(read_wav(t.top), t.top, c);
  out.source = t.bottom.empty() ? t.top : t.top.empty() ? t.bottom : t.bottom + "," + t.top;
  return out;
}

// Drops traces the mode does not use and rejects modes whose mics are missing.
void fit_to_mode(Traces& tr, const DecisionMode& mode) {
  for (Mic m : {Mic::Bottom, Mic::Top}) {
    auto& slot = m == Mic::Bottom ? tr.bottom : tr.top;
    if (mode.needs(m) && !slot)
      throw UsageError("mode " + mode.to_string() + " needs the " + std::string(to_string(m)) + " mic trace");
    if (!mode.needs(m)) slot.reset();
  }
}

// ---- JSON views -----------------------------------------------------------------

ordered_json feature_json(const StrokeFeature& f) {
  ordered_json j;
  j["angle_deg"] = f.angle;
  j["range_rows"] = f.range;
  j["direction"] = std::string(1, direction_symbol(f.direction));
  j["components"] = f.n_components;
  j["col_first"] = f.col_first;
  j["col_last"] = f.col_last;
  return j;
}

ordered_json mic_json(const MicAnalysis& m) {
  ordered_json j;
  j["present"] = m.present;
  if (!m.present) return j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["threshold"] = m.threshold;
  j["signature"] = format_directions(m.directions());
  ordered_json groups = ordered_json::array();
  for (std::size_t g = 0; g < m.groups.size(); ++g) {
    ordered_json gj;
    gj["col_first"] = m.groups[g].col_first;
    gj["col_last"] = m.groups[g].col_last;
    ordered_json ccs = ordered_json::array();
    for (const auto& cc : m.groups[g].components)
      ccs.push_back({{"row_min", cc.bbox.row_min}, {"row_max", cc.bbox.row_max}, {"col_min", cc.bbox.col_min},
                     {"col_max", cc.bbox.col_max}, {"pixels", cc.size()}});
    gj["components"] = ccs;
    if (g < m.features.size()) gj["feature"] = feature_json(m.features[g]);
    groups.push_back(gj);
  }
  j["groups"] = groups;
  return j;
}

ordered_json candidates_json(const CandidateSet& s) {
  ordered_json j;
  j["mode"] = s.mode.to_string();
  j["source"] = s.source;
  j["key"] = s.key;
  ordered_json c = ordered_json::array();
  for (const auto& cand : s.candidates) c.push_back({{"pattern", cand.pattern_id}, {"count", cand.count}});
  j["candidates"] = c;
  return j;
}

std::string header(const RunConfig& c, const std::string& kind) {
  ordered_json j;
  j["report"] = kind;
  j["seed"] = c.seed;
  j["config"] = parse_json(config_json(c));
  return j.dump();
}

std::optional<ModelBundle> load_models(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return ModelBundle::deserialize(read_text(path));
}

// ---- subcommands ------------------------------------------------------------------

struct GenOptions {
  CommonOptions common;
  std::string out;
  std::optional<long long> frames;
  double duration = 1.0;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  const RunConfig c = resolve(o.common);
  long long n = 0;
  if (o.frames) {
    n = *o.frames;
  } else {
    if (!(o.duration >= 0)) throw UsageError("--duration must be non-negative");
    n = static_cast<long long>(std::floor(o.duration * c.frame.sample_rate / c.frame.frame_len));
  }
  if (n <= 0) throw UsageError("the stream needs at least one frame");
  const Samples stream = emit_stream(build_frame(c.frame), static_cast<std::size_t>(n));
  write_wav(o.out, stream, static_cast<int>(c.frame.sample_rate));
  out << "wrote " << n << " frames (" << stream.size() << " samples) to " << o.out << "\n";
  return 0;
}

struct SimulateOptions {
  CommonOptions common;
  std::string out;
  std::string bottom_out;
  std::string top_out;
  std::string truth_out;
  std::optional<int> pattern;
  std::string points;
  std::optional<double> speed;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common);
  if (o.out.empty() && o.bottom_out.empty() && o.top_out.empty())
    throw UsageError("give --out, --bottom-out or --top-out");
  if (o.pattern.has_value() == !o.points.empty()) throw UsageError("give exactly one of --pattern and --points");
  if (o.speed) c.timing.speed_mm_s = *o.speed;
  c.validate();

  UnlockPattern pattern;
  if (o.pattern) {
    const PatternCatalog catalog = c.catalog();
    if (!catalog.contains(*o.pattern)) throw UsageError("pattern " + std::to_string(*o.pattern) + " is not in the catalog");
    pattern = catalog.by_id(*o.pattern);
  } else {
    std::vector<int> pts;
    std::istringstream in(o.points);
    for (std::string tok; std::getline(in, tok, '-');) {
      try {
        pts.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw UsageError("--points expects a dash-separated list such as 0-1-2-5");
      }
    }
    pattern = UnlockPattern(0, pts);
  }
  const SimConfig sim = c.sim_config();
  const PatternTrace trace = c.snr_db ? synth_pattern_trace_snr(pattern, c.geometry, c.frame, sim, c.timing, *c.snr_db)
                                      : synth_pattern_trace(pattern, c.geometry, c.frame, sim, c.timing);
  const int fs = static_cast<int>(c.frame.sample_rate);
  if (!o.out.empty()) write_wav_stereo(o.out, trace.bottom, trace.top, fs);
  if (!o.bottom_out.empty()) write_wav(o.bottom_out, trace.bottom, fs);
  if (!o.top_out.empty()) write_wav(o.top_out, trace.top, fs);
  if (!o.truth_out.empty()) {
    ordered_json j = parse_json(header(c, "simulation"));
    j["pattern"] = pattern.id();
    j["points"] = pattern.points();
    j["frames"] = trace.n_frames;
    ordered_json strokes = ordered_json::array();
    for (const auto& s : trace.strokes)
      strokes.push_back({{"from", s.from_point}, {"to", s.to_point}, {"start_sample", s.start_sample},
                         {"end_sample", s.end_sample}});
    j["strokes"] = strokes;
    j["bottom_signature"] = signature(pattern, c.geometry.mic_bottom, c.geometry, Mic::Bottom).to_string();
    j["top_signature"] = signature(pattern, c.geometry.mic_top, c.geometry, Mic::Top).to_string();
    write_text(o.truth_out, j.dump(2) + "\n");
  }
  double peak = 0;
  for (const Samples* s : {&trace.bottom, &trace.top})
    for (double v : *s) peak = std::max(peak, std::abs(v));
  out << "simulated " << pattern.to_string() << ": " << trace.n_frames << " frames, " << trace.bottom.size()
      << " samples per mic, peak " << std::setprecision(4) << peak << (peak > 1 ? " (clipped in WAV)" : "") << "\n";
  return 0;
}

struct AnalyzeOptions {
  CommonOptions common;
  TraceOptions traces;
  std::string models;
  std::string out;
  std::string features_csv;
  std::string components_csv;
};

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common);
  Traces tr = load_traces(o.traces, c);
  fit_to_mode(tr, c.mode);
  const auto models = load_models(o.models);
  if (c.mode.strategy == Strategy::D1 && !models) throw UsageError("mode " + c.mode.to_string() + " needs --models");

  const PatternCatalog catalog = c.catalog();
  const GroupTables tables = GroupTables::build(catalog, c.geometry);
  const Analyzer analyzer(c.analysis_config());
  const Analysis a = analyzer.analyze(tr.bottom ? &*tr.bottom : nullptr, tr.top ? &*tr.top : nullptr);
  const CandidateSet set = infer(c.mode, a, tables, catalog, models ? &*models : nullptr);

  ordered_json j = parse_json(header(c, "analysis"));
  j["input"] = tr.source;
  j["bottom"] = mic_json(a.bottom);
  j["top"] = mic_json(a.top);
  ordered_json strokes = ordered_json::array();
  for (const auto& s : a.strokes) {
    ordered_json sj = ordered_json::object();
    if (s.bottom) sj["bottom"] = feature_json(*s.bottom);
    if (s.top) sj["top"] = feature_json(*s.top);
    strokes.push_back(sj);
  }
  j["strokes"] = strokes;
  j["decision"] = candidates_json(set);
  if (tr.truth) {
    const auto order = rank_candidates({set});
    const auto it = std::find(order.begin(), order.end(), *tr.truth);
    j["truth"] = {{"pattern", *tr.truth},
                  {"hit", set.contains(*tr.truth)},
                  {"rank", it == order.end() ? static_cast<long>(catalog.size()) : static_cast<long>(it - order.begin() + 1)}};
  }
  if (!o.features_csv.empty()) write_features_csv(o.features_csv, a);
  if (!o.components_csv.empty()) write_components_csv(o.components_csv, a);
  emit(o.out, j.dump(2) + "\n", out);
  return 0;
}

struct TrainOptions {
  CommonOptions common;
  std::string out;
  std::string corpus_in;
  std::string corpus_out;
  int folds = 5;
  std::optional<int> threads;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common);
  if (o.threads) c.experiment.threads = *o.threads;
  const PatternCatalog catalog = c.catalog();
  const GroupTables tables = GroupTables::build(catalog, c.geometry);
  const auto samples = o.corpus_in.empty() ? simulate_training_corpus(c, catalog) : read_corpus_csv(o.corpus_in);
  for (const auto& s : samples)
    if (s.stroke_id < 1 || s.stroke_id > static_cast<int>(catalog.vocabulary().size()))
      throw ValidationError("corpus: stroke id " + std::to_string(s.stroke_id) + " is not in the vocabulary");
  if (!o.corpus_out.empty()) write_corpus_csv(o.corpus_out, samples);
  const ModelBundle models = train_models(samples, catalog, tables, c.training_plan());
  write_text(o.out, models.serialize() + "\n");

  out << "trained on " << samples.size() << " strokes; " << models.d1.size() << " stroke classifiers, "
      << models.groups.size() << " group classifiers -> " << o.out << "\n";
  if (o.folds >= 2) {
    for (const auto& [mode, clf] : models.d1) {
      std::vector<LabeledStrokeSample> use;
      for (const auto& s : samples) {
        const auto f = feature_vector(s, mode);
        if (std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); })) use.push_back(s);
      }
      try {
        const auto acc = cross_validate(use, clf.spec(), mode, o.folds, c.seed);
        double mean = 0;
        for (double a : acc) mean += a / static_cast<double>(acc.size());
        out << "  " << std::left << std::setw(7) << to_string(mode) << std::setw(22) << clf.spec().name
            << o.folds << "-fold accuracy " << std::fixed << std::setprecision(3) << mean << "\n";
      } catch (const TrainingError& e) {
        out << "  " << to_string(mode) << ": cross-validation skipped (" << e.what() << ")\n";
      }
    }
  }
  return 0;
}

struct ExperimentOptions {
  CommonOptions common;
  std::vector<std::string> modes;
  std::optional<int> users;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string models;
  std::string out;
  bool no_trials = false;
  bool progress = false;
};

int run_trials(const ExperimentOptions& o, bool require_models, std::ostream& out, std::ostream& err) {
  RunConfig c = resolve(o.common);
  if (o.users) c.experiment.users = *o.users;
  if (o.reps) c.experiment.reps = *o.reps;
  if (o.threads) c.experiment.threads = *o.threads;
  c.validate();
  std::vector<DecisionMode> modes;
  for (const auto& m : o.modes) modes.push_back(DecisionMode::parse(m));
  if (modes.empty()) modes.push_back(c.mode);
  if (require_models && o.models.empty()) throw UsageError("eval needs --models");
  const auto models = load_models(o.models);

  ProgressFn progress;
  if (o.progress)
    progress = [&err](std::size_t done, std::size_t total) {
      if (done % 50 == 0 || done == total) err << "\r" << done << "/" << total << (done == total ? "\n" : "") << std::flush;
    };
  const ExperimentResult r = run_experiment(c, modes, models ? &*models : nullptr, progress);
  const std::string report = experiment_report_json(c, r, !o.no_trials);
  if (!o.out.empty()) write_text(o.out, report);
  for (const auto& m : modes) out << r.metrics.at(m.to_string()).to_table() << "\n";
  if (o.out.empty()) out << report;
  return 0;
}

struct EnumerateOptions {
  int min_len = 4;
  int max_len = 9;
  bool json = false;
  std::string tables_out;
  std::string catalog;
  CommonOptions common;
};

int cmd_enumerate(const EnumerateOptions& o, std::ostream& out) {
  if (o.min_len < 1 || o.max_len > 9 || o.min_len > o.max_len) throw UsageError("lengths must satisfy 1 <= min <= max <= 9");
  const EnumerationResult r = enumerate_android_patterns(o.min_len, o.max_len);
  if (o.json) {
    ordered_json j;
    j["min_length"] = o.min_len;
    j["max_length"] = o.max_len;
    ordered_json by = ordered_json::object();
    for (int len = o.min_len; len <= o.max_len; ++len) by[std::to_string(len)] = r.by_length[static_cast<std::size_t>(len)];
    j["by_length"] = by;
    j["total"] = r.total;
    out << j.dump(2) << "\n";
  } else {
    for (int len = o.min_len; len <= o.max_len; ++len)
      out << "length " << len << ": " << r.by_length[static_cast<std::size_t>(len)] << "\n";
    out << "total: " << r.total << "\n";
  }
  if (!o.tables_out.empty()) {
    const RunConfig c = resolve(o.common);
    write_text(o.tables_out, group_tables_to_json(GroupTables::build(c.catalog(), c.geometry)) + "\n");
  }
  if (!o.catalog.empty()) {
    const RunConfig c = resolve(o.common);
    const PatternCatalog cat = c.catalog();
    std::string text = cat.serialize();
    text += "# strokes\n";
    for (std::size_t i = 0; i < cat.vocabulary().size(); ++i)
      text += "# " + std::to_string(i + 1) + ": " + cat.vocabulary()[i].to_string() + "\n";
    emit(o.catalog, text, out);
  }
  return 0;
}

struct RenderOptions {
  CommonOptions common;
  TraceOptions traces;
  std::string out_dir;
  std::string stage = "all";
  bool csv = false;
};

int cmd_render(const RenderOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common);
  const Traces tr = load_traces(o.traces, c);
  const Analyzer analyzer(c.analysis_config());
  std::filesystem::create_directories(o.out_dir);
  const std::filesystem::path dir(o.out_dir);
  int written = 0;
  for (Mic m : {Mic::Bottom, Mic::Top}) {
    const auto& trace = m == Mic::Bottom ? tr.bottom : tr.top;
    if (!trace) continue;
    const MicStages s = analyzer.stages(*trace, m);
    const std::string mic(to_string(m));
    auto put = [&](const std::string& stage, const Matrix<double>& mat) {
      if (o.stage != "all" && o.stage != stage) return;
      write_pgm((dir / (mic + "_" + stage + ".pgm")).string(), mat);
      if (o.csv) write_matrix_csv((dir / (mic + "_" + stage + ".csv")).string(), mat);
      ++written;
    };
    put("profile", s.profile.cells);
    put("diff", s.diff.cells);
    Matrix<double> bin(s.binary.cells.rows(), s.binary.cells.cols());
    std::transform(s.binary.cells.data().begin(), s.binary.cells.data().end(), bin.data().begin(),
                   [](std::uint8_t v) { return v ? 1.0 : 0.0; });
    put("binary", bin);
    Matrix<double> kept(bin.rows(), bin.cols());
    for (const auto& cc : s.labeling.components)
      for (const Pixel& p : cc.pixels) kept(static_cast<std::size_t>(p.row), static_cast<std::size_t>(p.col)) = 1.0;
    put("components", kept);
    put("overlay", overlay_boxes(s.diff.cells, s.labeling.components));
  }
  out << "wrote " << written << " image(s) to " << o.out_dir << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Acoustic side-channel simulator and unlock-pattern inference"};
  app.name("sonarsnoop");
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Write the emitted sonar stream as a WAV file");
  add_common(g, gen.common, false);
  g->add_option("-o,--out", gen.out, "Output WAV path")->required();
  g->add_option("-n,--frames", gen.frames, "Number of frames");
  g->add_option("-d,--duration", gen.duration, "Duration in seconds (whole frames only)");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Simulate the two mic recordings of a pattern being drawn");
  add_common(s, sim.common, false);
  s->add_option("-p,--pattern", sim.pattern, "Catalog pattern id");
  s->add_option("--points", sim.points, "Explicit grid points, e.g. 0-1-2-5");
  s->add_option("--speed", sim.speed, "Finger speed in mm/s");
  s->add_option("-o,--out", sim.out, "Stereo WAV output (channel 0 bottom, 1 top)");
  s->add_option("--bottom-out", sim.bottom_out, "Mono WAV for the bottom mic");
  s->add_option("--top-out", sim.top_out, "Mono WAV for the top mic");
  s->add_option("--truth-out", sim.truth_out, "JSON with the ground-truth stroke timing");

  AnalyzeOptions an;
  auto* a = app.add_subcommand("analyze", "Extract strokes from recordings and infer the pattern");
  add_common(a, an.common, true);
  add_trace_options(a, an.traces);
  a->add_option("--models", an.models, "Model bundle from 'train' (needed for D1, used by D3)")->check(CLI::ExistingFile);
  a->add_option("-o,--out", an.out, "JSON report path (default stdout)");
  a->add_option("--features-csv", an.features_csv, "Per-stroke features as CSV");
  a->add_option("--components-csv", an.components_csv, "Connected components as CSV");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train stroke and group classifiers");
  add_common(t, tr.common, false);
  t->add_option("-o,--out", tr.out, "Model bundle output (JSON)")->required();
  t->add_option("--corpus", tr.corpus_in, "Labeled stroke CSV instead of a simulated corpus")->check(CLI::ExistingFile);
  t->add_option("--corpus-out", tr.corpus_out, "Write the training corpus as CSV");
  t->add_option("--folds", tr.folds, "Cross-validation folds (0 to skip)");
  t->add_option("--threads", tr.threads, "Worker threads (0 = all cores)");

  ExperimentOptions ev;
  auto* e = app.add_subcommand("eval", "Evaluate trained models on simulated users");
  add_common(e, ev.common, false);
  e->add_option("-m,--mode", ev.modes, "Decision mode; repeatable");
  e->add_option("--models", ev.models, "Model bundle from 'train'")->check(CLI::ExistingFile);
  e->add_option("--users", ev.users, "Synthetic users");
  e->add_option("--reps", ev.reps, "Repetitions per pattern");
  e->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");
  e->add_option("-o,--out", ev.out, "JSON report path");
  e->add_flag("--no-trials", ev.no_trials, "Omit per-trial records from the report");
  e->add_flag("--progress", ev.progress, "Show progress on stderr");

  ExperimentOptions ex;
  auto* x = app.add_subcommand("experiment", "Run a full simulated study and report M1-M5");
  add_common(x, ex.common, false);
  x->add_option("-m,--mode", ex.modes, "Decision mode; repeatable (default: decision.mode)");
  x->add_option("--models", ex.models, "Reuse a model bundle instead of training")->check(CLI::ExistingFile);
  x->add_option("--users", ex.users, "Synthetic users");
  x->add_option("--reps", ex.reps, "Repetitions per pattern");
  x->add_option("--threads", ex.threads, "Worker threads (0 = all cores)");
  x->add_option("-o,--out", ex.out, "JSON report path");
  x->add_flag("--no-trials", ex.no_trials, "Omit per-trial records from the report");
  x->add_flag("--progress", ex.progress, "Show progress on stderr");

  EnumerateOptions en;
  auto* n = app.add_subcommand("enumerate", "Count legal unlock patterns; export grouping tables");
  add_common(n, en.common, false);
  n->add_option("--min", en.min_len, "Shortest pattern length");
  n->add_option("--max", en.max_len, "Longest pattern length");
  n->add_flag("--json", en.json, "JSON output");
  n->add_option("--tables", en.tables_out, "Write the direction grouping tables as JSON");
  n->add_option("--catalog", en.catalog, "Write the catalog and stroke vocabulary ('-' for stdout)");

  RenderOptions rn;
  auto* r = app.add_subcommand("render", "Write echo-profile heatmaps as PGM images");
  add_common(r, rn.common, false);
  add_trace_options(r, rn.traces);
  r->add_option("-o,--out-dir", rn.out_dir, "Output directory")->required();
  r->add_option("--stage", rn.stage, "profile, diff, binary, components, overlay or all")
      ->check(CLI::IsMember({"profile", "diff", "binary", "components", "overlay", "all"}));
  r->add_flag("--csv", rn.csv, "Also write each matrix as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex_help) {
    return app.exit(ex_help, out, err);
  } catch (const CLI::CallForAllHelp& ex_help) {
    return app.exit(ex_help, out, err);
  } catch (const CLI::ParseError& ex_parse) {
    app.exit(ex_parse, out, err);
    return 2;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*s) return cmd_simulate(sim, out);
    if (*a) return cmd_analyze(an, out);
    if (*t) return cmd_train(tr, out);
    if (*e) return run_trials(ev, true, out, err);
    if (*x) return run_trials(ex, false, out, err);
    if (*n) return cmd_enumerate(en, out);
    if (*r) return cmd_render(rn, out);
  } catch (const UsageError& ex_usage) {
    err << "error: " << ex_usage.what() << "\n";
    return 2;
  } catch (const std::exception& ex_run) {
    err << "error: " << ex_run.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace sonarsnoop::cli
