#include "sonarsnoop/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace sonarsnoop {

std::string format_number(double v) {
  if (!std::isfinite(v)) throw ConfigError("non-finite value in configuration");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config: " + std::string(key) + " expects a number, got '" + std::string(v) + "'");
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("config: " + std::string(key) + " expects an integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + std::string(key) + " expects true or false, got '" + std::string(v) + "'");
}

std::optional<double> to_opt_double(std::string_view key, std::string_view v) {
  if (v == "none" || v.empty()) return std::nullopt;
  return to_double(key, v);
}

std::string opt_text(const std::optional<double>& v) { return v ? format_number(*v) : "none"; }

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

#define NUM_FIELD(KEY, MEMBER)                                                  \
  Field {                                                                       \
    KEY, [](const RunConfig& c) { return format_number(c.MEMBER); },            \
        [](RunConfig& c, std::string_view v) { c.MEMBER = to_double(KEY, v); } \
  }
#define INT_FIELD(KEY, MEMBER, TYPE)                                                           \
  Field {                                                                                      \
    KEY, [](const RunConfig& c) { return std::to_string(c.MEMBER); },                          \
        [](RunConfig& c, std::string_view v) { c.MEMBER = static_cast<TYPE>(to_int(KEY, v)); } \
  }
#define BOOL_FIELD(KEY, MEMBER)                                               \
  Field {                                                                     \
    KEY, [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }, \
        [](RunConfig& c, std::string_view v) { c.MEMBER = to_bool(KEY, v); } \
  }
#define POINT_FIELDS(KEY, MEMBER) NUM_FIELD(KEY ".x", MEMBER.x), NUM_FIELD(KEY ".y", MEMBER.y)

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      Field{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, std::string_view v) {
              std::uint64_t s = 0;
              const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
              if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
                throw ConfigError("config: seed expects an unsigned integer");
              c.seed = s;
            }},
      Field{"catalog.path", [](const RunConfig& c) { return c.catalog_path; },
            [](RunConfig& c, std::string_view v) { c.catalog_path = std::string(v); }},

      NUM_FIELD("frame.sample_rate", frame.sample_rate),
      INT_FIELD("frame.n_subcarriers", frame.n_subcarriers, int),
      NUM_FIELD("frame.subcarrier_bw", frame.subcarrier_bw),
      NUM_FIELD("frame.band_lo", frame.band_lo),
      NUM_FIELD("frame.band_hi", frame.band_hi),
      INT_FIELD("frame.pulse_len", frame.pulse_len, int),
      INT_FIELD("frame.frame_len", frame.frame_len, int),

      NUM_FIELD("geometry.width", geometry.width_mm),
      NUM_FIELD("geometry.height", geometry.height_mm),
      Field{"geometry.grid_origin.x", [](const RunConfig& c) { return format_number(c.geometry.grid[0].x); },
            [](RunConfig& c, std::string_view v) {
              c.geometry.set_grid({to_double("geometry.grid_origin.x", v), c.geometry.grid[0].y}, c.geometry.pitch());
            }},
      Field{"geometry.grid_origin.y", [](const RunConfig& c) { return format_number(c.geometry.grid[0].y); },
            [](RunConfig& c, std::string_view v) {
              c.geometry.set_grid({c.geometry.grid[0].x, to_double("geometry.grid_origin.y", v)}, c.geometry.pitch());
            }},
      Field{"geometry.grid_pitch", [](const RunConfig& c) { return format_number(c.geometry.pitch()); },
            [](RunConfig& c, std::string_view v) {
              c.geometry.set_grid(c.geometry.grid[0], to_double("geometry.grid_pitch", v));
            }},
      POINT_FIELDS("geometry.mic_bottom", geometry.mic_bottom),
      POINT_FIELDS("geometry.mic_top", geometry.mic_top),
      POINT_FIELDS("geometry.speaker_bottom", geometry.speaker_bottom),
      POINT_FIELDS("geometry.speaker_top", geometry.speaker_top),

      NUM_FIELD("sim.speed_of_sound", sim.speed_of_sound),
      NUM_FIELD("sim.reflection_gain", sim.reflection_gain),
      NUM_FIELD("sim.noise_std", sim.noise_std),
      Field{"sim.snr_db", [](const RunConfig& c) { return opt_text(c.snr_db); },
            [](RunConfig& c, std::string_view v) { c.snr_db = to_opt_double("sim.snr_db", v); }},
      BOOL_FIELD("sim.direct_path", sim.include_direct_path),
      NUM_FIELD("sim.direct_gain", sim.direct_gain),
      BOOL_FIELD("sim.inverse_square", sim.inverse_square),
      BOOL_FIELD("sim.cross_paths", sim.cross_paths),

      NUM_FIELD("timing.speed", timing.speed_mm_s),
      NUM_FIELD("timing.pause", timing.pause_s),
      NUM_FIELD("timing.lead_in", timing.lead_in_s),
      NUM_FIELD("timing.lead_out", timing.lead_out_s),

      INT_FIELD("analysis.delta_bottom", analysis.delta_bottom, int),
      INT_FIELD("analysis.delta_top", analysis.delta_top, int),
      NUM_FIELD("analysis.percentile", analysis.percentile),
      INT_FIELD("analysis.min_component", analysis.min_component, std::size_t),
      INT_FIELD("analysis.group_gap", analysis.group_gap, int),
      NUM_FIELD("analysis.tie_band", analysis.features.tie_band_deg),
      Field{"analysis.weighting",
            [](const RunConfig& c) {
              return std::string(c.analysis.features.weighting == AngleWeighting::BoxArea ? "box_area" : "pixel_count");
            },
            [](RunConfig& c, std::string_view v) {
              if (v == "box_area") c.analysis.features.weighting = AngleWeighting::BoxArea;
              else if (v == "pixel_count") c.analysis.features.weighting = AngleWeighting::PixelCount;
              else throw ConfigError("config: analysis.weighting expects box_area or pixel_count");
            }},

      Field{"gabor.orientations", [](const RunConfig& c) { return std::to_string(c.analysis.gabor.orientations_deg.size()); },
            [](RunConfig& c, std::string_view v) {
              const long long n = to_int("gabor.orientations", v);
              if (n < 1 || n > 3600) throw ConfigError("config: gabor.orientations must lie in [1, 3600]");
              auto& o = c.analysis.gabor.orientations_deg;
              o.clear();
              for (long long k = 0; k < n; ++k) o.push_back((static_cast<double>(k) + 0.5) * 180.0 / static_cast<double>(n));
            }},
      NUM_FIELD("gabor.wavelength", analysis.gabor.wavelength),
      NUM_FIELD("gabor.aspect_ratio", analysis.gabor.aspect_ratio),
      NUM_FIELD("gabor.bandwidth", analysis.gabor.bandwidth),
      INT_FIELD("gabor.kernel_radius", analysis.gabor.kernel_radius, int),

      Field{"decision.mode", [](const RunConfig& c) { return c.mode.to_string(); },
            [](RunConfig& c, std::string_view v) { c.mode = DecisionMode::parse(v); }},
      Field{"classifier.d1", [](const RunConfig& c) { return c.d1_classifier.value_or("default"); },
            [](RunConfig& c, std::string_view v) {
              if (v == "default") c.d1_classifier.reset();
              else c.d1_classifier = ClassifierSpec::preset(v).name;
            }},
      Field{"classifier.group", [](const RunConfig& c) { return c.group_classifier.value_or("default"); },
            [](RunConfig& c, std::string_view v) {
              if (v == "default") c.group_classifier.reset();
              else c.group_classifier = ClassifierSpec::preset(v).name;
            }},

      INT_FIELD("experiment.users", experiment.users, int),
      INT_FIELD("experiment.reps", experiment.reps, int),
      NUM_FIELD("experiment.speed_min", experiment.speed_min),
      NUM_FIELD("experiment.speed_max", experiment.speed_max),
      NUM_FIELD("experiment.speed_jitter", experiment.speed_jitter),
      NUM_FIELD("experiment.pause_min", experiment.pause_min),
      NUM_FIELD("experiment.pause_max", experiment.pause_max),
      NUM_FIELD("experiment.pause_jitter", experiment.pause_jitter),
      NUM_FIELD("experiment.touch_jitter", experiment.touch_jitter_mm),
      INT_FIELD("experiment.train_per_stroke", experiment.train_per_stroke, int),
  };
  return f;
}

#undef NUM_FIELD
#undef INT_FIELD
#undef BOOL_FIELD
#undef POINT_FIELDS

const Field& field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) { field(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

void RunConfig::apply_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    set(trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_text(ss.str());
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

std::string RunConfig::to_text() const {
  std::string s;
  for (const auto& [k, v] : entries()) s += k + " = " + v + "\n";
  return s;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

AnalysisConfig RunConfig::analysis_config() const {
  AnalysisConfig a = analysis;
  a.frame = frame;
  return a;
}

SimConfig RunConfig::sim_config() const {
  SimConfig s = sim;
  s.sample_rate = frame.sample_rate;
  s.seed = seed;
  return s;
}

PatternCatalog RunConfig::catalog() const {
  return catalog_path.empty() ? PatternCatalog::builtin() : PatternCatalog::load(catalog_path);
}

TrainingPlan RunConfig::training_plan() const {
  TrainingPlan p;
  if (d1_classifier) p.d1_override = ClassifierSpec::preset(*d1_classifier);
  if (group_classifier) p.group_override = ClassifierSpec::preset(*group_classifier);
  p.seed = mix_seed(seed, 0x7472);
  return p;
}

void RunConfig::validate() const {
  frame.validate();
  geometry.validate();
  sim_config().validate();
  analysis_config().validate();
  if (timing.speed_mm_s <= 0) throw ConfigError("timing: speed must be positive");
  if (timing.pause_s < 0 || timing.lead_in_s < 0 || timing.lead_out_s < 0)
    throw ConfigError("timing: pauses must be non-negative");
  const auto& e = experiment;
  if (e.users < 1 || e.reps < 1) throw ConfigError("experiment: users and reps must be positive");
  if (e.speed_min <= 0 || e.speed_max < e.speed_min) throw ConfigError("experiment: invalid speed range");
  if (e.pause_min < 0 || e.pause_max < e.pause_min) throw ConfigError("experiment: invalid pause range");
  if (e.speed_jitter < 0 || e.speed_jitter >= 1 || e.pause_jitter < 0 || e.pause_jitter >= 1)
    throw ConfigError("experiment: jitter must lie in [0, 1)");
  if (e.touch_jitter_mm < 0) throw ConfigError("experiment: touch jitter must be non-negative");
  if (e.train_per_stroke < 2) throw ConfigError("experiment: need at least two training strokes per class");
}

}  // namespace sonarsnoop
