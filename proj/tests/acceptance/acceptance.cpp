// Acceptance checks: prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sonarsnoop/config.hpp"
#include "sonarsnoop/echo_profile.hpp"
#include "sonarsnoop/experiment.hpp"
#include "sonarsnoop/features.hpp"
#include "sonarsnoop/ofdm_signal.hpp"
#include "sonarsnoop/patterns.hpp"
#include "sonarsnoop/pipeline.hpp"
#include "sonarsnoop/segmentation.hpp"
#include "sonarsnoop/sonar_sim.hpp"

using namespace sonarsnoop;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail, double secs) {
  std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", id, detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- 1 --------------------------------------------------------------------------

void enumeration() {
  const auto t0 = Clock::now();
  const auto r = enumerate_android_patterns();
  const double secs = seconds_since(t0);
  report(1, r.total == 389112 && secs < 5.0, "enumerated " + std::to_string(r.total) + " patterns (want 389112, < 5 s)",
         secs);
}

// ---- 2 --------------------------------------------------------------------------

void tables() {
  const auto t0 = Clock::now();
  const PatternCatalog cat = PatternCatalog::builtin();
  const GroupTables t = GroupTables::build(cat, DeviceGeometry::standard());
  const GroupTable bottom{{"A-T", {1, 4, 7, 8}}, {"T-A", {2, 5, 6, 11}}, {"A-T-A", {3, 10}},
                          {"A-T-A-A", {9}},      {"A-T-T", {12}}};
  const GroupTable top{{"A-A", {1, 2, 4, 5, 8, 11}}, {"A-A-A", {3, 10}}, {"A-T", {6, 7}},
                       {"A-A-A-T", {9}},             {"A-A-T", {12}}};
  const GroupTable both{{"A-T|A-A", {1, 4, 8}},  {"T-A|A-A", {2, 5, 11}}, {"A-T-A|A-A-A", {3, 10}},
                        {"T-A|A-T", {6}},        {"A-T|A-T", {7}},        {"A-T-A-A|A-A-A-T", {9}},
                        {"A-T-T|A-A-T", {12}}};
  const bool ok_b = t.bottom == bottom, ok_t = t.top == top, ok_both = t.both == both;
  const std::size_t strokes = cat.vocabulary().size();
  report(2, ok_b && ok_t && ok_both && strokes == 15,
         std::string("bottom table ") + (ok_b ? "matches" : "differs") + ", top table " + (ok_t ? "matches" : "differs") +
             ", both-mic table " + (ok_both ? "matches" : "differs") + ", " + std::to_string(strokes) +
             " unique strokes (want 15)",
         seconds_since(t0));
}

// ---- 3 --------------------------------------------------------------------------

void spectrum() {
  const auto t0 = Clock::now();
  const FrameSpec spec;
  const Samples w = synthesize_pulse(spec, true);
  const Samples raw = synthesize_pulse(spec, false);
  const double frac = band_energy_fraction(w, spec.sample_rate, 17500.0, 20500.0);
  const double db = 10.0 * std::log10(energy_below(raw, spec.sample_rate, 17000.0) /
                                      energy_below(w, spec.sample_rate, 17000.0));
  const double secs = seconds_since(t0);
  report(3, frac >= 0.99 && db >= 40.0 && secs < 1.0,
         fmt("in-band [17.5, 20.5] kHz energy %.4f (want >= 0.99), ", frac) +
             fmt("leakage below 17 kHz %.2f dB under the unwindowed pulse (want >= 40)", db),
         secs);
}

// ---- 4 --------------------------------------------------------------------------

// Most frequent per-column argmax row.
std::size_t dominant_row(const Matrix<double>& m) {
  std::map<std::size_t, int> votes;
  for (std::size_t r : column_argmax(m)) ++votes[r];
  return std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
}

void ranging() {
  const auto t0 = Clock::now();
  const FrameSpec spec;
  const DeviceGeometry g = DeviceGeometry::standard();
  SimConfig sim;
  const Samples stream = emit_stream(build_frame(spec), 24);
  const Samples pulse = synthesize_pulse(spec);
  const double duration = static_cast<double>(stream.size()) / spec.sample_rate;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(-450.0, 450.0);
  int clean_hits = 0, noisy_hits = 0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    const Mic mic = i % 2 ? Mic::Top : Mic::Bottom;
    const Point m = mic == Mic::Bottom ? g.mic_bottom : g.mic_top;
    const Point s = mic == Mic::Bottom ? g.speaker_bottom : g.speaker_top;
    const Point centre{(m.x + s.x) / 2, (m.y + s.y) / 2};
    Point p;
    do {
      p = {centre.x + coord(rng), centre.y + coord(rng)};
    } while (distance(s, p) + distance(p, m) > 900.0 || distance(p, m) < 10.0);
    const double delay = path_delay_samples(s, p, m, sim);
    Samples trace = simulate_reflections(stream, g, {ReflectorPath::stationary(p, duration)}, sim, mic);
    const auto clean_row = static_cast<double>(dominant_row(fold(correlate(trace, pulse), spec.frame_len).cells));
    if (std::abs(clean_row - delay) <= 1.0) ++clean_hits;
    add_noise(trace, noise_std_for_snr(trace, 10.0), 7000 + static_cast<std::uint64_t>(i));
    const auto noisy_row = static_cast<double>(dominant_row(fold(correlate(trace, pulse), spec.frame_len).cells));
    if (std::abs(noisy_row - delay) <= 1.0) ++noisy_hits;
  }
  const double secs = seconds_since(t0);
  report(4, clean_hits == n && noisy_hits >= 0.95 * n && secs < 30.0,
         std::to_string(clean_hits) + "/50 within +-1 sample noiseless (want 50), " + std::to_string(noisy_hits) +
             "/50 at 10 dB SNR (want >= 48)",
         secs);
}

// ---- 5 --------------------------------------------------------------------------

// Direction of the dominant stroke group a mic reported, Indeterminate if none.
Direction observed_direction(const MicAnalysis& m) {
  if (m.features.empty()) return Direction::Indeterminate;
  std::size_t best = 0, best_px = 0;
  for (std::size_t g = 0; g < m.groups.size() && g < m.features.size(); ++g) {
    std::size_t px = 0;
    for (const auto& cc : m.groups[g].components) px += cc.size();
    if (px > best_px) best_px = px, best = g;
  }
  return m.features[best].direction;
}

struct DirectionScore {
  int pairs = 0, clean_ok = 0, noisy_ok = 0;
  double clean() const { return double(clean_ok) / pairs; }
  double noisy() const { return double(noisy_ok) / pairs; }
};

// Draws 200 strokes from `pool` at random speeds and scores both mics against geometry.
DirectionScore score_directions(const std::vector<Stroke>& pool, std::uint64_t seed) {
  const FrameSpec spec;
  const DeviceGeometry g = DeviceGeometry::standard();
  const Analyzer analyzer;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> speed(100.0, 400.0);
  DirectionScore score;
  for (int i = 0; i < 200; ++i) {
    const Stroke s = pool[pick(rng)];
    PatternTiming timing;
    timing.speed_mm_s = speed(rng);
    SimConfig sim;
    sim.seed = 100 + static_cast<std::uint64_t>(i);
    const auto clean = synth_strokes_trace({s}, g, spec, sim, timing);
    const auto noisy = synth_strokes_trace_snr({s}, g, spec, sim, timing, 10.0);
    const Analysis ac = analyzer.analyze(&clean.bottom, &clean.top);
    const Analysis an = analyzer.analyze(&noisy.bottom, &noisy.top);
    for (Mic mic : {Mic::Bottom, Mic::Top}) {
      const Point mp = mic == Mic::Bottom ? g.mic_bottom : g.mic_top;
      const double change = distance(g.grid[static_cast<std::size_t>(s.end)], mp) -
                            distance(g.grid[static_cast<std::size_t>(s.start)], mp);
      const Direction truth = change > 0 ? Direction::Away : Direction::Towards;
      ++score.pairs;
      if (observed_direction(ac.mic(mic)) == truth) ++score.clean_ok;
      if (observed_direction(an.mic(mic)) == truth) ++score.noisy_ok;
    }
  }
  return score;
}

void directions() {
  const auto t0 = Clock::now();
  // Scored on the catalog's stroke vocabulary; every legal single stroke is reported alongside.
  const DirectionScore vocab = score_directions(PatternCatalog::builtin().vocabulary(), 515);
  const double secs = seconds_since(t0);
  std::vector<Stroke> legal;
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b)
      if (a != b && midpoint_between(a, b) < 0) legal.push_back({a, b});
  const DirectionScore all = score_directions(legal, 515);
  report(5, vocab.clean() >= 0.98 && vocab.noisy() >= 0.90 && secs < 120.0,
         fmt("catalog strokes: direction correct for %.4f of (stroke, mic) pairs noiseless (want >= 0.98), ",
             vocab.clean()) +
             fmt("%.4f at 10 dB SNR (want >= 0.90); ", vocab.noisy()) +
             fmt("all legal strokes: %.4f noiseless, ", all.clean()) + fmt("%.4f at 10 dB SNR", all.noisy()),
         secs);
}

// ---- 6, 7 -----------------------------------------------------------------------

void end_to_end() {
  const auto t0 = Clock::now();
  RunConfig c;
  c.experiment.users = 10;
  c.experiment.reps = 5;
  c.snr_db = 15.0;
  c.seed = 1;
  const DecisionMode d2 = DecisionMode::parse("D2.1"), d3 = DecisionMode::parse("D3.1");
  const ExperimentResult r = run_experiment(c, {d2, d3});
  const double secs = seconds_since(t0);
  const MetricsReport& m2 = r.metrics.at("D2.1");
  const MetricsReport& m3 = r.metrics.at("D3.1");
  report(6, m2.m1 >= 0.90 && m2.m2 <= 5.0,
         std::to_string(m2.trials) + fmt(" trials, D2.1 M1 %.4f (want >= 0.90), ", m2.m1) +
             fmt("M2 %.3f (want <= 5.0)", m2.m2),
         secs);

  std::size_t violations = 0;
  for (const auto& t : r.trials) {
    auto a = t.sets.at("D2.1").ids(), b = t.sets.at("D3.1").ids();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (!std::includes(a.begin(), a.end(), b.begin(), b.end())) ++violations;
  }
  report(7, m3.m2 <= m2.m2 && violations == 0 && m3.m2 <= 4.0 && secs < 600.0,
         fmt("D3.1 M2 %.3f vs ", m3.m2) + fmt("D2.1 M2 %.3f, ", m2.m2) + std::to_string(violations) +
             " trials where the D3.1 set is not a subset of D2.1 (want 0), D3.1 M2 <= 4.0 and < 600 s",
         secs);
}

// ---- 8 --------------------------------------------------------------------------

BinaryMatrix pixels(std::size_t rows, std::size_t cols, int n_diag) {
  BinaryMatrix b;
  b.cells = Matrix<std::uint8_t>(rows, cols, 0);
  for (int i = 0; i < n_diag; ++i) b.cells(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = 1;
  return b;
}

ConnectedComponent box(int col_min, int col_max) {
  ConnectedComponent cc;
  for (int r = 0; r <= 5; ++r)
    for (int col = col_min; col <= col_max; ++col) cc.pixels.push_back({r, col});
  cc.bbox = {0, col_min, 5, col_max};
  return cc;
}

Matrix<std::uint8_t> line(double deg) {
  const int half = 30, n = 2 * half + 1;
  Matrix<std::uint8_t> m(n, n, 0);
  const double rad = deg * std::acos(-1.0) / 180.0;
  for (int t = -4 * half; t <= 4 * half; ++t) {
    const int r = static_cast<int>(std::lround(half + t / 4.0 * std::sin(rad)));
    const int col = static_cast<int>(std::lround(half + t / 4.0 * std::cos(rad)));
    if (r >= 0 && r < n && col >= 0 && col < n) m(static_cast<std::size_t>(r), static_cast<std::size_t>(col)) = 1;
  }
  return m;
}

void fixtures() {
  const auto t0 = Clock::now();
  std::vector<std::string> failed;
  Matrix<double> f(10, 10);
  for (std::size_t i = 0; i < 100; ++i) f.data()[i] = static_cast<double>((i * 37) % 100 + 1);
  auto ones = [](const BinaryMatrix& b) { return std::count(b.cells.data().begin(), b.cells.data().end(), 1); };
  const auto b94 = binarize(f, 94.0);
  if (ones(b94) != 6 || std::abs(b94.threshold - 94.06) > 1e-9) failed.push_back("binarize p94");
  if (ones(binarize(f, 0.0)) != 99) failed.push_back("binarize p0");
  if (ones(binarize(Matrix<double>(7, 9, 3.5))) != 0) failed.push_back("binarize constant");
  if (!label_components(pixels(30, 30, 20)).components.empty()) failed.push_back("component of 20");
  if (label_components(pixels(30, 30, 21)).components.size() != 1) failed.push_back("component of 21");
  if (group_strokes({box(0, 40), box(120, 140)}).size() != 1) failed.push_back("gap of 79 columns");
  if (group_strokes({box(0, 40), box(121, 140)}).size() != 2) failed.push_back("gap of 80 columns");
  const GaborBank bank;
  if (!(bank.orientation(line(45.0)) > 90.0)) failed.push_back("ascending line");
  if (!(bank.orientation(line(-45.0)) < 90.0)) failed.push_back("descending line");
  std::string detail = "binarize, component size, grouping gap and Gabor sign fixtures";
  for (const auto& s : failed) detail += "; failed " + s;
  report(8, failed.empty(), detail, seconds_since(t0));
}

// ---- 9 --------------------------------------------------------------------------

void determinism() {
  const auto t0 = Clock::now();
  RunConfig c;
  c.experiment.users = 2;
  c.experiment.reps = 1;
  c.experiment.train_per_stroke = 8;
  c.snr_db = 15.0;
  c.seed = 77;
  const std::vector<DecisionMode> modes{DecisionMode::parse("D2.1"), DecisionMode::parse("D3.1")};
  RunConfig single = c;
  single.experiment.threads = 1;
  const std::string a = experiment_report_json(c, run_experiment(c, modes));
  const std::string b = experiment_report_json(c, run_experiment(single, modes));
  report(9, a == b && !a.empty(),
         std::string("two experiment reports with seed 77 (threads 0 and 1) are ") +
             (a == b ? "byte-identical" : "different") + " (" + std::to_string(a.size()) + " bytes)",
         seconds_since(t0));
}

}  // namespace

int main() {
  enumeration();
  tables();
  spectrum();
  ranging();
  directions();
  end_to_end();
  fixtures();
  determinism();
  std::printf("%d criterion check(s) failed\n", failures);
  return failures ? 1 : 0;
}
