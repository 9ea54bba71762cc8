#include "sonarsnoop/pipeline.hpp"

#include <algorithm>
#include <numeric>

namespace sonarsnoop {

void AnalysisConfig::validate() const {
  frame.validate();
  if (delta_bottom < 1 || delta_top < 1) throw ConfigError("analysis: delta must be at least 1");
  if (percentile < 0 || percentile > 100) throw ConfigError("analysis: percentile must lie in [0, 100]");
  if (group_gap < 0) throw ConfigError("analysis: group gap must be non-negative");
  gabor.validate();
  if (features.tie_band_deg < 0) throw ConfigError("analysis: tie band must be non-negative");
}

std::vector<Direction> MicAnalysis::directions() const {
  std::vector<Direction> out;
  for (const auto& f : features) out.push_back(f.direction);
  return out;
}

namespace {

int span_overlap(const StrokeFeature& a, const StrokeFeature& b) {
  return std::min(a.col_last, b.col_last) - std::max(a.col_first, b.col_first) + 1;
}

}  // namespace

std::vector<StrokeObservation> align_strokes(const std::vector<StrokeFeature>& bottom,
                                             const std::vector<StrokeFeature>& top) {
  // Union-find over the overlap graph between the two mics.
  const std::size_t nb = bottom.size(), nt = top.size();
  std::vector<std::size_t> parent(nb + nt);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (span_overlap(bottom[i], top[j]) > 0) parent[find(i)] = find(nb + j);

  struct Cluster {
    std::vector<std::size_t> b, t;
    int first = 0;
  };
  std::vector<Cluster> clusters;
  std::vector<long> slot(nb + nt, -1);
  for (std::size_t k = 0; k < nb + nt; ++k) {
    const std::size_t root = find(k);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(clusters.size());
      clusters.push_back({});
      clusters.back().first = k < nb ? bottom[k].col_first : top[k - nb].col_first;
    }
    Cluster& c = clusters[static_cast<std::size_t>(slot[root])];
    if (k < nb) {
      c.b.push_back(k);
      c.first = std::min(c.first, bottom[k].col_first);
    } else {
      c.t.push_back(k - nb);
      c.first = std::min(c.first, top[k - nb].col_first);
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& x, const Cluster& y) { return x.first < y.first; });

  std::vector<StrokeObservation> out;
  for (const Cluster& c : clusters) {
    if (c.b.size() <= 1 && c.t.size() <= 1) {
      StrokeObservation o;
      if (!c.b.empty()) o.bottom = bottom[c.b[0]];
      if (!c.t.empty()) o.top = top[c.t[0]];
      out.push_back(o);
      continue;
    }
    // One mic split what the other merged: keep the finer split and attach each
    // coarse stroke to the fine stroke it overlaps most.
    const bool bottom_finer = c.b.size() >= c.t.size();
    const auto& fine_idx = bottom_finer ? c.b : c.t;
    const auto& coarse_idx = bottom_finer ? c.t : c.b;
    const auto& fine = bottom_finer ? bottom : top;
    const auto& coarse = bottom_finer ? top : bottom;
    std::vector<StrokeObservation> part(fine_idx.size());
    for (std::size_t i = 0; i < fine_idx.size(); ++i)
      (bottom_finer ? part[i].bottom : part[i].top) = fine[fine_idx[i]];
    for (std::size_t j : coarse_idx) {
      std::size_t best = 0;
      int best_overlap = -1;
      for (std::size_t i = 0; i < fine_idx.size(); ++i) {
        const int ov = span_overlap(fine[fine_idx[i]], coarse[j]);
        auto& slot_ref = bottom_finer ? part[i].top : part[i].bottom;
        if (ov > best_overlap && !slot_ref) {
          best_overlap = ov;
          best = i;
        }
      }
      auto& slot_ref = bottom_finer ? part[best].top : part[best].bottom;
      if (best_overlap >= 0 && !slot_ref) slot_ref = coarse[j];
    }
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Analyzer::Analyzer(AnalysisConfig config)
    : config_(std::move(config)),
      pulse_(synthesize_pulse(config_.frame)),
      bank_(std::make_shared<const GaborBank>(config_.gabor)) {
  config_.validate();
}

MicStages Analyzer::stages(const Samples& trace, Mic mic) const {
  MicStages s;
  s.profile = fold(correlate(trace, pulse_), static_cast<std::size_t>(config_.frame.frame_len));
  s.diff = differentiate(s.profile, config_.delta(mic));
  s.binary = binarize(s.diff, config_.percentile);
  s.labeling = label_components(s.binary, config_.min_component);
  return s;
}

Analysis Analyzer::analyze(const Samples* bottom, const Samples* top) const {
  if (!bottom && !top) throw InputError("analysis needs at least one trace");
  if (bottom && top && bottom->size() != top->size())
    throw InputError("bottom and top traces differ in length");

  Analysis out;
  out.bottom.mic = Mic::Bottom;
  out.top.mic = Mic::Top;
  std::vector<ConnectedComponent> bottom_ccs, top_ccs;
  auto run = [&](const Samples* trace, MicAnalysis& a, std::vector<ConnectedComponent>& ccs) {
    if (!trace) return;
    const MicStages s = stages(*trace, a.mic);
    a.present = true;
    a.rows = s.diff.cells.rows();
    a.cols = s.diff.cells.cols();
    a.threshold = s.binary.threshold;
    ccs = s.labeling.components;
  };
  run(bottom, out.bottom, bottom_ccs);
  run(top, out.top, top_ccs);

  if (bottom && top) {
    auto [b, t] = cross_mic_filter(bottom_ccs, top_ccs);
    out.bottom.components = std::move(b);
    out.top.components = std::move(t);
  } else if (bottom) {
    out.bottom.components = suppress_overlaps(bottom_ccs);
  } else {
    out.top.components = suppress_overlaps(top_ccs);
  }

  for (MicAnalysis* a : {&out.bottom, &out.top}) {
    if (!a->present) continue;
    a->groups = group_strokes(a->components, config_.group_gap, a->mic);
    a->features = extract_features(a->groups, *bank_, config_.features);
  }
  out.strokes = align_strokes(out.bottom.features, out.top.features);
  return out;
}

}  // namespace sonarsnoop
