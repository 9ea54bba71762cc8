#include "sonarsnoop/decide.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sonarsnoop {

using nlohmann::json;
using nlohmann::ordered_json;

DecisionMode DecisionMode::parse(std::string_view text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s.size() != 4 || s[0] != 'D' || s[2] != '.') throw ConfigError("unknown decision mode '" + std::string(text) + "'");
  DecisionMode m;
  const int family = s[1] - '0', variant = s[3] - '0';
  if (family == 1 && variant >= 1 && variant <= 3) m.strategy = Strategy::D1;
  else if (family == 2 && variant >= 1 && variant <= 4) m.strategy = Strategy::D2;
  else if (family == 3 && variant >= 1 && variant <= 4) m.strategy = Strategy::D3;
  else throw ConfigError("unknown decision mode '" + std::string(text) + "'");
  m.variant = variant;
  return m;
}

std::string DecisionMode::to_string() const {
  const int family = strategy == Strategy::D1 ? 1 : strategy == Strategy::D2 ? 2 : 3;
  return "D" + std::to_string(family) + "." + std::to_string(variant);
}

MicMode DecisionMode::primary() const {
  if (strategy == Strategy::D1) return variant == 1 ? MicMode::Both : variant == 2 ? MicMode::Bottom : MicMode::Top;
  if (variant <= 2) return MicMode::Both;
  return variant == 3 ? MicMode::Bottom : MicMode::Top;
}

std::optional<MicMode> DecisionMode::fallback() const {
  if (strategy == Strategy::D1) return std::nullopt;
  if (variant == 1) return MicMode::Bottom;
  if (variant == 2) return MicMode::Top;
  return std::nullopt;
}

bool DecisionMode::needs(Mic mic) const {
  const MicMode p = primary();
  return p == MicMode::Both || (mic == Mic::Bottom) == (p == MicMode::Bottom);
}

bool CandidateSet::contains(int id) const {
  return std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.pattern_id == id; });
}

std::vector<int> CandidateSet::ids() const {
  std::vector<int> out;
  for (const auto& c : candidates) out.push_back(c.pattern_id);
  return out;
}

namespace {

TableMode table_for(MicMode m) {
  switch (m) {
    case MicMode::Both: return TableMode::Both;
    case MicMode::Bottom: return TableMode::Bottom;
    case MicMode::Top: return TableMode::Top;
  }
  return TableMode::Both;
}

bool conclusive(const std::optional<std::vector<Direction>>& d) {
  return d && !d->empty() &&
         std::none_of(d->begin(), d->end(), [](Direction x) { return x == Direction::Indeterminate; });
}

CandidateSet from_ids(const std::vector<int>& ids, DecisionMode mode, std::string source, std::string key) {
  CandidateSet s;
  s.mode = mode;
  s.source = std::move(source);
  s.key = std::move(key);
  for (int id : ids) s.candidates.push_back({id, 1});
  return s;
}

CandidateSet whole_catalog(const PatternCatalog& catalog, DecisionMode mode, std::string key) {
  auto ids = catalog.ids();
  std::sort(ids.begin(), ids.end());
  return from_ids(ids, mode, "catalog", std::move(key));
}

// Group lookup shared by D2 and D3: which table answered, and with which key.
struct GroupHit {
  TableMode table = TableMode::Both;
  std::string key;
  std::vector<int> group;
};

std::optional<GroupHit> lookup(const MicDirections& d, const GroupTables& tables, MicMode mic_mode,
                               std::string& tried) {
  const bool need_b = mic_mode != MicMode::Top, need_t = mic_mode != MicMode::Bottom;
  if ((need_b && !conclusive(d.bottom)) || (need_t && !conclusive(d.top))) return std::nullopt;
  const TableMode t = table_for(mic_mode);
  static const std::vector<Direction> none;
  const std::string key = table_key(t, d.bottom ? *d.bottom : none, d.top ? *d.top : none);
  if (!tried.empty()) tried += ";";
  tried += key;
  const auto& table = tables.get(t);
  const auto it = table.find(key);
  if (it == table.end()) return std::nullopt;
  return GroupHit{t, key, it->second};
}

std::optional<GroupHit> group_for(const MicDirections& d, const GroupTables& tables, DecisionMode mode,
                                  std::string& tried) {
  if (auto hit = lookup(d, tables, mode.primary(), tried)) return hit;
  if (const auto fb = mode.fallback()) return lookup(d, tables, *fb, tried);
  return std::nullopt;
}

std::string stroke_sequence_key(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
  return s;
}

}  // namespace

MicDirections directions_of(const Analysis& a) {
  MicDirections d;
  if (a.bottom.present) d.bottom = a.bottom.directions();
  if (a.top.present) d.top = a.top.directions();
  return d;
}

std::vector<StrokeObservation> strokes_for(const std::vector<StrokeObservation>& strokes, MicMode mode) {
  std::vector<StrokeObservation> out;
  for (const auto& s : strokes)
    if (feature_vector(s, mode)) out.push_back(s);
  return out;
}

CandidateSet d1_infer(const std::vector<StrokeObservation>& strokes, const StrokeClassifier& classifier,
                      const PatternCatalog& catalog, DecisionMode mode) {
  if (catalog.size() == 0) throw InputError("d1: empty catalog");
  const MicMode mic_mode = mode.primary();
  std::vector<int> seq;
  for (const auto& s : strokes)
    if (const auto f = feature_vector(s, mic_mode)) seq.push_back(classifier.predict_label(*f));
  const std::string key = stroke_sequence_key(seq);
  if (seq.empty()) return whole_catalog(catalog, mode, key);

  std::vector<int> ids = catalog.ids();
  std::sort(ids.begin(), ids.end());
  std::vector<int> exact;
  std::vector<int> score;
  for (int id : ids) {
    const auto truth = catalog.stroke_ids(id);
    if (truth == seq) exact.push_back(id);
    int s = 0;
    for (std::size_t i = 0; i < std::min(truth.size(), seq.size()); ++i) s += truth[i] == seq[i];
    score.push_back(s);
  }
  if (!exact.empty()) return from_ids(exact, mode, "exact", key);
  const int best = *std::max_element(score.begin(), score.end());
  std::vector<int> tied;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (score[i] == best) tied.push_back(ids[i]);
  return from_ids(tied, mode, best > 0 ? "positional" : "catalog", key);
}

CandidateSet d2_infer(const MicDirections& d, const GroupTables& tables, const PatternCatalog& catalog,
                      DecisionMode mode) {
  std::string tried;
  if (const auto hit = group_for(d, tables, mode, tried))
    return from_ids(hit->group, mode, std::string(to_string(hit->table)), hit->key);
  return whole_catalog(catalog, mode, tried);
}

std::vector<int> distinguishing_positions(const PatternCatalog& catalog, const std::vector<int>& group) {
  std::vector<int> out;
  if (group.size() < 2) return out;
  std::vector<std::vector<int>> seqs;
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (int id : group) {
    seqs.push_back(catalog.stroke_ids(id));
    len = std::min(len, seqs.back().size());
  }
  for (std::size_t p = 0; p < len; ++p) {
    std::set<int> distinct;
    for (const auto& s : seqs) distinct.insert(s[p]);
    if (distinct.size() > 1) out.push_back(static_cast<int>(p));
  }
  return out;
}

std::string group_classifier_key(TableMode table, const std::vector<int>& group, int position) {
  std::vector<int> g(group);
  std::sort(g.begin(), g.end());
  return std::string(to_string(table)) + ":" + stroke_sequence_key(g) + "@" + std::to_string(position);
}

void GroupClassifierBank::add(TableMode table, const std::vector<int>& group, int position,
                              StrokeClassifier classifier) {
  models_.insert_or_assign(group_classifier_key(table, group, position), std::move(classifier));
}

const StrokeClassifier* GroupClassifierBank::find(TableMode table, const std::vector<int>& group,
                                                  int position) const {
  const auto it = models_.find(group_classifier_key(table, group, position));
  return it == models_.end() ? nullptr : &it->second;
}

CandidateSet d3_infer(const std::vector<StrokeObservation>& strokes, const MicDirections& d,
                      const GroupTables& tables, const PatternCatalog& catalog, const GroupClassifierBank& bank,
                      DecisionMode mode) {
  std::string tried;
  const auto hit = group_for(d, tables, mode, tried);
  if (!hit) return whole_catalog(catalog, mode, tried);
  CandidateSet base = from_ids(hit->group, mode, std::string(to_string(hit->table)), hit->key);
  if (hit->group.size() < 2) return base;

  const MicMode mic_mode = hit->table == TableMode::Both   ? MicMode::Both
                           : hit->table == TableMode::Bottom ? MicMode::Bottom
                                                             : MicMode::Top;
  const auto visible = strokes_for(strokes, mic_mode);
  const std::size_t n_strokes = catalog.stroke_ids(hit->group.front()).size();
  if (visible.size() != n_strokes) return base;

  std::map<int, int> votes;
  for (int p : distinguishing_positions(catalog, hit->group)) {
    const StrokeClassifier* clf = bank.find(hit->table, hit->group, p);
    if (!clf) continue;
    const int predicted = clf->predict_label(*feature_vector(visible[static_cast<std::size_t>(p)], mic_mode));
    for (int id : hit->group)
      if (catalog.stroke_ids(id)[static_cast<std::size_t>(p)] == predicted) ++votes[id];
  }
  int winner = 0, best = 0;
  for (int id : hit->group)  // group ids are ascending, so ties keep the lower id
    if (votes[id] > best) {
      best = votes[id];
      winner = id;
    }
  if (best == 0) return base;

  CandidateSet out = base;
  out.candidates.clear();
  out.candidates.push_back({winner, 2});
  for (int id : hit->group)
    if (id != winner) out.candidates.push_back({id, 1});
  return out;
}

ClassifierSpec default_d1_spec(MicMode mode) {
  return ClassifierSpec::preset(mode == MicMode::Both ? "medium_gaussian_svm" : "quadratic_svm");
}

ClassifierSpec default_group_spec(TableMode table, const std::vector<int>& group, int position) {
  static const std::map<std::string, std::string> plan = {
      {"both:1,4,8@1", "medium_gaussian_svm"},
      {"both:2,5,11@0", "weighted_knn"},
      {"both:3,10@0", "coarse_gaussian_svm"},
      {"both:3,10@1", "fine_knn"},
      {"both:3,10@2", "bagged_trees"},
      {"bottom:1,4,7,8@1", "medium_gaussian_svm"},
      {"bottom:2,5,6,11@0", "medium_gaussian_svm"},
      {"bottom:2,5,6,11@1", "cosine_knn"},
      {"bottom:3,10@0", "coarse_gaussian_svm"},
      {"bottom:3,10@1", "medium_gaussian_svm"},
      {"bottom:3,10@2", "fine_knn"},
      {"top:1,2,4,5,8,11@0", "medium_knn"},
      {"top:1,2,4,5,8,11@1", "bagged_trees"},
      {"top:3,10@0", "fine_gaussian_svm"},
      {"top:3,10@1", "cosine_knn"},
      {"top:3,10@2", "quadratic_svm"},
      {"top:6,7@0", "bagged_trees"},
      {"top:6,7@1", "coarse_gaussian_svm"},
  };
  const auto it = plan.find(group_classifier_key(table, group, position));
  return ClassifierSpec::preset(it == plan.end() ? "medium_gaussian_svm" : it->second);
}

std::string ModelBundle::serialize() const {
  ordered_json j;
  j["format"] = "sonarsnoop-models";
  j["version"] = 1;
  ordered_json d1j = ordered_json::object();
  for (const auto& [mode, clf] : d1) d1j[std::string(to_string(mode))] = ordered_json::parse(clf.serialize());
  j["d1"] = d1j;
  ordered_json g = ordered_json::object();
  for (const auto& [key, clf] : groups.models()) g[key] = ordered_json::parse(clf.serialize());
  j["groups"] = g;
  return j.dump();
}

ModelBundle ModelBundle::deserialize(std::string_view text) {
  ModelBundle b;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "sonarsnoop-models" || j.at("version") != 1)
      throw IoError("models: unsupported model bundle format");
    for (const auto& [mode, clf] : j.at("d1").items())
      b.d1.emplace(parse_mic_mode(mode), StrokeClassifier::deserialize(clf.dump()));
    for (const auto& [key, clf] : j.at("groups").items())
      b.groups.insert(key, StrokeClassifier::deserialize(clf.dump()));
  } catch (const json::exception& e) {
    throw IoError(std::string("models: malformed bundle: ") + e.what());
  }
  return b;
}

namespace {

bool usable(const LabeledStrokeSample& s, MicMode mode) {
  for (double v : feature_vector(s, mode))
    if (!std::isfinite(v)) return false;
  return true;
}

std::optional<StrokeClassifier> try_train(const std::vector<LabeledStrokeSample>& samples, const ClassifierSpec& spec,
                                          MicMode mode) {
  try {
    return StrokeClassifier::train(samples, spec, mode);
  } catch (const TrainingError&) {
    return std::nullopt;
  }
}

}  // namespace

ModelBundle train_models(const std::vector<LabeledStrokeSample>& samples, const PatternCatalog& catalog,
                         const GroupTables& tables, const TrainingPlan& plan) {
  ModelBundle out;
  for (MicMode mode : {MicMode::Both, MicMode::Bottom, MicMode::Top}) {
    std::vector<LabeledStrokeSample> use;
    for (const auto& s : samples)
      if (usable(s, mode)) use.push_back(s);
    ClassifierSpec spec = plan.d1_override ? *plan.d1_override : default_d1_spec(mode);
    spec.seed = mix_seed(plan.seed, static_cast<std::uint64_t>(mode));
    if (auto clf = try_train(use, spec, mode)) out.d1.emplace(mode, std::move(*clf));
  }
  std::uint64_t stream = 100;
  for (TableMode table : {TableMode::Both, TableMode::Bottom, TableMode::Top}) {
    const MicMode mode = table == TableMode::Both ? MicMode::Both : table == TableMode::Bottom ? MicMode::Bottom
                                                                                               : MicMode::Top;
    for (const auto& [key, group] : tables.get(table)) {
      for (int p : distinguishing_positions(catalog, group)) {
        std::set<int> classes;
        for (int id : group) classes.insert(catalog.stroke_ids(id)[static_cast<std::size_t>(p)]);
        std::vector<LabeledStrokeSample> use;
        for (const auto& s : samples)
          if (classes.count(s.stroke_id) && usable(s, mode)) use.push_back(s);
        ClassifierSpec spec = plan.group_override ? *plan.group_override : default_group_spec(table, group, p);
        spec.seed = mix_seed(plan.seed, stream++);
        if (auto clf = try_train(use, spec, mode)) out.groups.add(table, group, p, std::move(*clf));
      }
    }
  }
  return out;
}

CandidateSet infer(DecisionMode mode, const Analysis& analysis, const GroupTables& tables,
                   const PatternCatalog& catalog, const ModelBundle* models) {
  const MicDirections d = directions_of(analysis);
  switch (mode.strategy) {
    case Strategy::D1: {
      if (!models) throw ConfigError("mode " + mode.to_string() + " needs trained models");
      const auto it = models->d1.find(mode.primary());
      if (it == models->d1.end())
        throw ConfigError("model bundle lacks a " + std::string(to_string(mode.primary())) + " stroke classifier");
      return d1_infer(analysis.strokes, it->second, catalog, mode);
    }
    case Strategy::D2:
      return d2_infer(d, tables, catalog, mode);
    case Strategy::D3: {
      static const GroupClassifierBank empty;
      return d3_infer(analysis.strokes, d, tables, catalog, models ? models->groups : empty, mode);
    }
  }
  return d2_infer(d, tables, catalog, mode);
}

std::vector<int> rank_candidates(const std::vector<CandidateSet>& observations) {
  std::map<int, int> total;
  for (const auto& o : observations)
    for (const auto& c : o.candidates) total[c.pattern_id] += c.count;
  std::vector<std::pair<int, int>> v(total.begin(), total.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<int> out;
  for (const auto& [id, n] : v) out.push_back(id);
  return out;
}

MetricsReport compute_metrics(const std::vector<TrialResult>& results, std::size_t catalog_size) {
  if (results.empty()) throw InputError("metrics: no results");
  if (catalog_size == 0) throw InputError("metrics: empty catalog");
  MetricsReport r;
  r.mode = results.front().set.mode.to_string();
  r.trials = results.size();
  r.catalog_size = catalog_size;

  struct Acc {
    double hits = 0, size = 0, n = 0;
  };
  std::map<int, Acc> by_user, by_pattern;
  std::map<std::pair<int, int>, std::vector<CandidateSet>> cells;
  Acc all;
  for (const auto& t : results) {
    const double hit = t.set.contains(t.pattern) ? 1.0 : 0.0;
    const double size = static_cast<double>(t.set.size());
    for (Acc* a : {&by_user[t.user], &by_pattern[t.pattern], &all}) {
      a->hits += hit;
      a->size += size;
      a->n += 1;
    }
    cells[{t.user, t.pattern}].push_back(t.set);
  }
  for (const auto& [u, a] : by_user) {
    r.guess_rate_per_user[u] = a.hits / a.n;
    r.candidates_per_user[u] = a.size / a.n;
  }
  for (const auto& [p, a] : by_pattern) {
    r.guess_rate_per_pattern[p] = a.hits / a.n;
    r.candidates_per_pattern[p] = a.size / a.n;
  }
  r.m1 = r.m3 = all.hits / all.n;
  r.m2 = r.m4 = all.size / all.n;

  std::map<int, Acc> rank_user, rank_pattern;
  double rank_sum = 0;
  for (const auto& [cell, sets] : cells) {
    const auto order = rank_candidates(sets);
    const auto it = std::find(order.begin(), order.end(), cell.second);
    const double rank = it == order.end() ? static_cast<double>(catalog_size)
                                          : static_cast<double>(it - order.begin() + 1);
    rank_user[cell.first].size += rank;
    rank_user[cell.first].n += 1;
    rank_pattern[cell.second].size += rank;
    rank_pattern[cell.second].n += 1;
    rank_sum += rank;
  }
  for (const auto& [u, a] : rank_user) r.attempts_per_user[u] = a.size / a.n;
  for (const auto& [p, a] : rank_pattern) r.attempts_per_pattern[p] = a.size / a.n;
  r.m5 = rank_sum / static_cast<double>(cells.size());
  return r;
}

namespace {

ordered_json keyed(const std::map<int, double>& m) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

std::string MetricsReport::to_json(int indent) const {
  ordered_json j;
  j["mode"] = mode;
  j["trials"] = trials;
  j["catalog_size"] = catalog_size;
  j["m1_guess_rate"] = m1;
  j["m2_mean_candidates"] = m2;
  j["m3_guess_rate"] = m3;
  j["m4_mean_candidates"] = m4;
  j["m5_mean_attempts"] = m5;
  j["per_user"] = {{"guess_rate", keyed(guess_rate_per_user)},
                   {"mean_candidates", keyed(candidates_per_user)},
                   {"mean_attempts", keyed(attempts_per_user)}};
  j["per_pattern"] = {{"guess_rate", keyed(guess_rate_per_pattern)},
                      {"mean_candidates", keyed(candidates_per_pattern)},
                      {"mean_attempts", keyed(attempts_per_pattern)}};
  return j.dump(indent);
}

std::string MetricsReport::to_table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "mode " << mode << ", " << trials << " trials, catalog of " << catalog_size << "\n";
  os << "  M1 guess rate       " << m1 << "\n";
  os << "  M2 mean candidates  " << m2 << "\n";
  os << "  M5 mean attempts    " << m5 << "\n\n";
  os << std::left << std::setw(8) << "user" << std::right << std::setw(10) << "M1" << std::setw(10) << "M2"
     << std::setw(10) << "M5" << "\n";
  for (const auto& [u, v] : guess_rate_per_user)
    os << std::left << std::setw(8) << u << std::right << std::setw(10) << v << std::setw(10)
       << candidates_per_user.at(u) << std::setw(10) << attempts_per_user.at(u) << "\n";
  os << "\n"
     << std::left << std::setw(8) << "pattern" << std::right << std::setw(10) << "M3" << std::setw(10) << "M4"
     << std::setw(10) << "M5" << "\n";
  for (const auto& [p, v] : guess_rate_per_pattern)
    os << std::left << std::setw(8) << p << std::right << std::setw(10) << v << std::setw(10)
       << candidates_per_pattern.at(p) << std::setw(10) << attempts_per_pattern.at(p) << "\n";
  return os.str();
}

}  // namespace sonarsnoop
