#include "sonarsnoop/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sonarsnoop/sonar_sim.hpp"

namespace sonarsnoop {

namespace {

int col_of(int p) { return p % 3; }
int row_of(int p) { return p / 3; }

std::array<int, 2> reduced_step(int a, int b) {
  int dx = col_of(b) - col_of(a);
  int dy = row_of(b) - row_of(a);
  const int g = std::gcd(std::abs(dx), std::abs(dy));
  return {dx / g, dy / g};
}

}  // namespace

int midpoint_between(int a, int b) {
  const int dx = col_of(b) - col_of(a);
  const int dy = row_of(b) - row_of(a);
  if (dx % 2 != 0 || dy % 2 != 0) return -1;
  return (row_of(a) + dy / 2) * 3 + col_of(a) + dx / 2;
}

bool UnlockPattern::is_valid(const std::vector<int>& points) {
  if (points.size() < 4 || points.size() > 9) return false;
  unsigned visited = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int p = points[i];
    if (p < 0 || p > 8 || (visited >> p & 1u)) return false;
    if (i > 0) {
      const int mid = midpoint_between(points[i - 1], p);
      if (mid >= 0 && !(visited >> mid & 1u)) return false;
    }
    visited |= 1u << p;
  }
  return true;
}

UnlockPattern::UnlockPattern(int id, std::vector<int> points) : id_(id), points_(std::move(points)) {
  if (!is_valid(points_)) {
    std::string seq;
    for (int p : points_) seq += std::to_string(p) + " ";
    throw ValidationError("invalid unlock pattern " + std::to_string(id) + ": " + seq);
  }
}

std::string UnlockPattern::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(points_[i]);
  }
  return out;
}

std::array<double, 2> Stroke::direction() const {
  const double dx = col_of(end) - col_of(start);
  const double dy = row_of(end) - row_of(start);
  const double n = std::hypot(dx, dy);
  return {dx / n, dy / n};
}

std::string Stroke::to_string() const { return std::to_string(start) + ">" + std::to_string(end); }

std::vector<Stroke> decompose(const UnlockPattern& pattern) {
  const auto& pts = pattern.points();
  if (!UnlockPattern::is_valid(pts)) throw ValidationError("decompose: invalid pattern");
  std::vector<Stroke> strokes;
  std::array<int, 2> heading{0, 0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto step = reduced_step(pts[i - 1], pts[i]);
    if (!strokes.empty() && step == heading) {
      strokes.back().end = pts[i];
    } else {
      strokes.push_back({pts[i - 1], pts[i]});
      heading = step;
    }
  }
  return strokes;
}

namespace {

void count_from(int node, unsigned visited, int length, int max_len, EnumerationResult& acc) {
  ++acc.by_length[static_cast<std::size_t>(length)];
  if (length == max_len) return;
  for (int next = 0; next < 9; ++next) {
    if (visited >> next & 1u) continue;
    const int mid = midpoint_between(node, next);
    if (mid >= 0 && !(visited >> mid & 1u)) continue;
    count_from(next, visited | 1u << next, length + 1, max_len, acc);
  }
}

}  // namespace

EnumerationResult enumerate_android_patterns(int min_len, int max_len) {
  if (min_len < 1 || max_len > 9 || min_len > max_len)
    throw ConfigError("enumerate: lengths must satisfy 1 <= min <= max <= 9");
  EnumerationResult all;
  for (int start = 0; start < 9; ++start) count_from(start, 1u << start, 1, max_len, all);
  EnumerationResult out;
  for (int len = min_len; len <= max_len; ++len) {
    out.by_length[static_cast<std::size_t>(len)] = all.by_length[static_cast<std::size_t>(len)];
    out.total += all.by_length[static_cast<std::size_t>(len)];
  }
  return out;
}

char direction_symbol(Direction d) {
  switch (d) {
    case Direction::Away: return 'A';
    case Direction::Towards: return 'T';
    default: return '?';
  }
}

std::string format_directions(const std::vector<Direction>& dirs) {
  std::string out;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (i) out += '-';
    out += direction_symbol(dirs[i]);
  }
  return out;
}

std::vector<Direction> parse_directions(std::string_view text) {
  std::vector<Direction> out;
  for (char c : text) {
    if (c == 'A') out.push_back(Direction::Away);
    else if (c == 'T') out.push_back(Direction::Towards);
    else if (c == '?') out.push_back(Direction::Indeterminate);
    else if (c != '-' && c != ' ') throw InputError(std::string("bad direction symbol '") + c + "'");
  }
  return out;
}

StrokeSignature signature(const UnlockPattern& pattern, Point mic_position,
                          const DeviceGeometry& geometry, Mic mic) {
  StrokeSignature sig;
  sig.mic = mic;
  for (const Stroke& s : decompose(pattern)) {
    const double before = distance(geometry.grid[static_cast<std::size_t>(s.start)], mic_position);
    const double after = distance(geometry.grid[static_cast<std::size_t>(s.end)], mic_position);
    if (std::abs(after - before) < 1e-9)
      throw ValidationError("signature: stroke " + s.to_string() + " keeps a constant mic distance");
    sig.symbols.push_back(after > before ? Direction::Away : Direction::Towards);
  }
  return sig;
}

std::string_view to_string(TableMode mode) {
  switch (mode) {
    case TableMode::Bottom: return "bottom";
    case TableMode::Top: return "top";
    default: return "both";
  }
}

TableMode parse_table_mode(std::string_view text) {
  if (text == "bottom") return TableMode::Bottom;
  if (text == "top") return TableMode::Top;
  if (text == "both") return TableMode::Both;
  throw ConfigError("unknown table mode '" + std::string(text) + "'");
}

std::string table_key(TableMode mode, const std::vector<Direction>& bottom,
                      const std::vector<Direction>& top) {
  switch (mode) {
    case TableMode::Bottom: return format_directions(bottom);
    case TableMode::Top: return format_directions(top);
    default: return format_directions(bottom) + "|" + format_directions(top);
  }
}

PatternCatalog::PatternCatalog(std::vector<UnlockPattern> patterns) : patterns_(std::move(patterns)) {
  std::set<int> seen;
  for (const auto& p : patterns_) {
    if (!seen.insert(p.id()).second)
      throw ValidationError("catalog: duplicate pattern id " + std::to_string(p.id()));
    for (const Stroke& s : decompose(p))
      if (std::find(vocabulary_.begin(), vocabulary_.end(), s) == vocabulary_.end())
        vocabulary_.push_back(s);
  }
}

PatternCatalog PatternCatalog::parse(std::string_view text) {
  std::vector<UnlockPattern> patterns;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw InputError("catalog line " + std::to_string(line_no) + ": expected 'id: points'");
    int id = 0;
    try {
      id = std::stoi(line.substr(0, colon));
    } catch (const std::exception&) {
      throw InputError("catalog line " + std::to_string(line_no) + ": bad id");
    }
    std::istringstream pts(line.substr(colon + 1));
    std::vector<int> points;
    int p;
    while (pts >> p) points.push_back(p);
    if (!pts.eof()) throw InputError("catalog line " + std::to_string(line_no) + ": bad point");
    patterns.emplace_back(id, std::move(points));
  }
  if (patterns.empty()) throw InputError("catalog is empty");
  return PatternCatalog(std::move(patterns));
}

PatternCatalog PatternCatalog::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open catalog " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

PatternCatalog PatternCatalog::builtin() { return parse(builtin_catalog_text()); }

std::string PatternCatalog::serialize() const {
  std::string out;
  for (const auto& p : patterns_) {
    out += std::to_string(p.id()) + ":";
    for (int q : p.points()) out += " " + std::to_string(q);
    out += "\n";
  }
  return out;
}

const UnlockPattern& PatternCatalog::by_id(int id) const {
  for (const auto& p : patterns_)
    if (p.id() == id) return p;
  throw InputError("catalog has no pattern " + std::to_string(id));
}

bool PatternCatalog::contains(int id) const {
  return std::any_of(patterns_.begin(), patterns_.end(), [id](const auto& p) { return p.id() == id; });
}

std::vector<int> PatternCatalog::ids() const {
  std::vector<int> out;
  for (const auto& p : patterns_) out.push_back(p.id());
  return out;
}

int PatternCatalog::stroke_id(const Stroke& s) const {
  auto it = std::find(vocabulary_.begin(), vocabulary_.end(), s);
  return it == vocabulary_.end() ? 0 : static_cast<int>(it - vocabulary_.begin()) + 1;
}

const Stroke& PatternCatalog::stroke(int id) const {
  if (id < 1 || id > static_cast<int>(vocabulary_.size()))
    throw InputError("no stroke with id " + std::to_string(id));
  return vocabulary_[static_cast<std::size_t>(id - 1)];
}

std::vector<int> PatternCatalog::stroke_ids(int pattern_id) const {
  std::vector<int> out;
  for (const Stroke& s : decompose(by_id(pattern_id))) out.push_back(stroke_id(s));
  return out;
}

PatternCatalog PatternCatalog::subset(const std::vector<int>& ids) const {
  std::vector<UnlockPattern> kept;
  for (int id : ids) kept.push_back(by_id(id));
  return PatternCatalog(std::move(kept));
}

GroupTable build_group_table(const PatternCatalog& catalog, TableMode mode,
                             const DeviceGeometry& geometry) {
  GroupTable table;
  for (const auto& p : catalog.patterns()) {
    const auto bottom = signature(p, geometry.mic_bottom, geometry, Mic::Bottom).symbols;
    const auto top = signature(p, geometry.mic_top, geometry, Mic::Top).symbols;
    table[table_key(mode, bottom, top)].push_back(p.id());
  }
  for (auto& [key, ids] : table) std::sort(ids.begin(), ids.end());
  return table;
}

GroupTables GroupTables::build(const PatternCatalog& catalog, const DeviceGeometry& geometry) {
  return {build_group_table(catalog, TableMode::Bottom, geometry),
          build_group_table(catalog, TableMode::Top, geometry),
          build_group_table(catalog, TableMode::Both, geometry)};
}

const GroupTable& GroupTables::get(TableMode mode) const {
  switch (mode) {
    case TableMode::Bottom: return bottom;
    case TableMode::Top: return top;
    default: return both;
  }
}

std::string group_tables_to_json(const GroupTables& tables) {
  nlohmann::ordered_json j;
  for (TableMode mode : {TableMode::Bottom, TableMode::Top, TableMode::Both}) {
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [key, ids] : tables.get(mode)) t[key] = ids;
    j[std::string(to_string(mode))] = t;
  }
  return j.dump(2);
}

}  // namespace sonarsnoop
