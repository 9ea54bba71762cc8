#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonarsnoop/common.hpp"

namespace sonarsnoop {

struct DeviceGeometry;

class UnlockPattern {
 public:
  UnlockPattern() = default;
  // Throws ValidationError unless the sequence is a legal Android pattern.
  UnlockPattern(int id, std::vector<int> points);

  int id() const { return id_; }
  const std::vector<int>& points() const { return points_; }
  std::string to_string() const;  // "0-3-6-7-8"

  static bool is_valid(const std::vector<int>& points);

 private:
  int id_ = 0;
  std::vector<int> points_;
};

struct Stroke {
  int start = 0;
  int end = 0;

  // Unit direction in grid coordinates (x right, y down).
  std::array<double, 2> direction() const;
  std::string to_string() const;  // "0>6"
  auto operator<=>(const Stroke&) const = default;
};

std::vector<Stroke> decompose(const UnlockPattern& pattern);

// The grid point between a and b when they are collinear two steps apart, else -1.
int midpoint_between(int a, int b);

struct EnumerationResult {
  std::uint64_t total = 0;
  std::array<std::uint64_t, 10> by_length{};  // index = pattern length
};

// Patterns of length min_len..max_len under the skip-over rule.
EnumerationResult enumerate_android_patterns(int min_len = 4, int max_len = 9);

enum class Direction { Away, Towards, Indeterminate };

char direction_symbol(Direction d);  // 'A', 'T', '?'
std::string format_directions(const std::vector<Direction>& dirs);  // "A-T"
std::vector<Direction> parse_directions(std::string_view text);

struct StrokeSignature {
  Mic mic = Mic::Bottom;
  std::vector<Direction> symbols;
  std::string to_string() const { return format_directions(symbols); }
};

// Towards/away per stroke from Euclidean distance to the mic, in device millimetres.
// Throws ValidationError on a stroke whose distance does not change.
StrokeSignature signature(const UnlockPattern& pattern, Point mic_position,
                          const DeviceGeometry& geometry, Mic mic = Mic::Bottom);

enum class TableMode { Bottom, Top, Both };

std::string_view to_string(TableMode mode);
TableMode parse_table_mode(std::string_view text);

// Both-mode keys join the bottom and top signatures with '|', e.g. "A-T|A-A".
std::string table_key(TableMode mode, const std::vector<Direction>& bottom,
                      const std::vector<Direction>& top);

class PatternCatalog {
 public:
  PatternCatalog() = default;
  explicit PatternCatalog(std::vector<UnlockPattern> patterns);

  // Parses "id: p0 p1 ..." lines; '#' starts a comment.
  static PatternCatalog parse(std::string_view text);
  static PatternCatalog load(const std::string& path);
  static PatternCatalog builtin();

  std::string serialize() const;

  const std::vector<UnlockPattern>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  const UnlockPattern& by_id(int id) const;
  bool contains(int id) const;
  std::vector<int> ids() const;

  // Distinct strokes, numbered 1.. in order of first appearance.
  const std::vector<Stroke>& vocabulary() const { return vocabulary_; }
  int stroke_id(const Stroke& s) const;  // 0 if absent
  const Stroke& stroke(int id) const;
  std::vector<int> stroke_ids(int pattern_id) const;

  // Copy restricted to the listed pattern ids.
  PatternCatalog subset(const std::vector<int>& ids) const;

 private:
  std::vector<UnlockPattern> patterns_;
  std::vector<Stroke> vocabulary_;
};

std::string_view builtin_catalog_text();

using GroupTable = std::map<std::string, std::vector<int>>;

GroupTable build_group_table(const PatternCatalog& catalog, TableMode mode,
                             const DeviceGeometry& geometry);

struct GroupTables {
  GroupTable bottom;
  GroupTable top;
  GroupTable both;

  static GroupTables build(const PatternCatalog& catalog, const DeviceGeometry& geometry);
  const GroupTable& get(TableMode mode) const;
};

std::string group_tables_to_json(const GroupTables& tables);

}  // namespace sonarsnoop
