#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "sonarsnoop/patterns.hpp"
#include "sonarsnoop/sonar_sim.hpp"

using namespace sonarsnoop;

namespace {

const PatternCatalog& catalog() {
  static const PatternCatalog c = PatternCatalog::builtin();
  return c;
}

GroupTable table(TableMode mode) { return build_group_table(catalog(), mode, DeviceGeometry::standard()); }

}  // namespace

TEST(UnlockPattern, ValidityRules) {
  EXPECT_TRUE(UnlockPattern::is_valid({0, 3, 6, 7, 8}));
  EXPECT_FALSE(UnlockPattern::is_valid({0, 1, 2}));           // too short
  EXPECT_FALSE(UnlockPattern::is_valid({0, 1, 2, 1}));        // repeat
  EXPECT_FALSE(UnlockPattern::is_valid({0, 2, 5, 8}));        // jumps over unvisited 1
  EXPECT_TRUE(UnlockPattern::is_valid({1, 0, 2, 5}));         // 1 already visited
  EXPECT_TRUE(UnlockPattern::is_valid({0, 5, 6, 1}));         // knight moves never blocked
  EXPECT_FALSE(UnlockPattern::is_valid({0, 8, 1, 2}));        // passes over 4
  EXPECT_THROW(UnlockPattern(1, {0, 9, 1, 2}), ValidationError);
  EXPECT_EQ(UnlockPattern(1, {0, 3, 6, 7, 8}).to_string(), "0-3-6-7-8");
}

TEST(Decompose, StraightRunIsOneStroke) {
  const auto s = decompose(UnlockPattern(0, {0, 1, 2, 5}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], (Stroke{0, 2}));
  EXPECT_EQ(s[1], (Stroke{2, 5}));
}

TEST(Decompose, LShapeIsTwoStrokes) {
  const auto s = decompose(UnlockPattern(0, {0, 3, 6, 7, 8}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].to_string(), "0>6");
  EXPECT_EQ(s[1].to_string(), "6>8");
}

TEST(Decompose, ReconstructsInflectionPoints) {
  for (const auto& p : catalog().patterns()) {
    const auto strokes = decompose(p);
    ASSERT_FALSE(strokes.empty());
    EXPECT_EQ(strokes.front().start, p.points().front());
    EXPECT_EQ(strokes.back().end, p.points().back());
    for (std::size_t i = 1; i < strokes.size(); ++i) {
      EXPECT_EQ(strokes[i].start, strokes[i - 1].end);
      EXPECT_NE(strokes[i].direction(), strokes[i - 1].direction());
    }
  }
}

TEST(Catalog, FifteenUniqueStrokes) {
  std::set<Stroke> unique;
  for (const auto& p : catalog().patterns())
    for (const auto& s : decompose(p)) unique.insert(s);
  EXPECT_EQ(unique.size(), 15u);
  EXPECT_EQ(catalog().vocabulary().size(), 15u);
  EXPECT_EQ(catalog().size(), 12u);
}

TEST(Catalog, ParseAndSerializeRoundTrip) {
  const auto c = PatternCatalog::parse("# comment\n3: 0 1 2 5\n\n7: 3 6 7 8  # trailing\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.by_id(7).points(), (std::vector<int>{3, 6, 7, 8}));
  const auto again = PatternCatalog::parse(c.serialize());
  EXPECT_EQ(again.ids(), c.ids());
  EXPECT_EQ(PatternCatalog::parse(catalog().serialize()).ids(), catalog().ids());
  EXPECT_THROW(PatternCatalog::parse("1: 0 2 5 8\n"), ValidationError);
}

TEST(Catalog, StrokeIds) {
  const auto ids = catalog().stroke_ids(2);
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(catalog().stroke(ids[0]).to_string(), "0>6");
  EXPECT_EQ(catalog().stroke_id(Stroke{0, 6}), ids[0]);
  EXPECT_EQ(catalog().stroke_id(Stroke{4, 0}), 0);
}

TEST(Enumerate, AndroidTotals) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = enumerate_android_patterns();
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
  EXPECT_EQ(r.total, 389112u);
  EXPECT_EQ(r.by_length[4], 1624u);
  EXPECT_EQ(r.by_length[5], 7152u);
  EXPECT_EQ(r.by_length[6], 26016u);
  EXPECT_EQ(r.by_length[7], 72912u);
  EXPECT_EQ(r.by_length[8], 140704u);
  EXPECT_EQ(r.by_length[9], 140704u);
}

TEST(Enumerate, SingleLengths) {
  EXPECT_EQ(enumerate_android_patterns(4, 4).total, 1624u);
  EXPECT_EQ(enumerate_android_patterns(9, 9).total, 140704u);
}

TEST(Directions, FormatAndParse) {
  const std::vector<Direction> d{Direction::Away, Direction::Towards, Direction::Away};
  EXPECT_EQ(format_directions(d), "A-T-A");
  EXPECT_EQ(parse_directions("A-T-A"), d);
  EXPECT_EQ(table_key(TableMode::Both, {Direction::Away, Direction::Towards}, {Direction::Away, Direction::Away}),
            "A-T|A-A");
}

TEST(Signature, Table1Examples) {
  const auto g = DeviceGeometry::standard();
  for (int id : {1, 4, 7, 8})
    EXPECT_EQ(signature(catalog().by_id(id), g.mic_bottom, g, Mic::Bottom).to_string(), "A-T") << id;
  EXPECT_EQ(signature(catalog().by_id(9), g.mic_top, g, Mic::Top).to_string(), "A-A-A-T");
}

TEST(GroupTable, BottomMicMatchesTable) {
  const GroupTable want{{"A-T", {1, 4, 7, 8}},
                        {"T-A", {2, 5, 6, 11}},
                        {"A-T-A", {3, 10}},
                        {"A-T-A-A", {9}},
                        {"A-T-T", {12}}};
  EXPECT_EQ(table(TableMode::Bottom), want);
}

TEST(GroupTable, TopMicMatchesTable) {
  const GroupTable want{{"A-A", {1, 2, 4, 5, 8, 11}},
                        {"A-A-A", {3, 10}},
                        {"A-T", {6, 7}},
                        {"A-A-A-T", {9}},
                        {"A-A-T", {12}}};
  EXPECT_EQ(table(TableMode::Top), want);
}

TEST(GroupTable, BothMicsMatchTable) {
  const GroupTable want{{"A-T|A-A", {1, 4, 8}},     {"T-A|A-A", {2, 5, 11}},         {"A-T-A|A-A-A", {3, 10}},
                        {"T-A|A-T", {6}},           {"A-T|A-T", {7}},                {"A-T-A-A|A-A-A-T", {9}},
                        {"A-T-T|A-A-T", {12}}};
  EXPECT_EQ(table(TableMode::Both), want);
}

TEST(GroupTable, SinglePatternCatalog) {
  const auto one = catalog().subset({5});
  const auto t = build_group_table(one, TableMode::Both, DeviceGeometry::standard());
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.begin()->second, std::vector<int>{5});
}

TEST(GroupTable, JsonExport) {
  const auto json = group_tables_to_json(GroupTables::build(catalog(), DeviceGeometry::standard()));
  EXPECT_NE(json.find("\"A-T|A-A\""), std::string::npos);
  EXPECT_NE(json.find("\"bottom\""), std::string::npos);
}
