#include <gtest/gtest.h>

#include <numbers>

#include "helpers.hpp"

using namespace sftest;

namespace {

ModelDatabase cubes() {
  ModelDatabase db;
  db.add(rec("cube", "box", {1, 1, 1}));
  db.add(rec("table", "table", {1.2, 0.8, 0.74}, 0.74));
  db.add(rec("cup", "cup", {0.09, 0.09, 0.1}));
  db.add(rec("chair", "chair", {0.5, 0.5, 0.9}));
  return db;
}

SceneTemplate table_cup() {
  SceneTemplate t;
  t.nodes = {{0, "table", "table", {}, 1}, {1, "cup", "cup", {}, 1}};
  t.relations = {{RelationKind::on, 1, 0}};
  return t;
}

Aabb box_of(const SceneObject& o, const ModelDatabase& db) { return object_box(o, db.at(o.model_id)); }

}  // namespace

TEST(Collision, SamePosition) {
  const auto db = cubes();
  EXPECT_EQ(check_collision({obj("cube", "box", {1, 1, 0}), obj("cube", "box", {1, 1, 0})}, db, 0.005).size(), 1u);
}

TEST(Collision, FarApart) {
  const auto db = cubes();
  EXPECT_TRUE(check_collision({obj("cube", "box", {1, 1, 0}), obj("cube", "box", {3, 1, 0})}, db, 0.005).empty());
}

TEST(Collision, RestingCupExempt) {
  const auto db = cubes();
  EXPECT_TRUE(check_collision({obj("table", "table", {2, 2, 0}), obj("cup", "cup", {2, 2, 0.74})}, db, 0.005).empty());
  // Sunk into the table top it is a collision again.
  EXPECT_EQ(check_collision({obj("table", "table", {2, 2, 0}), obj("cup", "cup", {2, 2, 0.6})}, db, 0.005).size(), 1u);
}

TEST(Collision, ToleranceAndYaw) {
  const auto db = cubes();
  // Overlap of 0.004 m along x is within tolerance.
  EXPECT_TRUE(check_collision({obj("cube", "box", {1, 1, 0}), obj("cube", "box", {1.996, 1, 0})}, db, 0.005).empty());
  // A quarter turn swaps the table's extents: 0.05 m clearance becomes 0.15 m overlap.
  auto a = obj("table", "table", {1, 1, 0});
  auto b = obj("chair", "chair", {1, 1.7, 0});
  EXPECT_TRUE(check_collision({a, b}, db, 0.005).empty());
  a.yaw = std::numbers::pi / 2;
  EXPECT_EQ(check_collision({a, b}, db, 0.005).size(), 1u);
}

TEST(Synthesize, CupOnTable) {
  const auto db = cubes();
  LayoutConfig cfg;
  cfg.seed = 3;
  const auto r = synthesize(table_cup(), db, cfg);
  ASSERT_EQ(r.scene.objects.size(), 2u);
  const auto& table = r.scene.objects[0];
  const auto& cup = r.scene.objects[1];
  EXPECT_DOUBLE_EQ(cup.position.z, 0.74 * table.scale);
  const auto tb = box_of(table, db), cb = box_of(cup, db);
  EXPECT_GE(cb.min.x, tb.min.x);
  EXPECT_LE(cb.max.x, tb.max.x);
  EXPECT_GE(cb.min.y, tb.min.y);
  EXPECT_LE(cb.max.y, tb.max.y);
  EXPECT_FALSE(r.degraded);
}

TEST(Synthesize, EmptyTemplate) {
  const auto r = synthesize({}, cubes(), {});
  EXPECT_TRUE(r.scene.objects.empty());
  EXPECT_EQ(r.scene.room_bounds.max.x, 4.0);
}

TEST(Synthesize, SameSeedIdenticalScene) {
  LayoutConfig cfg;
  cfg.seed = 12;
  const auto a = synthesize(table_cup(), cubes(), cfg);
  const auto b = synthesize(table_cup(), cubes(), cfg);
  EXPECT_EQ(scene_to_json(a.scene).dump(), scene_to_json(b.scene).dump());
}

TEST(Synthesize, CountExpansionAndModelFallback) {
  SceneTemplate t;
  t.nodes = {{0, "chair", std::nullopt, {}, 4}, {1, "sofa", std::nullopt, {}, 1}};
  const auto r = synthesize(t, cubes(), {});
  EXPECT_EQ(r.scene.objects.size(), 4u);
  for (const auto& o : r.scene.objects) EXPECT_EQ(o.model_id, "chair");
  EXPECT_EQ(r.warnings.size(), 1u);  // "sofa" resolves to nothing
}

TEST(Synthesize, QuarterTurnYaws) {
  SceneTemplate t;
  t.nodes = {{0, "chair", "chair", {}, 3}, {1, "table", "table", {}, 1}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    LayoutConfig cfg;
    cfg.seed = seed;
    for (const auto& o : synthesize(t, cubes(), cfg).scene.objects) {
      const double turns = o.yaw / (std::numbers::pi / 2);
      EXPECT_NEAR(turns, std::round(turns), 1e-12);
      EXPECT_GE(o.yaw, 0.0);
      EXPECT_LT(o.yaw, kTwoPi);
    }
  }
}

TEST(Synthesize, AllCollideIsDegraded) {
  // Six 1 m cubes in a 1.5 m room cannot avoid each other.
  ModelDatabase db;
  db.add(rec("cube", "box", {1, 1, 1}));
  SceneTemplate t;
  t.nodes = {{0, "box", "cube", {}, 6}};
  LayoutConfig cfg;
  cfg.room = {{0, 0, 0}, {1.5, 1.5, 2.5}};
  cfg.num_samples = 10;
  const auto r = synthesize(t, db, cfg);
  EXPECT_TRUE(r.degraded);
  EXPECT_FALSE(r.any_collision_free);
  EXPECT_EQ(r.scene.objects.size(), 6u);
  std::size_t least = r.candidate_collisions[0];
  for (auto c : r.candidate_collisions) least = std::min(least, c);
  EXPECT_EQ(r.candidate_collisions[static_cast<std::size_t>(r.chosen_sample)], least);
}

TEST(Synthesize, PropertiesOverRandomTemplates) {
  const auto s = gen_synthetic_corpus({.categories = 12, .models = 30, .scenes = 30}, 6);
  for (std::size_t i = 0; i < s.gold.size(); ++i) {
    LayoutConfig cfg;
    cfg.seed = i;
    cfg.num_samples = 30;
    const auto r = synthesize(s.gold[i], s.db, cfg);
    // Scene invariants.
    for (const auto& o : r.scene.objects) EXPECT_TRUE(r.scene.room_bounds.contains(o.position));
    // Count expansion.
    int expected = 0;
    for (const auto& n : s.gold[i].nodes) expected += n.count;
    EXPECT_EQ(static_cast<int>(r.scene.objects.size()), expected);
    // Collision free whenever possible, and the best of the collision-free candidates.
    if (r.any_collision_free) {
      EXPECT_TRUE(check_collision(r.scene.objects, s.db, cfg.collision_tolerance).empty());
      for (std::size_t k = 0; k < r.candidate_scores.size(); ++k)
        if (r.candidate_collisions[k] == 0) { EXPECT_GE(r.score, r.candidate_scores[k]); }
    }
    EXPECT_DOUBLE_EQ(r.score, score_layout(r.scene, s.gold[i], s.db, r.object_nodes, cfg));
  }
}

TEST(ScoreLayout, RelationlessIsSpreadOnly) {
  const auto db = cubes();
  SceneTemplate t;
  t.nodes = {{0, "cup", "cup", {}, 1}, {1, "cup", "cup", {}, 1}};
  Scene s = scene("s", {obj("cup", "cup", {1, 1, 0}), obj("cup", "cup", {1.8, 1, 0})});
  // Cups 0.8 m apart: no soft collision; spread term 0.1 * min(0.8, 1).
  EXPECT_NEAR(score_layout(s, t, db, LayoutConfig{}), 0.1 * 0.8, 1e-12);
  s.objects[1].position.x = 3.5;
  EXPECT_NEAR(score_layout(s, t, db, LayoutConfig{}), 0.1 * 1.0, 1e-12);
}

TEST(ScoreLayout, SatisfiedRelationsReachOne) {
  const auto db = cubes();
  SceneTemplate t = table_cup();
  t.nodes.push_back({2, "chair", "chair", {}, 1});
  t.relations.push_back({RelationKind::next_to, 2, 0});
  const Scene s = scene("s", {obj("table", "table", {2, 2, 0}), obj("cup", "cup", {2, 2, 0.74}),
                              obj("chair", "chair", {2, 2.8, 0})});
  EXPECT_GE(score_layout(s, t, db, LayoutConfig{}), 1.0);
  EXPECT_TRUE(check_collision(s.objects, db, 0.005).empty());
}

TEST(ScoreLayout, ViolatedOnCostsHalf) {
  // Two relations. Lifting the cup 0.16 m above the table top breaks
  // on(cup, table) without touching anything else or moving it in xy, so only
  // the relation ratio changes: 1 -> 1/2.
  const auto db = cubes();
  SceneTemplate t = table_cup();
  t.nodes.push_back({2, "chair", "chair", {}, 1});
  t.relations.push_back({RelationKind::next_to, 2, 0});
  const Scene good = scene("s", {obj("table", "table", {2, 2, 0}), obj("cup", "cup", {2, 2, 0.74}),
                                 obj("chair", "chair", {2, 2.8, 0})});
  Scene bad = good;
  bad.objects[1].position.z = 0.9;
  // Nearest-neighbour distances 0, 0, 0.8 -> spread 0.8 / 3.
  EXPECT_NEAR(score_layout(good, t, db, LayoutConfig{}), 1.0 + 0.1 * 0.8 / 3, 1e-12);
  EXPECT_NEAR(score_layout(good, t, db, LayoutConfig{}) - score_layout(bad, t, db, LayoutConfig{}), 0.5, 1e-12);
}

TEST(Relations, Predicates) {
  const auto db = cubes();
  LayoutConfig cfg;
  const Box3 room = cfg.room;
  const auto& chair = db.at("chair");
  auto a = obj("chair", "chair", {1, 1, 0});
  auto b = obj("chair", "chair", {2, 2, 0});
  EXPECT_TRUE(relation_satisfied(RelationKind::left_of, a, chair, &b, &chair, room, cfg));
  EXPECT_FALSE(relation_satisfied(RelationKind::right_of, a, chair, &b, &chair, room, cfg));
  EXPECT_TRUE(relation_satisfied(RelationKind::in_front_of, a, chair, &b, &chair, room, cfg));
  EXPECT_TRUE(relation_satisfied(RelationKind::behind, b, chair, &a, &chair, room, cfg));
  EXPECT_FALSE(relation_satisfied(RelationKind::near, a, chair, &b, &chair, room, cfg));
  b.position = {1.8, 1, 0};
  EXPECT_TRUE(relation_satisfied(RelationKind::next_to, a, chair, &b, &chair, room, cfg));
  const auto corner = obj("chair", "chair", {0.3, 3.7, 0});
  EXPECT_TRUE(relation_satisfied(RelationKind::in_corner, corner, chair, nullptr, nullptr, room, cfg));
  // Footprint edge 0.75 m from two walls still counts; 1.25 m does not.
  EXPECT_TRUE(relation_satisfied(RelationKind::in_corner, a, chair, nullptr, nullptr, room, cfg));
  const auto wall_only = obj("chair", "chair", {0.3, 2, 0});
  EXPECT_FALSE(relation_satisfied(RelationKind::in_corner, wall_only, chair, nullptr, nullptr, room, cfg));
  const auto off = obj("chair", "chair", {1.5, 1.5, 0});
  EXPECT_FALSE(relation_satisfied(RelationKind::in_corner, off, chair, nullptr, nullptr, room, cfg));
  const auto mid = obj("chair", "chair", {2, 2, 0});
  EXPECT_TRUE(relation_satisfied(RelationKind::in_center, mid, chair, nullptr, nullptr, room, cfg));
  EXPECT_FALSE(relation_satisfied(RelationKind::in_center, a, chair, nullptr, nullptr, room, cfg));
}

TEST(Render, SvgHasRoomAndLabels) {
  const auto db = cubes();
  const auto svg = render_svg(scene("s", {obj("table", "table", {2, 2, 0})}), db);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("table (table)"), std::string::npos);
  EXPECT_EQ(xml_escape("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;");
}
