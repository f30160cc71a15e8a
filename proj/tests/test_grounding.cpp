#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace sftest;

namespace {

using Strings = std::set<std::string>;

FeatureKey cat(const std::string& g, const std::string& c) { return {g, TargetType::category, c}; }
FeatureKey mod(const std::string& g, const std::string& m) { return {g, TargetType::model, m}; }

ModelDatabase two_couches() {
  ModelDatabase db;
  db.add(rec("couch_red", "Couch", {2, 1, 1}));
  db.add(rec("couch_tan", "Couch", {2, 1, 1}));
  db.add(rec("chair_a", "Chair", {1, 1, 1}));
  return db;
}

Lexicon office_lexicon() {
  Lexicon l = Lexicon::defaults();
  l.add_database(office_db());
  return l;
}

// Weights a trainer might plausibly produce for the office catalog.
WeightTable office_weights() {
  WeightTable t;
  for (const char* c : {"desk", "chair", "table", "cup", "lamp", "couch"}) t.set(cat(c, c), 2.0);
  t.set(cat("sofa", "couch"), 2.0);
  t.set(mod("desk", "desk_b"), 1.0);
  t.set(mod("chair", "chair_a"), 1.0);
  t.set(mod("table", "table_a"), 1.0);
  t.set(mod("cup", "cup_a"), 1.0);
  t.set(mod("lamp", "lamp_a"), 1.0);
  t.set(mod("red", "couch_red"), 1.5);
  t.set(mod("couch", "couch_leather"), 0.5);
  return t;
}

}  // namespace

TEST(ScoreCategory, SofaToCouch) {
  WeightTable t;
  t.set(cat("sofa", "Couch"), 2.0);
  const auto s = score_category(t, {"sofa"});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.at("Couch"), 2.0);
}

TEST(ScoreCategory, EmptyPhraseAndLinearity) {
  WeightTable t;
  t.set(cat("red", "Couch"), 0.25);
  t.set(cat("sofa", "Couch"), 2.0);
  t.set(cat("red sofa", "Couch"), 0.5);
  EXPECT_TRUE(score_category(t, {}).empty());
  const auto s = score_category(t, {"red", "sofa"});
  EXPECT_EQ(s.at("Couch"), 0.25 + 2.0 + 0.5);
  // Decomposition: the phrase score equals the sum of per-n-gram scores.
  double parts = 0.0;
  for (const auto& g : text_ngrams(std::vector<std::string>{"red", "sofa"})) parts += t.score({g}, TargetType::category, "Couch");
  EXPECT_EQ(s.at("Couch"), parts);
}

TEST(ChooseCategory, Argmax) {
  EXPECT_EQ(choose_category({{"Couch", 2.0}, {"Chair", 0.6}}, "sofa"), "Couch");
}

TEST(ChooseCategory, ThresholdFallsBackToHead) {
  EXPECT_EQ(choose_category({{"Couch", 0.5}, {"Chair", 0.2}}, "desk"), "desk");
  EXPECT_EQ(choose_category({{"Couch", 0.5000001}}, "desk"), "Couch");
  EXPECT_EQ(choose_category({}, "desk"), "desk");
}

TEST(ChooseCategory, TiesGoLexicographic) { EXPECT_EQ(choose_category({{"B", 1.0}, {"A", 1.0}}, "x"), "A"); }

TEST(ChooseCategory, FromWeightsAtThreshold) {
  // Two features of 0.25 sum to exactly T_c, which is not above it.
  WeightTable t;
  t.set(cat("big", "Couch"), 0.25);
  t.set(cat("sofa", "Couch"), 0.25);
  EXPECT_EQ(choose_category(t, {"big", "sofa"}, "sofa"), "sofa");
  t.set(cat("big sofa", "Couch"), 0.001);
  EXPECT_EQ(choose_category(t, {"big", "sofa"}, "sofa"), "Couch");
}

TEST(SelectModel, MixesDescriptionAndUtterance) {
  // couch_red: 0.75 * 1.0 + 0.25 * 0.4 = 0.85; couch_tan: 0.75 * 0 + 0.25 * 2.0 = 0.5
  WeightTable t;
  t.set(mod("red", "couch_red"), 1.0);
  t.set(mod("cozy", "couch_red"), 0.4);
  t.set(mod("room", "couch_tan"), 2.0);
  const auto db = two_couches();
  const auto c = select_model(t, "Couch", Strings{"red"}, Strings{"cozy", "room"}, db);
  EXPECT_EQ(c.model_id, "couch_red");
  EXPECT_DOUBLE_EQ(c.score, 0.85);
  EXPECT_TRUE(c.category_constrained);
  const auto alt = select_model(t, "Couch", Strings{}, Strings{"cozy", "room"}, db);
  EXPECT_EQ(alt.model_id, "couch_tan");
  EXPECT_DOUBLE_EQ(alt.score, 0.5);
}

TEST(SelectModel, SingleCandidate) {
  WeightTable t;
  t.set(mod("chair", "chair_a"), 0.4);
  const auto c = select_model(t, "Chair", Strings{"chair"}, Strings{}, two_couches());
  EXPECT_EQ(c.model_id, "chair_a");
  EXPECT_DOUBLE_EQ(c.score, 0.3);
}

TEST(SelectModel, NonPositiveMeansSpurious) {
  WeightTable t;
  t.set(mod("idea", "couch_red"), -1.0);
  EXPECT_FALSE(select_model(t, "Couch", Strings{"idea"}, Strings{"idea"}, two_couches()).model_id);
  EXPECT_FALSE(select_model(WeightTable{}, "Couch", Strings{"x"}, Strings{"x"}, two_couches()).model_id);
}

TEST(SelectModel, UnknownCategoryWidensToAllModels) {
  WeightTable t;
  t.set(mod("thing", "chair_a"), 1.0);
  const auto c = select_model(t, "gizmo", Strings{"thing"}, Strings{}, two_couches());
  EXPECT_EQ(c.model_id, "chair_a");
  EXPECT_FALSE(c.category_constrained);
}

TEST(SelectModel, TiesGoLexicographic) {
  WeightTable t;
  t.set(mod("x", "couch_tan"), 1.0);
  t.set(mod("x", "couch_red"), 1.0);
  EXPECT_EQ(select_model(t, "Couch", Strings{"x"}, Strings{}, two_couches()).model_id, "couch_red");
}

TEST(ScaleCovariance, ArgmaxUnchanged) {
  std::mt19937 gen(9);
  std::normal_distribution<double> normal;
  const auto db = office_db();
  const std::vector<std::string> grams{"a", "b", "c", "d", "a b"};
  for (int trial = 0; trial < 50; ++trial) {
    WeightTable t, scaled;
    const double alpha = 0.1 + 5.0 * std::abs(normal(gen));
    for (const auto& g : grams) {
      for (const auto& id : db.all_model_ids()) {
        const double w = normal(gen);
        t.set(mod(g, id), w);
        scaled.set(mod(g, id), alpha * w);
      }
      for (const auto& [c, ids] : db.category_index()) {
        const double w = normal(gen);
        t.set(cat(g, c), w);
        scaled.set(cat(g, c), alpha * w);
      }
    }
    const Strings d{"a", "b", "a b"}, x{"c", "d"};
    const auto s1 = score_category(t, {"a", "b"}), s2 = score_category(scaled, {"a", "b"});
    for (const auto& [c, v] : s1) EXPECT_NEAR(s2.at(c), alpha * v, 1e-12);
    auto argmax = [](const std::map<std::string, double>& m) {
      return std::max_element(m.begin(), m.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
    };
    EXPECT_EQ(argmax(s1), argmax(s2));
    // Positivity is scale-free for alpha > 0, so both runs keep or drop together.
    const auto m1 = select_model(t, "couch", d, x, db), m2 = select_model(scaled, "couch", d, x, db);
    if (m1.model_id && m2.model_id) { EXPECT_EQ(m1.model_id, m2.model_id); }
    EXPECT_EQ(m1.model_id.has_value(), m2.model_id.has_value());
  }
}

TEST(BuildTemplate, ComboDeskAndChair) {
  const auto db = office_db();
  const auto lex = office_lexicon();
  const auto w = office_weights();
  GroundingContext ctx{&db, &w, &lex, {}};
  const auto t = build_template(Method::combo, ctx, "There is a desk and a chair");
  ASSERT_EQ(t.nodes.size(), 2u);
  EXPECT_EQ(t.nodes[0].category, "desk");
  EXPECT_EQ(t.nodes[1].category, "chair");
  EXPECT_EQ(t.nodes[0].model_id, "desk_b");
  EXPECT_TRUE(t.relations.empty());
}

TEST(BuildTemplate, ComboPicksModelFromAttribute) {
  const auto db = office_db();
  const auto lex = office_lexicon();
  const auto w = office_weights();
  GroundingContext ctx{&db, &w, &lex, {}};
  const auto t = build_template(Method::combo, ctx, "There is a red sofa.");
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].category, "couch");
  EXPECT_EQ(t.nodes[0].model_id, "couch_red");
}

TEST(BuildTemplate, LearnedAlwaysFour) {
  const auto db = office_db();
  const auto w = office_weights();
  GroundingContext ctx{&db, &w, nullptr, {}};
  for (const char* text : {"", "a desk", "a desk and a chair and a lamp and a cup and a table"})
    EXPECT_EQ(build_template(Method::learned, ctx, text).nodes.size(), 4u) << text;
}

TEST(BuildTemplate, RandomDeterministic) {
  const auto db = office_db();
  GroundingContext ctx{&db, nullptr, nullptr, {}};
  const auto a = build_template(Method::random, ctx, "anything", 17);
  EXPECT_EQ(a, build_template(Method::random, ctx, "anything", 17));
  EXPECT_EQ(a.nodes.size(), 4u);
  for (const auto& n : a.nodes) EXPECT_EQ(db.at(*n.model_id).category, n.category);
}

TEST(BuildTemplate, RuleUsesFirstModelAndAttributes) {
  const auto db = office_db();
  const auto lex = office_lexicon();
  GroundingContext ctx{&db, nullptr, &lex, {}};
  const auto t = build_template(Method::rule, ctx, "A red couch is next to a desk. On the desk is a cup.");
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].model_id, "couch_red");  // attribute matches model metadata
  EXPECT_EQ(t.nodes[1].model_id, "desk_a");     // lexicographically first
  ASSERT_EQ(t.relations.size(), 2u);
  EXPECT_NO_THROW(validate_template(t));
}

TEST(BuildTemplate, EmptyParseGivesEmptyTemplate) {
  const auto db = office_db();
  const auto lex = office_lexicon();
  const auto w = office_weights();
  GroundingContext ctx{&db, &w, &lex, {}};
  EXPECT_TRUE(build_template(Method::rule, ctx, "").nodes.empty());
  EXPECT_TRUE(build_template(Method::combo, ctx, "").nodes.empty());
}

TEST(BuildTemplate, MissingInputsAreValidationErrors) {
  const auto db = office_db();
  GroundingContext ctx{&db, nullptr, nullptr, {}};
  EXPECT_THROW(build_template(Method::learned, ctx, "a desk"), ValidationError);
  EXPECT_THROW(build_template(Method::combo, ctx, "a desk"), ValidationError);
  EXPECT_THROW(parse_method("human"), ValidationError);
}

TEST(BuildTemplate, ComboNeverExceedsRuleAndStaysInCategory) {
  const auto s = gen_synthetic_corpus({.categories = 10, .models = 25, .scenes = 60}, 3);
  const auto split = split_corpus(s.corpus, {}, 3);
  const auto m = train_discriminator(split.train, 4, 3, {});
  const WeightTable w(m.vocab, m.weights);
  GroundingContext ctx{&s.db, &w, &s.lexicon, {}};
  for (const auto& d : split.dev.descriptions()) {
    const auto rule = build_template(Method::rule, ctx, d.text);
    const auto combo = build_template(Method::combo, ctx, d.text);
    EXPECT_LE(combo.nodes.size(), rule.nodes.size());
    EXPECT_NO_THROW(validate_template(combo));
    for (const auto& n : combo.nodes) {
      ASSERT_TRUE(n.model_id);
      if (!s.db.models_of(n.category).empty()) { EXPECT_EQ(s.db.at(*n.model_id).category, n.category); }
    }
  }
}
