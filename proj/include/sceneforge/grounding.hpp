#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/features.hpp"
#include "sceneforge/scene_template.hpp"
#include "sceneforge/textproc.hpp"

// Scene-template construction under the random, learned, rule and combined
// conditions. The combined condition re-scores the rule parse's category and
// model choices with learned lexical weights.
namespace sceneforge {

enum class Method { random, learned, rule, combo };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::random: return "random";
    case Method::learned: return "learned";
    case Method::rule: return "rule";
    case Method::combo: return "combo";
  }
  return "random";
}

inline Method parse_method(const std::string& s) {
  if (s == "random") return Method::random;
  if (s == "learned") return Method::learned;
  if (s == "rule") return Method::rule;
  if (s == "combo") return Method::combo;
  throw ValidationError("unknown method '" + s + "' (expected random, learned, rule or combo)");
}

struct GroundingParams {
  double category_threshold = 0.5;  // T_c
  double lambda_description = 0.75;
  double lambda_utterance = 0.25;
  int object_count = 4;  // nodes emitted by the random and learned conditions
};

// Score(c|p): sum of category weights over the phrase's n-grams.
inline std::map<std::string, double> score_category(const WeightTable& weights,
                                                    const std::vector<std::string>& phrase_tokens) {
  return weights.scores(text_ngrams(phrase_tokens), TargetType::category);
}

// Best category whose score exceeds the threshold (ties go to the
// lexicographically smallest name); the head term otherwise.
inline std::string choose_category(const std::map<std::string, double>& scores, const std::string& head,
                                   double threshold = 0.5) {
  const std::string* best = nullptr;
  double best_score = threshold;
  for (const auto& [category, score] : scores) {
    if (score > best_score) {
      best = &category;
      best_score = score;
    }
  }
  return best ? *best : head;
}

inline std::string choose_category(const WeightTable& weights, const std::vector<std::string>& phrase_tokens,
                                   const std::string& head, double threshold = 0.5) {
  return choose_category(score_category(weights, phrase_tokens), head, threshold);
}

struct ModelChoice {
  std::optional<std::string> model_id;
  double score = 0.0;
  bool category_constrained = false;  // false when the category had no models
};

// argmax over the category's models of
//   lambda_d * sum_{phi(d)} theta(phi, m) + lambda_x * sum_{phi(x)} theta(phi, m),
// keeping the winner only if its score is positive. An unknown category
// widens the candidate set to every model.
inline ModelChoice select_model(const WeightTable& weights, const std::string& category,
                                const std::set<std::string>& description_ngrams,
                                const std::set<std::string>& utterance_ngrams, const ModelDatabase& db,
                                double lambda_description = 0.75, double lambda_utterance = 0.25) {
  ModelChoice choice;
  std::vector<std::string> candidates = db.models_of(category);
  choice.category_constrained = !candidates.empty();
  if (candidates.empty()) candidates = db.all_model_ids();

  const auto desc_scores = weights.scores(description_ngrams, TargetType::model);
  const auto utt_scores = weights.scores(utterance_ngrams, TargetType::model);
  auto lookup = [](const std::map<std::string, double>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const auto& m : candidates) {  // candidates are sorted, so strict > keeps the smallest id on ties
    const double s = lambda_description * lookup(desc_scores, m) + lambda_utterance * lookup(utt_scores, m);
    if (best == nullptr || s > best_score) {
      best = &m;
      best_score = s;
    }
  }
  if (best && best_score > 0) {
    choice.model_id = *best;
    choice.score = best_score;
  }
  return choice;
}

// Category term the rule parser assigns to a mention.
inline std::string rule_category(const Mention& m, const ModelDatabase& db) {
  return resolve_category(db, m.chunk.compound_category ? *m.chunk.compound_category : m.head_lemma);
}

namespace detail {

inline std::vector<std::string> metadata_terms(const ModelRecord& r) {
  std::vector<std::string> out;
  std::string cur;
  for (const std::string& s : {r.model_id, r.category}) {
    for (char ch : s + " ") {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      } else if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
  }
  return out;
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + " ") {
    if (ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

}  // namespace detail

// Rule condition model lookup: the first model id of the category, preferring
// models whose metadata mentions one of the attributes.
inline std::optional<std::string> rule_model(const ModelDatabase& db, const std::string& category,
                                             const std::vector<std::string>& attributes) {
  const auto& ids = db.models_of(category);
  if (ids.empty()) return std::nullopt;
  for (const auto& id : ids) {
    const auto terms = detail::metadata_terms(db.at(id));
    for (const auto& a : attributes)
      if (std::find(terms.begin(), terms.end(), a) != terms.end()) return id;
  }
  return ids.front();
}

// n-grams of a mention's descriptive terms: its attributes and head in
// surface form (determiner and numeral dropped).
inline std::set<std::string> mention_ngrams(const Mention& m) {
  if (m.chunk.tokens.empty()) {
    std::vector<std::string> tokens = m.attributes;
    for (auto& w : detail::split_words(m.head_lemma)) tokens.push_back(w);
    return text_ngrams(tokens);
  }
  std::vector<std::string> tokens;
  std::size_t k = m.chunk.determiner ? 1 : 0;
  if (m.chunk.numeral) ++k;
  for (; k < m.chunk.tokens.size(); ++k) tokens.push_back(m.chunk.tokens[k]);
  return text_ngrams(tokens);
}

inline SceneTemplate random_template(const ModelDatabase& db, int count, std::uint64_t seed) {
  SceneTemplate t;
  if (db.empty()) return t;
  const auto ids = db.all_model_ids();
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const auto& id = rng.pick(ids);
    t.nodes.push_back({i, db.at(id).category, id, {}, 1});
  }
  return t;
}

// Top-scoring models for the whole utterance. There is no notion of object
// identity, so several nodes may share a category.
inline SceneTemplate learned_template(const WeightTable& weights, const ModelDatabase& db,
                                      const std::set<std::string>& utterance_ngrams, int count) {
  const auto scores = weights.scores(utterance_ngrams, TargetType::model);
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& id : db.all_model_ids()) {
    auto it = scores.find(id);
    ranked.emplace_back(it == scores.end() ? 0.0 : it->second, id);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  SceneTemplate t;
  for (int i = 0; i < count && i < static_cast<int>(ranked.size()); ++i) {
    const auto& id = ranked[static_cast<std::size_t>(i)].second;
    t.nodes.push_back({i, db.at(id).category, id, {}, 1});
  }
  return t;
}

inline SceneTemplate rule_template(const ParsedUtterance& parsed, const ModelDatabase& db) {
  SceneTemplate t;
  for (const auto& m : parsed.mentions) {
    const auto category = rule_category(m, db);
    t.nodes.push_back({m.coref_id, category, rule_model(db, category, m.attributes), m.attributes, m.count});
  }
  t.relations = parsed.relations;
  return t;
}

inline SceneTemplate combo_template(const ParsedUtterance& parsed, const WeightTable& weights, const ModelDatabase& db,
                                    const GroundingParams& params = {}) {
  const auto utterance = text_ngrams(parsed.sentences);
  SceneTemplate t;
  std::set<int> kept;
  for (const auto& m : parsed.mentions) {
    const auto category =
        choose_category(weights, m.chunk.tokens, rule_category(m, db), params.category_threshold);
    const auto choice = select_model(weights, category, mention_ngrams(m), utterance, db, params.lambda_description,
                                     params.lambda_utterance);
    if (!choice.model_id) continue;  // spurious mention
    t.nodes.push_back({m.coref_id, category, choice.model_id, m.attributes, m.count});
    kept.insert(m.coref_id);
  }
  for (const auto& r : parsed.relations) {
    if (!kept.count(r.subject)) continue;
    if (r.object && !kept.count(*r.object)) continue;
    t.relations.push_back(r);
  }
  return t;
}

// Everything a builder might need; unused members may be null for methods
// that do not read them.
struct GroundingContext {
  const ModelDatabase* db = nullptr;
  const WeightTable* weights = nullptr;
  const Lexicon* lexicon = nullptr;
  GroundingParams params;
};

inline SceneTemplate build_template(Method method, const GroundingContext& ctx, std::string_view text,
                                    std::uint64_t seed = 0) {
  if (!ctx.db) throw ValidationError("grounding needs a model database");
  auto need_weights = [&]() -> const WeightTable& {
    if (!ctx.weights) throw ValidationError(to_string(method) + " grounding needs trained weights");
    return *ctx.weights;
  };
  auto need_lexicon = [&]() -> const Lexicon& {
    if (!ctx.lexicon) throw ValidationError(to_string(method) + " grounding needs a lexicon");
    return *ctx.lexicon;
  };
  switch (method) {
    case Method::random:
      return random_template(*ctx.db, ctx.params.object_count, seed);
    case Method::learned:
      return learned_template(need_weights(), *ctx.db, text_ngrams(text), ctx.params.object_count);
    case Method::rule:
      return rule_template(parse(text, need_lexicon()), *ctx.db);
    case Method::combo:
      return combo_template(parse(text, need_lexicon()), need_weights(), *ctx.db, ctx.params);
  }
  return {};
}

}  // namespace sceneforge
