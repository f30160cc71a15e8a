#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sceneforge/asts.hpp"
#include "sceneforge/corpus.hpp"
#include "sceneforge/features.hpp"
#include "sceneforge/grounding.hpp"
#include "sceneforge/learner.hpp"
#include "sceneforge/textproc.hpp"

// Whole-corpus drivers: discrimination training and per-method ASTS scoring.
namespace sceneforge {

struct TrainedModel {
  FeatureVocab vocab;
  WeightVector weights;
  TrainResult result;
  std::size_t groups = 0;
};

// Builds the discrimination set for a training split, admits its features
// into a fresh vocabulary and fits the weights.
inline TrainedModel train_discriminator(const Corpus& train_split, std::size_t k, std::uint64_t seed,
                                        const TrainConfig& config) {
  TrainedModel out;
  const auto groups = build_discrimination_set(train_split, k, seed);
  const auto vectorized = vectorize_groups(train_split, groups, out.vocab, false);
  out.vocab.freeze();
  const auto examples = flatten(vectorized);
  out.result = train(examples, out.vocab.size(), config);
  out.weights = out.result.weights;
  out.groups = groups.size();
  return out;
}

struct DiscriminationScores {
  double full = 0.0;
  double modelid_only = 0.0;
  std::size_t groups = 0;
};

inline DiscriminationScores score_discrimination(const Corpus& split, std::size_t k, std::uint64_t seed,
                                                 const FeatureVocab& vocab, const WeightVector& w) {
  FeatureVocab frozen = vocab;
  frozen.freeze();
  const auto groups = build_discrimination_set(split, k, seed);
  const auto vectorized = vectorize_groups(split, groups, frozen, true);
  return {eval_discrimination(w, frozen, vectorized, FeatureMode::full),
          eval_discrimination(w, frozen, vectorized, FeatureMode::modelid_only), groups.size()};
}

// ---------------------------------------------------------------------------
// Method comparison

struct MethodEvaluation {
  std::vector<Method> methods;
  std::vector<std::string> description_ids;
  std::vector<std::string> scene_ids;
  std::vector<std::vector<double>> scores;  // [description][method]
  std::vector<double> means;                // [method]

  std::optional<std::size_t> method_index(Method m) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
      if (methods[i] == m) return i;
    return std::nullopt;
  }
};

// Seed handed to the random condition for the d-th description.
inline std::uint64_t description_seed(std::uint64_t seed, std::size_t d) { return derive_rng(seed, d).next(); }

// Scores every description against its gold template when one is given
// (synthetic corpora), otherwise against the stored scene.
inline MethodEvaluation evaluate_methods(const Corpus& corpus, const std::vector<Method>& methods,
                                         const GroundingContext& ctx,
                                         const std::map<std::string, SceneTemplate>& gold, std::uint64_t seed) {
  MethodEvaluation out;
  out.methods = methods;
  out.means.assign(methods.size(), 0.0);
  for (std::size_t d = 0; d < corpus.description_count(); ++d) {
    const auto& desc = corpus.descriptions()[d];
    const auto id = corpus.description_id(d);
    std::vector<AlignItem> reference;
    if (auto it = gold.find(id); it != gold.end())
      reference = align_items(it->second);
    else
      reference = align_items(*corpus.find_scene(desc.scene_id));
    std::vector<double> row;
    for (auto m : methods) {
      const auto t = build_template(m, ctx, desc.text, description_seed(seed, d));
      const auto nodes = align_items(t);
      row.push_back(asts(nodes, reference));
    }
    out.description_ids.push_back(id);
    out.scene_ids.push_back(desc.scene_id);
    out.scores.push_back(std::move(row));
  }
  // Means in description order.
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::vector<double> column;
    for (const auto& row : out.scores) column.push_back(row[m]);
    out.means[m] = column.empty() ? 0.0 : detail::stable_sum(column) / static_cast<double>(column.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Human ratings

struct Rating {
  std::string description_id;
  double rating = 0.0;
  std::optional<Method> method;  // rows without one pair with the first evaluated method
};

inline std::vector<Rating> ratings_from_json(const json& j, const std::string& origin = "ratings.json") {
  detail::require_array(j, origin);
  std::vector<Rating> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + " record " + std::to_string(i);
    Rating r;
    r.description_id = detail::field<std::string>(j[i], "descriptionId", where);
    r.rating = detail::field<double>(j[i], "rating", where);
    if (j[i].contains("method")) r.method = parse_method(detail::field<std::string>(j[i], "method", where));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Rating> load_ratings(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return ratings_from_json(detail::parse_json(text, path.string()), path.string());
}

inline json correlation_json(const std::optional<Correlation>& c, std::size_t n) {
  json out{{"n", n}, {"pearson", nullptr}, {"kendallTau", nullptr}};
  if (c && c->pearson) out["pearson"] = *c->pearson;
  if (c && c->kendall) out["kendallTau"] = *c->kendall;
  return out;
}

// Both readings of "correlate ASTS with ratings": per rated description, and
// per method over mean rating vs mean ASTS.
inline json correlation_block(const MethodEvaluation& ev, const std::vector<Rating>& ratings) {
  if (ev.methods.empty()) throw ValidationError("ratings need at least one evaluated method");
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < ev.description_ids.size(); ++i) row_of[ev.description_ids[i]] = i;

  std::vector<double> xs, ys;
  std::map<std::size_t, std::vector<double>> rating_by_method, asts_by_method;
  std::size_t unmatched = 0;
  for (const auto& r : ratings) {
    auto row = row_of.find(r.description_id);
    const auto col = ev.method_index(r.method.value_or(ev.methods.front()));
    if (row == row_of.end() || !col) {
      ++unmatched;
      continue;
    }
    const double a = ev.scores[row->second][*col];
    xs.push_back(a);
    ys.push_back(r.rating);
    rating_by_method[*col].push_back(r.rating);
    asts_by_method[*col].push_back(a);
  }
  auto safe = [](const std::vector<double>& a, const std::vector<double>& b) -> std::optional<Correlation> {
    if (a.size() < 2) return std::nullopt;
    return correlate(a, b);
  };
  std::vector<double> mean_asts, mean_rating;
  for (const auto& [col, vals] : rating_by_method) {
    mean_rating.push_back(detail::stable_sum(vals) / static_cast<double>(vals.size()));
    mean_asts.push_back(detail::stable_sum(asts_by_method[col]) / static_cast<double>(vals.size()));
  }
  return {{"perDescription", correlation_json(safe(xs, ys), xs.size())},
          {"perMethodMean", correlation_json(safe(mean_asts, mean_rating), mean_asts.size())},
          {"unmatchedRatings", unmatched}};
}

inline json evaluation_json(const MethodEvaluation& ev) {
  json means = json::array();
  for (std::size_t m = 0; m < ev.methods.size(); ++m)
    means.push_back({{"method", to_string(ev.methods[m])}, {"meanAsts", ev.means[m]}});
  json rows = json::array();
  for (std::size_t d = 0; d < ev.description_ids.size(); ++d) {
    json scores = json::object();
    for (std::size_t m = 0; m < ev.methods.size(); ++m) scores[to_string(ev.methods[m])] = ev.scores[d][m];
    rows.push_back({{"descriptionId", ev.description_ids[d]}, {"sceneId", ev.scene_ids[d]}, {"asts", scores}});
  }
  return {{"means", means}, {"descriptions", rows}};
}

}  // namespace sceneforge
