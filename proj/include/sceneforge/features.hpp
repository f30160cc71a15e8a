#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/textproc.hpp"

namespace sceneforge {

enum class TargetType { category, model };

inline std::string to_string(TargetType t) { return t == TargetType::category ? "category" : "model"; }

inline TargetType parse_target_type(const std::string& s) {
  if (s == "category") return TargetType::category;
  if (s == "model") return TargetType::model;
  throw SchemaError("unknown target type '" + s + "'");
}

// Binary indicator for (n-gram, object identity) co-occurrence.
struct FeatureKey {
  std::string ngram;
  TargetType type = TargetType::category;
  std::string target;

  std::string encoded() const {
    std::string s;
    s.reserve(ngram.size() + target.size() + 3);
    s += type == TargetType::category ? 'c' : 'm';
    s += '\x1f';
    s += ngram;
    s += '\x1f';
    s += target;
    return s;
  }

  friend bool operator==(const FeatureKey&, const FeatureKey&) = default;
  friend auto operator<=>(const FeatureKey& a, const FeatureKey& b) {
    return std::tie(a.ngram, a.type, a.target) <=> std::tie(b.ngram, b.type, b.target);
  }
};

class FeatureVocab {
 public:
  std::optional<std::uint32_t> find(const FeatureKey& key) const {
    auto it = index_.find(key.encoded());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t add(const FeatureKey& key) {
    auto [it, inserted] = index_.emplace(key.encoded(), static_cast<std::uint32_t>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
  }

  const FeatureKey& key(std::size_t i) const { return keys_.at(i); }
  const std::vector<FeatureKey>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<FeatureKey> keys_;
  bool frozen_ = false;
};

struct WeightVector {
  std::vector<double> values;
  double bias = 0.0;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

// Unigrams plus adjacent bigrams. Punctuation is dropped and breaks bigram
// adjacency; bigrams never cross sentences.
inline std::set<std::string> text_ngrams(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  const std::string* prev = nullptr;
  for (const auto& t : tokens) {
    if (t.empty() || is_punctuation(t)) {
      prev = nullptr;
      continue;
    }
    out.insert(t);
    if (prev) out.insert(*prev + " " + t);
    prev = &t;
  }
  return out;
}

inline std::set<std::string> text_ngrams(const std::vector<Sentence>& sentences) {
  std::set<std::string> out;
  for (const auto& s : sentences) {
    std::vector<std::string> tokens;
    tokens.reserve(s.size());
    for (const auto& t : s) tokens.push_back(t.text);
    out.merge(text_ngrams(tokens));
  }
  return out;
}

inline std::set<std::string> text_ngrams(std::string_view text) { return text_ngrams(tokenize_and_split(text)); }

// Cartesian product of the n-grams with the scene's distinct categories and
// distinct model ids.
inline std::set<FeatureKey> pair_features(const std::set<std::string>& ngrams, const Scene& scene) {
  std::set<std::string> categories, models;
  for (const auto& o : scene.objects) {
    categories.insert(o.category);
    models.insert(o.model_id);
  }
  std::set<FeatureKey> out;
  for (const auto& g : ngrams) {
    for (const auto& c : categories) out.insert({g, TargetType::category, c});
    for (const auto& m : models) out.insert({g, TargetType::model, m});
  }
  return out;
}

inline std::set<FeatureKey> pair_features(const std::vector<Sentence>& description, const Scene& scene) {
  return pair_features(text_ngrams(description), scene);
}

// Sorted dense indices of the keys. A frozen vocabulary silently drops
// unknown keys; otherwise new keys are appended.
template <typename Keys>
std::vector<std::uint32_t> vectorize(const Keys& keys, FeatureVocab& vocab, bool frozen) {
  std::vector<std::uint32_t> out;
  out.reserve(keys.size());
  const bool lookup_only = frozen || vocab.frozen();
  for (const auto& k : keys) {
    if (lookup_only) {
      if (auto i = vocab.find(k)) out.push_back(*i);
    } else {
      out.push_back(vocab.add(k));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <typename Keys>
std::vector<std::uint32_t> vectorize(const Keys& keys, const FeatureVocab& vocab) {
  std::vector<std::uint32_t> out;
  for (const auto& k : keys)
    if (auto i = vocab.find(k)) out.push_back(*i);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Lookup of learned weights by n-gram, used by the grounding stage.

class WeightTable {
 public:
  struct Entry {
    TargetType type;
    std::string target;
    double weight;
  };

  WeightTable() = default;

  WeightTable(const FeatureVocab& vocab, const WeightVector& w) {
    if (w.values.size() != vocab.size()) throw ValidationError("weight vector does not match vocabulary size");
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const auto& k = vocab.key(i);
      by_ngram_[k.ngram].push_back({k.type, k.target, w.values[i]});
    }
    for (auto& [g, entries] : by_ngram_) {
      std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.type, a.target) < std::tie(b.type, b.target);
      });
    }
  }

  void set(const FeatureKey& key, double weight) {
    auto& entries = by_ngram_[key.ngram];
    for (auto& e : entries) {
      if (e.type == key.type && e.target == key.target) {
        e.weight = weight;
        return;
      }
    }
    entries.push_back({key.type, key.target, weight});
  }

  double weight(const FeatureKey& key) const {
    auto it = by_ngram_.find(key.ngram);
    if (it == by_ngram_.end()) return 0.0;
    for (const auto& e : it->second)
      if (e.type == key.type && e.target == key.target) return e.weight;
    return 0.0;
  }

  // Sum of weights over the n-grams for every target of the given type with
  // at least one active feature. Summation follows n-gram order.
  std::map<std::string, double> scores(const std::set<std::string>& ngrams, TargetType type) const {
    std::map<std::string, double> out;
    for (const auto& g : ngrams) {
      auto it = by_ngram_.find(g);
      if (it == by_ngram_.end()) continue;
      for (const auto& e : it->second)
        if (e.type == type) out[e.target] += e.weight;
    }
    return out;
  }

  double score(const std::set<std::string>& ngrams, TargetType type, const std::string& target) const {
    double s = 0.0;
    for (const auto& g : ngrams) s += weight({g, type, target});
    return s;
  }

  bool empty() const { return by_ngram_.empty(); }

 private:
  std::map<std::string, std::vector<Entry>> by_ngram_;
};

// weights.json: every feature sorted by descending weight; ties ordered by
// (targetType, target, ngram).
inline json weights_to_json(const FeatureVocab& vocab, const WeightVector& w) {
  std::vector<std::size_t> order(vocab.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (w.values[a] != w.values[b]) return w.values[a] > w.values[b];
    const auto& ka = vocab.key(a);
    const auto& kb = vocab.key(b);
    return std::tie(ka.type, ka.target, ka.ngram) < std::tie(kb.type, kb.target, kb.ngram);
  });
  json out = json::array();
  for (auto i : order) {
    const auto& k = vocab.key(i);
    out.push_back({{"ngram", k.ngram}, {"targetType", to_string(k.type)}, {"target", k.target}, {"weight", w.values[i]}});
  }
  return out;
}

struct LoadedWeights {
  FeatureVocab vocab;
  WeightVector weights;
};

inline LoadedWeights weights_from_json(const json& j, const std::string& origin = "weights.json") {
  detail::require_array(j, origin);
  LoadedWeights out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + " record " + std::to_string(i);
    FeatureKey k{detail::field<std::string>(j[i], "ngram", where),
                 parse_target_type(detail::field<std::string>(j[i], "targetType", where)),
                 detail::field<std::string>(j[i], "target", where)};
    const auto before = out.vocab.size();
    out.vocab.add(k);
    if (out.vocab.size() == before) throw ValidationError(where + ": duplicate feature");
    out.weights.values.push_back(detail::field<double>(j[i], "weight", where));
  }
  out.vocab.freeze();
  return out;
}

inline LoadedWeights load_weights(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return weights_from_json(detail::parse_json(text, path.string()), path.string());
}

}  // namespace sceneforge
