#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/layout.hpp"
#include "sceneforge/scene_template.hpp"
#include "sceneforge/textproc.hpp"

// Desk-scale synthetic corpus with known ground truth. Scenes are laid out by
// the sampling synthesizer from a planned template; descriptions come from a
// small sentence grammar with synonym and typo noise.
namespace sceneforge {

struct SyntheticSpec {
  int categories = 15;
  int models = 40;
  int scenes = 300;
  double noise = 0.1;           // per-mention chance of a synonym or typo
  double attribute_rate = 0.75; // chance an introduction carries the model's attribute
  double support_rate = 0.6;    // chance a small item is placed on a furniture support
  int min_objects = 2;
  int max_objects = 5;
  int min_descriptions = 1;
  int max_descriptions = 3;
  int layout_samples = 100;
};

struct CategorySpec {
  std::string name;
  std::vector<std::string> synonyms;
  Vec3 dims;
  double support_height = 0.0;
  bool furniture = false;  // stands on the floor; small items may rest on it
};

// Category catalog in the order categories are taken.
inline const std::vector<CategorySpec>& synthetic_catalog() {
  static const std::vector<CategorySpec> catalog{
      {"desk", {"workstation", "bureau"}, {1.4, 0.7, 0.75}, 0.75, true},
      {"chair", {"seat", "stool"}, {0.5, 0.5, 0.9}, 0.0, true},
      {"lamp", {"lantern", "light"}, {0.25, 0.25, 0.5}, 0.0, false},
      {"table", {"counter"}, {1.2, 0.8, 0.74}, 0.74, true},
      {"cup", {"mug"}, {0.09, 0.09, 0.1}, 0.0, false},
      {"couch", {"sofa", "settee"}, {2.0, 0.9, 0.85}, 0.0, true},
      {"plate", {"dish", "platter"}, {0.26, 0.26, 0.03}, 0.0, false},
      {"laptop", {"notebook", "computer"}, {0.34, 0.24, 0.03}, 0.0, false},
      {"bookcase", {"bookshelf", "shelf"}, {0.9, 0.35, 1.2}, 1.2, true},
      {"monitor", {"screen", "display"}, {0.55, 0.2, 0.4}, 0.0, false},
      {"vase", {"urn", "jar"}, {0.15, 0.15, 0.3}, 0.0, false},
      {"plant", {"fern", "shrub"}, {0.3, 0.3, 0.45}, 0.0, false},
      {"book", {"novel", "volume"}, {0.2, 0.15, 0.04}, 0.0, false},
      {"bowl", {"basin"}, {0.2, 0.2, 0.08}, 0.0, false},
      {"nightstand", {"endtable"}, {0.5, 0.4, 0.6}, 0.6, true},
      {"keyboard", {"keypad"}, {0.45, 0.15, 0.03}, 0.0, false},
      {"clock", {"timepiece"}, {0.25, 0.1, 0.25}, 0.0, false},
      {"bed", {"cot", "bunk"}, {1.6, 2.0, 0.5}, 0.0, true},
      {"notepad", {"pad", "jotter"}, {0.15, 0.21, 0.01}, 0.0, false},
      {"cabinet", {"cupboard", "dresser"}, {0.8, 0.45, 0.9}, 0.9, true},
  };
  return catalog;
}

inline const std::vector<std::string>& synthetic_attributes() {
  static const std::vector<std::string> pool{"red",   "blue",    "green", "black",  "white",
                                             "wooden", "metal",  "glass", "leather", "brown",
                                             "gray",  "silver",  "yellow", "modern", "antique"};
  return pool;
}

struct SyntheticCorpus {
  ModelDatabase db;
  Corpus corpus;
  std::vector<SceneTemplate> gold;              // aligned with corpus.descriptions()
  std::map<std::string, std::string> attribute; // model id -> descriptive attribute
  Lexicon lexicon;
};

namespace detail {

inline std::string with_article(const std::string& phrase) {
  static const std::string vowels = "aeiou";
  return (vowels.find(phrase.front()) != std::string::npos ? "an " : "a ") + phrase;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

inline std::string typo(const std::string& word, Rng& rng) {
  if (word.size() < 4) return word + word.back();
  std::string t = word;
  const std::size_t i = 1 + rng.index(word.size() - 2);  // swap i and i+1, never the first letter
  std::swap(t[i], t[std::min(i + 1, t.size() - 1)]);
  if (t == word) t.insert(t.begin() + static_cast<std::ptrdiff_t>(i), t[i]);
  return t;
}

inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
    out += items[i];
  }
  return out;
}

}  // namespace detail

inline void validate(const SyntheticSpec& spec) {
  const int catalog = static_cast<int>(synthetic_catalog().size());
  if (spec.categories < 5 || spec.categories > catalog)
    throw ValidationError("synthetic spec needs between 5 and " + std::to_string(catalog) + " categories");
  if (spec.models < 2 * spec.categories) throw ValidationError("synthetic spec needs at least 2 models per category");
  if (spec.models > 9000) throw ValidationError("synthetic spec supports at most 9000 models");
  if (spec.scenes < 1) throw ValidationError("synthetic spec needs at least one scene");
  if (!(spec.noise >= 0 && spec.noise <= 1)) throw ValidationError("noise must lie in [0, 1]");
  if (spec.min_objects < 1 || spec.max_objects < spec.min_objects)
    throw ValidationError("object count range is empty");
  if (spec.min_descriptions < 1 || spec.max_descriptions < spec.min_descriptions)
    throw ValidationError("description count range is empty");
  if (spec.layout_samples < 1) throw ValidationError("layout_samples must be at least 1");
}

inline SyntheticCorpus gen_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  SyntheticCorpus out;
  Rng rng(seed);
  const auto& catalog = synthetic_catalog();
  std::vector<const CategorySpec*> cats;
  for (int i = 0; i < spec.categories; ++i) cats.push_back(&catalog[static_cast<std::size_t>(i)]);

  // Models: two per category, the remainder dealt round-robin. Ids are
  // opaque numbers so lexicographic order says nothing about the model.
  std::vector<int> per_category(cats.size(), 2);
  for (int r = 0; r < spec.models - 2 * spec.categories; ++r) ++per_category[static_cast<std::size_t>(r) % cats.size()];
  std::vector<int> numbers;
  const int lo = spec.models <= 900 ? 100 : 1000;
  const int hi = spec.models <= 900 ? 999 : 9999;
  for (int n = lo; n <= hi; ++n) numbers.push_back(n);
  rng.shuffle(numbers);
  std::size_t next_number = 0;

  std::map<std::string, std::vector<std::string>> models_by_category;  // popularity order
  for (std::size_t c = 0; c < cats.size(); ++c) {
    std::vector<std::string> attrs = synthetic_attributes();
    rng.shuffle(attrs);
    for (int k = 0; k < per_category[c]; ++k) {
      ModelRecord r;
      r.model_id = "m" + std::to_string(numbers[next_number++]);
      r.category = cats[c]->name;
      auto jitter = [&](double v) { return std::round(v * rng.uniform(0.85, 1.15) * 100.0) / 100.0; };
      r.dims = {jitter(cats[c]->dims.x), jitter(cats[c]->dims.y), jitter(cats[c]->dims.z)};
      r.support_height = cats[c]->support_height > 0 ? r.dims.z : 0.0;
      out.attribute[r.model_id] = attrs[static_cast<std::size_t>(k) % attrs.size()];
      models_by_category[r.category].push_back(r.model_id);
      out.db.add(std::move(r));
    }
  }

  // Within a category, model k is drawn with weight 1/(k+1).
  auto draw_model = [&](const std::string& category) {
    const auto& ids = models_by_category[category];
    double total = 0.0;
    for (std::size_t k = 0; k < ids.size(); ++k) total += 1.0 / static_cast<double>(k + 1);
    double u = rng.uniform() * total;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      u -= 1.0 / static_cast<double>(k + 1);
      if (u < 0) return ids[k];
    }
    return ids.back();
  };

  std::vector<const CategorySpec*> furniture, items;
  for (const auto* c : cats) (c->furniture ? furniture : items).push_back(c);

  LayoutConfig layout;
  layout.num_samples = spec.layout_samples;

  std::vector<Scene> scenes;
  std::vector<Description> descriptions;
  std::vector<SceneTemplate> gold;
  const int width = std::max(4, static_cast<int>(std::to_string(spec.scenes).size()));

  for (int s = 0; s < spec.scenes; ++s) {
    // Plan the scene as a template, then lay it out.
    const int n_objects = spec.min_objects + static_cast<int>(rng.index(static_cast<std::size_t>(spec.max_objects - spec.min_objects + 1)));
    int n_furniture = std::min<int>(n_objects >= 4 ? 1 + static_cast<int>(rng.index(2)) : 1, static_cast<int>(furniture.size()));
    if (items.empty()) n_furniture = std::min<int>(n_objects, static_cast<int>(furniture.size()));
    const int n_items = std::min<int>(n_objects - n_furniture, static_cast<int>(items.size()));

    std::vector<const CategorySpec*> f_pick = furniture, i_pick = items;
    rng.shuffle(f_pick);
    rng.shuffle(i_pick);
    SceneTemplate plan;
    std::vector<const CategorySpec*> object_cats;
    for (int k = 0; k < n_furniture; ++k) object_cats.push_back(f_pick[static_cast<std::size_t>(k)]);
    for (int k = 0; k < n_items; ++k) object_cats.push_back(i_pick[static_cast<std::size_t>(k)]);
    for (std::size_t k = 0; k < object_cats.size(); ++k)
      plan.nodes.push_back({static_cast<int>(k), object_cats[k]->name, draw_model(object_cats[k]->name), {}, 1});
    std::vector<int> supports;
    for (int k = 0; k < n_furniture; ++k)
      if (object_cats[static_cast<std::size_t>(k)]->support_height > 0) supports.push_back(k);
    std::map<int, int> parent;
    for (int k = n_furniture; k < n_furniture + n_items; ++k) {
      if (!supports.empty() && rng.bernoulli(spec.support_rate)) {
        const int p = supports[rng.index(supports.size())];
        parent[k] = p;
        plan.relations.push_back({RelationKind::on, k, p});
      }
    }

    std::string number = std::to_string(s);
    const auto pad = static_cast<std::size_t>(std::max(0, width - static_cast<int>(number.size())));
    const std::string id = "scene_" + std::string(pad, '0') + number;
    layout.seed = derive_rng(seed, static_cast<std::uint64_t>(s) + 0x5ce9e).next();
    layout.scene_id = id;
    const auto laid = synthesize(plan, out.db, layout);
    Scene scene = laid.scene;

    // Descriptions.
    const int n_desc =
        spec.min_descriptions + static_cast<int>(rng.index(static_cast<std::size_t>(spec.max_descriptions - spec.min_descriptions + 1)));
    for (int d = 0; d < n_desc; ++d) {
      const std::size_t n = scene.objects.size();
      std::vector<std::string> word(n);
      std::vector<std::optional<std::string>> attr(n);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& cat = *object_cats[k];
        word[k] = cat.name;
        if (rng.bernoulli(spec.noise)) {
          if (!cat.synonyms.empty() && rng.bernoulli(2.0 / 3.0))
            word[k] = rng.pick(cat.synonyms);
          else
            word[k] = detail::typo(cat.name, rng);
        }
        if (rng.bernoulli(spec.attribute_rate)) attr[k] = out.attribute[scene.objects[k].model_id];
      }
      std::vector<bool> introduced(n, false);
      auto intro = [&](std::size_t k) {
        introduced[k] = true;
        return detail::with_article(attr[k] ? *attr[k] + " " + word[k] : word[k]);
      };
      auto ref = [&](std::size_t k) { return introduced[k] ? "the " + word[k] : intro(k); };

      SceneTemplate g;
      for (std::size_t k = 0; k < n; ++k) {
        TemplateNode node{static_cast<int>(k), scene.objects[k].category, scene.objects[k].model_id, {}, 1};
        if (attr[k]) node.attributes.push_back(*attr[k]);
        g.nodes.push_back(std::move(node));
      }
      std::vector<std::string> sentences;

      // Supports and what rests on them.
      for (int f = 0; f < n_furniture; ++f) {
        std::vector<std::size_t> children;
        for (const auto& [child, p] : parent)
          if (p == f) children.push_back(static_cast<std::size_t>(child));
        if (children.empty()) continue;
        const auto fk = static_cast<std::size_t>(f);
        const int style = static_cast<int>(rng.index(3));
        if (style == 0) {
          sentences.push_back("There is " + intro(fk) + ".");
          sentences.push_back("On it is " + intro(children[0]) + ".");
        } else if (style == 1) {
          sentences.push_back(detail::capitalize(intro(children[0])) + " is on " + ref(fk) + ".");
        } else {
          sentences.push_back("There is " + intro(fk) + ".");
          sentences.push_back("On the " + word[fk] + " is " + intro(children[0]) + ".");
        }
        g.relations.push_back({RelationKind::on, static_cast<int>(children[0]), f});
        for (std::size_t c = 1; c < children.size(); ++c) {
          if (rng.bernoulli(0.5))
            sentences.push_back(detail::capitalize(intro(children[c])) + " is on " + ref(fk) + ".");
          else
            sentences.push_back("On " + ref(fk) + " is " + intro(children[c]) + ".");
          g.relations.push_back({RelationKind::on, static_cast<int>(children[c]), f});
        }
      }

      // Room placement of floor furniture.
      for (int f = 0; f < n_furniture; ++f) {
        const auto fk = static_cast<std::size_t>(f);
        const auto& rec = out.db.at(scene.objects[fk].model_id);
        if (rng.bernoulli(0.3) &&
            relation_satisfied(RelationKind::in_corner, scene.objects[fk], rec, nullptr, nullptr, scene.room_bounds, layout)) {
          sentences.push_back(introduced[fk] ? detail::capitalize(ref(fk)) + " is in the corner of the room."
                                             : "There is " + intro(fk) + " in the corner of the room.");
          g.relations.push_back({RelationKind::in_corner, f, std::nullopt});
        } else if (rng.bernoulli(0.3) && relation_satisfied(RelationKind::in_center, scene.objects[fk], rec, nullptr,
                                                            nullptr, scene.room_bounds, layout)) {
          sentences.push_back("In the middle of the room is " + ref(fk) + ".");
          g.relations.push_back({RelationKind::in_center, f, std::nullopt});
        }
      }

      // Everything still unmentioned: one relational sentence or a list.
      std::vector<std::size_t> rest;
      for (std::size_t k = 0; k < n; ++k)
        if (!introduced[k]) rest.push_back(k);
      rng.shuffle(rest);
      if (rest.size() >= 2 && rng.bernoulli(0.5)) {
        const auto a = rest[0], b = rest[1];
        const auto& ra = out.db.at(scene.objects[a].model_id);
        const auto& rb = out.db.at(scene.objects[b].model_id);
        std::vector<std::pair<RelationKind, std::string>> options;
        const std::pair<RelationKind, std::string> table[] = {
            {RelationKind::next_to, "next to"},        {RelationKind::left_of, "to the left of"},
            {RelationKind::right_of, "to the right of"}, {RelationKind::in_front_of, "in front of"},
            {RelationKind::behind, "behind"}};
        for (const auto& [kind, phrase] : table)
          if (relation_satisfied(kind, scene.objects[a], ra, &scene.objects[b], &rb, scene.room_bounds, layout))
            options.emplace_back(kind, phrase);
        if (!options.empty()) {
          const auto& [kind, phrase] = options[rng.index(options.size())];
          sentences.push_back(detail::capitalize(intro(a)) + " is " + phrase + " " + intro(b) + ".");
          g.relations.push_back({kind, static_cast<int>(a), static_cast<int>(b)});
          rest.erase(rest.begin(), rest.begin() + 2);
        }
      }
      if (!rest.empty()) {
        std::vector<std::string> phrases;
        for (auto k : rest) phrases.push_back(intro(k));
        const int style = static_cast<int>(rng.index(3));
        const std::string head = style == 0 ? "There is " : style == 1 ? "The room has " : "I see ";
        sentences.push_back(head + detail::join_list(phrases) + ".");
      }

      std::string text;
      for (const auto& sentence : sentences) text += (text.empty() ? "" : " ") + sentence;
      descriptions.push_back({scene.scene_id, text, DescriptionSource::synthetic});
      gold.push_back(std::move(g));
    }
    scenes.push_back(std::move(scene));
  }

  out.corpus = Corpus(std::move(scenes), std::move(descriptions));
  out.gold = std::move(gold);

  out.lexicon = Lexicon::defaults();
  out.lexicon.add_database(out.db);
  for (const auto* c : cats)
    for (const auto& syn : c->synonyms) out.lexicon.physical.insert(syn);
  for (const auto& a : synthetic_attributes())
    if (!out.lexicon.physical.count(a)) out.lexicon.adjectives.insert(a);
  return out;
}

// gold_templates.json: [{ "descriptionId": str, "template": template.json }]
inline json gold_templates_to_json(const Corpus& corpus, const std::vector<SceneTemplate>& gold) {
  json out = json::array();
  for (std::size_t i = 0; i < gold.size(); ++i)
    out.push_back({{"descriptionId", corpus.description_id(i)}, {"template", template_to_json(gold[i])}});
  return out;
}

inline std::map<std::string, SceneTemplate> gold_templates_from_json(const json& j,
                                                                     const std::string& origin = "gold_templates.json") {
  detail::require_array(j, origin);
  std::map<std::string, SceneTemplate> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + " record " + std::to_string(i);
    out[detail::field<std::string>(j[i], "descriptionId", where)] =
        template_from_json(detail::field<json>(j[i], "template", where), where);
  }
  return out;
}

inline void save_synthetic(const SyntheticCorpus& s, const std::filesystem::path& dir) {
  detail::write_file(dir / "models.json", model_db_to_json(s.db).dump(1) + "\n");
  save_corpus(s.corpus, dir);
  detail::write_file(dir / "gold_templates.json", gold_templates_to_json(s.corpus, s.gold).dump(1) + "\n");
  detail::write_file(dir / "lexicon.json", lexicon_to_json(s.lexicon).dump(1) + "\n");
}

}  // namespace sceneforge
