#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sceneforge/common.hpp"

namespace sceneforge {

using json = nlohmann::json;

struct ModelRecord {
  std::string model_id;
  std::string category;
  Vec3 dims;  // width (x), depth (y), height (z) in meters
  bool is_room = false;
  double support_height = 0.0;

  friend bool operator==(const ModelRecord&, const ModelRecord&) = default;
};

class ModelDatabase {
 public:
  ModelDatabase() = default;

  explicit ModelDatabase(std::vector<ModelRecord> records) {
    for (auto& r : records) add(std::move(r));
  }

  void add(ModelRecord record) {
    if (record.model_id.empty()) throw ValidationError("model record with empty id");
    if (record.category.empty())
      throw ValidationError("model '" + record.model_id + "' has an empty category");
    if (!(record.dims.x > 0 && record.dims.y > 0 && record.dims.z > 0))
      throw ValidationError("model '" + record.model_id + "' has non-positive dims");
    if (by_id_.count(record.model_id))
      throw ValidationError("duplicate model id '" + record.model_id + "'");
    by_id_.emplace(record.model_id, records_.size());
    auto& ids = category_index_[record.category];
    ids.insert(std::lower_bound(ids.begin(), ids.end(), record.model_id), record.model_id);
    records_.push_back(std::move(record));
  }

  const ModelRecord* find(const std::string& model_id) const {
    auto it = by_id_.find(model_id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  const ModelRecord& at(const std::string& model_id) const {
    if (const auto* r = find(model_id)) return *r;
    throw ValidationError("unknown model id '" + model_id + "'");
  }

  // Model ids of a category in lexicographic order; empty if unknown.
  const std::vector<std::string>& models_of(const std::string& category) const {
    static const std::vector<std::string> kEmpty;
    auto it = category_index_.find(category);
    return it == category_index_.end() ? kEmpty : it->second;
  }

  bool has_category(const std::string& category) const {
    return category_index_.count(category) > 0;
  }

  // All model ids in lexicographic order.
  std::vector<std::string> all_model_ids() const {
    std::vector<std::string> ids;
    ids.reserve(records_.size());
    for (const auto& r : records_) ids.push_back(r.model_id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  const std::vector<ModelRecord>& records() const { return records_; }
  const std::map<std::string, std::vector<std::string>>& category_index() const {
    return category_index_;
  }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<ModelRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::string>> category_index_;
};

// Database spelling of a category term; exact match first, then
// case-insensitive. Unknown terms are returned unchanged.
inline std::string resolve_category(const ModelDatabase& db, const std::string& term) {
  if (db.has_category(term)) return term;
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  const auto needle = lower(term);
  for (const auto& [category, ids] : db.category_index())
    if (lower(category) == needle) return category;
  return term;
}

struct SceneObject {
  std::string model_id;
  std::string category;
  Vec3 position;  // footprint center in x/y, base in z
  double yaw = 0.0;
  double scale = 1.0;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  std::string scene_id;
  std::vector<SceneObject> objects;
  Box3 room_bounds{{0, 0, 0}, {4, 4, 2.5}};

  friend bool operator==(const Scene&, const Scene&) = default;
};

enum class DescriptionSource { seed, worker, synthetic };

struct Description {
  std::string scene_id;
  std::string text;
  DescriptionSource source = DescriptionSource::worker;

  friend bool operator==(const Description&, const Description&) = default;
};

inline std::string to_string(DescriptionSource s) {
  switch (s) {
    case DescriptionSource::seed: return "seed";
    case DescriptionSource::worker: return "worker";
    case DescriptionSource::synthetic: return "synthetic";
  }
  return "worker";
}

inline DescriptionSource parse_description_source(const std::string& s) {
  if (s == "seed") return DescriptionSource::seed;
  if (s == "worker") return DescriptionSource::worker;
  if (s == "synthetic") return DescriptionSource::synthetic;
  throw SchemaError("unknown description source '" + s + "'");
}

// Scenes keyed by id plus the descriptions that refer to them. Descriptions
// keep file order; description ids are "<sceneId>:<n>" where n counts the
// scene's descriptions in that order.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::vector<Scene> scenes, std::vector<Description> descriptions) {
    for (auto& s : scenes) {
      if (scene_index_.count(s.scene_id))
        throw ValidationError("duplicate scene id '" + s.scene_id + "'");
      for (const auto& o : s.objects) {
        if (!(o.scale > 0))
          throw ValidationError("scene '" + s.scene_id + "' has an object with non-positive scale");
        if (!s.room_bounds.contains(o.position))
          throw ValidationError("scene '" + s.scene_id + "' has an object outside the room");
      }
      scene_index_.emplace(s.scene_id, scenes_.size());
      scenes_.push_back(std::move(s));
    }
    by_scene_.resize(scenes_.size());
    std::vector<std::string> dangling;
    for (auto& d : descriptions) {
      if (d.text.empty()) throw ValidationError("description for '" + d.scene_id + "' has empty text");
      auto it = scene_index_.find(d.scene_id);
      if (it == scene_index_.end()) {
        if (std::find(dangling.begin(), dangling.end(), d.scene_id) == dangling.end())
          dangling.push_back(d.scene_id);
        continue;
      }
      auto& list = by_scene_[it->second];
      ids_.push_back(d.scene_id + ":" + std::to_string(list.size()));
      list.push_back(descriptions_.size());
      descriptions_.push_back(std::move(d));
    }
    if (!dangling.empty()) {
      std::string msg = "descriptions reference missing scenes:";
      for (const auto& id : dangling) msg += " " + id;
      throw ValidationError(msg);
    }
  }

  const std::vector<Scene>& scenes() const { return scenes_; }
  const std::vector<Description>& descriptions() const { return descriptions_; }
  const std::string& description_id(std::size_t i) const { return ids_.at(i); }

  const Scene* find_scene(const std::string& id) const {
    auto it = scene_index_.find(id);
    return it == scene_index_.end() ? nullptr : &scenes_[it->second];
  }
  std::size_t scene_position(const std::string& id) const { return scene_index_.at(id); }

  // Indices into descriptions() for the scene at position i.
  const std::vector<std::size_t>& descriptions_of(std::size_t scene_pos) const {
    return by_scene_.at(scene_pos);
  }

  std::size_t scene_count() const { return scenes_.size(); }
  std::size_t description_count() const { return descriptions_.size(); }

 private:
  std::vector<Scene> scenes_;
  std::unordered_map<std::string, std::size_t> scene_index_;
  std::vector<Description> descriptions_;
  std::vector<std::string> ids_;
  std::vector<std::vector<std::size_t>> by_scene_;
};

// ---------------------------------------------------------------------------
// JSON I/O

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  out << content;
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
    throw SchemaError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where + ": field '" + std::string(key) + "' has the wrong type");
  }
}

inline Vec3 vec3_field(const json& j, const char* key, const std::string& where) {
  auto v = field<std::vector<double>>(j, key, where);
  if (v.size() != 3) throw SchemaError(where + ": field '" + std::string(key) + "' must have 3 numbers");
  return {v[0], v[1], v[2]};
}

inline json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline void require_array(const json& j, const std::string& origin) {
  if (!j.is_array()) throw SchemaError(origin + ": top-level value must be an array");
}

}  // namespace detail

inline json model_db_to_json(const ModelDatabase& db) {
  json out = json::array();
  for (const auto& r : db.records()) {
    out.push_back({{"id", r.model_id},
                   {"category", r.category},
                   {"dims", detail::vec3_json(r.dims)},
                   {"isRoom", r.is_room},
                   {"supportHeight", r.support_height}});
  }
  return out;
}

inline ModelDatabase model_db_from_json(const json& j, const std::string& origin = "models.json") {
  detail::require_array(j, origin);
  ModelDatabase db;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + " record " + std::to_string(i);
    const auto& e = j[i];
    ModelRecord r;
    r.model_id = detail::field<std::string>(e, "id", where);
    r.category = detail::field<std::string>(e, "category", where);
    r.dims = detail::vec3_field(e, "dims", where);
    r.is_room = e.contains("isRoom") ? detail::field<bool>(e, "isRoom", where) : false;
    r.support_height = e.contains("supportHeight") ? detail::field<double>(e, "supportHeight", where) : 0.0;
    db.add(std::move(r));
  }
  return db;
}

inline ModelDatabase load_model_db(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return model_db_from_json(detail::parse_json(text, path.string()), path.string());
}

inline json scene_to_json(const Scene& s) {
  json objects = json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"model", o.model_id},
                       {"category", o.category},
                       {"pos", detail::vec3_json(o.position)},
                       {"yaw", o.yaw},
                       {"scale", o.scale}});
  }
  return {{"id", s.scene_id},
          {"room", {{"min", detail::vec3_json(s.room_bounds.min)}, {"max", detail::vec3_json(s.room_bounds.max)}}},
          {"objects", std::move(objects)}};
}

inline Scene scene_from_json(const json& e, const std::string& where) {
  Scene s;
  s.scene_id = detail::field<std::string>(e, "id", where);
  const auto room = detail::field<json>(e, "room", where);
  s.room_bounds.min = detail::vec3_field(room, "min", where + " room");
  s.room_bounds.max = detail::vec3_field(room, "max", where + " room");
  const auto objects = detail::field<json>(e, "objects", where);
  if (!objects.is_array()) throw SchemaError(where + ": 'objects' must be an array");
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const std::string ow = where + " object " + std::to_string(k);
    SceneObject o;
    o.model_id = detail::field<std::string>(objects[k], "model", ow);
    o.category = detail::field<std::string>(objects[k], "category", ow);
    o.position = detail::vec3_field(objects[k], "pos", ow);
    o.yaw = objects[k].contains("yaw") ? detail::field<double>(objects[k], "yaw", ow) : 0.0;
    o.scale = objects[k].contains("scale") ? detail::field<double>(objects[k], "scale", ow) : 1.0;
    s.objects.push_back(std::move(o));
  }
  return s;
}

inline json scenes_to_json(const std::vector<Scene>& scenes) {
  json out = json::array();
  for (const auto& s : scenes) out.push_back(scene_to_json(s));
  return out;
}

inline std::vector<Scene> scenes_from_json(const json& j, const std::string& origin = "scenes.json") {
  // A single scene object is accepted as a one-element list.
  if (j.is_object()) return {scene_from_json(j, origin)};
  detail::require_array(j, origin);
  std::vector<Scene> scenes;
  for (std::size_t i = 0; i < j.size(); ++i)
    scenes.push_back(scene_from_json(j[i], origin + " record " + std::to_string(i)));
  return scenes;
}

inline std::vector<Scene> load_scenes(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return scenes_from_json(detail::parse_json(text, path.string()), path.string());
}

inline json descriptions_to_json(const std::vector<Description>& ds) {
  json out = json::array();
  for (const auto& d : ds)
    out.push_back({{"sceneId", d.scene_id}, {"text", d.text}, {"source", to_string(d.source)}});
  return out;
}

inline std::vector<Description> descriptions_from_json(const json& j,
                                                       const std::string& origin = "descriptions.json") {
  detail::require_array(j, origin);
  std::vector<Description> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + " record " + std::to_string(i);
    Description d;
    d.scene_id = detail::field<std::string>(j[i], "sceneId", where);
    d.text = detail::field<std::string>(j[i], "text", where);
    d.source = j[i].contains("source") ? parse_description_source(detail::field<std::string>(j[i], "source", where))
                                       : DescriptionSource::worker;
    out.push_back(std::move(d));
  }
  return out;
}

inline Corpus load_corpus(const std::filesystem::path& scenes_path, const std::filesystem::path& descriptions_path) {
  auto scenes = load_scenes(scenes_path);
  const auto text = detail::read_file(descriptions_path);
  auto descriptions = descriptions_from_json(detail::parse_json(text, descriptions_path.string()),
                                             descriptions_path.string());
  return Corpus(std::move(scenes), std::move(descriptions));
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  detail::write_file(dir / "scenes.json", scenes_to_json(corpus.scenes()).dump(1) + "\n");
  detail::write_file(dir / "descriptions.json", descriptions_to_json(corpus.descriptions()).dump(1) + "\n");
}

// Checks that every object names a stored model of the same category.
inline void validate_against(const Corpus& corpus, const ModelDatabase& db) {
  for (const auto& s : corpus.scenes()) {
    for (const auto& o : s.objects) {
      const auto* r = db.find(o.model_id);
      if (!r) throw ValidationError("scene '" + s.scene_id + "' uses unknown model '" + o.model_id + "'");
      if (r->category != o.category)
        throw ValidationError("scene '" + s.scene_id + "' object '" + o.model_id + "' has category '" +
                              o.category + "' but the database says '" + r->category + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Splits

struct SplitRatios {
  double train = 0.70;
  double dev = 0.15;
  double test = 0.15;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Target sizes: dev and test get floor(n * ratio); the remainder goes to train.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& r) {
  auto part = [n](double ratio) { return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9)); };
  const std::size_t dev = part(r.dev);
  const std::size_t test = part(r.test);
  return {n - dev - test, dev, test};
}

namespace detail {

inline Corpus sub_corpus(const Corpus& c, const std::vector<std::size_t>& scene_positions) {
  std::vector<Scene> scenes;
  std::vector<Description> descriptions;
  for (auto pos : scene_positions) {
    scenes.push_back(c.scenes()[pos]);
    for (auto di : c.descriptions_of(pos)) descriptions.push_back(c.descriptions()[di]);
  }
  return Corpus(std::move(scenes), std::move(descriptions));
}

}  // namespace detail

// Partition by scene; every description travels with its scene. Each split
// keeps the original scene order.
inline CorpusSplit split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed,
                                bool allow_empty = false) {
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0))
    throw ValidationError("split ratios must be positive");
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    throw ValidationError("split ratios must sum to 1");
  const std::size_t n = corpus.scene_count();
  if (n < 3 && !allow_empty)
    throw ValidationError("corpus has " + std::to_string(n) + " scenes; at least 3 are needed to fill all splits");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto sizes = split_sizes(n, ratios);
  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(from),
                                  order.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(part.begin(), part.end());
    return detail::sub_corpus(corpus, part);
  };
  return {take(0, sizes[0]), take(sizes[0], sizes[1]), take(sizes[0] + sizes[1], sizes[2])};
}

// ---------------------------------------------------------------------------
// Discrimination sets

struct DiscriminationExample {
  std::size_t description = 0;  // index into Corpus::descriptions()
  std::size_t scene = 0;        // index into Corpus::scenes()
  bool label = false;           // true scene vs distractor

  friend bool operator==(const DiscriminationExample&, const DiscriminationExample&) = default;
};

// One true example followed by k distractors.
struct DiscriminationGroup {
  std::size_t description = 0;
  std::vector<DiscriminationExample> examples;

  friend bool operator==(const DiscriminationGroup&, const DiscriminationGroup&) = default;
};

inline std::vector<DiscriminationGroup> build_discrimination_set(const Corpus& split, std::size_t k,
                                                                 std::uint64_t seed) {
  if (split.description_count() > 0 && k + 1 > split.scene_count())
    throw ValidationError("need at least " + std::to_string(k + 1) + " scenes for " + std::to_string(k) +
                          " distractors, split has " + std::to_string(split.scene_count()));
  std::vector<DiscriminationGroup> groups;
  groups.reserve(split.description_count());
  for (std::size_t d = 0; d < split.description_count(); ++d) {
    const std::size_t truth = split.scene_position(split.descriptions()[d].scene_id);
    DiscriminationGroup g;
    g.description = d;
    g.examples.push_back({d, truth, true});

    std::vector<std::size_t> others;
    others.reserve(split.scene_count() - 1);
    for (std::size_t s = 0; s < split.scene_count(); ++s)
      if (s != truth) others.push_back(s);
    // Partial Fisher-Yates: first k entries are a uniform draw without replacement.
    Rng rng = derive_rng(seed, d);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(others[i], others[i + rng.index(others.size() - i)]);
      g.examples.push_back({d, others[i], false});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace sceneforge
