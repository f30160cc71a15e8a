#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sceneforge/corpus.hpp"

namespace sceneforge {

enum class RelationKind {
  on,
  under,
  left_of,
  right_of,
  in_front_of,
  behind,
  next_to,
  near,
  in_corner,
  in_center,
  inside,
};

inline constexpr std::array<std::pair<RelationKind, std::string_view>, 11> kRelationNames{{
    {RelationKind::on, "on"},
    {RelationKind::under, "under"},
    {RelationKind::left_of, "left_of"},
    {RelationKind::right_of, "right_of"},
    {RelationKind::in_front_of, "in_front_of"},
    {RelationKind::behind, "behind"},
    {RelationKind::next_to, "next_to"},
    {RelationKind::near, "near"},
    {RelationKind::in_corner, "in_corner"},
    {RelationKind::in_center, "in_center"},
    {RelationKind::inside, "inside"},
}};

inline std::string to_string(RelationKind k) {
  for (const auto& [kind, name] : kRelationNames)
    if (kind == k) return std::string(name);
  return "on";
}

inline RelationKind parse_relation_kind(std::string_view s) {
  for (const auto& [kind, name] : kRelationNames)
    if (name == s) return kind;
  throw SchemaError("unknown relation kind '" + std::string(s) + "'");
}

// Relations whose object is always the room itself.
inline bool is_room_relation(RelationKind k) {
  return k == RelationKind::in_corner || k == RelationKind::in_center;
}

// Endpoints are cluster ids in a parse and node ids in a template. An empty
// object means the room.
struct SpatialRelation {
  RelationKind kind = RelationKind::on;
  int subject = 0;
  std::optional<int> object;

  bool targets_room() const { return !object.has_value(); }

  friend bool operator==(const SpatialRelation&, const SpatialRelation&) = default;
  friend auto operator<=>(const SpatialRelation& a, const SpatialRelation& b) {
    return std::tie(a.kind, a.subject, a.object) <=> std::tie(b.kind, b.subject, b.object);
  }
};

struct TemplateNode {
  int node_id = 0;
  std::string category;
  std::optional<std::string> model_id;
  std::vector<std::string> attributes;
  int count = 1;

  friend bool operator==(const TemplateNode&, const TemplateNode&) = default;
};

struct SceneTemplate {
  std::vector<TemplateNode> nodes;
  std::vector<SpatialRelation> relations;

  const TemplateNode* find(int node_id) const {
    for (const auto& n : nodes)
      if (n.node_id == node_id) return &n;
    return nullptr;
  }

  friend bool operator==(const SceneTemplate&, const SceneTemplate&) = default;
};

// Throws ValidationError when node ids repeat, a relation points at a
// missing node, or a count is below 1.
inline void validate_template(const SceneTemplate& t) {
  std::set<int> ids;
  for (const auto& n : t.nodes) {
    if (n.category.empty()) throw ValidationError("template node " + std::to_string(n.node_id) + " has no category");
    if (n.count < 1) throw ValidationError("template node " + std::to_string(n.node_id) + " has count < 1");
    if (!ids.insert(n.node_id).second)
      throw ValidationError("duplicate template node id " + std::to_string(n.node_id));
  }
  for (const auto& r : t.relations) {
    if (!ids.count(r.subject) || (r.object && !ids.count(*r.object)))
      throw ValidationError("template relation references a missing node");
    if (r.object && *r.object == r.subject) throw ValidationError("template relation is reflexive");
  }
}

inline json template_to_json(const SceneTemplate& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"id", n.node_id},
                     {"category", n.category},
                     {"model", n.model_id ? json(*n.model_id) : json(nullptr)},
                     {"attributes", n.attributes},
                     {"count", n.count}});
  }
  json relations = json::array();
  for (const auto& r : t.relations) {
    relations.push_back(
        {{"kind", to_string(r.kind)}, {"subj", r.subject}, {"obj", r.object ? json(*r.object) : json("room")}});
  }
  return {{"nodes", std::move(nodes)}, {"relations", std::move(relations)}};
}

inline SceneTemplate template_from_json(const json& j, const std::string& origin = "template.json") {
  if (!j.is_object()) throw SchemaError(origin + ": template must be an object");
  SceneTemplate t;
  const auto nodes = detail::field<json>(j, "nodes", origin);
  if (!nodes.is_array()) throw SchemaError(origin + ": 'nodes' must be an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = origin + " node " + std::to_string(i);
    TemplateNode n;
    n.node_id = detail::field<int>(nodes[i], "id", where);
    n.category = detail::field<std::string>(nodes[i], "category", where);
    if (nodes[i].contains("model") && !nodes[i]["model"].is_null())
      n.model_id = detail::field<std::string>(nodes[i], "model", where);
    if (nodes[i].contains("attributes"))
      n.attributes = detail::field<std::vector<std::string>>(nodes[i], "attributes", where);
    n.count = nodes[i].contains("count") ? detail::field<int>(nodes[i], "count", where) : 1;
    t.nodes.push_back(std::move(n));
  }
  if (j.contains("relations")) {
    const auto& rels = j["relations"];
    if (!rels.is_array()) throw SchemaError(origin + ": 'relations' must be an array");
    for (std::size_t i = 0; i < rels.size(); ++i) {
      const std::string where = origin + " relation " + std::to_string(i);
      SpatialRelation r;
      r.kind = parse_relation_kind(detail::field<std::string>(rels[i], "kind", where));
      r.subject = detail::field<int>(rels[i], "subj", where);
      const auto obj = detail::field<json>(rels[i], "obj", where);
      if (obj.is_string()) {
        if (obj.get<std::string>() != "room") throw SchemaError(where + ": 'obj' must be an id or \"room\"");
      } else if (obj.is_number_integer()) {
        r.object = obj.get<int>();
      } else {
        throw SchemaError(where + ": 'obj' must be an id or \"room\"");
      }
      t.relations.push_back(r);
    }
  }
  validate_template(t);
  return t;
}

inline SceneTemplate load_template(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return template_from_json(detail::parse_json(text, path.string()), path.string());
}

// Template whose nodes mirror a scene's objects one for one.
inline SceneTemplate template_of_scene(const Scene& scene) {
  SceneTemplate t;
  int id = 0;
  for (const auto& o : scene.objects) t.nodes.push_back({id++, o.category, o.model_id, {}, 1});
  return t;
}

}  // namespace sceneforge
