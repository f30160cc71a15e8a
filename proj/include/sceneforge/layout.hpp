#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/scene_template.hpp"

// Scene synthesis by best-of-N sampling: each candidate places every object
// on its support parent (or the floor) at a uniform position with a quarter
// turn yaw, colliding candidates are discarded, and the best scoring one wins.
namespace sceneforge {

struct LayoutConfig {
  int num_samples = 100;
  std::uint64_t seed = 0;
  double collision_tolerance = 0.005;  // m
  Box3 room{{0, 0, 0}, {4, 4, 2.5}};
  double near_threshold = 0.5;    // m, gap for near/next_to
  double corner_threshold = 0.75; // m, distance to each of two walls
  double soft_margin = 0.05;      // m, clearance below which a pair is a soft collision
  std::string scene_id = "generated";

  void validate() const {
    if (num_samples < 1) throw ValidationError("num_samples must be at least 1");
    if (!(collision_tolerance >= 0)) throw ValidationError("collision_tolerance must be non-negative");
    if (!(room.width() > 0 && room.depth() > 0 && room.height() > 0)) throw ValidationError("room must have volume");
  }
};

struct Aabb {
  Vec3 min;
  Vec3 max;
};

// Box of an object after scale and quarter-turn yaw.
inline Aabb object_box(const SceneObject& o, const ModelRecord& r) {
  const bool swap = quarter_turns(o.yaw) % 2 == 1;
  const double w = (swap ? r.dims.y : r.dims.x) * o.scale;
  const double d = (swap ? r.dims.x : r.dims.y) * o.scale;
  const double h = r.dims.z * o.scale;
  return {{o.position.x - w / 2, o.position.y - d / 2, o.position.z},
          {o.position.x + w / 2, o.position.y + d / 2, o.position.z + h}};
}

inline double support_top(const SceneObject& o, const ModelRecord& r) { return o.position.z + r.support_height * o.scale; }

namespace detail {

inline double axis_overlap(double a0, double a1, double b0, double b1) { return std::min(a1, b1) - std::max(a0, b0); }

// a's footprint lies inside b's, within tol.
inline bool footprint_within(const Aabb& a, const Aabb& b, double tol) {
  return a.min.x >= b.min.x - tol && a.max.x <= b.max.x + tol && a.min.y >= b.min.y - tol && a.max.y <= b.max.y + tol;
}

inline bool rests_on(const SceneObject& a, const Aabb& abox, const SceneObject& b, const ModelRecord& brec,
                     const Aabb& bbox, double tol) {
  if (brec.support_height <= 0) return false;
  if (std::abs(a.position.z - support_top(b, brec)) > tol) return false;
  return axis_overlap(abox.min.x, abox.max.x, bbox.min.x, bbox.max.x) > 0 &&
         axis_overlap(abox.min.y, abox.max.y, bbox.min.y, bbox.max.y) > 0;
}

inline double footprint_gap(const Aabb& a, const Aabb& b) {
  const double dx = std::max({0.0, a.min.x - b.max.x, b.min.x - a.max.x});
  const double dy = std::max({0.0, a.min.y - b.max.y, b.min.y - a.max.y});
  return std::hypot(dx, dy);
}

}  // namespace detail

// Pairs (i < j) whose boxes overlap by more than the tolerance on all three
// axes. A pair where one object rests on the other's support surface is exempt.
inline std::vector<std::pair<std::size_t, std::size_t>> check_collision(const std::vector<SceneObject>& objects,
                                                                        const ModelDatabase& db, double tolerance) {
  std::vector<const ModelRecord*> recs;
  std::vector<Aabb> boxes;
  for (const auto& o : objects) {
    recs.push_back(&db.at(o.model_id));
    boxes.push_back(object_box(o, *recs.back()));
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      const auto& a = boxes[i];
      const auto& b = boxes[j];
      const bool overlap = detail::axis_overlap(a.min.x, a.max.x, b.min.x, b.max.x) > tolerance &&
                           detail::axis_overlap(a.min.y, a.max.y, b.min.y, b.max.y) > tolerance &&
                           detail::axis_overlap(a.min.z, a.max.z, b.min.z, b.max.z) > tolerance;
      if (!overlap) continue;
      if (detail::rests_on(objects[i], a, objects[j], *recs[j], b, tolerance) ||
          detail::rests_on(objects[j], b, objects[i], *recs[i], a, tolerance))
        continue;
      out.emplace_back(i, j);
    }
  }
  return out;
}

// Geometric test of one relation. `object` is null for the room.
inline bool relation_satisfied(RelationKind kind, const SceneObject& subj, const ModelRecord& srec,
                               const SceneObject* object, const ModelRecord* orec, const Box3& room,
                               const LayoutConfig& cfg) {
  const Aabb a = object_box(subj, srec);
  const double tol = cfg.collision_tolerance;
  if (!object) {
    switch (kind) {
      case RelationKind::in_corner: {
        const double t = cfg.corner_threshold;
        const bool near_x = a.min.x - room.min.x <= t || room.max.x - a.max.x <= t;
        const bool near_y = a.min.y - room.min.y <= t || room.max.y - a.max.y <= t;
        return near_x && near_y;
      }
      case RelationKind::in_center: {
        const double cx = subj.position.x, cy = subj.position.y;
        return cx >= room.min.x + room.width() / 3 && cx <= room.max.x - room.width() / 3 &&
               cy >= room.min.y + room.depth() / 3 && cy <= room.max.y - room.depth() / 3;
      }
      case RelationKind::on:
        return subj.position.z <= room.min.z + tol;
      default:
        return room.contains(subj.position);
    }
  }
  const Aabb b = object_box(*object, *orec);
  switch (kind) {
    case RelationKind::on:
      return orec->support_height > 0 && std::abs(subj.position.z - support_top(*object, *orec)) <= tol &&
             detail::footprint_within(a, b, tol);
    case RelationKind::under: {
      const bool below = a.max.z <= b.max.z + tol;
      return below && subj.position.x >= b.min.x && subj.position.x <= b.max.x && subj.position.y >= b.min.y &&
             subj.position.y <= b.max.y;
    }
    case RelationKind::inside:
      return detail::footprint_within(a, b, tol) && a.min.z >= b.min.z - tol && a.max.z <= b.max.z + tol;
    case RelationKind::left_of:
      return subj.position.x < object->position.x;
    case RelationKind::right_of:
      return subj.position.x > object->position.x;
    case RelationKind::in_front_of:  // viewer at -y looking toward +y
      return subj.position.y < object->position.y;
    case RelationKind::behind:
      return subj.position.y > object->position.y;
    case RelationKind::near:
    case RelationKind::next_to:
      return detail::footprint_gap(a, b) < cfg.near_threshold;
    case RelationKind::in_corner:
    case RelationKind::in_center:
      return relation_satisfied(kind, subj, srec, nullptr, nullptr, room, cfg);
  }
  return false;
}

// object_nodes[i] is the template node id that scene object i instantiates.
//   score = satisfied/total relations - 0.5 * soft collisions
//           + 0.1 * min(mean nearest-neighbour distance, 1 m)
inline double score_layout(const Scene& scene, const SceneTemplate& tmpl, const ModelDatabase& db,
                           const std::vector<int>& object_nodes, const LayoutConfig& cfg = {}) {
  std::map<int, std::size_t> first;
  for (std::size_t i = 0; i < object_nodes.size() && i < scene.objects.size(); ++i) first.emplace(object_nodes[i], i);
  std::vector<const ModelRecord*> recs;
  std::vector<Aabb> boxes;
  for (const auto& o : scene.objects) {
    recs.push_back(&db.at(o.model_id));
    boxes.push_back(object_box(o, *recs.back()));
  }

  int total = 0, satisfied = 0;
  for (const auto& r : tmpl.relations) {
    auto s = first.find(r.subject);
    if (s == first.end()) continue;
    const SceneObject* obj = nullptr;
    const ModelRecord* orec = nullptr;
    if (r.object) {
      auto o = first.find(*r.object);
      if (o == first.end()) continue;
      obj = &scene.objects[o->second];
      orec = recs[o->second];
    }
    ++total;
    if (relation_satisfied(r.kind, scene.objects[s->second], *recs[s->second], obj, orec, scene.room_bounds, cfg))
      ++satisfied;
  }

  int soft = 0;
  const double m = cfg.soft_margin;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const auto& a = boxes[i];
      const auto& b = boxes[j];
      if (detail::rests_on(scene.objects[i], a, scene.objects[j], *recs[j], b, cfg.collision_tolerance) ||
          detail::rests_on(scene.objects[j], b, scene.objects[i], *recs[i], a, cfg.collision_tolerance))
        continue;
      if (detail::axis_overlap(a.min.x - m, a.max.x + m, b.min.x, b.max.x) > 0 &&
          detail::axis_overlap(a.min.y - m, a.max.y + m, b.min.y, b.max.y) > 0 &&
          detail::axis_overlap(a.min.z, a.max.z, b.min.z, b.max.z) > 0)
        ++soft;
    }
  }

  double spread = 0.0;
  if (scene.objects.size() >= 2) {
    double sum = 0.0;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < scene.objects.size(); ++j) {
        if (i == j) continue;
        nearest = std::min(nearest, std::hypot(scene.objects[i].position.x - scene.objects[j].position.x,
                                               scene.objects[i].position.y - scene.objects[j].position.y));
      }
      sum += nearest;
    }
    spread = std::min(1.0, sum / static_cast<double>(scene.objects.size()));
  }

  const double relation_term = total > 0 ? static_cast<double>(satisfied) / total : 0.0;
  return relation_term - 0.5 * soft + 0.1 * spread;
}

// Node ids of the count-expanded template, in node order.
inline std::vector<int> expanded_node_ids(const SceneTemplate& tmpl) {
  std::vector<int> out;
  for (const auto& n : tmpl.nodes)
    for (int k = 0; k < n.count; ++k) out.push_back(n.node_id);
  return out;
}

inline double score_layout(const Scene& scene, const SceneTemplate& tmpl, const ModelDatabase& db,
                           const LayoutConfig& cfg = {}) {
  return score_layout(scene, tmpl, db, expanded_node_ids(tmpl), cfg);
}

struct LayoutResult {
  Scene scene;
  std::vector<int> object_nodes;  // template node id per scene object
  double score = 0.0;
  bool degraded = false;  // every candidate had a hard collision
  bool any_collision_free = false;
  int chosen_sample = -1;
  std::vector<double> candidate_scores;
  std::vector<std::size_t> candidate_collisions;
  std::vector<std::string> warnings;
};

inline LayoutResult synthesize(const SceneTemplate& tmpl, const ModelDatabase& db, const LayoutConfig& cfg) {
  cfg.validate();
  LayoutResult result;
  result.scene.scene_id = cfg.scene_id;
  result.scene.room_bounds = cfg.room;

  // Count expansion and model resolution.
  struct Instance {
    int node_id;
    const ModelRecord* rec;
    int parent = -1;
    int depth = 0;
  };
  std::vector<Instance> instances;
  std::map<int, int> first_instance;
  for (const auto& n : tmpl.nodes) {
    const ModelRecord* rec = nullptr;
    if (n.model_id) {
      rec = db.find(*n.model_id);
      if (!rec) result.warnings.push_back("node " + std::to_string(n.node_id) + ": unknown model '" + *n.model_id + "'");
    }
    if (!rec) {
      const auto& ids = db.models_of(resolve_category(db, n.category));
      if (!ids.empty()) rec = &db.at(ids.front());
    }
    if (!rec) {
      result.warnings.push_back("node " + std::to_string(n.node_id) + ": no model for category '" + n.category +
                                "', skipped");
      continue;
    }
    first_instance.emplace(n.node_id, static_cast<int>(instances.size()));
    for (int k = 0; k < n.count; ++k) instances.push_back({n.node_id, rec});
  }
  if (instances.empty()) {
    result.any_collision_free = true;
    return result;
  }

  // Support parents from `on` relations; the first relation per child wins
  // and relations that would close a cycle are ignored.
  auto ancestor_of = [&](int candidate, int child) {
    for (int p = candidate; p >= 0; p = instances[static_cast<std::size_t>(p)].parent)
      if (p == child) return true;
    return false;
  };
  for (const auto& r : tmpl.relations) {
    if (r.kind != RelationKind::on || !r.object) continue;
    auto s = first_instance.find(r.subject);
    auto o = first_instance.find(*r.object);
    if (s == first_instance.end() || o == first_instance.end()) continue;
    const int parent = o->second;
    if (instances[static_cast<std::size_t>(parent)].rec->support_height <= 0) continue;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (instances[i].node_id != r.subject || instances[i].parent >= 0) continue;
      if (ancestor_of(parent, static_cast<int>(i))) continue;
      instances[i].parent = parent;
    }
  }
  for (auto& inst : instances) {
    int d = 0;
    for (int p = inst.parent; p >= 0; p = instances[static_cast<std::size_t>(p)].parent) ++d;
    inst.depth = d;
  }
  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return instances[a].depth < instances[b].depth; });

  for (const auto& inst : instances) result.object_nodes.push_back(inst.node_id);

  const Box3& room = cfg.room;
  auto sample = [&](int index) {
    Rng rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(index));
    Scene s;
    s.scene_id = cfg.scene_id;
    s.room_bounds = room;
    s.objects.resize(instances.size());
    for (auto i : order) {
      const auto& inst = instances[i];
      SceneObject o;
      o.model_id = inst.rec->model_id;
      o.category = inst.rec->category;
      o.scale = 1.0;
      const int turns = static_cast<int>(rng.index(4));
      o.yaw = turns * (std::numbers::pi / 2.0);
      const double w = turns % 2 ? inst.rec->dims.y : inst.rec->dims.x;
      const double d = turns % 2 ? inst.rec->dims.x : inst.rec->dims.y;

      double x0 = room.min.x, x1 = room.max.x, y0 = room.min.y, y1 = room.max.y, z = room.min.z;
      if (inst.parent >= 0) {
        const auto& p = s.objects[static_cast<std::size_t>(inst.parent)];
        const auto& prec = *instances[static_cast<std::size_t>(inst.parent)].rec;
        const Aabb pb = object_box(p, prec);
        x0 = pb.min.x, x1 = pb.max.x, y0 = pb.min.y, y1 = pb.max.y;
        z = support_top(p, prec);
      }
      auto coord = [&](double lo, double hi, double extent) {
        return hi - lo > extent ? rng.uniform(lo + extent / 2, hi - extent / 2) : (lo + hi) / 2;
      };
      o.position = {coord(x0, x1, w), coord(y0, y1, d), std::min(z, room.max.z)};
      s.objects[i] = std::move(o);
    }
    return s;
  };

  std::optional<Scene> best_free, best_any;
  double best_free_score = 0.0, best_any_score = 0.0;
  std::size_t best_any_collisions = 0;
  int best_free_index = -1, best_any_index = -1;
  for (int k = 0; k < cfg.num_samples; ++k) {
    Scene cand = sample(k);
    const auto collisions = check_collision(cand.objects, db, cfg.collision_tolerance).size();
    const double score = score_layout(cand, tmpl, db, result.object_nodes, cfg);
    result.candidate_scores.push_back(score);
    result.candidate_collisions.push_back(collisions);
    if (collisions == 0) {
      if (!best_free || score > best_free_score) {
        best_free_score = score;
        best_free_index = k;
        best_free = std::move(cand);
      }
    } else if (!best_free) {
      if (!best_any || collisions < best_any_collisions ||
          (collisions == best_any_collisions && score > best_any_score)) {
        best_any_collisions = collisions;
        best_any_score = score;
        best_any_index = k;
        best_any = std::move(cand);
      }
    }
  }
  if (best_free) {
    result.scene = std::move(*best_free);
    result.score = best_free_score;
    result.chosen_sample = best_free_index;
    result.any_collision_free = true;
  } else {
    result.scene = std::move(*best_any);
    result.score = best_any_score;
    result.chosen_sample = best_any_index;
    result.degraded = true;
    result.warnings.push_back("every sampled layout had a collision; returning the least violating one");
  }
  return result;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Top-down orthographic view: room outline plus labeled object footprints.
inline std::string render_svg(const Scene& scene, const ModelDatabase& db, double pixels_per_meter = 100.0) {
  const Box3& room = scene.room_bounds;
  const double margin = 20.0;
  const double width = room.width() * pixels_per_meter + 2 * margin;
  const double height = room.depth() * pixels_per_meter + 2 * margin;
  auto px = [&](double x) { return margin + (x - room.min.x) * pixels_per_meter; };
  auto py = [&](double y) { return margin + (room.max.y - y) * pixels_per_meter; };  // +y points up
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "  <rect x=\"" << px(room.min.x) << "\" y=\"" << py(room.max.y) << "\" width=\""
      << room.width() * pixels_per_meter << "\" height=\"" << room.depth() * pixels_per_meter
      << "\" fill=\"#f4f1ea\" stroke=\"#333\" stroke-width=\"2\"/>\n";
  // Draw lower objects first so stacked items stay visible.
  std::vector<std::size_t> order(scene.objects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scene.objects[a].position.z < scene.objects[b].position.z;
  });
  for (auto i : order) {
    const auto& o = scene.objects[i];
    const auto* rec = db.find(o.model_id);
    const Vec3 dims = rec ? rec->dims : Vec3{0.3, 0.3, 0.3};
    const ModelRecord fallback{o.model_id, o.category, dims, false, 0.0};
    const Aabb b = object_box(o, rec ? *rec : fallback);
    out << "  <g>\n    <rect x=\"" << px(b.min.x) << "\" y=\"" << py(b.max.y) << "\" width=\""
        << (b.max.x - b.min.x) * pixels_per_meter << "\" height=\"" << (b.max.y - b.min.y) * pixels_per_meter
        << "\" fill=\"#8fb3d9\" fill-opacity=\"0.6\" stroke=\"#1f3b57\"/>\n";
    out << "    <text x=\"" << px(o.position.x) << "\" y=\"" << py(o.position.y)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << xml_escape(o.category) << " (" << xml_escape(o.model_id) << ")</text>\n  </g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace sceneforge
