#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "sceneforge/sceneforge.hpp"

namespace sftest {

using namespace sceneforge;

inline ModelRecord rec(std::string id, std::string cat, Vec3 dims, double support = 0.0) {
  return {std::move(id), std::move(cat), dims, false, support};
}

// Small furnished-office catalog used across suites.
inline ModelDatabase office_db() {
  ModelDatabase db;
  db.add(rec("desk_a", "desk", {1.4, 0.7, 0.75}, 0.75));
  db.add(rec("desk_b", "desk", {1.2, 0.6, 0.72}, 0.72));
  db.add(rec("chair_a", "chair", {0.5, 0.5, 0.9}));
  db.add(rec("chair_b", "chair", {0.45, 0.45, 0.85}));
  db.add(rec("table_a", "table", {1.2, 0.8, 0.74}, 0.74));
  db.add(rec("cup_a", "cup", {0.09, 0.09, 0.1}));
  db.add(rec("lamp_a", "lamp", {0.25, 0.25, 0.5}));
  db.add(rec("couch_red", "couch", {2.0, 0.9, 0.85}));
  db.add(rec("couch_leather", "couch", {2.1, 0.9, 0.8}));
  return db;
}

inline SceneObject obj(std::string model, std::string cat, Vec3 pos) {
  return {std::move(model), std::move(cat), pos, 0.0, 1.0};
}

inline Scene scene(std::string id, std::vector<SceneObject> objects) {
  Scene s;
  s.scene_id = std::move(id);
  s.objects = std::move(objects);
  return s;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sceneforge_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace sftest
