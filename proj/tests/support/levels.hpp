#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vtools/levels/attempt.hpp"

namespace vtools::testing {

inline std::filesystem::path level_dir() { return VTOOLS_LEVEL_DIR; }
inline std::filesystem::path data_dir() { return VTOOLS_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return VTOOLS_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  return nlohmann::json::parse(read_file(path));
}

inline levels::Action action_from_json(const nlohmann::json& j) {
  return {j.at("tool").get<int>(), Vec2(j.at("x").get<double>(), j.at("y").get<double>())};
}

// Known actions per bundled level: "solving" ones solve noiselessly,
// "halving" ones halve the no-tool goal distance on calibration levels.
inline std::map<std::string, levels::Action> known_actions(const std::string& kind) {
  std::map<std::string, levels::Action> out;
  const auto doc = read_json(fixture_dir() / "solutions.json");
  for (const auto& [name, a] : doc.at(kind).items()) {
    out.emplace(name, action_from_json(a));
  }
  return out;
}

inline void shift_points(nlohmann::json& pts, const Vec2& d) {
  for (auto& p : pts) {
    p[0] = p[0].get<double>() + d.x();
    p[1] = p[1].get<double>() + d.y();
  }
}

// The same level with every position moved by `d`.
inline std::string translated_document(const std::string& document, const Vec2& d) {
  auto doc = nlohmann::json::parse(document);
  auto& bounds = doc["bounds"];
  for (const char* k : {"min", "max"}) {
    bounds[k][0] = bounds[k][0].get<double>() + d.x();
    bounds[k][1] = bounds[k][1].get<double>() + d.y();
  }
  for (auto& b : doc["bodies"]) {
    b["pose"]["x"] = b["pose"]["x"].get<double>() + d.x();
    b["pose"]["y"] = b["pose"]["y"].get<double>() + d.y();
  }
  shift_points(doc["goal"]["region"], d);
  if (doc.contains("prohibited")) {
    for (auto& p : doc["prohibited"]) shift_points(p, d);
  }
  return doc.dump();
}

// Distance from a circle to an axis-aligned rectangle, 0 on contact.
inline double circle_box_distance(const Vec2& c, double r, const Aabb& box) {
  const double dx = std::max({box.min.x() - c.x(), 0.0, c.x() - box.max.x()});
  const double dy = std::max({box.min.y() - c.y(), 0.0, c.y() - box.max.y()});
  return std::max(0.0, std::hypot(dx, dy) - r);
}

inline Aabb polygon_box(const physics::ConvexPolygon& p) {
  Aabb box{p.vertices.front(), p.vertices.front()};
  for (const auto& v : p.vertices) {
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

// Minimum over recorded frames of the distance from any circular goal object
// to the (rectangular) goal region.
inline double frame_min_goal_distance(const levels::LevelSpec& level, const physics::Trajectory& traj) {
  const Aabb region = polygon_box(level.goal_region);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& id : level.goal_object_ids) {
    const auto it = std::find(traj.body_ids.begin(), traj.body_ids.end(), id);
    const auto k = static_cast<std::size_t>(it - traj.body_ids.begin());
    const double r = std::get<physics::Circle>(level.world.find(id)->shape()).radius;
    for (const auto& f : traj.frames) {
      best = std::min(best, circle_box_distance(f.poses[k].position, r, region));
    }
  }
  return best;
}

// Geometric prediction for the calibration levels: the no-tool rest gap d0 and
// the closest gap d1 reachable with the halving action. Returns {d0, d1}.
inline std::pair<double, double> calibration_gaps(const levels::LevelSpec& level) {
  const Aabb region = polygon_box(level.goal_region);
  const auto* ball = level.world.find("ball");
  const double r = std::get<physics::Circle>(ball->shape()).radius;
  if (const auto* wall = level.world.find("wall")) {
    // pushed along the floor, the ball stops at the wall face
    return {region.min.x() - (ball->position.x() + r), region.min.x() - wall->world_bounds().min.x()};
  }
  // knocked off the shelf, the ball rests on the basin floor above the region
  return {circle_box_distance(ball->position, r, region),
          level.world.find("basin_floor")->world_bounds().max.y() - region.max.y()};
}

}  // namespace vtools::testing
