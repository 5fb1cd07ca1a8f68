#include "vtools/physics/trajectory_io.hpp"

#include <stdexcept>

namespace vtools::physics {

nlohmann::json to_json(const Trajectory& trajectory) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : trajectory.frames) {
    nlohmann::json row = nlohmann::json::array();
    row.push_back(f.time);
    for (const auto& p : f.poses) {
      row.push_back(p.position.x());
      row.push_back(p.position.y());
      row.push_back(p.angle);
    }
    frames.push_back(std::move(row));
  }
  nlohmann::json collisions = nlohmann::json::array();
  for (const auto& c : trajectory.collisions) collisions.push_back({c.time, c.body_a, c.body_b});
  return {
      {"format", "vtools-trajectory/1"},
      {"dt", trajectory.dt},
      {"frame_stride", trajectory.frame_stride},
      {"bodies", trajectory.body_ids},
      {"frames", std::move(frames)},
      {"collisions", std::move(collisions)},
  };
}

Trajectory trajectory_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "vtools-trajectory/1") {
    throw std::invalid_argument("trajectory: unsupported format");
  }
  Trajectory t;
  t.dt = doc.at("dt").get<double>();
  t.frame_stride = doc.at("frame_stride").get<int>();
  t.body_ids = doc.at("bodies").get<std::vector<std::string>>();
  const std::size_t width = 1 + 3 * t.body_ids.size();
  for (const auto& row : doc.at("frames")) {
    if (row.size() != width) throw std::invalid_argument("trajectory: frame has wrong width");
    Frame f;
    f.time = row[0].get<double>();
    for (std::size_t k = 1; k < width; k += 3) {
      f.poses.push_back({Vec2(row[k].get<double>(), row[k + 1].get<double>()), row[k + 2].get<double>()});
    }
    t.frames.push_back(std::move(f));
  }
  for (const auto& c : doc.at("collisions")) {
    t.collisions.push_back({c.at(0).get<double>(), c.at(1).get<std::string>(), c.at(2).get<std::string>()});
  }
  return t;
}

std::string serialize(const Trajectory& trajectory) { return to_json(trajectory).dump(); }

}  // namespace vtools::physics
