#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "vtools/physics/step.hpp"

namespace vtools::physics {

// Wire format "vtools-trajectory/1":
//   {"format", "dt", "frame_stride", "bodies": [id...],
//    "frames": [[t, x, y, angle, ...per body], ...],
//    "collisions": [[t, id_a, id_b], ...]}
// Poses are those of each body's shape-local origin. Doubles are written with
// the shortest representation that round-trips.
nlohmann::json to_json(const Trajectory& trajectory);

// The terminal world is not part of the wire format and is left empty.
Trajectory trajectory_from_json(const nlohmann::json& doc);

std::string serialize(const Trajectory& trajectory);

}  // namespace vtools::physics
