#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vtools/physics/world.hpp"

namespace vtools::levels {

inline constexpr std::string_view kLevelFormat = "vtools-level/1";
// Body id given to the placed tool; reserved in level documents.
inline constexpr std::string_view kToolBodyId = "tool";
inline constexpr double kMaxToolExtent = 100.0;

class LevelError : public std::runtime_error {
 public:
  enum class Kind { kSchema, kSemantic };

  LevelError(Kind kind, std::string path, std::string message, std::string source = {})
      : std::runtime_error(compose(source, path, message)),
        kind_(kind),
        path_(std::move(path)),
        message_(std::move(message)) {}

  Kind kind() const { return kind_; }
  // JSON path of the offending field for schema errors, e.g. "bodies[2].shape".
  const std::string& path() const { return path_; }
  const std::string& message() const { return message_; }

 private:
  static std::string compose(const std::string& source, const std::string& path,
                             const std::string& message) {
    std::string out = source.empty() ? "" : source + ": ";
    if (!path.empty()) out += path + ": ";
    return out + message;
  }

  Kind kind_;
  std::string path_;
  std::string message_;
};

// Shape is recentred at load so its local origin is the area centroid;
// placement positions refer to that point.
struct ToolShape {
  std::string name;
  physics::Shape shape;
  physics::Material material;
};

struct MatchedPair {
  std::string group;
  std::string variant;
  std::string delta;  // what differs from the other member of the pair
};

struct LevelSpec {
  std::string name;
  std::string description;
  std::string category = "archetype";  // or "calibration"
  std::optional<MatchedPair> pair;
  physics::World world;  // no tool
  physics::ConvexPolygon goal_region;
  std::vector<std::string> goal_object_ids;
  std::vector<physics::ConvexPolygon> prohibited;
  std::array<ToolShape, 3> tools;
  double time_limit = 120.0;   // seconds of human play per level
  double dwell = 0.5;          // seconds of continuous containment to count as solved
  double time_horizon = 20.0;  // simulated seconds per attempt
  std::string document;        // the exact bytes the level was loaded from

  // Minimum goal distance of the noiseless no-tool rollout, computed at load.
  double baseline = 0.0;

  std::vector<int> movable_indices() const;  // dynamic bodies, world order
};

// Parses and validates a level document. Throws LevelError.
LevelSpec load_level(std::string_view document);
LevelSpec load_level_file(const std::filesystem::path& path);
// Every *.json directly inside `dir`, ordered by file name. Any failure aborts
// the whole load.
std::vector<LevelSpec> load_level_dir(const std::filesystem::path& dir);

// Re-emits the level in the document format (tools in their recentred frame).
nlohmann::json level_to_json(const LevelSpec& level);

// Shape tagged-union codec shared with other documents.
nlohmann::json shape_to_json(const physics::Shape& shape);

}  // namespace vtools::levels
